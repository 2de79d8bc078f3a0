// Compares the serial reference path (jobs = 1) against the OpenMP path for
// the batch kernels: surface-metric scoring, per-pair correlation and
// per-rater standardization. Results must be identical; only time may differ.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mteval/correlate.hpp"
#include "mteval/normalize.hpp"
#include "mteval/rng.hpp"
#include "mteval/surface_metrics.hpp"
#include "test_support.hpp"

using namespace mteval;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class F>
double timed(F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return seconds_since(start);
}

void row(const char* kernel, double serial, double parallel, bool identical) {
    std::printf("%-24s %10.3fs %10.3fs %8.2fx   %s\n", kernel, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0, identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    int jobs = 0; // all hardware threads
    int n_segments = 4000;
    if (argc > 1) jobs = std::atoi(argv[1]);
    if (argc > 2) n_segments = std::atoi(argv[2]);
#ifdef _OPENMP
    std::printf("openmp enabled, max threads %d, using jobs=%d\n", omp_get_max_threads(), jobs);
#else
    std::printf("openmp disabled at build time; both columns run serially\n");
#endif

    Rng rng(1);
    std::vector<FoldedSegment> segments;
    segments.reserve(n_segments);
    const auto& dirs = comtail_directions();
    for (int i = 0; i < n_segments; ++i) {
        FoldedSegment s;
        s.pair = dirs[rng.below(dirs.size())];
        s.source = testsupport::random_sentence(rng, 8, 30, 40);
        s.hypothesis = testsupport::random_sentence(rng, 8, 30, 24);
        s.reference = testsupport::random_sentence(rng, 8, 30, 24);
        s.origin = Origin::Google;
        s.n_ratings = 2;
        s.n_raters = 2;
        s.norm_score = rng.unit();
        segments.push_back(std::move(s));
    }

    // surface metrics
    {
        ScoreOptions serial_opts;
        ScoreOptions par_opts;
        par_opts.jobs = jobs;
        std::vector<ScoreRow> a, b;
        const double ts = timed([&] { a = score_surface(segments, serial_opts); });
        const double tp = timed([&] { b = score_surface(segments, par_opts); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) {
            same = a[i].key == b[i].key && a[i].score == b[i].score;
        }
        row("score-surface", ts, tp, same);
    }

    // per-pair correlation cells
    {
        ScoreTable scores;
        Rng noise(2);
        for (const auto& s : segments) {
            const std::string key = segment_key(s.pair, s.source, s.hypothesis);
            scores["m1"][key] = noise.unit();
            scores["m2"][key] = s.norm_score + 0.05 * noise.unit();
            scores["m3"][key] = 1.0 - s.norm_score;
        }
        CorrelateOptions serial_opts;
        CorrelateOptions par_opts;
        par_opts.jobs = jobs;
        CorrelationReport a, b;
        const double ts = timed([&] { a = correlate(segments, scores, serial_opts); });
        const double tp = timed([&] { b = correlate(segments, scores, par_opts); });
        bool same = a.rows.size() == b.rows.size();
        for (std::size_t i = 0; same && i < a.rows.size(); ++i) {
            for (std::size_t m = 0; same && m < a.metrics.size(); ++m) {
                same = a.rows[i].taus[m] == b.rows[i].taus[m];
            }
        }
        row("correlate", ts, tp, same);
    }

    // per-rater standardization
    {
        testsupport::CorpusSpec spec;
        spec.raters = testsupport::plain_raters(64);
        spec.task_files_per_rater = 40;
        spec.sources = 400;
        const RatingSet rs = testsupport::make_corpus(spec);
        ZScoreOptions serial_opts;
        ZScoreOptions par_opts;
        par_opts.jobs = jobs;
        RatingSet a, b;
        const double ts = timed([&] { a = zscore_by_rater(rs, serial_opts); });
        const double tp = timed([&] { b = zscore_by_rater(rs, par_opts); });
        bool same = a.records.size() == b.records.size();
        for (std::size_t i = 0; same && i < a.records.size(); ++i) {
            same = a.records[i].z == b.records[i].z;
        }
        std::printf("(zscore corpus: %zu records)\n", rs.records.size());
        row("zscore-by-rater", ts, tp, same);
    }

    return 0;
}
