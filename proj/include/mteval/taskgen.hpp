#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mteval/core.hpp"
#include "mteval/rng.hpp"

namespace mteval {

// Draws the five hypotheses rated per source: two distinct primary engines
// plus one each from the degraded, LLM and human groups.
std::vector<Origin> sample_hypotheses(const std::vector<Origin>& available, Rng& rng);
std::vector<Origin> sample_hypotheses(const std::vector<Origin>& available, std::uint64_t seed);

struct TaskSlot {
    int slot = 0;
    std::string item_id;
    SegmentItem item;
    QcRole qc_role = QcRole::None;
    std::optional<QcQuality> qc_quality;
};

struct TaskFile {
    std::string file_id;
    std::vector<TaskSlot> slots;
};

// Packs regular items into 44-slot files: 40 regular plus one good and one bad
// QC item, each repeated at least 10 slots after its original. A final short
// file keeps the full 4-item QC block. Every regular item appears exactly once.
std::vector<TaskFile> build_task_files(const std::vector<SegmentItem>& items,
                                       const std::vector<SegmentItem>& qc_pool,
                                       std::uint64_t seed);

// JSONL, one slot per line; QC markers travel inside the opaque meta field so
// raters never see them.
std::string task_file_to_jsonl(const TaskFile& file);
TaskFile parse_task_file(std::string_view content, std::string file_id);

inline constexpr int kTaskFileSlots = 44;
inline constexpr int kRegularPerFile = 40;
inline constexpr int kQcRepeatMinGap = 10;

} // namespace mteval
