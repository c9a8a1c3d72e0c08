#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crm/condition.hpp"
#include "crm/dataset.hpp"
#include "crm/matching.hpp"
#include "crm/similarity.hpp"
#include "crm/trace.hpp"

namespace crm {

enum class HallucinationMode { Heuristic, Judge };

struct ScoringConfig {
    double step_threshold = 0.80;    // paired steps below this are Modified
    double answer_threshold = 0.90;  // answers below this are flipped
    double match_floor = 0.30;       // pairs below this are not matched at all
    HallucinationMode hallucination_mode = HallucinationMode::Heuristic;

    // Requires 0 <= match_floor <= step_threshold <= 1 and answer_threshold
    // in [0,1].
    void validate() const;
};

enum class StepStatus { Unchanged, Modified, Disappeared, New };

std::string to_string(StepStatus s);

struct AlignedPair {
    size_t baseline_index = 0;  // position in baseline trace steps
    size_t masked_index = 0;    // position in masked trace steps
    double similarity = 0.0;
};

struct StepAlignment {
    std::vector<AlignedPair> pairs;
    std::vector<StepStatus> baseline_statuses;  // Unchanged/Modified/Disappeared
    std::vector<StepStatus> masked_statuses;    // Unchanged/Modified/New
};

enum class RegionAttribution { Correct, Partial, Incorrect, NotApplicable };

std::string to_string(RegionAttribution r);

// Per-item verdict bundle for one masked condition vs the baseline.
struct ItemAttribution {
    std::string item_id;
    Condition condition = Condition::Specific;
    bool answer_flipped = false;
    double answer_similarity = 0.0;
    bool step_disrupted = false;
    bool hallucinated = false;
    RegionAttribution region_attribution = RegionAttribution::NotApplicable;
    StepAlignment alignment;
    bool refusal = false;           // masked-side CoT refusal
    bool baseline_refusal = false;  // excludes the item from rates
    double gt_step_similarity = 0.0;  // GT-linked pair similarity (0 when N/A)
    std::string backend_id;
    std::vector<std::string> notes;  // e.g. hallucination-unassessable

    bool has_note(const std::string& n) const;
};

// Boundary conventions, pinned: similarity exactly at a threshold counts as
// "same" (Unchanged / not flipped).
StepStatus classify_paired_step(double sim, const ScoringConfig& config);
bool is_answer_flip(double sim, const ScoringConfig& config);

// Maximum-total-similarity one-to-one matching over the full similarity
// matrix, restricted to entries >= match_floor; statuses derived from the
// pairing.
StepAlignment align_steps(const ReasoningTrace& baseline, const ReasoningTrace& masked,
                          SimilarityBackend& backend, const ScoringConfig& config);

// True iff any baseline step is Modified or Disappeared. New masked steps do
// not disrupt on their own.
bool score_step_disruption(const StepAlignment& alignment);

struct AnswerFlip {
    bool flipped = false;
    double similarity = 0.0;
};

AnswerFlip score_answer_flip(const std::string& baseline_answer,
                             const std::string& masked_answer,
                             SimilarityBackend& backend, const ScoringConfig& config);

// Yes/no oracle over a fixed judging prompt; wired to a model client by the
// caller. Throws to signal judge-unavailable.
using JudgeFn = std::function<std::string(const std::string& prompt)>;

struct HallucinationResult {
    bool hallucinated = false;
    bool unassessable = false;
    std::string judge_raw;
};

HallucinationResult detect_hallucination(const StepAlignment& alignment,
                                         const ReasoningTrace& masked,
                                         const std::vector<std::string>& masked_region_terms,
                                         HallucinationMode mode,
                                         const JudgeFn& judge = nullptr);

std::string build_judge_prompt(const std::vector<std::string>& masked_region_terms,
                               const ReasoningTrace& masked);

struct GtLink {
    size_t baseline_index = 0;
    double hint_similarity = 0.0;   // similarity of the step to the hint
    double pair_similarity = 0.0;   // similarity within its aligned pair, 0 if unpaired
};

// Baseline step most similar to the gt hint (ties -> earliest).
std::optional<GtLink> link_gt_step(const ReasoningTrace& baseline,
                                   const std::string& gt_step_hint,
                                   const StepAlignment& alignment,
                                   SimilarityBackend& backend);

RegionAttribution attribute_region(const DatasetItem& item, const ReasoningTrace& baseline,
                                   const ReasoningTrace& masked,
                                   const StepAlignment& alignment, bool step_disrupted,
                                   SimilarityBackend& backend);

// Full per-item contrast of a baseline (trace, answer) against a masked
// (trace, answer).
ItemAttribution score_item(const DatasetItem& item, Condition condition,
                           const std::string& baseline_cot, const std::string& baseline_answer,
                           const std::string& masked_cot, const std::string& masked_answer,
                           SimilarityBackend& backend, const ScoringConfig& config,
                           const RefusalLexicon& lexicon = RefusalLexicon::builtin(),
                           const JudgeFn& judge = nullptr);

}  // namespace crm
