#include "crm/attribution.hpp"

#include <algorithm>
#include <unordered_set>

#include "crm/error.hpp"
#include "crm/text.hpp"

namespace crm {

std::string to_string(StepStatus s) {
    switch (s) {
        case StepStatus::Unchanged: return "unchanged";
        case StepStatus::Modified: return "modified";
        case StepStatus::Disappeared: return "disappeared";
        case StepStatus::New: return "new";
    }
    return "unchanged";
}

std::string to_string(RegionAttribution r) {
    switch (r) {
        case RegionAttribution::Correct: return "correct";
        case RegionAttribution::Partial: return "partial";
        case RegionAttribution::Incorrect: return "incorrect";
        case RegionAttribution::NotApplicable: return "not-applicable";
    }
    return "not-applicable";
}

bool ItemAttribution::has_note(const std::string& n) const {
    return std::find(notes.begin(), notes.end(), n) != notes.end();
}

void ScoringConfig::validate() const {
    if (!(match_floor >= 0.0 && match_floor <= step_threshold && step_threshold <= 1.0))
        throw Error("invalid-argument",
                    "thresholds must satisfy 0 <= match_floor <= step_threshold <= 1");
    if (!(answer_threshold >= 0.0 && answer_threshold <= 1.0))
        throw Error("invalid-argument", "answer_threshold must lie in [0, 1]");
}

StepStatus classify_paired_step(double sim, const ScoringConfig& config) {
    return sim >= config.step_threshold ? StepStatus::Unchanged : StepStatus::Modified;
}

bool is_answer_flip(double sim, const ScoringConfig& config) {
    return sim < config.answer_threshold;
}

StepAlignment align_steps(const ReasoningTrace& baseline, const ReasoningTrace& masked,
                          SimilarityBackend& backend, const ScoringConfig& config) {
    config.validate();
    const size_t nb = baseline.steps.size();
    const size_t nm = masked.steps.size();
    StepAlignment out;
    out.baseline_statuses.assign(nb, StepStatus::Disappeared);
    out.masked_statuses.assign(nm, StepStatus::New);
    if (nb == 0 || nm == 0) return out;

    // One embedding batch for both traces keeps every vector in the same
    // space regardless of backend batching behavior.
    std::vector<std::string> texts;
    texts.reserve(nb + nm);
    for (const auto& s : baseline.steps) texts.push_back(s.text);
    for (const auto& s : masked.steps) texts.push_back(s.text);
    auto vecs = backend.embed(texts);

    std::vector<std::vector<double>> sim(nb, std::vector<double>(nm, 0.0));
    for (size_t i = 0; i < nb; ++i) {
        for (size_t j = 0; j < nm; ++j) {
            sim[i][j] = clamped_cosine(vecs[i], vecs[nb + j]);
        }
    }

    for (const auto& match : max_weight_matching(sim, config.match_floor)) {
        AlignedPair pair{match.row, match.col, match.weight};
        StepStatus status = classify_paired_step(pair.similarity, config);
        out.baseline_statuses[pair.baseline_index] = status;
        out.masked_statuses[pair.masked_index] = status;
        out.pairs.push_back(pair);
    }
    return out;
}

bool score_step_disruption(const StepAlignment& alignment) {
    return std::any_of(alignment.baseline_statuses.begin(), alignment.baseline_statuses.end(),
                       [](StepStatus s) {
                           return s == StepStatus::Modified || s == StepStatus::Disappeared;
                       });
}

AnswerFlip score_answer_flip(const std::string& baseline_answer,
                             const std::string& masked_answer,
                             SimilarityBackend& backend, const ScoringConfig& config) {
    double sim = similarity(backend, baseline_answer, masked_answer);
    return {is_answer_flip(sim, config), sim};
}

namespace {

bool text_contains_term(const std::string& text_value, const std::string& stemmed_term) {
    for (const auto& tok : text::tokenize(text_value)) {
        if (text::stem(tok) == stemmed_term) return true;
    }
    return false;
}

bool text_contains_any_term(const std::string& text_value,
                            const std::vector<std::string>& stemmed_terms) {
    for (const auto& term : stemmed_terms) {
        if (text_contains_term(text_value, term)) return true;
    }
    return false;
}

}  // namespace

std::string build_judge_prompt(const std::vector<std::string>& masked_region_terms,
                               const ReasoningTrace& masked) {
    std::string prompt =
        "You are auditing the reasoning a vision model produced for an image in "
        "which one region was blacked out.\n"
        "The blacked-out region contained: ";
    for (size_t i = 0; i < masked_region_terms.size(); ++i) {
        if (i > 0) prompt += ", ";
        prompt += masked_region_terms[i];
    }
    prompt += "\nThe model's reasoning steps on the blacked-out image were:\n";
    for (const auto& s : masked.steps) {
        prompt += "- " + to_string(s.tag) + std::to_string(s.index) + ": " + s.text + "\n";
    }
    prompt +=
        "Does the reasoning describe or assert the blacked-out content as if it "
        "were visible? Answer Yes or No.";
    return prompt;
}

HallucinationResult detect_hallucination(const StepAlignment& alignment,
                                         const ReasoningTrace& masked,
                                         const std::vector<std::string>& masked_region_terms,
                                         HallucinationMode mode, const JudgeFn& judge) {
    HallucinationResult result;
    if (mode == HallucinationMode::Judge) {
        if (!judge) throw Error("judge-unavailable", "no judge client configured");
        result.judge_raw = judge(build_judge_prompt(masked_region_terms, masked));
        auto tokens = text::tokenize(result.judge_raw);
        if (!tokens.empty() && tokens.front() == "yes") {
            result.hallucinated = true;
        } else if (!tokens.empty() && tokens.front() == "no") {
            result.hallucinated = false;
        } else {
            result.unassessable = true;
        }
        return result;
    }
    if (masked_region_terms.empty()) {
        result.unassessable = true;
        return result;
    }
    for (size_t j = 0; j < masked.steps.size(); ++j) {
        StepStatus status = alignment.masked_statuses[j];
        if (status != StepStatus::New && status != StepStatus::Modified) continue;
        if (text_contains_any_term(masked.steps[j].text, masked_region_terms)) {
            result.hallucinated = true;
            return result;
        }
    }
    return result;
}

std::optional<GtLink> link_gt_step(const ReasoningTrace& baseline,
                                   const std::string& gt_step_hint,
                                   const StepAlignment& alignment,
                                   SimilarityBackend& backend) {
    if (baseline.steps.empty()) return std::nullopt;
    std::vector<std::string> texts;
    texts.reserve(baseline.steps.size() + 1);
    texts.push_back(gt_step_hint);
    for (const auto& s : baseline.steps) texts.push_back(s.text);
    auto vecs = backend.embed(texts);
    GtLink link;
    double best = -1.0;
    for (size_t i = 0; i < baseline.steps.size(); ++i) {
        double sim = clamped_cosine(vecs[0], vecs[i + 1]);
        if (sim > best) {  // ties -> earliest
            best = sim;
            link.baseline_index = i;
            link.hint_similarity = sim;
        }
    }
    for (const auto& pair : alignment.pairs) {
        if (pair.baseline_index == link.baseline_index) {
            link.pair_similarity = pair.similarity;
            break;
        }
    }
    return link;
}

RegionAttribution attribute_region(const DatasetItem& item, const ReasoningTrace& baseline,
                                   const ReasoningTrace& masked,
                                   const StepAlignment& alignment, bool step_disrupted,
                                   SimilarityBackend& backend) {
    if (!item.gt_step_hint) return RegionAttribution::NotApplicable;
    auto link = link_gt_step(baseline, *item.gt_step_hint, alignment, backend);
    if (!link) return RegionAttribution::NotApplicable;

    auto disrupted = [&](size_t i) {
        StepStatus s = alignment.baseline_statuses[i];
        return s == StepStatus::Modified || s == StepStatus::Disappeared;
    };

    if (disrupted(link->baseline_index)) {
        // Correct requires the masking's effect on VP-tagged steps to be
        // confined to the GT-linked step.
        for (size_t i = 0; i < baseline.steps.size(); ++i) {
            if (i == link->baseline_index) continue;
            if (baseline.steps[i].tag == StepTag::VP && disrupted(i))
                return RegionAttribution::Partial;
        }
        return RegionAttribution::Correct;
    }

    // GT-linked step survived. If its paired counterpart dropped a masked
    // region term, the dependency was partially expressed.
    auto terms = text::content_terms(*item.gt_step_hint);
    for (const auto& pair : alignment.pairs) {
        if (pair.baseline_index != link->baseline_index) continue;
        const std::string& base_text = baseline.steps[pair.baseline_index].text;
        const std::string& masked_text = masked.steps[pair.masked_index].text;
        for (const auto& term : terms) {
            if (text_contains_term(base_text, term) && !text_contains_term(masked_text, term))
                return RegionAttribution::Partial;
        }
    }
    return RegionAttribution::Incorrect;
}

ItemAttribution score_item(const DatasetItem& item, Condition condition,
                           const std::string& baseline_cot, const std::string& baseline_answer,
                           const std::string& masked_cot, const std::string& masked_answer,
                           SimilarityBackend& backend, const ScoringConfig& config,
                           const RefusalLexicon& lexicon, const JudgeFn& judge) {
    ItemAttribution attrib;
    attrib.item_id = item.id;
    attrib.condition = condition;
    attrib.backend_id = backend.id();

    ReasoningTrace base = parse_trace(baseline_cot, lexicon);
    ReasoningTrace masked = parse_trace(masked_cot, lexicon);
    attrib.baseline_refusal = base.refusal;
    attrib.refusal = masked.refusal;
    if (base.refusal) attrib.notes.push_back("refusal-on-baseline");

    attrib.alignment = align_steps(base, masked, backend, config);
    attrib.step_disrupted = score_step_disruption(attrib.alignment);

    AnswerFlip flip = score_answer_flip(baseline_answer, masked_answer, backend, config);
    attrib.answer_flipped = flip.flipped;
    attrib.answer_similarity = flip.similarity;

    std::vector<std::string> terms =
        item.gt_step_hint ? text::content_terms(*item.gt_step_hint) : std::vector<std::string>{};
    HallucinationResult hall = detect_hallucination(attrib.alignment, masked, terms,
                                                    config.hallucination_mode, judge);
    attrib.hallucinated = hall.hallucinated;
    if (hall.unassessable) attrib.notes.push_back("hallucination-unassessable");
    if (!hall.judge_raw.empty()) attrib.notes.push_back("judge:" + hall.judge_raw);

    attrib.region_attribution =
        attribute_region(item, base, masked, attrib.alignment, attrib.step_disrupted, backend);
    if (item.gt_step_hint) {
        if (auto link = link_gt_step(base, *item.gt_step_hint, attrib.alignment, backend))
            attrib.gt_step_similarity = link->pair_similarity;
    }

    // A masked-side refusal is the opposite of hallucinating: the model
    // declined rather than inventing the missing content.
    if (attrib.refusal) {
        attrib.step_disrupted = true;
        attrib.hallucinated = false;
    }
    return attrib;
}

}  // namespace crm
