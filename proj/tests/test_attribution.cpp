#include <doctest.h>

#include <algorithm>

#include "crm/attribution.hpp"
#include "crm/error.hpp"

using namespace crm;

namespace {

ReasoningTrace trace_of(std::initializer_list<const char*> step_lines) {
    std::string raw;
    int i = 1;
    for (const char* line : step_lines) raw += "VP" + std::to_string(i++) + ": " + line + "\n";
    raw += "Final Conclusion: end.";
    return parse_trace(raw);
}

DatasetItem item_with_hint(const char* hint) {
    DatasetItem item;
    item.id = "t";
    item.image_ref = "t.ppm";
    item.question = "q?";
    item.important_regions = {{0, 0, 2, 2}};
    if (hint) item.gt_step_hint = hint;
    return item;
}

}  // namespace

TEST_CASE("align_steps: identical traces are fully unchanged") {
    LexicalBackend backend;
    ScoringConfig config;
    auto base = trace_of({"a cup pours tea", "a brain fills up", "a bar loads"});
    auto aligned = align_steps(base, base, backend, config);
    REQUIRE(aligned.pairs.size() == 3);
    for (const auto& p : aligned.pairs) CHECK(p.similarity == doctest::Approx(1.0));
    for (auto s : aligned.baseline_statuses) CHECK(s == StepStatus::Unchanged);
    for (auto s : aligned.masked_statuses) CHECK(s == StepStatus::Unchanged);
}

TEST_CASE("align_steps: lone baseline step disappears against an empty trace") {
    LexicalBackend backend;
    ScoringConfig config;
    auto base = trace_of({"a cup pours tea"});
    ReasoningTrace empty = parse_trace("");
    auto aligned = align_steps(base, empty, backend, config);
    CHECK(aligned.pairs.empty());
    REQUIRE(aligned.baseline_statuses.size() == 1);
    CHECK(aligned.baseline_statuses[0] == StepStatus::Disappeared);
}

TEST_CASE("align_steps: unmatched masked steps are New and do not disrupt") {
    LexicalBackend backend;
    ScoringConfig config;
    auto base = trace_of({"a cup pours tea"});
    auto masked = trace_of({"a cup pours tea", "zebra quartz violin"});
    auto aligned = align_steps(base, masked, backend, config);
    REQUIRE(aligned.pairs.size() == 1);
    CHECK(aligned.baseline_statuses[0] == StepStatus::Unchanged);
    CHECK(aligned.masked_statuses[1] == StepStatus::New);
    CHECK_FALSE(score_step_disruption(aligned));
}

TEST_CASE("score_step_disruption: any modified or disappeared step disrupts") {
    StepAlignment alignment;
    alignment.baseline_statuses = {StepStatus::Unchanged, StepStatus::Unchanged};
    CHECK_FALSE(score_step_disruption(alignment));
    alignment.baseline_statuses[1] = StepStatus::Modified;
    CHECK(score_step_disruption(alignment));
    alignment.baseline_statuses = {StepStatus::Disappeared};
    CHECK(score_step_disruption(alignment));
}

TEST_CASE("threshold boundary semantics are pinned") {
    ScoringConfig config;  // step 0.80, answer 0.90
    CHECK(classify_paired_step(0.80, config) == StepStatus::Unchanged);
    CHECK(classify_paired_step(0.80 - 1e-6, config) == StepStatus::Modified);
    CHECK_FALSE(is_answer_flip(0.90, config));
    CHECK(is_answer_flip(0.90 - 1e-6, config));
}

TEST_CASE("threshold monotonicity: raising thresholds never shrinks the flagged sets") {
    LexicalBackend backend;
    auto base = trace_of({"a cup pours tea", "a brain fills", "a bar loads slowly"});
    auto masked = trace_of({"a cup pours coffee", "a brain fills", "loading bar moves"});
    double sims[] = {0.0, 0.3, 0.5, 0.79, 0.8, 0.9, 1.0};
    size_t prev_modified = 0;
    for (double tau : {0.1, 0.5, 0.8, 0.95}) {
        ScoringConfig config;
        config.match_floor = 0.0;  // keep match_floor <= step_threshold in the sweep
        config.step_threshold = tau;
        auto aligned = align_steps(base, masked, backend, config);
        size_t modified = std::count(aligned.baseline_statuses.begin(),
                                     aligned.baseline_statuses.end(), StepStatus::Modified);
        CHECK(modified >= prev_modified);
        prev_modified = modified;
    }
    size_t prev_flips = 0;
    for (double tau : {0.1, 0.5, 0.9, 1.0}) {
        ScoringConfig config;
        config.answer_threshold = tau;
        size_t flips = 0;
        for (double s : sims) flips += is_answer_flip(s, config) ? 1 : 0;
        CHECK(flips >= prev_flips);
        prev_flips = flips;
    }
}

TEST_CASE("status partition adds up") {
    LexicalBackend backend;
    ScoringConfig config;
    auto base = trace_of({"a cup pours tea", "a brain fills", "a bar loads", "extra stuff"});
    auto masked = trace_of({"a cup pours tea", "completely unrelated zebra", "a bar loads"});
    auto aligned = align_steps(base, masked, backend, config);
    size_t unchanged = 0, modified = 0, disappeared = 0;
    for (auto s : aligned.baseline_statuses) {
        if (s == StepStatus::Unchanged) ++unchanged;
        if (s == StepStatus::Modified) ++modified;
        if (s == StepStatus::Disappeared) ++disappeared;
    }
    CHECK(unchanged + modified + disappeared == base.steps.size());
    size_t new_count = 0, masked_matched = 0;
    for (auto s : aligned.masked_statuses) {
        if (s == StepStatus::New) ++new_count;
        else ++masked_matched;
    }
    CHECK(masked_matched + new_count == masked.steps.size());
    CHECK(masked_matched == aligned.pairs.size());
}

TEST_CASE("score_answer_flip examples") {
    LexicalBackend backend;
    ScoringConfig config;
    auto same = score_answer_flip("Tea", "Tea", backend, config);
    CHECK_FALSE(same.flipped);
    CHECK(same.similarity == doctest::Approx(1.0));

    auto flipped = score_answer_flip("Tea", "Creativity", backend, config);
    CHECK(flipped.flipped);
    CHECK(flipped.similarity == 0.0);
}

TEST_CASE("detect_hallucination heuristic") {
    LexicalBackend backend;
    ScoringConfig config;
    auto base = trace_of({"a boy reads a book"});
    auto masked = trace_of({"a boy reads a book", "a panda is using a laptop"});
    auto aligned = align_steps(base, masked, backend, config);
    REQUIRE(aligned.masked_statuses[1] == StepStatus::New);

    auto hit = detect_hallucination(aligned, masked, {"panda"},
                                    HallucinationMode::Heuristic);
    CHECK(hit.hallucinated);
    CHECK_FALSE(hit.unassessable);

    auto miss = detect_hallucination(aligned, masked, {"giraffe"},
                                     HallucinationMode::Heuristic);
    CHECK_FALSE(miss.hallucinated);

    // terms only fire on New/Modified steps, not Unchanged ones
    auto unchanged_only = detect_hallucination(aligned, masked, {"book"},
                                               HallucinationMode::Heuristic);
    CHECK_FALSE(unchanged_only.hallucinated);

    auto empty_terms = detect_hallucination(aligned, masked, {},
                                            HallucinationMode::Heuristic);
    CHECK_FALSE(empty_terms.hallucinated);
    CHECK(empty_terms.unassessable);

    // stemmed matching: plural in the step, singular term
    auto masked2 = trace_of({"two pandas are using laptops"});
    auto aligned2 = align_steps(base, masked2, backend, config);
    auto stemmed = detect_hallucination(aligned2, masked2, {"panda"},
                                        HallucinationMode::Heuristic);
    CHECK(stemmed.hallucinated);
}

TEST_CASE("detect_hallucination judge mode") {
    LexicalBackend backend;
    ScoringConfig config;
    auto base = trace_of({"a boy"});
    auto masked = trace_of({"a panda"});
    auto aligned = align_steps(base, masked, backend, config);

    auto yes = detect_hallucination(aligned, masked, {"panda"}, HallucinationMode::Judge,
                                    [](const std::string& prompt) {
                                        CHECK(prompt.find("panda") != std::string::npos);
                                        return std::string("Yes, it asserts masked content.");
                                    });
    CHECK(yes.hallucinated);
    CHECK(yes.judge_raw.find("Yes") == 0);

    auto no = detect_hallucination(aligned, masked, {"panda"}, HallucinationMode::Judge,
                                   [](const std::string&) { return std::string("No."); });
    CHECK_FALSE(no.hallucinated);

    auto garbled = detect_hallucination(aligned, masked, {"panda"}, HallucinationMode::Judge,
                                        [](const std::string&) { return std::string("?!"); });
    CHECK(garbled.unassessable);

    CHECK_THROWS_AS(detect_hallucination(aligned, masked, {"panda"},
                                         HallucinationMode::Judge, nullptr),
                    Error);
}

TEST_CASE("attribute_region buckets") {
    LexicalBackend backend;
    ScoringConfig config;

    SUBCASE("not applicable without a hint") {
        auto base = trace_of({"a cup pours tea"});
        auto masked = trace_of({"a cup pours tea"});
        auto aligned = align_steps(base, masked, backend, config);
        CHECK(attribute_region(item_with_hint(nullptr), base, masked, aligned, false,
                               backend) == RegionAttribution::NotApplicable);
    }

    SUBCASE("correct: only the GT-linked VP step is disrupted") {
        auto base = trace_of({"a glass cup pours brown tea", "a loading bar fills",
                              "the poster background is plain"});
        auto masked = trace_of({"a black rectangle hides the glass cup spot",
                                "a loading bar fills", "the poster background is plain"});
        auto aligned = align_steps(base, masked, backend, config);
        bool disrupted = score_step_disruption(aligned);
        REQUIRE(disrupted);
        CHECK(attribute_region(item_with_hint("a glass cup pouring brown tea"), base,
                               masked, aligned, disrupted,
                               backend) == RegionAttribution::Correct);
    }

    SUBCASE("partial: GT step disrupted along with another VP step") {
        auto base = trace_of({"a glass cup pours brown tea", "a loading bar fills",
                              "the poster background is plain"});
        auto masked = trace_of({"zebra quartz violin", "nebula crater orbit",
                                "the poster background is plain"});
        auto aligned = align_steps(base, masked, backend, config);
        CHECK(attribute_region(item_with_hint("a glass cup pouring brown tea"), base,
                               masked, aligned, true,
                               backend) == RegionAttribution::Partial);
    }

    SUBCASE("incorrect: GT step untouched while masking disrupted something else") {
        auto base = trace_of({"a glass cup pours brown tea", "a loading bar fills"});
        auto masked = trace_of({"a glass cup pours brown tea", "unrelated zebra quartz"});
        auto aligned = align_steps(base, masked, backend, config);
        bool disrupted = score_step_disruption(aligned);
        REQUIRE(disrupted);
        CHECK(attribute_region(item_with_hint("a glass cup pouring brown tea"), base,
                               masked, aligned, disrupted,
                               backend) == RegionAttribution::Incorrect);
    }

    SUBCASE("incorrect: masking disrupted nothing") {
        auto base = trace_of({"a glass cup pours brown tea"});
        auto aligned = align_steps(base, base, backend, config);
        CHECK(attribute_region(item_with_hint("a glass cup pouring brown tea"), base, base,
                               aligned, false, backend) == RegionAttribution::Incorrect);
    }

    SUBCASE("partial: GT step unchanged but its pair dropped a masked term") {
        // paired above the step threshold, yet the term "tea" vanished
        auto base = trace_of({"a glass cup pours brown tea liquid steadily today"});
        auto masked = trace_of({"a glass cup pours brown dark liquid steadily today"});
        auto aligned = align_steps(base, masked, backend, config);
        REQUIRE(aligned.pairs.size() == 1);
        REQUIRE(aligned.baseline_statuses[0] == StepStatus::Unchanged);
        CHECK(attribute_region(item_with_hint("brown tea"), base, masked, aligned, false,
                               backend) == RegionAttribution::Partial);
    }
}

TEST_CASE("score_item: refusal forces disrupted and not hallucinated") {
    LexicalBackend backend;
    ScoringConfig config;
    DatasetItem item = item_with_hint("a panda using a laptop");
    std::string base_cot = "- VP1: a panda is using a laptop on the couch.\n"
                           "Final Conclusion: a panda.";
    std::string masked_cot = "I cannot determine what sits on the couch.";
    auto attribution = score_item(item, Condition::Specific, base_cot, "a panda",
                                  masked_cot, "unclear", backend, config);
    CHECK(attribution.refusal);
    CHECK(attribution.step_disrupted);
    CHECK_FALSE(attribution.hallucinated);
    CHECK(attribution.answer_flipped);
    CHECK(attribution.backend_id == "lexical-hash-v1");
}

TEST_CASE("score_item: baseline refusal is flagged for exclusion") {
    LexicalBackend backend;
    ScoringConfig config;
    DatasetItem item = item_with_hint(nullptr);
    auto attribution =
        score_item(item, Condition::Specific, "I cannot see the image clearly.", "none",
                   "- VP1: a thing.\nFinal Conclusion: thing.", "a thing", backend, config);
    CHECK(attribution.baseline_refusal);
    CHECK(attribution.has_note("refusal-on-baseline"));
}

TEST_CASE("score_item: identical generations yield all-false verdicts") {
    LexicalBackend backend;
    ScoringConfig config;
    DatasetItem item = item_with_hint("a cup of tea");
    std::string cot = "- VP1: a cup of tea sits on the table.\nFinal Conclusion: tea.";
    auto attribution = score_item(item, Condition::Random, cot, "tea", cot, "tea", backend,
                                  config);
    CHECK_FALSE(attribution.answer_flipped);
    CHECK_FALSE(attribution.step_disrupted);
    CHECK_FALSE(attribution.hallucinated);
    CHECK(attribution.answer_similarity == doctest::Approx(1.0));
    CHECK(attribution.region_attribution == RegionAttribution::Incorrect);
}
