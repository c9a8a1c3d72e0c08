#include <doctest.h>

#include <atomic>
#include <filesystem>

#include "crm/cli.hpp"
#include "crm/fixtures.hpp"
#include "crm/pipeline.hpp"

using namespace crm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Counts provider calls; delegates to an inner mock.
class CountingProvider : public Provider {
public:
    explicit CountingProvider(Provider& inner) : inner_(inner) {}
    ProviderReply generate(const ChatRequest& request) override {
        ++calls;
        return inner_.generate(request);
    }
    std::string name() const override { return "counting"; }
    std::atomic<size_t> calls{0};

private:
    Provider& inner_;
};

// Succeeds for the first `budget` calls, then fails permanently — a stand-in
// for a crash mid-run.
class BudgetProvider : public Provider {
public:
    BudgetProvider(Provider& inner, size_t budget) : inner_(inner), budget_(budget) {}
    ProviderReply generate(const ChatRequest& request) override {
        if (spent_.fetch_add(1) >= budget_)
            throw ProviderError("provider-unreachable", "budget exhausted", false);
        return inner_.generate(request);
    }
    std::string name() const override { return "budget"; }

private:
    Provider& inner_;
    size_t budget_;
    std::atomic<size_t> spent_{0};
};

struct Env {
    fs::path dir;
    fixtures::Bundle bundle;
    std::vector<DatasetItem> items;
    MockProvider mock;
    GenerationConfig config;
    RunOptions options;
};

Env make_env(const std::string& name, fixtures::Mode mode = fixtures::Mode::Normal,
             int concurrency = 4) {
    Env env;
    env.dir = fresh_dir(name);
    env.bundle = fixtures::generate_bundle(env.dir / "bundle", mode, 42);
    env.items = load_dataset(env.bundle.dataset_path);
    env.mock = MockProvider::from_file(env.bundle.fixtures_path);
    env.config.retry.backoff_base_ms = 0;
    env.options.concurrency = concurrency;
    env.options.mask_seed = 42;
    return env;
}

}  // namespace

TEST_CASE("derive_item_seed is deterministic and id-sensitive") {
    CHECK(derive_item_seed(42, "a") == derive_item_seed(42, "a"));
    CHECK(derive_item_seed(42, "a") != derive_item_seed(42, "b"));
    CHECK(derive_item_seed(42, "a") != derive_item_seed(43, "a"));
}

TEST_CASE("run_condition executes all stages through the mock provider") {
    Env env = make_env("crm_pipe_run");
    auto store = RunStore::init_run(env.dir / "runs", "demo", env.items,
                                    {Condition::Baseline}, "{}");
    CountingProvider counting(env.mock);
    RunOutcome outcome = run_condition(store, env.bundle.images_dir, Condition::Baseline,
                                       counting, env.config, env.options);
    CHECK(outcome.done == 12);  // 6 items x (cot + answer)
    CHECK(outcome.failed == 0);
    CHECK(counting.calls == 12);
    CHECK(store.manifest().count(WorkStatus::Done) == 12);

    auto record = store.read_generation("brain_loading_tea", Condition::Baseline,
                                        GenerationStage::Answer);
    REQUIRE(record.has_value());
    CHECK(record->raw_text == "Tea");
}

TEST_CASE("cache soundness: a completed run re-issues zero provider calls") {
    Env env = make_env("crm_pipe_cache");
    auto store = RunStore::init_run(env.dir / "runs", "demo", env.items,
                                    {Condition::Baseline, Condition::Specific}, "{}");
    CountingProvider counting(env.mock);
    run_condition(store, env.bundle.images_dir, Condition::Baseline, counting, env.config,
                  env.options);
    run_condition(store, env.bundle.images_dir, Condition::Specific, counting, env.config,
                  env.options);
    size_t first_pass = counting.calls;
    CHECK(first_pass == 24);

    // nothing pending: no work, no calls
    run_condition(store, env.bundle.images_dir, Condition::Baseline, counting, env.config,
                  env.options);
    CHECK(counting.calls == first_pass);

    // a fresh run over the same inputs is served entirely from the cache
    auto rerun = RunStore::init_run(env.dir / "runs", "demo2", env.items,
                                    {Condition::Baseline}, "{}");
    RunOutcome outcome = run_condition(rerun, env.bundle.images_dir, Condition::Baseline,
                                       counting, env.config, env.options);
    CHECK(outcome.done == 12);
    CHECK(outcome.cache_hits == 12);
    CHECK(counting.calls == first_pass);
}

TEST_CASE("crash resume: only failed/pending work is re-issued") {
    Env env = make_env("crm_pipe_crash", fixtures::Mode::Normal, /*concurrency=*/1);
    std::string config_json = "{}";
    auto store = RunStore::init_run(env.dir / "runs", "demo", env.items,
                                    {Condition::Baseline}, config_json);

    // provider dies after 5 successful calls
    CountingProvider counting(env.mock);
    BudgetProvider budget(counting, 5);
    GenerationConfig one_shot = env.config;
    one_shot.retry.max_attempts = 1;
    RunOutcome crashed = run_condition(store, env.bundle.images_dir, Condition::Baseline,
                                       budget, one_shot, env.options);
    CHECK(crashed.done == 5);
    CHECK(crashed.failed > 0);
    size_t done_before = store.manifest().count(WorkStatus::Done);
    CHECK(done_before == 5);

    // resume with a healthy provider: exactly the remaining stages run
    auto reopened = RunStore::open(env.dir / "runs", "demo");
    reopened.resume(config_json);
    CountingProvider counting2(env.mock);
    RunOutcome resumed = run_condition(reopened, env.bundle.images_dir, Condition::Baseline,
                                       counting2, env.config, env.options);
    CHECK(resumed.done == 12 - done_before);
    CHECK(resumed.failed == 0);
    // cached stages (cache_put preceded the crash only for successful calls)
    CHECK(counting2.calls == 12 - done_before);
    CHECK(reopened.manifest().count(WorkStatus::Done) == 12);
}

TEST_CASE("normal-mode bundle: per-item verdicts match the authored scenarios") {
    Env env = make_env("crm_pipe_score");
    auto store = RunStore::init_run(env.dir / "runs", "demo", env.items,
                                    {Condition::Baseline, Condition::Specific,
                                     Condition::Random},
                                    "{}");
    for (Condition c : {Condition::Baseline, Condition::Specific, Condition::Random})
        run_condition(store, env.bundle.images_dir, c, env.mock, env.config, env.options);
    CHECK(store.manifest().count(WorkStatus::Failed) == 0);

    LexicalBackend backend;
    ScoringConfig scoring;
    ScoreOutcome outcome = score_condition(store, store, Condition::Specific, backend,
                                           scoring, RefusalLexicon::builtin());
    CHECK(outcome.problems.empty());
    REQUIRE(outcome.attributions.size() == 6);

    auto find = [&](const std::string& id) -> const ItemAttribution& {
        for (const auto& a : outcome.attributions) {
            if (a.item_id == id) return a;
        }
        FAIL("missing attribution for " << id);
        static ItemAttribution dummy;
        return dummy;
    };

    const auto& tea = find("brain_loading_tea");
    CHECK(tea.answer_flipped);
    CHECK(tea.step_disrupted);
    CHECK_FALSE(tea.hallucinated);
    CHECK_FALSE(tea.refusal);
    CHECK(tea.region_attribution == RegionAttribution::Correct);

    const auto& fish = find("fish_container");
    CHECK(fish.answer_flipped);
    CHECK(fish.step_disrupted);
    CHECK(fish.hallucinated);
    CHECK(fish.region_attribution == RegionAttribution::Partial);

    const auto& panda = find("couch_panda_ad");
    CHECK(panda.answer_flipped);
    CHECK(panda.step_disrupted);
    CHECK_FALSE(panda.hallucinated);
    CHECK(panda.region_attribution == RegionAttribution::Partial);

    const auto& billboard = find("city_billboard");
    CHECK(billboard.refusal);
    CHECK(billboard.step_disrupted);
    CHECK_FALSE(billboard.hallucinated);
    CHECK(billboard.answer_flipped);

    const auto& gnome = find("garden_gnome");
    CHECK_FALSE(gnome.answer_flipped);  // answer recovered despite masking
    CHECK(gnome.step_disrupted);
    CHECK_FALSE(gnome.hallucinated);
    CHECK(gnome.region_attribution == RegionAttribution::Correct);

    const auto& sign = find("road_sign");
    CHECK(sign.region_attribution == RegionAttribution::NotApplicable);
    CHECK(sign.has_note("hallucination-unassessable"));
    CHECK(sign.answer_flipped);

    MetricsSummary summary = aggregate(outcome.attributions);
    CHECK(summary.n == 6);
    CHECK(summary.rates.at("answer_flip").p == doctest::Approx(5.0 / 6.0));
    CHECK(summary.rates.at("step_disruption").p == doctest::Approx(1.0));
    CHECK(summary.rates.at("hallucination").p == doctest::Approx(1.0 / 6.0));
    CHECK(summary.attribution_histogram.at("correct") == 2);
    CHECK(summary.attribution_histogram.at("partial") == 3);
    CHECK(summary.attribution_histogram.at("not-applicable") == 1);
    CHECK(summary.excluded.at("unassessable") == 1);

    // random condition used benign control masks: nothing changes
    ScoreOutcome random_outcome = score_condition(store, store, Condition::Random, backend,
                                                  scoring, RefusalLexicon::builtin());
    MetricsSummary random_summary = aggregate(random_outcome.attributions);
    CHECK(random_summary.rates.at("answer_flip").p == 0.0);
    CHECK(random_summary.rates.at("step_disruption").p == 0.0);
    CHECK(random_summary.rates.at("hallucination").p == 0.0);

    ConditionComparison cmp = compare_conditions(summary, random_summary);
    CHECK(cmp.deltas.at("answer_flip").delta == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("re-scoring a completed run is byte-identical") {
    Env env = make_env("crm_pipe_rescore");
    auto store = RunStore::init_run(env.dir / "runs", "demo", env.items,
                                    {Condition::Baseline, Condition::Specific}, "{}");
    for (Condition c : {Condition::Baseline, Condition::Specific})
        run_condition(store, env.bundle.images_dir, c, env.mock, env.config, env.options);

    LexicalBackend backend;
    ScoringConfig scoring;
    score_condition(store, store, Condition::Specific, backend, scoring,
                    RefusalLexicon::builtin());
    std::map<std::string, std::string> first;
    for (const auto& item : env.items) {
        first[item.id] =
            read_file(store.item_dir(item.id, Condition::Specific) / "attribution.json");
    }
    score_condition(store, store, Condition::Specific, backend, scoring,
                    RefusalLexicon::builtin());
    for (const auto& item : env.items) {
        CHECK(first[item.id] ==
              read_file(store.item_dir(item.id, Condition::Specific) / "attribution.json"));
    }
}

TEST_CASE("score_condition reports missing counterparts") {
    Env env = make_env("crm_pipe_missing");
    auto store = RunStore::init_run(env.dir / "runs", "demo", env.items,
                                    {Condition::Baseline, Condition::Specific}, "{}");
    // only the baseline ran
    run_condition(store, env.bundle.images_dir, Condition::Baseline, env.mock, env.config,
                  env.options);
    LexicalBackend backend;
    ScoringConfig scoring;
    ScoreOutcome outcome = score_condition(store, store, Condition::Specific, backend,
                                           scoring, RefusalLexicon::builtin());
    CHECK(outcome.attributions.empty());
    CHECK(outcome.problems.size() == 6);
    CHECK(outcome.problems[0].code == "missing-counterpart");
}

TEST_CASE("identity and scrambled bundles hit the rate extremes") {
    for (auto [name, mode] : {std::pair{"crm_pipe_identity", fixtures::Mode::Identity},
                              std::pair{"crm_pipe_scrambled", fixtures::Mode::Scrambled}}) {
        Env env = make_env(name, mode);
        auto store = RunStore::init_run(env.dir / "runs", "demo", env.items,
                                        {Condition::Baseline, Condition::Specific}, "{}");
        for (Condition c : {Condition::Baseline, Condition::Specific})
            run_condition(store, env.bundle.images_dir, c, env.mock, env.config,
                          env.options);
        LexicalBackend backend;
        ScoringConfig scoring;
        ScoreOutcome outcome = score_condition(store, store, Condition::Specific, backend,
                                               scoring, RefusalLexicon::builtin());
        MetricsSummary summary = aggregate(outcome.attributions);
        if (mode == fixtures::Mode::Identity) {
            CHECK(summary.rates.at("answer_flip").p == 0.0);
            CHECK(summary.rates.at("step_disruption").p == 0.0);
            CHECK(summary.rates.at("hallucination").p == 0.0);
        } else {
            CHECK(summary.rates.at("step_disruption").p == 1.0);
        }
    }
}
