#include "crm/model_client.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "crm/prompts.hpp"
#include "crm/sha256.hpp"

namespace crm {

using nlohmann::json;

void GenerationConfig::validate() const {
    auto in_range = [](double t) { return t >= 0.0 && t <= 2.0; };
    if (!in_range(cot_temperature) || !in_range(answer_temperature))
        throw Error("invalid-argument", "temperatures must lie in [0, 2]");
    if (retry.max_attempts < 1)
        throw Error("invalid-argument", "retry.max_attempts must be >= 1");
}

std::string generation_record_to_json(const GenerationRecord& record) {
    json j;
    j["format_version"] = 1;
    j["item_id"] = record.item_id;
    j["condition"] = to_string(record.condition);
    j["stage"] = to_string(record.stage);
    j["prompt_hash"] = record.prompt_hash;
    j["image_hash"] = record.image_hash;
    j["raw_text"] = record.raw_text;
    j["latency_ms"] = record.latency_ms;
    j["attempt_count"] = record.attempt_count;
    j["provider_metadata"] = record.provider_metadata;
    j["model_name"] = record.model_name;
    j["temperature"] = record.temperature;
    j["max_tokens"] = record.max_tokens;
    return j.dump(2) + "\n";
}

GenerationRecord generation_record_from_json(const std::string& json_text) {
    try {
        json j = json::parse(json_text);
        GenerationRecord r;
        r.item_id = j.at("item_id").get<std::string>();
        r.condition = condition_from_string(j.at("condition").get<std::string>());
        r.stage = stage_from_string(j.at("stage").get<std::string>());
        r.prompt_hash = j.at("prompt_hash").get<std::string>();
        r.image_hash = j.at("image_hash").get<std::string>();
        r.raw_text = j.at("raw_text").get<std::string>();
        r.latency_ms = j.at("latency_ms").get<int64_t>();
        r.attempt_count = j.at("attempt_count").get<int>();
        r.provider_metadata =
            j.at("provider_metadata").get<std::map<std::string, std::string>>();
        r.model_name = j.at("model_name").get<std::string>();
        r.temperature = j.at("temperature").get<double>();
        r.max_tokens = j.at("max_tokens").get<int>();
        return r;
    } catch (const json::exception& e) {
        throw Error("store-corrupt", std::string("bad generation record: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// HttpChatProvider
// ---------------------------------------------------------------------------

namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    std::string rest = url;
    std::string scheme = "http://";
    if (rest.rfind("http://", 0) == 0) {
        rest = rest.substr(7);
    } else if (rest.rfind("https://", 0) == 0) {
        scheme = "https://";
        rest = rest.substr(8);
    }
    size_t slash = rest.find('/');
    std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
    return {scheme + host, path};
}

}  // namespace

HttpChatProvider::HttpChatProvider(const GenerationConfig& config)
    : endpoint_(config.endpoint), timeout_seconds_(config.timeout_seconds) {
    if (endpoint_.empty())
        throw Error("invalid-argument", "http provider requires --endpoint");
    if (const char* key = std::getenv(config.api_key_env.c_str())) api_key_ = key;
}

ProviderReply HttpChatProvider::generate(const ChatRequest& request) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", request.prompt}});
    if (!request.image_ppm.empty()) {
        Image img = decode_ppm(request.image_ppm);
        std::string data_url =
            "data:image/png;base64," + base64_encode(encode_png(img));
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url}}}});
    }
    json body = {{"model", request.model_name},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens},
                 {"messages", json::array({{{"role", "user"}, {"content", content}}})}};

    auto [host, path] = split_endpoint(endpoint_);
    httplib::Client client(host);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_connection_timeout(timeout_seconds_, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res)
        throw ProviderError("provider-unreachable", "no response from " + endpoint_,
                            /*transient=*/true);
    if (res->status == 429)
        throw ProviderError("rate-limited", "provider returned 429", /*transient=*/true);
    if (res->status >= 500)
        throw ProviderError("provider-unreachable",
                            "provider returned " + std::to_string(res->status),
                            /*transient=*/true);
    if (res->status != 200)
        throw ProviderError("provider-unreachable",
                            "provider returned " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 200),
                            /*transient=*/false);
    try {
        json j = json::parse(res->body);
        const auto& choice = j.at("choices").at(0);
        if (choice.contains("finish_reason") &&
            choice["finish_reason"] == "content_filter") {
            throw ProviderError("content-refused", "provider blocked the request",
                                /*transient=*/false);
        }
        ProviderReply reply;
        reply.text = choice.at("message").at("content").get<std::string>();
        reply.metadata["status"] = std::to_string(res->status);
        if (j.contains("model")) reply.metadata["model"] = j["model"].get<std::string>();
        return reply;
    } catch (const ProviderError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProviderError("provider-unreachable",
                            std::string("malformed provider payload: ") + e.what(),
                            /*transient=*/false);
    }
}

// ---------------------------------------------------------------------------
// MockProvider
// ---------------------------------------------------------------------------

MockProvider MockProvider::from_file(const std::filesystem::path& fixture_path) {
    std::ifstream f(fixture_path);
    if (!f) throw Error("file-not-found", fixture_path.string());
    MockProvider provider;
    try {
        json j = json::parse(f);
        for (const auto& entry : j.at("entries")) {
            provider.add_entry(entry.at("image_hash").get<std::string>(),
                               entry.at("prompt_hash").get<std::string>(),
                               entry.at("text").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw Error("malformed-record",
                    fixture_path.string() + ": " + e.what());
    }
    return provider;
}

void MockProvider::add_entry(const std::string& image_hash, const std::string& prompt_hash,
                             const std::string& text) {
    entries_[{image_hash, prompt_hash}] = text;
}

ProviderReply MockProvider::generate(const ChatRequest& request) {
    std::string prompt_hash = sha256_hex(request.prompt);
    auto it = entries_.find({request.image_hash, prompt_hash});
    if (it == entries_.end())
        throw ProviderError("mock-fixture-missing",
                            "no fixture for image " + request.image_hash.substr(0, 12) +
                                " prompt " + prompt_hash.substr(0, 12),
                            /*transient=*/false);
    ProviderReply reply;
    reply.text = it->second;
    reply.metadata["provider"] = "mock";
    return reply;
}

// ---------------------------------------------------------------------------
// TokenBucket
// ---------------------------------------------------------------------------

TokenBucket::TokenBucket(double capacity, double refill_per_second)
    : capacity_(capacity),
      refill_per_second_(refill_per_second),
      tokens_(capacity),
      last_refill_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
    if (refill_per_second_ <= 0.0) return;
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_refill_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * refill_per_second_);
        last_refill_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        double wait_s = (1.0 - tokens_) / refill_per_second_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

// ---------------------------------------------------------------------------
// Stage drivers
// ---------------------------------------------------------------------------

namespace {

GenerationRecord run_with_retries(Provider& provider, const GenerationConfig& config,
                                  ChatRequest request, const std::string& item_id,
                                  Condition condition, GenerationStage stage) {
    config.validate();
    GenerationRecord record;
    record.item_id = item_id;
    record.condition = condition;
    record.stage = stage;
    record.prompt_hash = sha256_hex(request.prompt);
    record.image_hash = request.image_hash;
    record.model_name = request.model_name;
    record.temperature = request.temperature;
    record.max_tokens = request.max_tokens;

    std::mt19937 jitter_rng(std::random_device{}());
    auto start = std::chrono::steady_clock::now();
    for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
        record.attempt_count = attempt;
        try {
            ProviderReply reply = provider.generate(request);
            record.raw_text = reply.text;
            record.provider_metadata = reply.metadata;
            record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
            return record;
        } catch (const ProviderError& e) {
            bool last = attempt == config.retry.max_attempts;
            if (!e.transient() || last) {
                if (e.transient() && last)
                    throw Error(e.code() == "rate-limited" ? "rate-limited"
                                                           : "provider-unreachable",
                                std::string(e.what()) + " (after " +
                                    std::to_string(attempt) + " attempts)");
                throw;
            }
            if (config.retry.backoff_base_ms > 0) {
                int64_t base = int64_t(config.retry.backoff_base_ms) << (attempt - 1);
                int64_t jitter = std::uniform_int_distribution<int64_t>(0, base / 2)(jitter_rng);
                std::this_thread::sleep_for(std::chrono::milliseconds(base + jitter));
            }
        }
    }
    throw Error("provider-unreachable", "retry loop exhausted");  // unreachable
}

}  // namespace

GenerationRecord generate_cot(Provider& provider, const GenerationConfig& config,
                              const std::vector<unsigned char>& image_ppm,
                              const std::string& question, const std::string& item_id,
                              Condition condition) {
    ChatRequest request;
    request.model_name = config.model_name;
    request.prompt = prompts::build_cot_prompt(question);
    request.image_ppm = image_ppm;
    request.image_hash = sha256_hex(std::span<const unsigned char>(image_ppm));
    request.temperature = config.cot_temperature;
    request.max_tokens = config.max_tokens_cot;
    return run_with_retries(provider, config, std::move(request), item_id, condition,
                            GenerationStage::CoT);
}

GenerationRecord generate_answer(Provider& provider, const GenerationConfig& config,
                                 const std::vector<unsigned char>& image_ppm,
                                 const std::string& question, const std::string& item_id,
                                 Condition condition, bool masked) {
    ChatRequest request;
    request.model_name = config.model_name;
    request.prompt = prompts::build_answer_prompt(question, masked);
    request.image_ppm = image_ppm;
    request.image_hash = sha256_hex(std::span<const unsigned char>(image_ppm));
    request.temperature = config.answer_temperature;
    request.max_tokens = config.max_tokens_answer;
    return run_with_retries(provider, config, std::move(request), item_id, condition,
                            GenerationStage::Answer);
}

}  // namespace crm
