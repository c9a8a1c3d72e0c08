#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "crm/condition.hpp"
#include "crm/image.hpp"

namespace crm {

enum class ProviderKind { HttpChat, Mock };

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_base_ms = 500;  // doubled per attempt, plus jitter
};

struct GenerationConfig {
    ProviderKind provider = ProviderKind::Mock;
    std::string endpoint;  // e.g. http://host:port/v1/chat/completions
    std::string model_name = "mock";
    double cot_temperature = 0.2;
    double answer_temperature = 0.0;
    int max_tokens_cot = 1024;
    int max_tokens_answer = 128;
    int timeout_seconds = 120;
    RetryPolicy retry;
    std::string api_key_env = "CRM_API_KEY";

    void validate() const;  // temperatures must lie in [0,2]
};

struct GenerationRecord {
    std::string item_id;
    Condition condition = Condition::Baseline;
    GenerationStage stage = GenerationStage::CoT;
    std::string prompt_hash;
    std::string image_hash;
    std::string raw_text;
    int64_t latency_ms = 0;
    int attempt_count = 0;
    std::map<std::string, std::string> provider_metadata;
    std::string model_name;
    double temperature = 0.0;
    int max_tokens = 0;
};

std::string generation_record_to_json(const GenerationRecord& record);
GenerationRecord generation_record_from_json(const std::string& json_text);

// One model call. image_ppm is the canonical raster encoding and image_hash
// its content hash; providers put whatever wire encoding they need on top.
struct ChatRequest {
    std::string model_name;
    std::string prompt;
    std::vector<unsigned char> image_ppm;
    std::string image_hash;
    double temperature = 0.0;
    int max_tokens = 0;
};

struct ProviderReply {
    std::string text;
    std::map<std::string, std::string> metadata;
};

// Thrown by providers; transient failures are retried per policy.
class ProviderError : public Error {
public:
    ProviderError(std::string code, const std::string& message, bool transient)
        : Error(std::move(code), message), transient_(transient) {}
    bool transient() const { return transient_; }

private:
    bool transient_;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderReply generate(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

// Chat-completions HTTP client with a base64 PNG image part. Credentials come
// from the configured environment variable as a bearer token.
class HttpChatProvider : public Provider {
public:
    explicit HttpChatProvider(const GenerationConfig& config);
    ProviderReply generate(const ChatRequest& request) override;
    std::string name() const override { return "http-chat"; }

private:
    std::string endpoint_;
    int timeout_seconds_;
    std::string api_key_;
};

// Deterministic offline provider: fixture file maps
// (image_hash, prompt_hash) -> canned text.
class MockProvider : public Provider {
public:
    static MockProvider from_file(const std::filesystem::path& fixture_path);
    void add_entry(const std::string& image_hash, const std::string& prompt_hash,
                   const std::string& text);

    ProviderReply generate(const ChatRequest& request) override;
    std::string name() const override { return "mock"; }

private:
    std::map<std::pair<std::string, std::string>, std::string> entries_;
};

// Blocking token bucket; rate 0 disables limiting.
class TokenBucket {
public:
    TokenBucket(double capacity, double refill_per_second);
    void acquire();

private:
    double capacity_;
    double refill_per_second_;
    double tokens_;
    std::chrono::steady_clock::time_point last_refill_;
    std::mutex mutex_;
};

// Stage drivers: build the stage prompt, call the provider with the stage
// temperature, retry transient failures, and capture the raw reply verbatim.
GenerationRecord generate_cot(Provider& provider, const GenerationConfig& config,
                              const std::vector<unsigned char>& image_ppm,
                              const std::string& question, const std::string& item_id,
                              Condition condition);

GenerationRecord generate_answer(Provider& provider, const GenerationConfig& config,
                                 const std::vector<unsigned char>& image_ppm,
                                 const std::string& question, const std::string& item_id,
                                 Condition condition, bool masked);

}  // namespace crm
