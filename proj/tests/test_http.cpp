#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "crm/model_client.hpp"
#include "crm/similarity.hpp"

using namespace crm;
using nlohmann::json;

namespace {

// Local chat-completions stand-in; captures the last request body.
struct LocalChatServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    json last_body;
    std::string last_auth;
    std::atomic<int> fail_next{0};

    LocalChatServer() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            if (fail_next.fetch_sub(1) > 0) {
                res.status = 503;
                return;
            }
            last_body = json::parse(req.body);
            last_auth = req.get_header_value("Authorization");
            json reply = {{"model", "local-test"},
                          {"choices",
                           json::array({{{"finish_reason", "stop"},
                                         {"message",
                                          {{"role", "assistant"},
                                           {"content", "- VP1: a box.\nFinal Conclusion: box."}}}}})}};
            res.set_content(reply.dump(), "application/json");
        });
        server.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
            json body = json::parse(req.body);
            json vectors = json::array();
            for (const auto& text : body.at("texts")) {
                // crude 2-d embedding: (len, 1), unnormalized on purpose
                vectors.push_back({double(text.get<std::string>().size()), 1.0});
            }
            res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalChatServer() {
        server.stop();
        thread.join();
    }
};

}  // namespace

TEST_CASE("http chat provider: wire format, auth header, retry on 5xx") {
    LocalChatServer local;
    setenv("CRM_API_KEY", "sekrit", 1);

    GenerationConfig config;
    config.provider = ProviderKind::HttpChat;
    config.endpoint = "http://127.0.0.1:" + std::to_string(local.port) +
                      "/v1/chat/completions";
    config.model_name = "test-model";
    config.retry.backoff_base_ms = 0;

    HttpChatProvider provider(config);
    auto image = encode_ppm(Image::solid(3, 3, 9, 9, 9));
    GenerationRecord record =
        generate_cot(provider, config, image, "What is in the box?", "item1",
                     Condition::Baseline);
    CHECK(record.raw_text == "- VP1: a box.\nFinal Conclusion: box.");
    CHECK(record.provider_metadata.at("model") == "local-test");

    const json& body = local.last_body;
    CHECK(body.at("model") == "test-model");
    CHECK(body.at("temperature").get<double>() == 0.2);
    CHECK(body.at("max_tokens").get<int>() == 1024);
    const auto& content = body.at("messages").at(0).at("content");
    CHECK(content.at(0).at("type") == "text");
    CHECK(content.at(0).at("text").get<std::string>().find("What is in the box?") !=
          std::string::npos);
    CHECK(content.at(1).at("type") == "image_url");
    std::string url = content.at(1).at("image_url").at("url").get<std::string>();
    CHECK(url.rfind("data:image/png;base64,", 0) == 0);
    CHECK(local.last_auth == "Bearer sekrit");

    // two 503s then success within the default 3 attempts
    local.fail_next = 2;
    GenerationRecord retried =
        generate_answer(provider, config, image, "q?", "item1", Condition::Baseline, false);
    CHECK(retried.attempt_count == 3);
    CHECK(local.last_body.at("temperature").get<double>() == 0.0);

    // exhausting attempts surfaces provider-unreachable
    local.fail_next = 10;
    CHECK_THROWS_AS(
        generate_cot(provider, config, image, "q?", "item1", Condition::Baseline), Error);
    local.fail_next = 0;
}

TEST_CASE("http embedding backend: wire format and client-side normalization") {
    LocalChatServer local;
    HttpEmbeddingBackend backend(
        "http://127.0.0.1:" + std::to_string(local.port) + "/embed", "toy-embedder");
    CHECK(backend.id() == "http:toy-embedder");

    auto vectors = backend.embed({"abc", "abcdef"});
    REQUIRE(vectors.size() == 2);
    for (const auto& v : vectors) {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        CHECK(std::abs(norm - 1.0) < 1e-9);
    }
    // same direction family, so cosine is high but below 1 for different lengths
    double sim = clamped_cosine(vectors[0], vectors[1]);
    CHECK(sim > 0.9);
    CHECK(sim < 1.0);

    HttpEmbeddingBackend dead("http://127.0.0.1:9/embed", "nope", 1);
    CHECK_THROWS_AS(dead.embed({"x"}), Error);
}
