#include "crm/similarity.hpp"

#include <algorithm>
#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "crm/error.hpp"
#include "crm/text.hpp"

namespace crm {

namespace {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void normalize(std::vector<double>& v) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 <= 0.0) return;  // token-free text stays a zero vector
    double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
}

// "host[:port]/path" split for httplib.
std::pair<std::string, std::string> split_url(const std::string& url) {
    std::string rest = url;
    std::string scheme = "http://";
    if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
    else if (rest.rfind("https://", 0) == 0) { scheme = "https://"; rest = rest.substr(8); }
    size_t slash = rest.find('/');
    std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
    return {scheme + host, path};
}

}  // namespace

std::vector<std::vector<double>> LexicalBackend::embed(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        std::vector<double> v(kDim, 0.0);
        for (const auto& tok : text::tokenize(t)) v[fnv1a(tok) % kDim] += 1.0;
        normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(std::string endpoint, std::string model_name,
                                           int timeout_seconds)
    : endpoint_(std::move(endpoint)),
      model_name_(std::move(model_name)),
      timeout_seconds_(timeout_seconds) {}

std::string HttpEmbeddingBackend::id() const {
    return "http:" + model_name_;
}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(
    const std::vector<std::string>& texts) {
    auto [host, path] = split_url(endpoint_);
    httplib::Client client(host);
    client.set_read_timeout(timeout_seconds_, 0);
    nlohmann::json body = {{"texts", texts}, {"model", model_name_}};
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res)
        throw Error("backend-unavailable", "no response from " + endpoint_);
    if (res->status != 200)
        throw Error("backend-unavailable",
                    endpoint_ + " returned status " + std::to_string(res->status));
    try {
        nlohmann::json j = nlohmann::json::parse(res->body);
        auto vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
        if (vectors.size() != texts.size())
            throw Error("backend-unavailable", "embedding count mismatch");
        for (auto& v : vectors) normalize(v);
        return vectors;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("backend-unavailable", std::string("bad embedding payload: ") + e.what());
    }
}

double clamped_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    size_t n = std::min(a.size(), b.size());
    double dot = 0.0;
    for (size_t i = 0; i < n; ++i) dot += a[i] * b[i];
    return std::clamp(dot, 0.0, 1.0);
}

double similarity(SimilarityBackend& backend, const std::string& a, const std::string& b) {
    auto vecs = backend.embed({a, b});
    return clamped_cosine(vecs[0], vecs[1]);
}

std::unique_ptr<SimilarityBackend> make_backend(const std::string& spec) {
    if (spec == "lexical" || spec.empty()) return std::make_unique<LexicalBackend>();
    // "http:<endpoint>[#model]"
    if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0 ||
        spec.rfind("http://", 0) == 0) {
        std::string rest = spec;
        std::string model = "remote";
        size_t hash = rest.find('#');
        if (hash != std::string::npos) {
            model = rest.substr(hash + 1);
            rest = rest.substr(0, hash);
        }
        return std::make_unique<HttpEmbeddingBackend>(rest, model);
    }
    throw Error("backend-unavailable", "unknown backend spec '" + spec + "'");
}

}  // namespace crm
