#pragma once

#include <memory>
#include <string>
#include <vector>

namespace crm {

// Text embedding source. Vectors are unit-norm (zero vector for token-free
// text) and fixed-dimension so cosines are comparable across calls.
class SimilarityBackend {
public:
    virtual ~SimilarityBackend() = default;

    virtual std::vector<std::vector<double>> embed(
        const std::vector<std::string>& texts) = 0;

    // Recorded in every attribution so scores are traceable to a backend
    // version.
    virtual std::string id() const = 0;
};

// Deterministic test oracle: feature-hashed token counts, L2-normalized.
// Disjoint vocabularies embed to orthogonal vectors (modulo 64-bit hash
// bucket collisions over the 8192-dim space).
class LexicalBackend : public SimilarityBackend {
public:
    static constexpr size_t kDim = 8192;

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string id() const override { return "lexical-hash-v1"; }
};

// Remote sentence-embedding service speaking the harness wire format:
// request {"texts": [...]}, response {"vectors": [[...], ...]}.
class HttpEmbeddingBackend : public SimilarityBackend {
public:
    HttpEmbeddingBackend(std::string endpoint, std::string model_name,
                         int timeout_seconds = 60);

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string id() const override;

private:
    std::string endpoint_;
    std::string model_name_;
    int timeout_seconds_;
};

// Cosine of the two embeddings, clamped to [0,1].
double similarity(SimilarityBackend& backend, const std::string& a, const std::string& b);

double clamped_cosine(const std::vector<double>& a, const std::vector<double>& b);

std::unique_ptr<SimilarityBackend> make_backend(const std::string& spec);

}  // namespace crm
