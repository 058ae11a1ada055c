#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shopeval/catalog.hpp"

namespace shopeval {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual size_t dim() const = 0;
    virtual std::vector<Eigen::VectorXd> embed(const std::vector<std::string>& texts,
                                               size_t max_len = 512) = 0;
    Eigen::VectorXd embed_one(const std::string& text, size_t max_len = 512);
};

// Rows are L2-normalized item vectors aligned with `ids` (catalog id order).
struct ItemMatrix {
    std::vector<std::string> ids;
    Eigen::MatrixXd vectors;  // n x d

    size_t size() const { return ids.size(); }
    size_t dim() const { return static_cast<size_t>(vectors.cols()); }
    size_t index_of(const std::string& item_id) const;
    Eigen::VectorXd row(size_t i) const { return vectors.row(static_cast<long>(i)); }
};

struct ScoreEntry {
    std::string item_id;
    double raw_score = 0.0;
    double norm_score = 0.0;
};

struct ScoreList {
    std::vector<ScoreEntry> entries;  // descending by raw_score
    bool truncated_to_catalog = false;  // set when k exceeded the item count
};

// Embed every product_text and L2-normalize. Throws if the provider emits a
// zero vector or the wrong count.
ItemMatrix embed_items(const Catalog& catalog, EmbeddingProvider& provider);

// Exact dense top-k by inner product; ties broken by ascending item_id.
// norm_score is computed over the returned list.
ScoreList cosine_topk(const Eigen::VectorXd& query_vec, const ItemMatrix& matrix, size_t k);

// max(0, (s - mean) / (max - mean + 1e-8)), elementwise over the list.
std::vector<double> normalize_display_scores(const std::vector<double>& raw);

// Hash-based bag-of-token embedder: deterministic, seed-keyed, fixed d.
class TestEmbedder : public EmbeddingProvider {
public:
    explicit TestEmbedder(uint64_t seed, size_t dim = 64) : seed_(seed), dim_(dim) {}
    size_t dim() const override { return dim_; }
    std::vector<Eigen::VectorXd> embed(const std::vector<std::string>& texts,
                                       size_t max_len) override;

private:
    uint64_t seed_;
    size_t dim_;
};

// Client for a web embedding endpoint: POST {base_path}/embed with
// {"texts": [...]} returning {"embeddings": [[...], ...]}.
class RemoteEmbedder : public EmbeddingProvider {
public:
    RemoteEmbedder(std::string host, int port, size_t dim, std::string base_path = "");
    size_t dim() const override { return dim_; }
    std::vector<Eigen::VectorXd> embed(const std::vector<std::string>& texts,
                                       size_t max_len) override;
    void set_batch_size(size_t n) { batch_size_ = n; }

private:
    std::string host_;
    int port_;
    size_t dim_;
    std::string base_path_;
    size_t batch_size_ = 64;
};

void save_item_matrix(const ItemMatrix& matrix, const std::string& path);
ItemMatrix load_item_matrix(const std::string& path);

}  // namespace shopeval
