#include "shopeval/embeddings.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

#include "shopeval/jsonl.hpp"
#include "shopeval/rng.hpp"
#include "shopeval/text.hpp"

namespace shopeval {

Eigen::VectorXd EmbeddingProvider::embed_one(const std::string& text, size_t max_len) {
    return embed({text}, max_len).at(0);
}

size_t ItemMatrix::index_of(const std::string& item_id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), item_id);
    if (it == ids.end() || *it != item_id) throw std::out_of_range("unknown item_id: " + item_id);
    return static_cast<size_t>(it - ids.begin());
}

ItemMatrix embed_items(const Catalog& catalog, EmbeddingProvider& provider) {
    if (catalog.size() == 0) throw std::runtime_error("cannot embed an empty catalog");
    std::vector<std::string> texts;
    texts.reserve(catalog.size());
    for (const auto& item : catalog.items()) texts.push_back(item.product_text);

    const auto vecs = provider.embed(texts);
    if (vecs.size() != texts.size()) {
        throw std::runtime_error("provider returned " + std::to_string(vecs.size()) +
                                 " vectors for " + std::to_string(texts.size()) + " texts");
    }

    ItemMatrix matrix;
    matrix.ids = catalog.ids();
    matrix.vectors.resize(static_cast<long>(vecs.size()), static_cast<long>(provider.dim()));
    for (size_t i = 0; i < vecs.size(); ++i) {
        const double norm = vecs[i].norm();
        if (!(norm > 0.0)) {
            throw std::runtime_error("zero-norm embedding for item " + matrix.ids[i]);
        }
        matrix.vectors.row(static_cast<long>(i)) = vecs[i] / norm;
    }
    return matrix;
}

ScoreList cosine_topk(const Eigen::VectorXd& query_vec, const ItemMatrix& matrix, size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    const size_t n = matrix.size();
    ScoreList out;
    if (k > n) {
        k = n;
        out.truncated_to_catalog = true;
    }

    const Eigen::VectorXd scores = matrix.vectors * query_vec;
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                      [&](size_t a, size_t b) {
                          const double sa = scores(static_cast<long>(a));
                          const double sb = scores(static_cast<long>(b));
                          if (sa != sb) return sa > sb;
                          return matrix.ids[a] < matrix.ids[b];
                      });
    order.resize(k);

    std::vector<double> raw;
    raw.reserve(k);
    for (size_t i : order) raw.push_back(scores(static_cast<long>(i)));
    const std::vector<double> norm = normalize_display_scores(raw);
    for (size_t i = 0; i < k; ++i) {
        out.entries.push_back({matrix.ids[order[i]], raw[i], norm[i]});
    }
    return out;
}

std::vector<double> normalize_display_scores(const std::vector<double>& raw) {
    if (raw.empty()) return {};
    const double mx = *std::max_element(raw.begin(), raw.end());
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(raw.size());
    const double denom = mx - mean + 1e-8;
    std::vector<double> out;
    out.reserve(raw.size());
    for (double s : raw) out.push_back(std::max(0.0, (s - mean) / denom));
    return out;
}

std::vector<Eigen::VectorXd> TestEmbedder::embed(const std::vector<std::string>& texts,
                                                 size_t max_len) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<long>(dim_));
        auto tokens = tokenize_words(text);
        if (tokens.size() > max_len) tokens.resize(max_len);
        for (const auto& tok : tokens) {
            const uint64_t h = hash_mix(seed_, fnv1a(tok));
            const auto bucket = static_cast<long>(h % dim_);
            const double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
            v(bucket) += sign;
        }
        out.push_back(std::move(v));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(std::string host, int port, size_t dim, std::string base_path)
    : host_(std::move(host)), port_(port), dim_(dim), base_path_(std::move(base_path)) {}

std::vector<Eigen::VectorXd> RemoteEmbedder::embed(const std::vector<std::string>& texts,
                                                   size_t max_len) {
    httplib::Client client(host_, port_);
    client.set_read_timeout(120, 0);

    std::vector<Eigen::VectorXd> out;
    out.reserve(texts.size());
    for (size_t start = 0; start < texts.size(); start += batch_size_) {
        const size_t stop = std::min(texts.size(), start + batch_size_);
        json body;
        body["texts"] = json::array();
        for (size_t i = start; i < stop; ++i) body["texts"].push_back(texts[i]);
        body["max_len"] = max_len;

        auto res = client.Post((base_path_ + "/embed").c_str(), body.dump(), "application/json");
        if (!res || res->status != 200) {
            throw std::runtime_error("embedding endpoint failed (batch at " +
                                     std::to_string(start) + "), retry possible");
        }
        const json reply = json::parse(res->body);
        const auto& rows = reply.at("embeddings");
        if (rows.size() != stop - start) {
            throw std::runtime_error("embedding endpoint returned wrong batch size");
        }
        for (const auto& row : rows) {
            if (row.size() != dim_) {
                throw std::runtime_error("embedding endpoint returned wrong dimension");
            }
            Eigen::VectorXd v(static_cast<long>(dim_));
            for (size_t j = 0; j < dim_; ++j) v(static_cast<long>(j)) = row[j].get<double>();
            out.push_back(std::move(v));
        }
    }
    return out;
}

void save_item_matrix(const ItemMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    json header = {{"format", "item-matrix"},
                   {"version", 1},
                   {"n", matrix.size()},
                   {"d", matrix.dim()}};
    out << header.dump() << '\n';
    for (size_t i = 0; i < matrix.size(); ++i) {
        out << matrix.ids[i];
        for (size_t j = 0; j < matrix.dim(); ++j) {
            out << ' ' << format_double(matrix.vectors(static_cast<long>(i), static_cast<long>(j)));
        }
        out << '\n';
    }
}

ItemMatrix load_item_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    const json header = json::parse(line);
    if (header.at("format") != "item-matrix" || header.at("version") != 1) {
        throw std::runtime_error(path + ": unsupported matrix format");
    }
    const auto n = header.at("n").get<size_t>();
    const auto d = header.at("d").get<size_t>();

    ItemMatrix matrix;
    matrix.ids.reserve(n);
    matrix.vectors.resize(static_cast<long>(n), static_cast<long>(d));
    for (size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated matrix");
        std::istringstream row(line);
        std::string id;
        row >> id;
        matrix.ids.push_back(id);
        for (size_t j = 0; j < d; ++j) {
            double x;
            if (!(row >> x)) throw std::runtime_error(path + ": short row for " + id);
            matrix.vectors(static_cast<long>(i), static_cast<long>(j)) = x;
        }
    }
    return matrix;
}

}  // namespace shopeval
