#include "shopeval/heads.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "shopeval/jsonl.hpp"
#include "shopeval/rng.hpp"

namespace shopeval {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

Eigen::MatrixXd lecun_uniform(size_t rows, size_t cols, Rng& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(cols));
    Eigen::MatrixXd m(static_cast<long>(rows), static_cast<long>(cols));
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            m(i, j) = (2.0 * rng.uniform_real() - 1.0) * bound;
        }
    }
    return m;
}

// Backprop through y = u / max(||u||, eps).
Eigen::VectorXd normalize_backward(const Eigen::VectorXd& u, double u_norm,
                                   const Eigen::VectorXd& d_out) {
    const Eigen::VectorXd y = u / u_norm;
    return (d_out - y * y.dot(d_out)) / u_norm;
}

constexpr double kNormFloor = 1e-12;

}  // namespace

MlpHead::MlpHead(size_t in_dim, size_t hidden_dim, size_t out_dim, uint64_t seed) {
    Rng rng(seed);
    W1 = lecun_uniform(hidden_dim, in_dim, rng);
    b1 = Eigen::MatrixXd::Zero(static_cast<long>(hidden_dim), 1);
    W2 = lecun_uniform(out_dim, hidden_dim, rng);
    b2 = Eigen::MatrixXd::Zero(static_cast<long>(out_dim), 1);
    zero_grads();
}

Eigen::VectorXd MlpHead::forward(const Eigen::VectorXd& x) const {
    Cache cache;
    return forward_cached(x, cache);
}

Eigen::VectorXd MlpHead::forward_cached(const Eigen::VectorXd& x, Cache& cache) const {
    cache.x = x;
    cache.pre1 = W1 * x + b1.col(0);
    cache.h1 = cache.pre1.unaryExpr([](double v) { return gelu(v); });
    cache.u = W2 * cache.h1 + b2.col(0);
    cache.u_norm = std::max(cache.u.norm(), kNormFloor);
    return cache.u / cache.u_norm;
}

void MlpHead::backward(const Cache& cache, const Eigen::VectorXd& d_out) {
    const Eigen::VectorXd d_u = normalize_backward(cache.u, cache.u_norm, d_out);
    gW2 += d_u * cache.h1.transpose();
    gb2.col(0) += d_u;
    const Eigen::VectorXd d_h1 = W2.transpose() * d_u;
    const Eigen::VectorXd d_pre1 =
        d_h1.cwiseProduct(cache.pre1.unaryExpr([](double v) { return gelu_grad(v); }));
    gW1 += d_pre1 * cache.x.transpose();
    gb1.col(0) += d_pre1;
}

void MlpHead::zero_grads() {
    gW1 = Eigen::MatrixXd::Zero(W1.rows(), W1.cols());
    gb1 = Eigen::MatrixXd::Zero(b1.rows(), 1);
    gW2 = Eigen::MatrixXd::Zero(W2.rows(), W2.cols());
    gb2 = Eigen::MatrixXd::Zero(b2.rows(), 1);
}

std::vector<Eigen::MatrixXd*> MlpHead::params() { return {&W1, &b1, &W2, &b2}; }
std::vector<Eigen::MatrixXd*> MlpHead::grads() { return {&gW1, &gb1, &gW2, &gb2}; }

Eigen::MatrixXd MlpHead::project_rows(const Eigen::MatrixXd& rows) const {
    Eigen::MatrixXd out(rows.rows(), static_cast<long>(out_dim()));
    for (long i = 0; i < rows.rows(); ++i) {
        out.row(i) = forward(rows.row(i).transpose()).transpose();
    }
    return out;
}

LinearHead::LinearHead(size_t dim) {
    W = Eigen::MatrixXd::Identity(static_cast<long>(dim), static_cast<long>(dim));
    zero_grads();
}

Eigen::VectorXd LinearHead::forward(const Eigen::VectorXd& x) const {
    Cache cache;
    return forward_cached(x, cache);
}

Eigen::VectorXd LinearHead::forward_cached(const Eigen::VectorXd& x, Cache& cache) const {
    cache.x = x;
    cache.u = W * x;
    cache.u_norm = std::max(cache.u.norm(), kNormFloor);
    return cache.u / cache.u_norm;
}

void LinearHead::backward(const Cache& cache, const Eigen::VectorXd& d_out) {
    const Eigen::VectorXd d_u = normalize_backward(cache.u, cache.u_norm, d_out);
    gW += d_u * cache.x.transpose();
}

void LinearHead::zero_grads() { gW = Eigen::MatrixXd::Zero(W.rows(), W.cols()); }

std::vector<Eigen::MatrixXd*> LinearHead::params() { return {&W}; }
std::vector<Eigen::MatrixXd*> LinearHead::grads() { return {&gW}; }

namespace {

void write_tensor(std::ofstream& out, const Eigen::MatrixXd& m) {
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
}

void read_tensor(std::ifstream& in, Eigen::MatrixXd& m, long rows, long cols) {
    m.resize(rows, cols);
    for (long i = 0; i < rows; ++i) {
        for (long j = 0; j < cols; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) throw std::runtime_error("checkpoint truncated");
            m(i, j) = v;
        }
    }
}

json meta_to_json(const TrainMeta& meta) {
    return {{"seed", meta.seed},
            {"epochs_run", meta.epochs_run},
            {"selected_epoch", meta.selected_epoch},
            {"val_metric", meta.val_metric}};
}

TrainMeta meta_from_json(const json& j) {
    TrainMeta meta;
    meta.seed = j.at("seed").get<uint64_t>();
    meta.epochs_run = j.at("epochs_run").get<size_t>();
    meta.selected_epoch = j.at("selected_epoch").get<size_t>();
    meta.val_metric = j.at("val_metric").get<double>();
    return meta;
}

}  // namespace

void save_projection_pair(const ProjectionPair& pair, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    json header = {{"format", "projection-pair"},
                   {"version", 1},
                   {"in_dim", pair.h_a.in_dim()},
                   {"hidden", static_cast<size_t>(pair.h_a.W1.rows())},
                   {"out_dim", pair.h_a.out_dim()},
                   {"meta", meta_to_json(pair.meta)}};
    out << header.dump() << '\n';
    for (const auto* head : {&pair.h_a, &pair.h_c}) {
        write_tensor(out, head->W1);
        write_tensor(out, head->b1);
        write_tensor(out, head->W2);
        write_tensor(out, head->b2);
    }
}

ProjectionPair load_projection_pair(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    const json header = json::parse(line);
    if (header.at("format") != "projection-pair" || header.at("version") != 1) {
        throw std::runtime_error(path + ": unsupported checkpoint format");
    }
    const auto in_dim = header.at("in_dim").get<long>();
    const auto hidden = header.at("hidden").get<long>();
    const auto out_dim = header.at("out_dim").get<long>();

    ProjectionPair pair;
    pair.meta = meta_from_json(header.at("meta"));
    for (auto* head : {&pair.h_a, &pair.h_c}) {
        read_tensor(in, head->W1, hidden, in_dim);
        read_tensor(in, head->b1, hidden, 1);
        read_tensor(in, head->W2, out_dim, hidden);
        read_tensor(in, head->b2, out_dim, 1);
        head->zero_grads();
    }
    return pair;
}

void save_query_head(const QueryHead& head, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    json header = {{"format", "query-head"},
                   {"version", 1},
                   {"dim", head.head.dim()},
                   {"meta", meta_to_json(head.meta)}};
    out << header.dump() << '\n';
    write_tensor(out, head.head.W);
}

QueryHead load_query_head(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    const json header = json::parse(line);
    if (header.at("format") != "query-head" || header.at("version") != 1) {
        throw std::runtime_error(path + ": unsupported checkpoint format");
    }
    const auto dim = header.at("dim").get<long>();
    QueryHead head;
    head.meta = meta_from_json(header.at("meta"));
    read_tensor(in, head.head.W, dim, dim);
    head.head.zero_grads();
    return head;
}

}  // namespace shopeval
