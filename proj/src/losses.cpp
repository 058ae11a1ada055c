#include "shopeval/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace shopeval {

namespace {

// log(1 + exp(x)) without overflow.
double log1p_exp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

double bpr_loss(const Eigen::VectorXd& query_vec, const Eigen::VectorXd& pos_vec,
                const std::vector<Eigen::VectorXd>& neg_vecs) {
    if (neg_vecs.empty()) throw std::invalid_argument("bpr_loss needs at least one negative");
    const double s_pos = query_vec.dot(pos_vec);
    double loss = 0.0;
    for (const auto& neg : neg_vecs) {
        const double diff = s_pos - query_vec.dot(neg);
        loss += log1p_exp(-diff);  // -log sigmoid(diff)
    }
    return loss / static_cast<double>(neg_vecs.size());
}

BprGrad bpr_loss_grad(const Eigen::VectorXd& query_vec, const Eigen::VectorXd& pos_vec,
                      const std::vector<Eigen::VectorXd>& neg_vecs) {
    if (neg_vecs.empty()) throw std::invalid_argument("bpr_loss needs at least one negative");
    const double m = static_cast<double>(neg_vecs.size());
    const double s_pos = query_vec.dot(pos_vec);

    BprGrad g;
    g.d_query = Eigen::VectorXd::Zero(query_vec.size());
    g.d_pos = Eigen::VectorXd::Zero(pos_vec.size());
    g.d_negs.reserve(neg_vecs.size());
    for (const auto& neg : neg_vecs) {
        const double diff = s_pos - query_vec.dot(neg);
        g.loss += log1p_exp(-diff);
        const double w = sigmoid(-diff);  // d(-log sigmoid(diff))/d diff = -sigmoid(-diff)
        g.d_query += (w / m) * (neg - pos_vec);
        g.d_pos += (-w / m) * query_vec;
        g.d_negs.push_back((w / m) * query_vec);
    }
    g.loss /= m;
    return g;
}

double infonce_loss(const Eigen::VectorXd& anchor_vec, const Eigen::VectorXd& pos_vec,
                    const std::vector<Eigen::VectorXd>& neg_vecs, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
    const double l_pos = anchor_vec.dot(pos_vec) / tau;
    double mx = l_pos;
    std::vector<double> logits;
    logits.reserve(neg_vecs.size());
    for (const auto& neg : neg_vecs) {
        logits.push_back(anchor_vec.dot(neg) / tau);
        mx = std::max(mx, logits.back());
    }
    double z = std::exp(l_pos - mx);
    for (double l : logits) z += std::exp(l - mx);
    return -(l_pos - mx) + std::log(z);
}

InfoNceGrad infonce_loss_grad(const Eigen::VectorXd& anchor_vec, const Eigen::VectorXd& pos_vec,
                              const std::vector<Eigen::VectorXd>& neg_vecs, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
    const double l_pos = anchor_vec.dot(pos_vec) / tau;
    double mx = l_pos;
    std::vector<double> logits;
    logits.reserve(neg_vecs.size());
    for (const auto& neg : neg_vecs) {
        logits.push_back(anchor_vec.dot(neg) / tau);
        mx = std::max(mx, logits.back());
    }
    double z = std::exp(l_pos - mx);
    for (double l : logits) z += std::exp(l - mx);

    const double w_pos = std::exp(l_pos - mx) / z;

    InfoNceGrad g;
    g.loss = -(l_pos - mx) + std::log(z);
    g.d_anchor = (w_pos - 1.0) / tau * pos_vec;
    g.d_pos = (w_pos - 1.0) / tau * anchor_vec;
    g.d_negs.reserve(neg_vecs.size());
    for (size_t r = 0; r < neg_vecs.size(); ++r) {
        const double w = std::exp(logits[r] - mx) / z;
        g.d_anchor += w / tau * neg_vecs[r];
        g.d_negs.push_back(w / tau * anchor_vec);
    }
    return g;
}

}  // namespace shopeval
