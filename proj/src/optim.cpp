#include "shopeval/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace shopeval {

double Schedule::scale(size_t step) const {
    switch (kind) {
        case ScheduleKind::constant:
            return 1.0;
        case ScheduleKind::linear_warmup:
            if (warmup_steps == 0 || step >= warmup_steps) return 1.0;
            return static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
        case ScheduleKind::cosine_decay: {
            if (total_steps == 0) return 1.0;
            const double progress =
                static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
            return 0.5 * (1.0 + std::cos(M_PI * progress));
        }
    }
    return 1.0;
}

AdamW::AdamW(std::vector<Eigen::MatrixXd*> params, std::vector<Eigen::MatrixXd*> grads,
             AdamWConfig cfg, Schedule schedule)
    : params_(std::move(params)), grads_(std::move(grads)), cfg_(cfg), schedule_(schedule) {
    if (params_.size() != grads_.size()) {
        throw std::invalid_argument("params/grads tensor count mismatch");
    }
    for (const auto* p : params_) {
        m_.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        v_.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
}

void AdamW::step() {
    const double lr_t = cfg_.lr * schedule_.scale(t_);
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Eigen::MatrixXd& p = *params_[i];
        const Eigen::MatrixXd& g = *grads_[i];
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        const Eigen::MatrixXd m_hat = m_[i] / bc1;
        const Eigen::MatrixXd v_hat = v_[i] / bc2;
        const Eigen::MatrixXd denom = (v_hat.cwiseSqrt().array() + cfg_.eps).matrix();
        p -= lr_t * (m_hat.cwiseQuotient(denom) + cfg_.weight_decay * p);
    }
}

}  // namespace shopeval
