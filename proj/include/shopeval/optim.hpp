#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace shopeval {

enum class ScheduleKind { constant, linear_warmup, cosine_decay };

struct Schedule {
    ScheduleKind kind = ScheduleKind::constant;
    size_t warmup_steps = 0;  // linear_warmup
    size_t total_steps = 0;   // cosine_decay

    double scale(size_t step) const;
};

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Adaptive moment optimizer with decoupled weight decay.
class AdamW {
public:
    AdamW(std::vector<Eigen::MatrixXd*> params, std::vector<Eigen::MatrixXd*> grads,
          AdamWConfig cfg, Schedule schedule = {});

    void step();
    size_t steps_taken() const { return t_; }

private:
    std::vector<Eigen::MatrixXd*> params_;
    std::vector<Eigen::MatrixXd*> grads_;
    std::vector<Eigen::MatrixXd> m_;
    std::vector<Eigen::MatrixXd> v_;
    AdamWConfig cfg_;
    Schedule schedule_;
    size_t t_ = 0;
};

}  // namespace shopeval
