#pragma once

#include <vector>

#include <Eigen/Dense>

namespace shopeval {

struct BprGrad {
    double loss = 0.0;
    Eigen::VectorXd d_query;
    Eigen::VectorXd d_pos;
    std::vector<Eigen::VectorXd> d_negs;
};

struct InfoNceGrad {
    double loss = 0.0;
    Eigen::VectorXd d_anchor;
    Eigen::VectorXd d_pos;
    std::vector<Eigen::VectorXd> d_negs;
};

// -(1/m) sum_r log sigmoid(<q,p> - <q,n_r>)
double bpr_loss(const Eigen::VectorXd& query_vec, const Eigen::VectorXd& pos_vec,
                const std::vector<Eigen::VectorXd>& neg_vecs);
BprGrad bpr_loss_grad(const Eigen::VectorXd& query_vec, const Eigen::VectorXd& pos_vec,
                      const std::vector<Eigen::VectorXd>& neg_vecs);

// -log softmax weight of the positive under temperature tau, logits <a,v>/tau.
double infonce_loss(const Eigen::VectorXd& anchor_vec, const Eigen::VectorXd& pos_vec,
                    const std::vector<Eigen::VectorXd>& neg_vecs, double tau = 0.05);
InfoNceGrad infonce_loss_grad(const Eigen::VectorXd& anchor_vec, const Eigen::VectorXd& pos_vec,
                              const std::vector<Eigen::VectorXd>& neg_vecs, double tau = 0.05);

}  // namespace shopeval
