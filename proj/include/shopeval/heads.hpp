#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shopeval {

// Two-layer projection in -> hidden -> out with GELU and an L2-normalized
// output. Parameters are public for checkpointing; gradients accumulate
// until zero_grads().
class MlpHead {
public:
    MlpHead() = default;
    MlpHead(size_t in_dim, size_t hidden_dim, size_t out_dim, uint64_t seed);

    size_t in_dim() const { return static_cast<size_t>(W1.cols()); }
    size_t out_dim() const { return static_cast<size_t>(W2.rows()); }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    struct Cache {
        Eigen::VectorXd x, pre1, h1, u;
        double u_norm = 0.0;
    };
    Eigen::VectorXd forward_cached(const Eigen::VectorXd& x, Cache& cache) const;
    void backward(const Cache& cache, const Eigen::VectorXd& d_out);

    void zero_grads();
    std::vector<Eigen::MatrixXd*> params();
    std::vector<Eigen::MatrixXd*> grads();

    // Apply to every row of a matrix of input vectors.
    Eigen::MatrixXd project_rows(const Eigen::MatrixXd& rows) const;

    Eigen::MatrixXd W1, b1, W2, b2;  // biases stored as n x 1
    Eigen::MatrixXd gW1, gb1, gW2, gb2;
};

// Square linear map with identity initialization and L2-normalized output;
// stands in for the query-side adapter over a frozen base embedding.
class LinearHead {
public:
    LinearHead() = default;
    explicit LinearHead(size_t dim);

    size_t dim() const { return static_cast<size_t>(W.rows()); }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    struct Cache {
        Eigen::VectorXd x, u;
        double u_norm = 0.0;
    };
    Eigen::VectorXd forward_cached(const Eigen::VectorXd& x, Cache& cache) const;
    void backward(const Cache& cache, const Eigen::VectorXd& d_out);

    void zero_grads();
    std::vector<Eigen::MatrixXd*> params();
    std::vector<Eigen::MatrixXd*> grads();

    Eigen::MatrixXd W, gW;
};

struct TrainMeta {
    uint64_t seed = 0;
    size_t epochs_run = 0;
    size_t selected_epoch = 0;
    double val_metric = 0.0;
};

struct ProjectionPair {
    MlpHead h_a;  // anchor side
    MlpHead h_c;  // complement side
    TrainMeta meta;

    double score(const Eigen::VectorXd& e_anchor, const Eigen::VectorXd& e_candidate) const {
        return h_a.forward(e_anchor).dot(h_c.forward(e_candidate));
    }
};

struct QueryHead {
    LinearHead head;
    TrainMeta meta;

    Eigen::VectorXd forward(const Eigen::VectorXd& base_query) const {
        return head.forward(base_query);
    }
};

void save_projection_pair(const ProjectionPair& pair, const std::string& path);
ProjectionPair load_projection_pair(const std::string& path);
void save_query_head(const QueryHead& head, const std::string& path);
QueryHead load_query_head(const std::string& path);

double gelu(double x);
double gelu_grad(double x);

}  // namespace shopeval
