#include <doctest.h>

#include <cmath>
#include <vector>

#include "shopeval/heads.hpp"
#include "shopeval/losses.hpp"
#include "shopeval/rng.hpp"

using namespace shopeval;

namespace {

Eigen::VectorXd random_vec(Rng& rng, size_t d) {
    Eigen::VectorXd v(static_cast<long>(d));
    for (size_t i = 0; i < d; ++i) v(static_cast<long>(i)) = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("gelu matches the exact erf form") {
    auto ref = [](double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); };
    for (double x : {-3.0, -1.0, -0.1, 0.0, 0.1, 1.0, 3.0}) {
        CHECK(gelu(x) == doctest::Approx(ref(x)).epsilon(1e-12));
        const double h = 1e-6;
        const double fd = (ref(x + h) - ref(x - h)) / (2.0 * h);
        CHECK(gelu_grad(x) == doctest::Approx(fd).epsilon(1e-5));
    }
    CHECK(gelu(0.0) == 0.0);
}

TEST_CASE("mlp head init is deterministic with zero biases and bounded weights") {
    MlpHead a(8, 16, 4, 42);
    MlpHead b(8, 16, 4, 42);
    MlpHead c(8, 16, 4, 7);
    CHECK(a.W1.rows() == 16);
    CHECK(a.W1.cols() == 8);
    CHECK(a.W2.rows() == 4);
    CHECK(a.W2.cols() == 16);
    CHECK(a.b1.isZero());
    CHECK(a.b2.isZero());
    CHECK((a.W1 - b.W1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.W2 - b.W2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.W1 - c.W1).cwiseAbs().maxCoeff() > 0.0);

    // LeCun-uniform bound: sqrt(3 / fan_in)
    CHECK(a.W1.cwiseAbs().maxCoeff() <= std::sqrt(3.0 / 8.0));
    CHECK(a.W2.cwiseAbs().maxCoeff() <= std::sqrt(3.0 / 16.0));
    CHECK(a.W1.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("mlp forward emits unit vectors") {
    MlpHead head(6, 12, 5, 42);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd out = head.forward(random_vec(rng, 6));
        CHECK(out.size() == 5);
        CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
    MlpHead::Cache cache;
    Eigen::VectorXd x = random_vec(rng, 6);
    Eigen::VectorXd cached = head.forward_cached(x, cache);
    CHECK((cached - head.forward(x)).norm() == 0.0);
    CHECK(cache.u_norm > 0.0);
}

TEST_CASE("mlp backward matches finite differences through a dot-product loss") {
    Rng rng(99);
    MlpHead head(5, 9, 4, 42);
    Eigen::VectorXd x = random_vec(rng, 5);
    Eigen::VectorXd target = random_vec(rng, 4).normalized();

    auto loss_of = [&](const MlpHead& h) { return h.forward(x).dot(target); };

    MlpHead::Cache cache;
    head.zero_grads();
    head.forward_cached(x, cache);
    head.backward(cache, target);

    auto params = head.params();
    auto grads = head.grads();
    REQUIRE(params.size() == 4);
    const double h_step = 1e-6;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Eigen::MatrixXd& P = *params[pi];
        const Eigen::MatrixXd& G = *grads[pi];
        for (int probe = 0; probe < 6; ++probe) {
            const long r = static_cast<long>(rng.uniform_index(static_cast<size_t>(P.rows())));
            const long c = static_cast<long>(rng.uniform_index(static_cast<size_t>(P.cols())));
            const double saved = P(r, c);
            P(r, c) = saved + h_step;
            const double up = loss_of(head);
            P(r, c) = saved - h_step;
            const double down = loss_of(head);
            P(r, c) = saved;
            const double fd = (up - down) / (2.0 * h_step);
            const double denom = std::max({std::abs(fd), std::abs(G(r, c)), 1e-6});
            CHECK(std::abs(G(r, c) - fd) / denom <= 1e-4);
        }
    }
}

TEST_CASE("mlp gradients accumulate until cleared") {
    MlpHead head(4, 6, 3, 42);
    Rng rng(3);
    Eigen::VectorXd x = random_vec(rng, 4);
    Eigen::VectorXd d = random_vec(rng, 3);
    MlpHead::Cache cache;
    head.zero_grads();
    head.forward_cached(x, cache);
    head.backward(cache, d);
    Eigen::MatrixXd once = head.gW1;
    head.backward(cache, d);
    CHECK((head.gW1 - 2.0 * once).cwiseAbs().maxCoeff() <= 1e-12);
    head.zero_grads();
    CHECK(head.gW1.isZero());
}

TEST_CASE("linear head starts as normalized identity") {
    LinearHead head(5);
    CHECK(head.W.isIdentity(0.0));
    Rng rng(11);
    Eigen::VectorXd x = random_vec(rng, 5);
    Eigen::VectorXd out = head.forward(x);
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((out - x.normalized()).norm() <= 1e-12);
}

TEST_CASE("linear head backward matches finite differences") {
    Rng rng(17);
    LinearHead head(4);
    // move off the identity so the test is not at a special point
    for (long r = 0; r < 4; ++r)
        for (long c = 0; c < 4; ++c) head.W(r, c) += 0.1 * rng.normal();

    Eigen::VectorXd x = random_vec(rng, 4);
    Eigen::VectorXd target = random_vec(rng, 4).normalized();
    auto loss_of = [&](const LinearHead& h) { return h.forward(x).dot(target); };

    LinearHead::Cache cache;
    head.zero_grads();
    head.forward_cached(x, cache);
    head.backward(cache, target);

    const double h_step = 1e-6;
    for (int probe = 0; probe < 12; ++probe) {
        const long r = static_cast<long>(rng.uniform_index(4));
        const long c = static_cast<long>(rng.uniform_index(4));
        const double saved = head.W(r, c);
        head.W(r, c) = saved + h_step;
        const double up = loss_of(head);
        head.W(r, c) = saved - h_step;
        const double down = loss_of(head);
        head.W(r, c) = saved;
        const double fd = (up - down) / (2.0 * h_step);
        const double denom = std::max({std::abs(fd), std::abs(head.gW(r, c)), 1e-6});
        CHECK(std::abs(head.gW(r, c) - fd) / denom <= 1e-4);
    }
}

TEST_CASE("projection pair scores through both towers") {
    ProjectionPair pair;
    pair.h_a = MlpHead(6, 8, 4, 1);
    pair.h_c = MlpHead(6, 8, 4, 2);
    Rng rng(21);
    Eigen::VectorXd ea = random_vec(rng, 6);
    Eigen::VectorXd ec = random_vec(rng, 6);
    const double s = pair.score(ea, ec);
    CHECK(s == doctest::Approx(pair.h_a.forward(ea).dot(pair.h_c.forward(ec))));
    CHECK(std::abs(s) <= 1.0 + 1e-9);
}

TEST_CASE("projection pair round-trips through disk") {
    ProjectionPair pair;
    pair.h_a = MlpHead(6, 8, 4, 1);
    pair.h_c = MlpHead(6, 8, 4, 2);
    pair.meta = {42, 3, 2, 0.75};
    const std::string path = "/tmp/shopeval_pair.heads";
    save_projection_pair(pair, path);
    ProjectionPair loaded = load_projection_pair(path);
    CHECK(loaded.meta.seed == 42);
    CHECK(loaded.meta.epochs_run == 3);
    CHECK(loaded.meta.selected_epoch == 2);
    CHECK(loaded.meta.val_metric == doctest::Approx(0.75));
    CHECK((loaded.h_a.W1 - pair.h_a.W1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.h_a.W2 - pair.h_a.W2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.h_c.W1 - pair.h_c.W1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.h_c.b2 - pair.h_c.b2).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(5);
    Eigen::VectorXd ea = random_vec(rng, 6);
    Eigen::VectorXd ec = random_vec(rng, 6);
    CHECK(loaded.score(ea, ec) == doctest::Approx(pair.score(ea, ec)).epsilon(1e-15));
}

TEST_CASE("query head round-trips through disk") {
    QueryHead head;
    head.head = LinearHead(5);
    head.head.W(0, 1) = 0.25;
    head.meta = {7, 5, 4, 0.5};
    const std::string path = "/tmp/shopeval_query.head";
    save_query_head(head, path);
    QueryHead loaded = load_query_head(path);
    CHECK(loaded.meta.seed == 7);
    CHECK(loaded.meta.val_metric == doctest::Approx(0.5));
    CHECK((loaded.head.W - head.head.W).cwiseAbs().maxCoeff() == 0.0);
}
