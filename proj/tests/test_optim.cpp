#include <doctest.h>

#include <cmath>

#include "shopeval/optim.hpp"

using namespace shopeval;

TEST_CASE("first adamw step matches the hand-computed update") {
    Eigen::MatrixXd p(1, 1), g(1, 1);
    p << 2.0;
    g << 0.5;
    AdamWConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.04;
    AdamW opt({&p}, {&g}, cfg);
    opt.step();

    // after one step m_hat = g, v_hat = g^2, so the adaptive term is sign(g)
    const double adaptive = 0.5 / (std::sqrt(0.25) + cfg.eps);
    const double want = 2.0 - 0.1 * (adaptive + 0.04 * 2.0);
    CHECK(p(0, 0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(opt.steps_taken() == 1);
}

TEST_CASE("second adamw step tracks moment estimates exactly") {
    Eigen::MatrixXd p(1, 1), g(1, 1);
    p << 1.0;
    g << 0.3;
    AdamWConfig cfg;
    cfg.lr = 0.01;
    cfg.weight_decay = 0.0;
    AdamW opt({&p}, {&g}, cfg);

    double m = 0.0, v = 0.0, ref = 1.0;
    for (int t = 1; t <= 2; ++t) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * 0.3;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * 0.09;
        const double m_hat = m / (1.0 - std::pow(cfg.beta1, t));
        const double v_hat = v / (1.0 - std::pow(cfg.beta2, t));
        ref -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        opt.step();
        CHECK(p(0, 0) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("weight decay is decoupled from the gradient path") {
    // zero gradient: the adaptive term vanishes, leaving pure decay shrinkage
    Eigen::MatrixXd p(1, 1), g(1, 1);
    p << 4.0;
    g << 0.0;
    AdamWConfig cfg;
    cfg.lr = 0.5;
    cfg.weight_decay = 0.1;
    AdamW opt({&p}, {&g}, cfg);
    opt.step();
    CHECK(p(0, 0) == doctest::Approx(4.0 - 0.5 * 0.1 * 4.0).epsilon(1e-12));
}

TEST_CASE("constant schedule is flat") {
    Schedule s;
    CHECK(s.scale(0) == 1.0);
    CHECK(s.scale(1000) == 1.0);
}

TEST_CASE("linear warmup ramps then holds") {
    Schedule s;
    s.kind = ScheduleKind::linear_warmup;
    s.warmup_steps = 4;
    CHECK(s.scale(0) == doctest::Approx(0.25));
    CHECK(s.scale(1) == doctest::Approx(0.5));
    CHECK(s.scale(3) == doctest::Approx(1.0));
    CHECK(s.scale(4) == 1.0);
    CHECK(s.scale(100) == 1.0);

    Schedule degenerate;
    degenerate.kind = ScheduleKind::linear_warmup;
    CHECK(degenerate.scale(0) == 1.0);
}

TEST_CASE("cosine decay halves at midpoint and floors at zero") {
    Schedule s;
    s.kind = ScheduleKind::cosine_decay;
    s.total_steps = 10;
    CHECK(s.scale(0) == doctest::Approx(1.0));
    CHECK(s.scale(5) == doctest::Approx(0.5));
    CHECK(s.scale(10) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.scale(20) == doctest::Approx(0.0).epsilon(1e-12));

    Schedule degenerate;
    degenerate.kind = ScheduleKind::cosine_decay;
    CHECK(degenerate.scale(3) == 1.0);
}

TEST_CASE("schedule scales the learning rate per step") {
    Eigen::MatrixXd p(1, 1), g(1, 1);
    p << 1.0;
    g << 1.0;
    AdamWConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.0;
    Schedule warmup;
    warmup.kind = ScheduleKind::linear_warmup;
    warmup.warmup_steps = 2;
    AdamW opt({&p}, {&g}, cfg, warmup);
    opt.step();
    // first step uses scale(0) = 0.5, adaptive term ~ 1
    CHECK(p(0, 0) == doctest::Approx(1.0 - 0.05).epsilon(1e-8));
}

TEST_CASE("mismatched tensor lists are rejected") {
    Eigen::MatrixXd p(1, 1), g(1, 1);
    CHECK_THROWS_AS(AdamW({&p}, {}, AdamWConfig{}), std::invalid_argument);
}

TEST_CASE("multiple tensors update independently") {
    Eigen::MatrixXd p1(1, 2), g1(1, 2), p2(2, 1), g2(2, 1);
    p1 << 1.0, -1.0;
    g1 << 1.0, -1.0;
    p2 << 0.5, 0.5;
    g2 << 0.0, 0.0;
    AdamWConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.0;
    AdamW opt({&p1, &p2}, {&g1, &g2}, cfg);
    opt.step();
    CHECK(p1(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(p1(0, 1) == doctest::Approx(-0.9).epsilon(1e-6));
    CHECK(p2(0, 0) == doctest::Approx(0.5));
    CHECK(p2(1, 0) == doctest::Approx(0.5));
}
