#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "jrc/errors.hpp"
#include "jrc/nn.hpp"

using namespace jrc;

namespace {

double network_loss(const NetworkParams& p, const WeightedBatch& batch) {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
        double q = forward(p, batch.inputs[i])(batch.actions[i]);
        double err = batch.targets[i] - q;
        loss += batch.weights[i] * err * err;
    }
    return loss / static_cast<double>(batch.inputs.size());
}

WeightedBatch random_batch(const NetworkParams& p, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> act(0, p.output_dim() - 1);
    std::uniform_real_distribution<double> w(0.1, 1.0);
    WeightedBatch batch;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x(p.input_dim());
        for (int d = 0; d < p.input_dim(); ++d) x(d) = u(rng);
        batch.inputs.push_back(x);
        batch.actions.push_back(act(rng));
        batch.targets.push_back(u(rng) * 5.0);
        batch.weights.push_back(w(rng));
    }
    return batch;
}

}  // namespace

TEST_CASE("init_network shapes, bounds, and zero biases") {
    std::mt19937_64 rng(5);
    auto p = init_network({5, 24, 24, 4}, rng);
    REQUIRE(p.weights.size() == 3);
    CHECK(p.weights[0].rows() == 24);
    CHECK(p.weights[0].cols() == 5);
    CHECK(p.weights[2].rows() == 4);
    CHECK(p.weights[2].cols() == 24);
    CHECK(p.parameter_count() == 5 * 24 + 24 + 24 * 24 + 24 + 24 * 4 + 4);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        double bound = 1.0 / std::sqrt(static_cast<double>(p.weights[l].cols()));
        CHECK(p.weights[l].cwiseAbs().maxCoeff() <= bound);
        CHECK(p.biases[l].cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(p.weights[0].cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward computes a hand-checkable two-layer net") {
    NetworkParams p;
    p.dims = {2, 2, 1};
    p.weights = {Eigen::MatrixXd(2, 2), Eigen::MatrixXd(1, 2)};
    p.biases = {Eigen::VectorXd(2), Eigen::VectorXd(1)};
    p.weights[0] << 1.0, -1.0, 0.5, 0.5;
    p.biases[0] << 0.0, -1.0;
    p.weights[1] << 2.0, 3.0;
    p.biases[1] << 0.25;

    Eigen::VectorXd x(2);
    x << 3.0, 1.0;
    // hidden pre-activation: (2, 1); relu keeps both; output 2*2 + 3*1 + 0.25
    CHECK(forward(p, x)(0) == doctest::Approx(7.25).epsilon(1e-14));

    x << -1.0, 0.0;
    // hidden pre-activation: (-1, -1.5) -> relu zeros both -> bias only
    CHECK(forward(p, x)(0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("forward_batch agrees with per-sample forward") {
    std::mt19937_64 rng(7);
    auto p = init_network({5, 24, 24, 4}, rng);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Eigen::MatrixXd inputs(5, 32);
    for (int i = 0; i < inputs.size(); ++i) inputs(i / 32, i % 32) = u(rng);
    auto cache = forward_batch(p, inputs);
    const Eigen::MatrixXd& out = cache.a.back();
    REQUIRE(out.rows() == 4);
    REQUIRE(out.cols() == 32);
    for (int i = 0; i < 32; ++i) {
        Eigen::VectorXd single = forward(p, inputs.col(i));
        CHECK((out.col(i) - single).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("loss_and_gradients matches central finite differences") {
    std::mt19937_64 rng(9);
    auto p = init_network({5, 8, 4}, rng);
    auto batch = random_batch(p, 16, rng);

    auto [loss, grads] = loss_and_gradients(p, batch);
    CHECK(loss == doctest::Approx(network_loss(p, batch)).epsilon(1e-12));

    const double h = 1e-6;
    std::mt19937_64 pick(21);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        for (int probe = 0; probe < 12; ++probe) {
            int r = std::uniform_int_distribution<int>(
                0, static_cast<int>(p.weights[l].rows()) - 1)(pick);
            int c = std::uniform_int_distribution<int>(
                0, static_cast<int>(p.weights[l].cols()) - 1)(pick);
            NetworkParams plus = p, minus = p;
            plus.weights[l](r, c) += h;
            minus.weights[l](r, c) -= h;
            double numeric = (network_loss(plus, batch) - network_loss(minus, batch)) / (2 * h);
            CHECK(grads.weights[l](r, c) == doctest::Approx(numeric).epsilon(1e-4));
        }
        for (int r = 0; r < p.biases[l].size(); ++r) {
            NetworkParams plus = p, minus = p;
            plus.biases[l](r) += h;
            minus.biases[l](r) -= h;
            double numeric = (network_loss(plus, batch) - network_loss(minus, batch)) / (2 * h);
            CHECK(grads.biases[l](r) == doctest::Approx(numeric).epsilon(1e-4));
        }
    }
}

TEST_CASE("loss gradient touches only the taken action's output row") {
    std::mt19937_64 rng(31);
    auto p = init_network({5, 8, 4}, rng);
    WeightedBatch batch;
    Eigen::VectorXd x(5);
    x << 1.0, 0.0, 1.0, 0.5, -0.5;
    batch.inputs = {x};
    batch.actions = {2};
    batch.targets = {3.0};
    batch.weights = {1.0};
    auto [loss, grads] = loss_and_gradients(p, batch);
    (void)loss;
    const auto& out_w = grads.weights.back();
    for (int r = 0; r < out_w.rows(); ++r) {
        double magnitude = out_w.row(r).cwiseAbs().maxCoeff();
        if (r == 2)
            CHECK(magnitude > 0.0);
        else
            CHECK(magnitude == 0.0);
    }
}

TEST_CASE("sgd_step reduces loss on a fixed batch") {
    std::mt19937_64 rng(33);
    auto p = init_network({5, 16, 4}, rng);
    auto batch = random_batch(p, 32, rng);
    double before = network_loss(p, batch);
    for (int iter = 0; iter < 2000; ++iter) {
        auto [loss, grads] = loss_and_gradients(p, batch);
        (void)loss;
        sgd_step(p, grads, 0.02);
    }
    CHECK(network_loss(p, batch) < 0.2 * before);
}

TEST_CASE("sync_target copies and then decouples") {
    std::mt19937_64 rng(35);
    auto p = init_network({5, 8, 4}, rng);
    auto t = sync_target(p);
    CHECK(t.weights[0] == p.weights[0]);
    p.weights[0](0, 0) += 1.0;
    CHECK(t.weights[0](0, 0) != p.weights[0](0, 0));
}

TEST_CASE("save/load round-trips weights bit-exactly") {
    std::mt19937_64 rng(37);
    auto p = init_network({5, 24, 24, 4}, rng);
    p.weights[1](3, 3) = 0.1 + 0.2;  // not exactly representable as text naively
    const std::string path = "nn_roundtrip_test.json";
    save_network(p, path);
    auto q = load_network(path);
    REQUIRE(q.dims == p.dims);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        CHECK((q.weights[l] - p.weights[l]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((q.biases[l] - p.biases[l]).cwiseAbs().maxCoeff() == 0.0);
    }
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_network("definitely_missing_weights.json"), IoError);
}
