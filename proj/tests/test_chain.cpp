#include <catch2/catch_amalgamated.hpp>

#include "mrar/chain.hpp"
#include "mrar/common.hpp"
#include "test_support.hpp"

using namespace mrar;
using Catch::Approx;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double lo = -2.0, double hi = 2.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("viterbi matches exhaustive search with the tie rule") {
    Rng rng(7);
    for (int trial = 0; trial < 120; ++trial) {
        const int states = 2 + static_cast<int>(rng.uniform_int(3));
        const int steps = 1 + static_cast<int>(rng.uniform_int(6));
        Eigen::MatrixXd node = random_matrix(rng, steps, states);
        Eigen::MatrixXd edge = random_matrix(rng, states, states);
        CHECK(chain::viterbi_path(node, edge) == test_support::brute_force_best_path(node, edge));
    }
}

TEST_CASE("viterbi ties break toward the lower index") {
    Eigen::MatrixXd node = Eigen::MatrixXd::Zero(4, 3);
    Eigen::MatrixXd edge = Eigen::MatrixXd::Zero(3, 3);
    CHECK(chain::viterbi_path(node, edge) == std::vector<int>({0, 0, 0, 0}));
}

TEST_CASE("forward backward matches enumeration") {
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int states = 2 + static_cast<int>(rng.uniform_int(2));
        const int steps = 1 + static_cast<int>(rng.uniform_int(4));
        Eigen::MatrixXd node = random_matrix(rng, steps, states);
        Eigen::MatrixXd edge = random_matrix(rng, states, states);

        auto fb = chain::forward_backward(node, edge);
        CHECK(fb.log_z ==
              Approx(test_support::brute_force_log_z(node, edge)).epsilon(1e-12));

        auto brute = test_support::brute_force_marginals(node, edge);
        Eigen::MatrixXd gamma = fb.node_marginals();
        CHECK((gamma - brute.node).cwiseAbs().maxCoeff() < 1e-12);
        for (int t = 1; t < steps; ++t) {
            Eigen::MatrixXd xi = fb.edge_marginal(node, edge, t);
            CHECK((xi - brute.edge[t - 1]).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("marginal consistency and normalization") {
    Rng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        const int states = 2 + static_cast<int>(rng.uniform_int(3));
        const int steps = 2 + static_cast<int>(rng.uniform_int(5));
        Eigen::MatrixXd node = random_matrix(rng, steps, states);
        Eigen::MatrixXd edge = random_matrix(rng, states, states);
        auto fb = chain::forward_backward(node, edge);
        Eigen::MatrixXd gamma = fb.node_marginals();
        for (int t = 0; t < steps; ++t) CHECK(gamma.row(t).sum() == Approx(1.0).margin(1e-9));
        for (int t = 1; t < steps; ++t) {
            Eigen::MatrixXd xi = fb.edge_marginal(node, edge, t);
            CHECK(xi.sum() == Approx(1.0).margin(1e-9));
            // row sums of xi_t recover gamma_{t-1}; column sums recover gamma_t
            for (int i = 0; i < states; ++i)
                CHECK(xi.row(i).sum() == Approx(gamma(t - 1, i)).margin(1e-9));
            for (int j = 0; j < states; ++j)
                CHECK(xi.col(j).sum() == Approx(gamma(t, j)).margin(1e-9));
        }
    }
}

TEST_CASE("edge marginal sum equals the per-step tables, long sequence stays finite") {
    Rng rng(17);
    const int states = 3;
    const int steps = 900;  // alpha/beta grow linearly; the sum must not overflow
    Eigen::MatrixXd node = random_matrix(rng, steps, states);
    Eigen::MatrixXd edge = random_matrix(rng, states, states);
    auto fb = chain::forward_backward(node, edge);
    Eigen::MatrixXd total = fb.edge_marginals_sum(node, edge);
    CHECK(total.allFinite());
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(states, states);
    for (int t = 1; t < steps; ++t) expected += fb.edge_marginal(node, edge, t);
    CHECK((total - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("per-step constant shift moves logZ by the constant and nothing else") {
    Rng rng(19);
    const int states = 3, steps = 5;
    Eigen::MatrixXd node = random_matrix(rng, steps, states);
    Eigen::MatrixXd edge = random_matrix(rng, states, states);
    auto base = chain::forward_backward(node, edge);
    auto base_path = chain::viterbi_path(node, edge);

    const double c = 1.7;
    Eigen::MatrixXd shifted = node;
    shifted.row(2).array() += c;
    auto moved = chain::forward_backward(shifted, edge);
    CHECK(moved.log_z == Approx(base.log_z + c).epsilon(1e-12));
    CHECK((moved.node_marginals() - base.node_marginals()).cwiseAbs().maxCoeff() < 1e-9);
    for (int t = 1; t < steps; ++t)
        CHECK((moved.edge_marginal(shifted, edge, t) - base.edge_marginal(node, edge, t))
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
    CHECK(chain::viterbi_path(shifted, edge) == base_path);
}

TEST_CASE("empty sequences are rejected") {
    Eigen::MatrixXd node(0, 3), edge = Eigen::MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(chain::viterbi_path(node, edge), DomainError);
    CHECK_THROWS_AS(chain::forward_backward(node, edge), DomainError);
}
