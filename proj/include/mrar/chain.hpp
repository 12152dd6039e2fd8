#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "mrar/common.hpp"

namespace mrar::chain {

// Linear-chain DP over log-domain scores shared by the HMM and CRF models.
// node(t, j) is the score of label j at step t (any initial-state score is
// folded into row 0); edge(i, j) is the time-invariant transition score.

/// Max-scoring path. Ties break toward the lower state index at every
/// backpointer and at the final state.
inline std::vector<int> viterbi_path(const Eigen::MatrixXd& node, const Eigen::MatrixXd& edge) {
    const int steps = static_cast<int>(node.rows());
    const int states = static_cast<int>(node.cols());
    if (steps == 0) throw DomainError("viterbi: empty sequence");

    Eigen::VectorXd score = node.row(0);
    Eigen::MatrixXi backptr(steps, states);
    Eigen::VectorXd next(states);
    for (int t = 1; t < steps; ++t) {
        for (int j = 0; j < states; ++j) {
            int arg = 0;
            double best = score(0) + edge(0, j);
            for (int i = 1; i < states; ++i) {
                double cand = score(i) + edge(i, j);
                if (cand > best) {
                    best = cand;
                    arg = i;
                }
            }
            next(j) = best + node(t, j);
            backptr(t, j) = arg;
        }
        score.swap(next);
    }

    int last = 0;
    for (int j = 1; j < states; ++j)
        if (score(j) > score(last)) last = j;

    std::vector<int> path(steps);
    path[steps - 1] = last;
    for (int t = steps - 1; t > 0; --t) path[t - 1] = backptr(t, path[t]);
    return path;
}

/// Score of a fixed path, accumulated in the same order as the DP above so
/// paths compare bit-for-bit against viterbi_path scores.
inline double path_score(const Eigen::MatrixXd& node, const Eigen::MatrixXd& edge,
                         const std::vector<int>& path) {
    double s = node(0, path[0]);
    for (int t = 1; t < static_cast<int>(path.size()); ++t)
        s = s + edge(path[t - 1], path[t]) + node(t, path[t]);
    return s;
}

inline double log_sum_exp(const Eigen::VectorXd& v) {
    double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf stays -inf
    return m + std::log((v.array() - m).exp().sum());
}

/// Log-domain forward/backward tables. alpha(t,j) includes node(t,j);
/// beta(t,i) is the score-to-go excluding node(t,i).
struct ForwardBackward {
    double log_z = 0.0;
    Eigen::MatrixXd alpha;  // T x J
    Eigen::MatrixXd beta;   // T x J

    /// p(state_t = j | sequence), rows normalized.
    Eigen::MatrixXd node_marginals() const {
        return ((alpha + beta).array() - log_z).exp().matrix();
    }

    /// p(state_{t-1}=i, state_t=j | sequence) for t >= 1.
    Eigen::MatrixXd edge_marginal(const Eigen::MatrixXd& node, const Eigen::MatrixXd& edge,
                                  int t) const {
        const int states = static_cast<int>(node.cols());
        Eigen::MatrixXd xi(states, states);
        for (int i = 0; i < states; ++i)
            for (int j = 0; j < states; ++j)
                xi(i, j) = std::exp(alpha(t - 1, i) + edge(i, j) + node(t, j) + beta(t, j) -
                                    log_z);
        return xi;
    }

    /// Sum over t of edge marginals; the expected transition counts.
    Eigen::MatrixXd edge_marginals_sum(const Eigen::MatrixXd& node,
                                       const Eigen::MatrixXd& edge) const {
        const int steps = static_cast<int>(node.rows());
        const int states = static_cast<int>(node.cols());
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(states, states);
        if (steps < 2) return sum;
        // xi_t = exp(alpha_{t-1}) * exp(edge) * exp(node_t + beta_t) / Z, factored so
        // the J x J exp() happens once per call. alpha and beta grow linearly with
        // t, so both factors are max-shifted before exponentiation.
        Eigen::MatrixXd edge_exp = edge.array().exp().matrix();
        for (int t = 1; t < steps; ++t) {
            double a_shift = alpha.row(t - 1).maxCoeff();
            double b_shift = (node.row(t) + beta.row(t)).maxCoeff();
            Eigen::VectorXd u = (alpha.row(t - 1).transpose().array() - a_shift).exp().matrix();
            Eigen::VectorXd v =
                ((node.row(t) + beta.row(t)).transpose().array() - b_shift).exp().matrix();
            double scale = std::exp(a_shift + b_shift - log_z);
            sum.noalias() += scale * (u * v.transpose()).cwiseProduct(edge_exp);
        }
        return sum;
    }
};

inline ForwardBackward forward_backward(const Eigen::MatrixXd& node,
                                        const Eigen::MatrixXd& edge) {
    const int steps = static_cast<int>(node.rows());
    const int states = static_cast<int>(node.cols());
    if (steps == 0) throw DomainError("forward_backward: empty sequence");

    ForwardBackward fb;
    fb.alpha.resize(steps, states);
    fb.beta.resize(steps, states);
    fb.alpha.row(0) = node.row(0);
    Eigen::VectorXd work(states);
    for (int t = 1; t < steps; ++t) {
        for (int j = 0; j < states; ++j) {
            work = fb.alpha.row(t - 1).transpose() + edge.col(j);
            fb.alpha(t, j) = log_sum_exp(work) + node(t, j);
        }
    }
    fb.beta.row(steps - 1).setZero();
    for (int t = steps - 2; t >= 0; --t) {
        for (int i = 0; i < states; ++i) {
            work = edge.row(i).transpose() + node.row(t + 1).transpose() +
                   fb.beta.row(t + 1).transpose();
            fb.beta(t, i) = log_sum_exp(work);
        }
    }
    fb.log_z = log_sum_exp(fb.alpha.row(steps - 1));
    return fb;
}

inline double log_partition(const Eigen::MatrixXd& node, const Eigen::MatrixXd& edge) {
    const int steps = static_cast<int>(node.rows());
    const int states = static_cast<int>(node.cols());
    Eigen::VectorXd alpha = node.row(0);
    Eigen::VectorXd next(states), work(states);
    for (int t = 1; t < steps; ++t) {
        for (int j = 0; j < states; ++j) {
            work = alpha + edge.col(j);
            next(j) = log_sum_exp(work) + node(t, j);
        }
        alpha.swap(next);
    }
    return log_sum_exp(alpha);
}

}  // namespace mrar::chain
