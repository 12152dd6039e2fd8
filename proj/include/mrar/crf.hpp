#pragma once

#include <Eigen/Dense>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mrar/chain.hpp"
#include "mrar/common.hpp"
#include "mrar/datamodel.hpp"
#include "mrar/lbfgs.hpp"
#include "mrar/model_io.hpp"

namespace mrar {

// Linear-chain CRF over combined labels and its factorial variant over
// separate labels. Feature templates: per-dimension emission value times a
// label indicator, transition indicators, per-label bias, and a separate
// t=1 initial-label indicator. The factorial model adds co-temporal pair
// tables between chains and is trained and decoded exactly by merging the
// per-step labels into one clique-chain variable of size prod K^m.

struct CrfParams {
    LabelSpace space;
    int feature_dim = 0;
    Eigen::MatrixXd emit;   // D x J
    Eigen::MatrixXd trans;  // J x J
    Eigen::VectorXd bias;   // J
    Eigen::VectorXd init;   // J

    int joint_states() const { return static_cast<int>(bias.size()); }
};

struct FcrfParams {
    LabelSpace space;
    int feature_dim = 0;
    std::vector<Eigen::MatrixXd> emit;   // per chain: D x K^m
    std::vector<Eigen::MatrixXd> trans;  // per chain: K^m x K^m
    std::vector<Eigen::VectorXd> bias;   // per chain: K^m
    std::vector<Eigen::VectorXd> init;   // per chain: K^m
    std::vector<Eigen::MatrixXd> pair;   // per (m1 < m2), lexicographic: K^m1 x K^m2
};

/// Preprocessed training/decoding view of one sequence.
struct CrfInstance {
    Eigen::MatrixXd features;              // T x D
    std::vector<int> combined;             // combined label per step
    std::vector<std::vector<int>> chains;  // per resident label sequence

    int length() const { return static_cast<int>(combined.size()); }
};

inline CrfInstance make_crf_instance(const SequenceInstance& inst, const LabelSpace& space) {
    CrfInstance out;
    out.features = features_matrix(inst.observations);
    out.combined.resize(inst.length());
    out.chains.assign(space.residents, std::vector<int>(inst.length()));
    for (int t = 0; t < inst.length(); ++t) {
        out.combined[t] = encode_combined(inst.activities[t], space);
        for (int m = 0; m < space.residents; ++m)
            out.chains[m][t] = inst.activities[t].labels[m];
    }
    return out;
}

inline std::vector<CrfInstance> crf_instances(const Dataset& ds) {
    std::vector<CrfInstance> out;
    out.reserve(ds.instances.size());
    for (const auto& inst : ds.instances) out.push_back(make_crf_instance(inst, ds.label_space));
    return out;
}

// ---------------------------------------------------------------- combined crf

inline Eigen::Index crf_param_count(const LabelSpace& space, int feature_dim) {
    const Eigen::Index joint = space.combined_size();
    return feature_dim * joint + joint * joint + 2 * joint;
}

inline Eigen::VectorXd pack_crf(const CrfParams& p) {
    const Eigen::Index joint = p.joint_states();
    Eigen::VectorXd theta(crf_param_count(p.space, p.feature_dim));
    Eigen::Index at = 0;
    theta.segment(at, p.feature_dim * joint) =
        Eigen::Map<const Eigen::VectorXd>(p.emit.data(), p.emit.size());
    at += p.feature_dim * joint;
    theta.segment(at, joint * joint) =
        Eigen::Map<const Eigen::VectorXd>(p.trans.data(), p.trans.size());
    at += joint * joint;
    theta.segment(at, joint) = p.bias;
    at += joint;
    theta.segment(at, joint) = p.init;
    return theta;
}

inline CrfParams unpack_crf(const Eigen::VectorXd& theta, const LabelSpace& space,
                            int feature_dim) {
    const Eigen::Index joint = space.combined_size();
    if (theta.size() != crf_param_count(space, feature_dim))
        throw DomainError("unpack_crf: parameter vector has wrong length");
    CrfParams p;
    p.space = space;
    p.feature_dim = feature_dim;
    Eigen::Index at = 0;
    p.emit = Eigen::Map<const Eigen::MatrixXd>(theta.data() + at, feature_dim, joint);
    at += feature_dim * joint;
    p.trans = Eigen::Map<const Eigen::MatrixXd>(theta.data() + at, joint, joint);
    at += joint * joint;
    p.bias = theta.segment(at, joint);
    at += joint;
    p.init = theta.segment(at, joint);
    return p;
}

/// Per-step label scores theta . f(o^t, a^t): emission dot-products plus bias,
/// with the initial-label block folded into row 0.
inline Eigen::MatrixXd crf_node_scores(const CrfParams& p, const Eigen::MatrixXd& features) {
    Eigen::MatrixXd node = features * p.emit;
    node.rowwise() += p.bias.transpose();
    node.row(0) += p.init.transpose();
    return node;
}

struct CrfMarginals {
    double log_z = 0.0;
    Eigen::MatrixXd node;               // T x J, rows sum to 1
    std::vector<Eigen::MatrixXd> edge;  // T-1 tables of J x J
};

/// Exact forward/backward pass: log partition plus node and edge marginals.
inline CrfMarginals crf_forward_backward(const CrfParams& p,
                                         const std::vector<Observation>& obs) {
    Eigen::MatrixXd features = features_matrix(obs);
    Eigen::MatrixXd node = crf_node_scores(p, features);
    auto fb = chain::forward_backward(node, p.trans);
    CrfMarginals out;
    out.log_z = fb.log_z;
    out.node = fb.node_marginals();
    for (int t = 1; t < node.rows(); ++t)
        out.edge.push_back(fb.edge_marginal(node, p.trans, t));
    return out;
}

namespace detail {

/// Adds one instance's NLL and gradient (model expectation minus empirical
/// counts) into grad, which is laid out like pack_crf.
inline double crf_instance_objective(const CrfParams& p, const CrfInstance& inst,
                                     Eigen::VectorXd& grad) {
    const Eigen::Index joint = p.joint_states();
    const Eigen::Index dim = p.feature_dim;
    const int steps = inst.length();

    Eigen::MatrixXd node = crf_node_scores(p, inst.features);
    auto fb = chain::forward_backward(node, p.trans);
    Eigen::MatrixXd gamma = fb.node_marginals();
    Eigen::MatrixXd xi_sum = fb.edge_marginals_sum(node, p.trans);

    double nll = fb.log_z - chain::path_score(node, p.trans, inst.combined);

    Eigen::Index at = 0;
    auto emit_grad = Eigen::Map<Eigen::MatrixXd>(grad.data() + at, dim, joint);
    at += dim * joint;
    auto trans_grad = Eigen::Map<Eigen::MatrixXd>(grad.data() + at, joint, joint);
    at += joint * joint;
    auto bias_grad = grad.segment(at, joint);
    at += joint;
    auto init_grad = grad.segment(at, joint);

    emit_grad.noalias() += inst.features.transpose() * gamma;
    trans_grad += xi_sum;
    bias_grad += gamma.colwise().sum().transpose();
    init_grad += gamma.row(0).transpose();
    for (int t = 0; t < steps; ++t) {
        const int y = inst.combined[t];
        emit_grad.col(y) -= inst.features.row(t).transpose();
        bias_grad(y) -= 1.0;
        if (t > 0) trans_grad(inst.combined[t - 1], y) -= 1.0;
    }
    init_grad(inst.combined[0]) -= 1.0;
    return nll;
}

}  // namespace detail

/// Unregularized NLL and its gradient over a batch, gradient in pack order.
/// Instances are evaluated concurrently; the reduction is a fixed-order sum
/// over instance slots, so results do not depend on the worker count.
inline std::pair<double, Eigen::VectorXd> crf_objective(const CrfParams& p,
                                                        const std::vector<CrfInstance>& batch) {
    const Eigen::Index n_params = crf_param_count(p.space, p.feature_dim);
    std::vector<double> nll(batch.size(), 0.0);
    std::vector<Eigen::VectorXd> grads(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
        grads[i] = Eigen::VectorXd::Zero(n_params);
        nll[i] = detail::crf_instance_objective(p, batch[i], grads[i]);
    });
    double total = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += nll[i];
        grad += grads[i];
    }
    return {total, std::move(grad)};
}

struct CrfTrainReport {
    int iterations = 0;
    bool converged = false;
    double final_nll = 0.0;
    double grad_max_norm = 0.0;
    std::vector<double> nll_trace;
};

/// Exact maximum likelihood from zero weights via limited-memory
/// quasi-Newton with backtracking line search; stops at max_iter or when the
/// gradient max-norm drops below 1e-5. No regularization.
inline CrfParams train_crf(const Dataset& train, int max_iter,
                           CrfTrainReport* report = nullptr) {
    if (max_iter < 1) throw ConfigError("train_crf: max_iter must be >= 1");
    if (train.instances.empty()) throw ConfigError("train_crf: empty training set");
    const LabelSpace& space = train.label_space;
    const int dim = train.feature_dim;
    std::vector<CrfInstance> batch = crf_instances(train);

    LbfgsObjective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        CrfParams p = unpack_crf(theta, space, dim);
        auto [nll, g] = crf_objective(p, batch);
        grad = std::move(g);
        return nll;
    };
    LbfgsOptions opts;
    opts.max_iterations = max_iter;
    opts.grad_tolerance = 1e-5;
    LbfgsResult res = lbfgs_minimize(objective, Eigen::VectorXd::Zero(crf_param_count(space, dim)), opts);
    if (report) {
        report->iterations = res.iterations;
        report->converged = res.converged;
        report->final_nll = res.objective;
        report->grad_max_norm = res.grad_max_norm;
        report->nll_trace = res.objective_trace;
    }
    return unpack_crf(res.x, space, dim);
}

/// Exact max-score decoding; ties toward the lower combined index.
inline std::vector<int> crf_decode(const CrfParams& p, const std::vector<Observation>& obs) {
    Eigen::MatrixXd node = crf_node_scores(p, features_matrix(obs));
    return chain::viterbi_path(node, p.trans);
}

// ---------------------------------------------------------------- factorial crf

namespace detail {

/// digit_table(space)(j, m) = label of resident m inside combined index j.
inline Eigen::MatrixXi digit_table(const LabelSpace& space) {
    const int joint = space.combined_size();
    Eigen::MatrixXi digits(joint, space.residents);
    for (int j = 0; j < joint; ++j) {
        int rem = j;
        for (int m = space.residents - 1; m >= 0; --m) {
            digits(j, m) = rem % space.sizes[m];
            rem /= space.sizes[m];
        }
    }
    return digits;
}

inline std::vector<std::pair<int, int>> chain_pairs(int residents) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < residents; ++a)
        for (int b = a + 1; b < residents; ++b) pairs.emplace_back(a, b);
    return pairs;
}

}  // namespace detail

inline FcrfParams make_zero_fcrf(const LabelSpace& space, int feature_dim) {
    FcrfParams p;
    p.space = space;
    p.feature_dim = feature_dim;
    for (int m = 0; m < space.residents; ++m) {
        const int k = space.sizes[m];
        p.emit.push_back(Eigen::MatrixXd::Zero(feature_dim, k));
        p.trans.push_back(Eigen::MatrixXd::Zero(k, k));
        p.bias.push_back(Eigen::VectorXd::Zero(k));
        p.init.push_back(Eigen::VectorXd::Zero(k));
    }
    for (auto [a, b] : detail::chain_pairs(space.residents))
        p.pair.push_back(Eigen::MatrixXd::Zero(space.sizes[a], space.sizes[b]));
    return p;
}

inline Eigen::Index fcrf_param_count(const LabelSpace& space, int feature_dim) {
    Eigen::Index n = 0;
    for (int m = 0; m < space.residents; ++m) {
        const Eigen::Index k = space.sizes[m];
        n += feature_dim * k + k * k + 2 * k;
    }
    for (auto [a, b] : detail::chain_pairs(space.residents))
        n += static_cast<Eigen::Index>(space.sizes[a]) * space.sizes[b];
    return n;
}

inline Eigen::VectorXd pack_fcrf(const FcrfParams& p) {
    Eigen::VectorXd theta(fcrf_param_count(p.space, p.feature_dim));
    Eigen::Index at = 0;
    auto put = [&](const Eigen::MatrixXd& m) {
        theta.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    };
    for (const auto& m : p.emit) put(m);
    for (const auto& m : p.trans) put(m);
    for (const auto& v : p.bias) theta.segment(at, v.size()) = v, at += v.size();
    for (const auto& v : p.init) theta.segment(at, v.size()) = v, at += v.size();
    for (const auto& m : p.pair) put(m);
    return theta;
}

inline FcrfParams unpack_fcrf(const Eigen::VectorXd& theta, const LabelSpace& space,
                              int feature_dim) {
    if (theta.size() != fcrf_param_count(space, feature_dim))
        throw DomainError("unpack_fcrf: parameter vector has wrong length");
    FcrfParams p = make_zero_fcrf(space, feature_dim);
    Eigen::Index at = 0;
    auto take = [&](Eigen::MatrixXd& m) {
        m = Eigen::Map<const Eigen::MatrixXd>(theta.data() + at, m.rows(), m.cols());
        at += m.size();
    };
    for (auto& m : p.emit) take(m);
    for (auto& m : p.trans) take(m);
    for (auto& v : p.bias) v = theta.segment(at, v.size()), at += v.size();
    for (auto& v : p.init) v = theta.segment(at, v.size()), at += v.size();
    for (auto& m : p.pair) take(m);
    return p;
}

/// Merged-chain log-potentials: node scores sum the per-chain emission, bias,
/// initial and pair terms; the edge table sums per-chain transitions.
inline Eigen::MatrixXd fcrf_node_scores(const FcrfParams& p, const Eigen::MatrixXd& features,
                                        const Eigen::MatrixXi& digits) {
    const int residents = p.space.residents;
    if (residents == 1 && p.pair.empty()) {
        Eigen::MatrixXd node = features * p.emit[0];
        node.rowwise() += p.bias[0].transpose();
        node.row(0) += p.init[0].transpose();
        return node;
    }
    const int joint = p.space.combined_size();
    std::vector<Eigen::MatrixXd> chain_nodes;
    for (int m = 0; m < residents; ++m) {
        Eigen::MatrixXd n = features * p.emit[m];
        n.rowwise() += p.bias[m].transpose();
        n.row(0) += p.init[m].transpose();
        chain_nodes.push_back(std::move(n));
    }
    auto pairs = detail::chain_pairs(residents);
    Eigen::VectorXd pair_sum = Eigen::VectorXd::Zero(joint);
    for (int j = 0; j < joint; ++j)
        for (std::size_t q = 0; q < pairs.size(); ++q)
            pair_sum(j) += p.pair[q](digits(j, pairs[q].first), digits(j, pairs[q].second));

    Eigen::MatrixXd node(features.rows(), joint);
    for (int j = 0; j < joint; ++j) {
        node.col(j) = chain_nodes[0].col(digits(j, 0));
        for (int m = 1; m < residents; ++m) node.col(j) += chain_nodes[m].col(digits(j, m));
        node.col(j).array() += pair_sum(j);
    }
    return node;
}

inline Eigen::MatrixXd fcrf_edge_scores(const FcrfParams& p, const Eigen::MatrixXi& digits) {
    if (p.space.residents == 1) return p.trans[0];
    const int joint = p.space.combined_size();
    Eigen::MatrixXd edge = Eigen::MatrixXd::Zero(joint, joint);
    for (int i = 0; i < joint; ++i)
        for (int j = 0; j < joint; ++j)
            for (int m = 0; m < p.space.residents; ++m)
                edge(i, j) += p.trans[m](digits(i, m), digits(j, m));
    return edge;
}

/// Merged-space marginals of the factorial model (exact clique-chain pass).
inline CrfMarginals fcrf_forward_backward(const FcrfParams& p,
                                          const std::vector<Observation>& obs) {
    Eigen::MatrixXi digits = detail::digit_table(p.space);
    Eigen::MatrixXd features = features_matrix(obs);
    Eigen::MatrixXd node = fcrf_node_scores(p, features, digits);
    Eigen::MatrixXd edge = fcrf_edge_scores(p, digits);
    auto fb = chain::forward_backward(node, edge);
    CrfMarginals out;
    out.log_z = fb.log_z;
    out.node = fb.node_marginals();
    for (int t = 1; t < node.rows(); ++t) out.edge.push_back(fb.edge_marginal(node, edge, t));
    return out;
}

namespace detail {

inline double fcrf_instance_objective(const FcrfParams& p, const CrfInstance& inst,
                                      const Eigen::MatrixXi& digits, FcrfParams& grad) {
    const int residents = p.space.residents;
    const int joint = p.space.combined_size();
    const int steps = inst.length();

    Eigen::MatrixXd node = fcrf_node_scores(p, inst.features, digits);
    Eigen::MatrixXd edge = fcrf_edge_scores(p, digits);
    auto fb = chain::forward_backward(node, edge);
    Eigen::MatrixXd gamma = fb.node_marginals();
    Eigen::MatrixXd xi_sum = fb.edge_marginals_sum(node, edge);
    double nll = fb.log_z - chain::path_score(node, edge, inst.combined);

    // fold merged marginals back onto the factored blocks; model expectations
    // are added before the empirical counts are subtracted, mirroring the
    // combined-CRF accumulation order exactly (the M=1 case reduces bitwise).
    for (int m = 0; m < residents; ++m) {
        Eigen::MatrixXd chain_gamma = Eigen::MatrixXd::Zero(steps, p.space.sizes[m]);
        for (int j = 0; j < joint; ++j) chain_gamma.col(digits(j, m)) += gamma.col(j);
        grad.emit[m].noalias() += inst.features.transpose() * chain_gamma;
        for (int i = 0; i < joint; ++i)
            for (int j = 0; j < joint; ++j)
                grad.trans[m](digits(i, m), digits(j, m)) += xi_sum(i, j);
        grad.bias[m] += chain_gamma.colwise().sum().transpose();
        grad.init[m] += chain_gamma.row(0).transpose();
        for (int t = 0; t < steps; ++t) {
            const int y = inst.chains[m][t];
            grad.emit[m].col(y) -= inst.features.row(t).transpose();
            grad.bias[m](y) -= 1.0;
            if (t > 0) grad.trans[m](inst.chains[m][t - 1], y) -= 1.0;
        }
        grad.init[m](inst.chains[m][0]) -= 1.0;
    }
    auto pairs = chain_pairs(residents);
    if (!pairs.empty()) {
        Eigen::VectorXd gamma_total = gamma.colwise().sum().transpose();
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            auto [a, b] = pairs[q];
            for (int j = 0; j < joint; ++j)
                grad.pair[q](digits(j, a), digits(j, b)) += gamma_total(j);
            for (int t = 0; t < steps; ++t)
                grad.pair[q](inst.chains[a][t], inst.chains[b][t]) -= 1.0;
        }
    }
    return nll;
}

}  // namespace detail

inline std::pair<double, Eigen::VectorXd> fcrf_objective(const FcrfParams& p,
                                                         const std::vector<CrfInstance>& batch) {
    Eigen::MatrixXi digits = detail::digit_table(p.space);
    std::vector<double> nll(batch.size(), 0.0);
    std::vector<FcrfParams> grads(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
        grads[i] = make_zero_fcrf(p.space, p.feature_dim);
        nll[i] = detail::fcrf_instance_objective(p, batch[i], digits, grads[i]);
    });
    double total = 0.0;
    FcrfParams grad = make_zero_fcrf(p.space, p.feature_dim);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += nll[i];
        for (int m = 0; m < p.space.residents; ++m) {
            grad.emit[m] += grads[i].emit[m];
            grad.trans[m] += grads[i].trans[m];
            grad.bias[m] += grads[i].bias[m];
            grad.init[m] += grads[i].init[m];
        }
        for (std::size_t q = 0; q < p.pair.size(); ++q) grad.pair[q] += grads[i].pair[q];
    }
    return {total, pack_fcrf(grad)};
}

inline FcrfParams train_fcrf(const Dataset& train, int max_iter,
                             CrfTrainReport* report = nullptr) {
    if (max_iter < 1) throw ConfigError("train_fcrf: max_iter must be >= 1");
    if (train.instances.empty()) throw ConfigError("train_fcrf: empty training set");
    const LabelSpace& space = train.label_space;
    const int dim = train.feature_dim;
    std::vector<CrfInstance> batch = crf_instances(train);

    LbfgsObjective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        FcrfParams p = unpack_fcrf(theta, space, dim);
        auto [nll, g] = fcrf_objective(p, batch);
        grad = std::move(g);
        return nll;
    };
    LbfgsOptions opts;
    opts.max_iterations = max_iter;
    opts.grad_tolerance = 1e-5;
    LbfgsResult res =
        lbfgs_minimize(objective, Eigen::VectorXd::Zero(fcrf_param_count(space, dim)), opts);
    if (report) {
        report->iterations = res.iterations;
        report->converged = res.converged;
        report->final_nll = res.objective;
        report->grad_max_norm = res.grad_max_norm;
        report->nll_trace = res.objective_trace;
    }
    return unpack_fcrf(res.x, space, dim);
}

/// Exact decoding in the merged space, split back per resident; ties toward
/// the lower merged index.
inline std::vector<std::vector<int>> fcrf_decode(const FcrfParams& p,
                                                 const std::vector<Observation>& obs) {
    Eigen::MatrixXi digits = detail::digit_table(p.space);
    Eigen::MatrixXd node = fcrf_node_scores(p, features_matrix(obs), digits);
    Eigen::MatrixXd edge = fcrf_edge_scores(p, digits);
    std::vector<int> merged = chain::viterbi_path(node, edge);
    std::vector<std::vector<int>> out(p.space.residents, std::vector<int>(merged.size()));
    for (std::size_t t = 0; t < merged.size(); ++t)
        for (int m = 0; m < p.space.residents; ++m) out[m][t] = digits(merged[t], m);
    return out;
}

// ---------------------------------------------------------------- model files

inline void save_crf(const CrfParams& p, std::ostream& out) {
    model_io::write_kind(out, "crf");
    model_io::write_space(out, p.space);
    out << "features " << p.feature_dim << "\n";
    model_io::write_matrix(out, "emit", p.emit);
    model_io::write_matrix(out, "trans", p.trans);
    model_io::write_vector(out, "bias", p.bias);
    model_io::write_vector(out, "init", p.init);
}

inline CrfParams load_crf(std::istream& in) {
    CrfParams p;
    p.space = model_io::read_space(in);
    std::string tag;
    if (!(in >> tag >> p.feature_dim) || tag != "features")
        throw FormatError("crf model: missing feature count");
    p.emit = model_io::read_matrix(in, "emit");
    p.trans = model_io::read_matrix(in, "trans");
    p.bias = model_io::read_vector(in, "bias");
    p.init = model_io::read_vector(in, "init");
    return p;
}

inline void save_fcrf(const FcrfParams& p, std::ostream& out) {
    model_io::write_kind(out, "fcrf");
    model_io::write_space(out, p.space);
    out << "features " << p.feature_dim << "\n";
    for (int m = 0; m < p.space.residents; ++m) {
        const std::string suffix = "_" + std::to_string(m);
        model_io::write_matrix(out, "emit" + suffix, p.emit[m]);
        model_io::write_matrix(out, "trans" + suffix, p.trans[m]);
        model_io::write_vector(out, "bias" + suffix, p.bias[m]);
        model_io::write_vector(out, "init" + suffix, p.init[m]);
    }
    for (std::size_t q = 0; q < p.pair.size(); ++q)
        model_io::write_matrix(out, "pair_" + std::to_string(q), p.pair[q]);
}

inline FcrfParams load_fcrf(std::istream& in) {
    LabelSpace space = model_io::read_space(in);
    std::string tag;
    int dim = 0;
    if (!(in >> tag >> dim) || tag != "features")
        throw FormatError("fcrf model: missing feature count");
    FcrfParams p = make_zero_fcrf(space, dim);
    for (int m = 0; m < space.residents; ++m) {
        const std::string suffix = "_" + std::to_string(m);
        p.emit[m] = model_io::read_matrix(in, "emit" + suffix);
        p.trans[m] = model_io::read_matrix(in, "trans" + suffix);
        p.bias[m] = model_io::read_vector(in, "bias" + suffix);
        p.init[m] = model_io::read_vector(in, "init" + suffix);
    }
    for (std::size_t q = 0; q < p.pair.size(); ++q)
        p.pair[q] = model_io::read_matrix(in, "pair_" + std::to_string(q));
    return p;
}

}  // namespace mrar
