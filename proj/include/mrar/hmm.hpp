#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mrar/chain.hpp"
#include "mrar/common.hpp"
#include "mrar/datamodel.hpp"
#include "mrar/model_io.hpp"

namespace mrar {

// Generative chain models over combined activity labels. The combined HMM
// keeps one hidden variable over the product space; the factorial variant
// keeps one chain per resident whose transition conditions on the full
// previous joint state. Both share the emission table over joint sensor
// symbols plus one reserved UNK column that only ever receives smoothing
// mass.

struct HmmParams {
    LabelSpace space;
    double alpha = 0.0;         // Laplace smoothing used at training time
    Eigen::VectorXd prior;      // J
    Eigen::MatrixXd transition; // J x J, row-stochastic
    Eigen::MatrixXd emission;   // J x (S + 1), last column is UNK

    int joint_states() const { return static_cast<int>(prior.size()); }
    int symbols() const { return static_cast<int>(emission.cols()) - 1; }
};

struct FhmmParams {
    LabelSpace space;
    double alpha = 0.0;
    std::vector<Eigen::VectorXd> priors;       // per resident, K^m
    std::vector<Eigen::MatrixXd> transitions;  // per resident, J x K^m
    Eigen::MatrixXd emission;                  // J x (S + 1), shared

    int joint_states() const { return static_cast<int>(emission.rows()); }
    int symbols() const { return static_cast<int>(emission.cols()) - 1; }
};

namespace detail {

inline void smooth_rows(Eigen::MatrixXd& counts, double alpha) {
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
        double total = counts.row(r).sum() + alpha * counts.cols();
        counts.row(r) = (counts.row(r).array() + alpha) / total;
    }
}

inline void check_training_inputs(const Dataset& train, double alpha) {
    if (train.instances.empty()) throw ConfigError("hmm training: empty training set");
    if (!(alpha > 0.0)) throw ConfigError("hmm training: smoothing factor must be positive");
}

}  // namespace detail

// ---------------------------------------------------------------- training

/// Smoothed maximum-likelihood estimates over combined labels:
/// p = (count + alpha) / (row total + alpha * width).
inline HmmParams train_hmm(const Dataset& train, double alpha) {
    detail::check_training_inputs(train, alpha);
    const int joint = train.label_space.combined_size();
    const int symbols = train.codec.size();

    Eigen::MatrixXd prior = Eigen::MatrixXd::Zero(1, joint);
    Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(joint, joint);
    Eigen::MatrixXd emit = Eigen::MatrixXd::Zero(joint, symbols + 1);
    for (const auto& inst : train.instances) {
        int prev = -1;
        for (int t = 0; t < inst.length(); ++t) {
            int j = encode_combined(inst.activities[t], train.label_space);
            if (t == 0)
                prior(0, j) += 1.0;
            else
                trans(prev, j) += 1.0;
            emit(j, inst.observations[t].symbol) += 1.0;
            prev = j;
        }
    }
    detail::smooth_rows(prior, alpha);
    detail::smooth_rows(trans, alpha);
    detail::smooth_rows(emit, alpha);

    HmmParams params;
    params.space = train.label_space;
    params.alpha = alpha;
    params.prior = prior.row(0).transpose();
    params.transition = std::move(trans);
    params.emission = std::move(emit);
    return params;
}

/// As train_hmm, but priors count a^{m,1} and each resident's transition row
/// is indexed by the full previous joint state. Emission is shared.
inline FhmmParams train_fhmm(const Dataset& train, double alpha) {
    detail::check_training_inputs(train, alpha);
    const LabelSpace& space = train.label_space;
    const int joint = space.combined_size();
    const int symbols = train.codec.size();

    std::vector<Eigen::MatrixXd> priors, trans;
    for (int m = 0; m < space.residents; ++m) {
        priors.push_back(Eigen::MatrixXd::Zero(1, space.sizes[m]));
        trans.push_back(Eigen::MatrixXd::Zero(joint, space.sizes[m]));
    }
    Eigen::MatrixXd emit = Eigen::MatrixXd::Zero(joint, symbols + 1);
    for (const auto& inst : train.instances) {
        int prev = -1;
        for (int t = 0; t < inst.length(); ++t) {
            int j = encode_combined(inst.activities[t], space);
            for (int m = 0; m < space.residents; ++m) {
                int label = inst.activities[t].labels[m];
                if (t == 0)
                    priors[m](0, label) += 1.0;
                else
                    trans[m](prev, label) += 1.0;
            }
            emit(j, inst.observations[t].symbol) += 1.0;
            prev = j;
        }
    }
    FhmmParams params;
    params.space = space;
    params.alpha = alpha;
    for (int m = 0; m < space.residents; ++m) {
        detail::smooth_rows(priors[m], alpha);
        detail::smooth_rows(trans[m], alpha);
        params.priors.push_back(priors[m].row(0).transpose());
    }
    detail::smooth_rows(emit, alpha);
    params.transitions = std::move(trans);
    params.emission = std::move(emit);
    return params;
}

// ---------------------------------------------------------------- decoding

namespace detail {

inline Eigen::MatrixXd hmm_node_scores(const Eigen::VectorXd& prior,
                                       const Eigen::MatrixXd& emission,
                                       const std::vector<Observation>& obs) {
    const int steps = static_cast<int>(obs.size());
    const int joint = static_cast<int>(emission.rows());
    Eigen::MatrixXd log_emit = emission.array().log().matrix();
    Eigen::MatrixXd node(steps, joint);
    for (int t = 0; t < steps; ++t) node.row(t) = log_emit.col(obs[t].symbol).transpose();
    node.row(0) += prior.array().log().matrix().transpose();
    return node;
}

}  // namespace detail

/// Most likely combined-state sequence (exact, log-space Viterbi).
inline std::vector<int> viterbi(const HmmParams& params, const std::vector<Observation>& obs) {
    if (obs.empty()) throw DomainError("viterbi: empty observation sequence");
    Eigen::MatrixXd node = detail::hmm_node_scores(params.prior, params.emission, obs);
    Eigen::MatrixXd edge = params.transition.array().log().matrix();
    return chain::viterbi_path(node, edge);
}

/// Embeds the factorial model in the combined space: the transition from
/// joint i to joint j scores prod_m A_m(i -> j_m), priors multiply likewise.
inline HmmParams combined_from_fhmm(const FhmmParams& params) {
    const LabelSpace& space = params.space;
    const int joint = params.joint_states();
    HmmParams out;
    out.space = space;
    out.alpha = params.alpha;
    out.emission = params.emission;
    out.prior = Eigen::VectorXd::Ones(joint);
    out.transition = Eigen::MatrixXd::Ones(joint, joint);
    for (int j = 0; j < joint; ++j) {
        ActivityFrame frame = decode_combined(j, space);
        for (int m = 0; m < space.residents; ++m)
            out.prior(j) *= params.priors[m](frame.labels[m]);
        for (int i = 0; i < joint; ++i)
            for (int m = 0; m < space.residents; ++m)
                out.transition(i, j) *= params.transitions[m](i, frame.labels[m]);
    }
    return out;
}

/// Exact joint-space Viterbi for the factorial model; output is split into
/// per-resident label sequences.
inline std::vector<std::vector<int>> viterbi_fhmm(const FhmmParams& params,
                                                  const std::vector<Observation>& obs) {
    if (obs.empty()) throw DomainError("viterbi_fhmm: empty observation sequence");
    HmmParams combined = combined_from_fhmm(params);
    std::vector<int> joint_path = viterbi(combined, obs);
    const LabelSpace& space = params.space;
    std::vector<std::vector<int>> per_resident(space.residents,
                                               std::vector<int>(joint_path.size()));
    for (std::size_t t = 0; t < joint_path.size(); ++t) {
        ActivityFrame frame = decode_combined(joint_path[t], space);
        for (int m = 0; m < space.residents; ++m) per_resident[m][t] = frame.labels[m];
    }
    return per_resident;
}

// ---------------------------------------------------------------- likelihood

/// Log joint probability of the instance's labels and observations.
inline double hmm_log_likelihood(const HmmParams& params, const SequenceInstance& inst) {
    if (inst.observations.size() != inst.activities.size() || inst.observations.empty())
        throw DomainError("hmm_log_likelihood: misaligned instance");
    double ll = 0.0;
    int prev = -1;
    for (int t = 0; t < inst.length(); ++t) {
        int j = encode_combined(inst.activities[t], params.space);
        ll += t == 0 ? std::log(params.prior(j)) : std::log(params.transition(prev, j));
        ll += std::log(params.emission(j, inst.observations[t].symbol));
        prev = j;
    }
    return ll;
}

inline double hmm_log_likelihood(const FhmmParams& params, const SequenceInstance& inst) {
    if (inst.observations.size() != inst.activities.size() || inst.observations.empty())
        throw DomainError("hmm_log_likelihood: misaligned instance");
    double ll = 0.0;
    int prev = -1;
    for (int t = 0; t < inst.length(); ++t) {
        int j = encode_combined(inst.activities[t], params.space);
        for (int m = 0; m < params.space.residents; ++m) {
            int label = inst.activities[t].labels[m];
            ll += t == 0 ? std::log(params.priors[m](label))
                         : std::log(params.transitions[m](prev, label));
        }
        ll += std::log(params.emission(j, inst.observations[t].symbol));
        prev = j;
    }
    return ll;
}

// ---------------------------------------------------------------- model files

inline void save_hmm(const HmmParams& params, std::ostream& out) {
    model_io::write_kind(out, "hmm");
    model_io::write_space(out, params.space);
    out << "alpha " << double_to_text(params.alpha) << "\n";
    out << "symbols " << params.symbols() << "\n";
    model_io::write_vector(out, "prior", params.prior);
    model_io::write_matrix(out, "transition", params.transition);
    model_io::write_matrix(out, "emission", params.emission);
}

inline HmmParams load_hmm(std::istream& in) {
    HmmParams params;
    params.space = model_io::read_space(in);
    std::string tag;
    int symbols = 0;
    if (!(in >> tag >> tag)) throw FormatError("hmm model: missing alpha");
    params.alpha = text_to_double(tag);
    if (!(in >> tag >> symbols) || tag != "symbols")
        throw FormatError("hmm model: missing symbols");
    params.prior = model_io::read_vector(in, "prior");
    params.transition = model_io::read_matrix(in, "transition");
    params.emission = model_io::read_matrix(in, "emission");
    return params;
}

inline void save_fhmm(const FhmmParams& params, std::ostream& out) {
    model_io::write_kind(out, "fhmm");
    model_io::write_space(out, params.space);
    out << "alpha " << double_to_text(params.alpha) << "\n";
    out << "symbols " << params.symbols() << "\n";
    for (int m = 0; m < params.space.residents; ++m) {
        model_io::write_vector(out, "prior_" + std::to_string(m), params.priors[m]);
        model_io::write_matrix(out, "transition_" + std::to_string(m), params.transitions[m]);
    }
    model_io::write_matrix(out, "emission", params.emission);
}

inline FhmmParams load_fhmm(std::istream& in) {
    FhmmParams params;
    params.space = model_io::read_space(in);
    std::string tag;
    int symbols = 0;
    if (!(in >> tag >> tag)) throw FormatError("fhmm model: missing alpha");
    params.alpha = text_to_double(tag);
    if (!(in >> tag >> symbols) || tag != "symbols")
        throw FormatError("fhmm model: missing symbols");
    for (int m = 0; m < params.space.residents; ++m) {
        params.priors.push_back(model_io::read_vector(in, "prior_" + std::to_string(m)));
        params.transitions.push_back(
            model_io::read_matrix(in, "transition_" + std::to_string(m)));
    }
    params.emission = model_io::read_matrix(in, "emission");
    return params;
}

}  // namespace mrar
