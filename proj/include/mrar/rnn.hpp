#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mrar/common.hpp"
#include "mrar/datamodel.hpp"
#include "mrar/eval.hpp"
#include "mrar/model_io.hpp"

namespace mrar {

// Recurrent sequence classifiers trained by full backpropagation-through-time
// with per-sequence SGD and early stopping. The hidden layer is shared; the
// output is either one softmax over the combined label space or M per-resident
// softmax heads. Gate blocks live in column slices of the packed weight
// matrices: tanh [a]; GRU [update, reset, candidate]; LSTM [input, forget,
// cell, output].

enum class CellKind { Tanh, Gru, Lstm };
enum class HeadMode { Combined, Separate };

inline int gate_blocks(CellKind cell) {
    switch (cell) {
        case CellKind::Tanh: return 1;
        case CellKind::Gru: return 3;
        case CellKind::Lstm: return 4;
    }
    throw ConfigError("unknown cell kind");
}

inline std::string cell_name(CellKind cell) {
    switch (cell) {
        case CellKind::Tanh: return "tanh";
        case CellKind::Gru: return "gru";
        case CellKind::Lstm: return "lstm";
    }
    throw ConfigError("unknown cell kind");
}

inline CellKind parse_cell(const std::string& name) {
    if (name == "tanh") return CellKind::Tanh;
    if (name == "gru") return CellKind::Gru;
    if (name == "lstm") return CellKind::Lstm;
    throw ConfigError("unknown cell kind '" + name + "'");
}

inline std::string head_name(HeadMode head) {
    return head == HeadMode::Combined ? "combined" : "separate";
}

inline HeadMode parse_head(const std::string& name) {
    if (name == "combined") return HeadMode::Combined;
    if (name == "separate") return HeadMode::Separate;
    throw ConfigError("unknown head mode '" + name + "'");
}

struct RnnConfig {
    CellKind cell = CellKind::Tanh;
    HeadMode head = HeadMode::Combined;
    int hidden = 10;
    double learning_rate = 0.1;
    int max_epochs = 200;
    int patience = 10;
    std::uint64_t seed = 0;
    double clip_norm = 5.0;

    void validate() const {
        if (hidden < 1) throw ConfigError("rnn: hidden size must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("rnn: learning rate must be positive");
        if (patience < 1) throw ConfigError("rnn: patience must be >= 1");
        if (max_epochs < 1) throw ConfigError("rnn: max epochs must be >= 1");
    }
};

struct RnnParams {
    CellKind cell = CellKind::Tanh;
    HeadMode head = HeadMode::Combined;
    LabelSpace space;
    int feature_dim = 0;
    int hidden = 0;
    std::uint64_t seed = 0;

    Eigen::MatrixXd input_w;              // D x G*H
    Eigen::MatrixXd recur_w;              // H x G*H
    Eigen::VectorXd gate_bias;            // G*H
    std::vector<Eigen::MatrixXd> head_w;  // combined: one H x J; separate: M of H x K^m
    std::vector<Eigen::VectorXd> head_b;

    int head_count() const { return static_cast<int>(head_w.size()); }
    int head_classes(int h) const { return static_cast<int>(head_b[h].size()); }
};

/// Uniform(-1/sqrt(H), 1/sqrt(H)) matrix init with zero biases; the LSTM
/// forget-gate bias starts at one. Fill order is pinned for reproducibility.
inline RnnParams init_rnn(const RnnConfig& cfg, const LabelSpace& space, int feature_dim) {
    cfg.validate();
    space.validate();
    RnnParams p;
    p.cell = cfg.cell;
    p.head = cfg.head;
    p.space = space;
    p.feature_dim = feature_dim;
    p.hidden = cfg.hidden;
    p.seed = cfg.seed;

    const int blocks = gate_blocks(cfg.cell);
    const int width = blocks * cfg.hidden;
    Rng rng(cfg.seed);
    const double r = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    auto fill = [&](Eigen::MatrixXd& m, int rows, int cols) {
        m.resize(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-r, r);
    };
    fill(p.input_w, feature_dim, width);
    fill(p.recur_w, cfg.hidden, width);
    p.gate_bias = Eigen::VectorXd::Zero(width);
    if (cfg.cell == CellKind::Lstm)
        p.gate_bias.segment(cfg.hidden, cfg.hidden).setOnes();  // forget block

    const int heads = cfg.head == HeadMode::Combined ? 1 : space.residents;
    for (int h = 0; h < heads; ++h) {
        const int classes =
            cfg.head == HeadMode::Combined ? space.combined_size() : space.sizes[h];
        Eigen::MatrixXd u;
        fill(u, cfg.hidden, classes);
        p.head_w.push_back(std::move(u));
        p.head_b.push_back(Eigen::VectorXd::Zero(classes));
    }
    return p;
}

// ---------------------------------------------------------------- forward

struct RnnForward {
    Eigen::MatrixXd hidden;              // T x H
    Eigen::MatrixXd gates;               // T x G*H, post-nonlinearity
    Eigen::MatrixXd cell_state;          // T x H (LSTM only)
    Eigen::MatrixXd cell_tanh;           // T x H (LSTM only)
    std::vector<Eigen::MatrixXd> probs;  // per head: T x K, rows sum to 1
};

namespace detail {

inline Eigen::RowVectorXd sigmoid(const Eigen::RowVectorXd& v) {
    return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

inline Eigen::RowVectorXd softmax_row(const Eigen::RowVectorXd& logits) {
    Eigen::ArrayXd a = logits.transpose().array();
    double m = a.maxCoeff();
    Eigen::ArrayXd e = (a - m).exp();
    return (e / e.sum()).matrix().transpose();
}

}  // namespace detail

inline RnnForward rnn_forward(const RnnParams& p, const Eigen::MatrixXd& features) {
    if (features.cols() != p.feature_dim)
        throw ConfigError("rnn_forward: feature dimensionality mismatch");
    const int steps = static_cast<int>(features.rows());
    const int h_size = p.hidden;
    const int width = gate_blocks(p.cell) * h_size;

    RnnForward out;
    out.hidden.resize(steps, h_size);
    out.gates.resize(steps, width);
    if (p.cell == CellKind::Lstm) {
        out.cell_state.resize(steps, h_size);
        out.cell_tanh.resize(steps, h_size);
    }

    Eigen::RowVectorXd h_prev = Eigen::RowVectorXd::Zero(h_size);
    Eigen::RowVectorXd c_prev = Eigen::RowVectorXd::Zero(h_size);
    for (int t = 0; t < steps; ++t) {
        const Eigen::RowVectorXd x = features.row(t);
        switch (p.cell) {
            case CellKind::Tanh: {
                Eigen::RowVectorXd a =
                    x * p.input_w + h_prev * p.recur_w + p.gate_bias.transpose();
                out.hidden.row(t) = a.array().tanh().matrix();
                out.gates.row(t) = out.hidden.row(t);
                break;
            }
            case CellKind::Gru: {
                // pre-activations for all three blocks; the candidate block's
                // recurrent part is recomputed with the reset-gated state
                Eigen::RowVectorXd zx = x * p.input_w.middleCols(0, h_size) +
                                        h_prev * p.recur_w.middleCols(0, h_size) +
                                        p.gate_bias.segment(0, h_size).transpose();
                Eigen::RowVectorXd rx = x * p.input_w.middleCols(h_size, h_size) +
                                        h_prev * p.recur_w.middleCols(h_size, h_size) +
                                        p.gate_bias.segment(h_size, h_size).transpose();
                Eigen::RowVectorXd z = detail::sigmoid(zx);
                Eigen::RowVectorXd r = detail::sigmoid(rx);
                Eigen::RowVectorXd gated = r.cwiseProduct(h_prev);
                Eigen::RowVectorXd nx = x * p.input_w.middleCols(2 * h_size, h_size) +
                                        gated * p.recur_w.middleCols(2 * h_size, h_size) +
                                        p.gate_bias.segment(2 * h_size, h_size).transpose();
                Eigen::RowVectorXd n = nx.array().tanh().matrix();
                out.gates.row(t).segment(0, h_size) = z;
                out.gates.row(t).segment(h_size, h_size) = r;
                out.gates.row(t).segment(2 * h_size, h_size) = n;
                out.hidden.row(t) =
                    (Eigen::RowVectorXd::Ones(h_size) - z).cwiseProduct(h_prev) +
                    z.cwiseProduct(n);
                break;
            }
            case CellKind::Lstm: {
                Eigen::RowVectorXd a =
                    x * p.input_w + h_prev * p.recur_w + p.gate_bias.transpose();
                Eigen::RowVectorXd i = detail::sigmoid(a.segment(0, h_size));
                Eigen::RowVectorXd f = detail::sigmoid(a.segment(h_size, h_size));
                Eigen::RowVectorXd g = a.segment(2 * h_size, h_size).array().tanh().matrix();
                Eigen::RowVectorXd o = detail::sigmoid(a.segment(3 * h_size, h_size));
                Eigen::RowVectorXd c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
                Eigen::RowVectorXd tc = c.array().tanh().matrix();
                out.gates.row(t).segment(0, h_size) = i;
                out.gates.row(t).segment(h_size, h_size) = f;
                out.gates.row(t).segment(2 * h_size, h_size) = g;
                out.gates.row(t).segment(3 * h_size, h_size) = o;
                out.cell_state.row(t) = c;
                out.cell_tanh.row(t) = tc;
                out.hidden.row(t) = o.cwiseProduct(tc);
                c_prev = c;
                break;
            }
        }
        h_prev = out.hidden.row(t);
    }

    for (int h = 0; h < p.head_count(); ++h) {
        Eigen::MatrixXd probs(steps, p.head_classes(h));
        for (int t = 0; t < steps; ++t)
            probs.row(t) = detail::softmax_row(
                out.hidden.row(t) * p.head_w[h] + p.head_b[h].transpose());
        out.probs.push_back(std::move(probs));
    }
    return out;
}

// ---------------------------------------------------------------- loss

/// Per-head class targets for one instance: combined mode encodes the frame,
/// separate mode peels one target sequence per resident.
inline std::vector<std::vector<int>> head_targets(const SequenceInstance& inst,
                                                  const LabelSpace& space, HeadMode head) {
    std::vector<std::vector<int>> targets;
    if (head == HeadMode::Combined) {
        std::vector<int> seq(inst.length());
        for (int t = 0; t < inst.length(); ++t)
            seq[t] = encode_combined(inst.activities[t], space);
        targets.push_back(std::move(seq));
    } else {
        for (int m = 0; m < space.residents; ++m) {
            std::vector<int> seq(inst.length());
            for (int t = 0; t < inst.length(); ++t) seq[t] = inst.activities[t].labels[m];
            targets.push_back(std::move(seq));
        }
    }
    return targets;
}

/// Mean over steps of the summed per-head cross-entropies.
inline double rnn_loss(const RnnForward& fwd, const std::vector<std::vector<int>>& targets) {
    if (fwd.probs.size() != targets.size())
        throw DomainError("rnn_loss: head count mismatch");
    const int steps = static_cast<int>(fwd.probs[0].rows());
    double total = 0.0;
    for (std::size_t h = 0; h < targets.size(); ++h) {
        if (static_cast<int>(targets[h].size()) != steps)
            throw DomainError("rnn_loss: target length mismatch");
        for (int t = 0; t < steps; ++t) total -= std::log(fwd.probs[h](t, targets[h][t]));
    }
    return total / steps;
}

// ---------------------------------------------------------------- backward

struct RnnGradients {
    Eigen::MatrixXd input_w;
    Eigen::MatrixXd recur_w;
    Eigen::VectorXd gate_bias;
    std::vector<Eigen::MatrixXd> head_w;
    std::vector<Eigen::VectorXd> head_b;

    double global_norm() const {
        double sq = input_w.squaredNorm() + recur_w.squaredNorm() + gate_bias.squaredNorm();
        for (const auto& m : head_w) sq += m.squaredNorm();
        for (const auto& v : head_b) sq += v.squaredNorm();
        return std::sqrt(sq);
    }

    void scale(double s) {
        input_w *= s;
        recur_w *= s;
        gate_bias *= s;
        for (auto& m : head_w) m *= s;
        for (auto& v : head_b) v *= s;
    }
};

/// Exact gradients of rnn_loss via full BPTT, then global-norm clipping at
/// clip_norm (pass +inf to disable, e.g. for finite-difference checks).
inline RnnGradients rnn_backward(const RnnParams& p, const Eigen::MatrixXd& features,
                                 const RnnForward& fwd,
                                 const std::vector<std::vector<int>>& targets,
                                 double clip_norm) {
    const int steps = static_cast<int>(features.rows());
    const int h_size = p.hidden;
    const int width = gate_blocks(p.cell) * h_size;
    const double inv_steps = 1.0 / steps;

    RnnGradients g;
    g.input_w = Eigen::MatrixXd::Zero(p.feature_dim, width);
    g.recur_w = Eigen::MatrixXd::Zero(h_size, width);
    g.gate_bias = Eigen::VectorXd::Zero(width);
    for (int h = 0; h < p.head_count(); ++h) {
        g.head_w.push_back(Eigen::MatrixXd::Zero(h_size, p.head_classes(h)));
        g.head_b.push_back(Eigen::VectorXd::Zero(p.head_classes(h)));
    }

    Eigen::RowVectorXd dh_carry = Eigen::RowVectorXd::Zero(h_size);
    Eigen::RowVectorXd dc_carry = Eigen::RowVectorXd::Zero(h_size);
    for (int t = steps - 1; t >= 0; --t) {
        const Eigen::RowVectorXd x = features.row(t);
        const Eigen::RowVectorXd h_prev =
            t > 0 ? Eigen::RowVectorXd(fwd.hidden.row(t - 1))
                  : Eigen::RowVectorXd(Eigen::RowVectorXd::Zero(h_size));

        Eigen::RowVectorXd dh = dh_carry;
        for (int h = 0; h < p.head_count(); ++h) {
            Eigen::RowVectorXd dlogits = fwd.probs[h].row(t) * inv_steps;
            dlogits(targets[h][t]) -= inv_steps;
            g.head_w[h].noalias() += fwd.hidden.row(t).transpose() * dlogits;
            g.head_b[h] += dlogits.transpose();
            dh.noalias() += dlogits * p.head_w[h].transpose();
        }

        switch (p.cell) {
            case CellKind::Tanh: {
                const Eigen::RowVectorXd h = fwd.hidden.row(t);
                Eigen::RowVectorXd da =
                    dh.cwiseProduct((1.0 - h.array().square()).matrix());
                g.input_w.noalias() += x.transpose() * da;
                g.recur_w.noalias() += h_prev.transpose() * da;
                g.gate_bias += da.transpose();
                dh_carry = da * p.recur_w.transpose();
                break;
            }
            case CellKind::Gru: {
                const Eigen::RowVectorXd z = fwd.gates.row(t).segment(0, h_size);
                const Eigen::RowVectorXd r = fwd.gates.row(t).segment(h_size, h_size);
                const Eigen::RowVectorXd n = fwd.gates.row(t).segment(2 * h_size, h_size);
                Eigen::RowVectorXd dz = dh.cwiseProduct(n - h_prev);
                Eigen::RowVectorXd dn = dh.cwiseProduct(z);
                Eigen::RowVectorXd dhp =
                    dh.cwiseProduct(Eigen::RowVectorXd::Ones(h_size) - z);

                Eigen::RowVectorXd dan =
                    dn.cwiseProduct((1.0 - n.array().square()).matrix());
                g.input_w.middleCols(2 * h_size, h_size).noalias() += x.transpose() * dan;
                g.recur_w.middleCols(2 * h_size, h_size).noalias() +=
                    r.cwiseProduct(h_prev).transpose() * dan;
                g.gate_bias.segment(2 * h_size, h_size) += dan.transpose();
                Eigen::RowVectorXd dgated =
                    dan * p.recur_w.middleCols(2 * h_size, h_size).transpose();
                Eigen::RowVectorXd dr = dgated.cwiseProduct(h_prev);
                dhp += dgated.cwiseProduct(r);

                Eigen::RowVectorXd daz =
                    dz.cwiseProduct(z.cwiseProduct(Eigen::RowVectorXd::Ones(h_size) - z));
                Eigen::RowVectorXd dar =
                    dr.cwiseProduct(r.cwiseProduct(Eigen::RowVectorXd::Ones(h_size) - r));
                g.input_w.middleCols(0, h_size).noalias() += x.transpose() * daz;
                g.recur_w.middleCols(0, h_size).noalias() += h_prev.transpose() * daz;
                g.gate_bias.segment(0, h_size) += daz.transpose();
                dhp += daz * p.recur_w.middleCols(0, h_size).transpose();
                g.input_w.middleCols(h_size, h_size).noalias() += x.transpose() * dar;
                g.recur_w.middleCols(h_size, h_size).noalias() += h_prev.transpose() * dar;
                g.gate_bias.segment(h_size, h_size) += dar.transpose();
                dhp += dar * p.recur_w.middleCols(h_size, h_size).transpose();

                dh_carry = dhp;
                break;
            }
            case CellKind::Lstm: {
                const Eigen::RowVectorXd i = fwd.gates.row(t).segment(0, h_size);
                const Eigen::RowVectorXd f = fwd.gates.row(t).segment(h_size, h_size);
                const Eigen::RowVectorXd gg = fwd.gates.row(t).segment(2 * h_size, h_size);
                const Eigen::RowVectorXd o = fwd.gates.row(t).segment(3 * h_size, h_size);
                const Eigen::RowVectorXd tc = fwd.cell_tanh.row(t);
                const Eigen::RowVectorXd c_prev =
                    t > 0 ? Eigen::RowVectorXd(fwd.cell_state.row(t - 1))
                          : Eigen::RowVectorXd(Eigen::RowVectorXd::Zero(h_size));

                Eigen::RowVectorXd d_o = dh.cwiseProduct(tc);
                Eigen::RowVectorXd dc =
                    dc_carry +
                    dh.cwiseProduct(o.cwiseProduct((1.0 - tc.array().square()).matrix()));
                Eigen::RowVectorXd di = dc.cwiseProduct(gg);
                Eigen::RowVectorXd dg = dc.cwiseProduct(i);
                Eigen::RowVectorXd df = dc.cwiseProduct(c_prev);
                dc_carry = dc.cwiseProduct(f);

                Eigen::RowVectorXd da(width);
                da.segment(0, h_size) =
                    di.cwiseProduct(i.cwiseProduct(Eigen::RowVectorXd::Ones(h_size) - i));
                da.segment(h_size, h_size) =
                    df.cwiseProduct(f.cwiseProduct(Eigen::RowVectorXd::Ones(h_size) - f));
                da.segment(2 * h_size, h_size) =
                    dg.cwiseProduct((1.0 - gg.array().square()).matrix());
                da.segment(3 * h_size, h_size) =
                    d_o.cwiseProduct(o.cwiseProduct(Eigen::RowVectorXd::Ones(h_size) - o));

                g.input_w.noalias() += x.transpose() * da;
                g.recur_w.noalias() += h_prev.transpose() * da;
                g.gate_bias += da.transpose();
                dh_carry = da * p.recur_w.transpose();
                break;
            }
        }
        for (Eigen::Index k = 0; k < dh_carry.size(); ++k)
            if (!std::isfinite(dh_carry(k)))
                throw TrainingError("rnn_backward: non-finite gradient at step " +
                                    std::to_string(t));
    }

    double norm = g.global_norm();
    if (std::isfinite(clip_norm) && norm > clip_norm && norm > 0.0)
        g.scale(clip_norm / norm);
    return g;
}

// ---------------------------------------------------------------- decode

/// Per-step argmax of each head; combined heads are split back into
/// per-resident labels. Ties go to the lower index.
inline std::vector<std::vector<int>> rnn_decode(const RnnParams& p,
                                                const std::vector<Observation>& obs) {
    if (obs.empty()) throw DomainError("rnn_decode: empty observation sequence");
    RnnForward fwd = rnn_forward(p, features_matrix(obs));
    const int steps = static_cast<int>(obs.size());
    std::vector<std::vector<int>> out(p.space.residents, std::vector<int>(steps));
    for (int t = 0; t < steps; ++t) {
        if (p.head == HeadMode::Combined) {
            int arg = 0;
            for (int j = 1; j < fwd.probs[0].cols(); ++j)
                if (fwd.probs[0](t, j) > fwd.probs[0](t, arg)) arg = j;
            ActivityFrame frame = decode_combined(arg, p.space);
            for (int m = 0; m < p.space.residents; ++m) out[m][t] = frame.labels[m];
        } else {
            for (int m = 0; m < p.space.residents; ++m) {
                int arg = 0;
                for (int k = 1; k < fwd.probs[m].cols(); ++k)
                    if (fwd.probs[m](t, k) > fwd.probs[m](t, arg)) arg = k;
                out[m][t] = arg;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- training

struct RnnTraceRow {
    int epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

/// One SGD step per day-sequence (shuffled each epoch by seed), full BPTT,
/// early stopping on validation joint accuracy: training halts once the best
/// epoch is `patience` epochs old and the best-so-far parameters are
/// returned. Deterministic given the seed.
inline RnnParams train_rnn(const Dataset& train, const Dataset& val, const RnnConfig& cfg,
                           std::vector<RnnTraceRow>* trace = nullptr) {
    cfg.validate();
    if (train.instances.empty()) throw ConfigError("train_rnn: empty training set");
    if (val.instances.empty()) throw ConfigError("train_rnn: validation set required");

    const LabelSpace& space = train.label_space;
    RnnParams params = init_rnn(cfg, space, train.feature_dim);

    std::vector<Eigen::MatrixXd> features;
    std::vector<std::vector<std::vector<int>>> targets;
    for (const auto& inst : train.instances) {
        features.push_back(features_matrix(inst.observations));
        targets.push_back(head_targets(inst, space, cfg.head));
    }

    Rng rng(cfg.seed + 0x9e3779b97f4a7c15ull);  // separate stream from init
    std::vector<std::size_t> order(train.instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    RnnParams best = params;
    double best_acc = -1.0;
    int best_epoch = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            RnnForward fwd = rnn_forward(params, features[idx]);
            double loss = rnn_loss(fwd, targets[idx]);
            if (!std::isfinite(loss))
                throw TrainingError("train_rnn: loss diverged at epoch " +
                                    std::to_string(epoch + 1));
            loss_sum += loss;
            RnnGradients g =
                rnn_backward(params, features[idx], fwd, targets[idx], cfg.clip_norm);
            params.input_w -= cfg.learning_rate * g.input_w;
            params.recur_w -= cfg.learning_rate * g.recur_w;
            params.gate_bias -= cfg.learning_rate * g.gate_bias;
            for (int h = 0; h < params.head_count(); ++h) {
                params.head_w[h] -= cfg.learning_rate * g.head_w[h];
                params.head_b[h] -= cfg.learning_rate * g.head_b[h];
            }
        }

        PredictionSet preds;
        for (const auto& inst : val.instances)
            preds.frames.push_back(
                frames_from_per_resident(rnn_decode(params, inst.observations)));
        double acc = accuracy_all(preds, val);
        if (trace)
            trace->push_back({epoch + 1, loss_sum / static_cast<double>(order.size()), acc});
        if (acc > best_acc) {
            best_acc = acc;
            best = params;
            best_epoch = epoch;
        }
        if (epoch - best_epoch >= cfg.patience) break;
    }
    return best;
}

// ---------------------------------------------------------------- model files

inline void save_rnn(const RnnParams& p, std::ostream& out) {
    model_io::write_kind(out, "rnn");
    model_io::write_space(out, p.space);
    out << "cell " << cell_name(p.cell) << "\n";
    out << "headmode " << head_name(p.head) << "\n";
    out << "features " << p.feature_dim << "\n";
    out << "hidden " << p.hidden << "\n";
    out << "seed " << p.seed << "\n";
    model_io::write_matrix(out, "input_w", p.input_w);
    model_io::write_matrix(out, "recur_w", p.recur_w);
    model_io::write_vector(out, "gate_bias", p.gate_bias);
    for (int h = 0; h < p.head_count(); ++h) {
        model_io::write_matrix(out, "head_w_" + std::to_string(h), p.head_w[h]);
        model_io::write_vector(out, "head_b_" + std::to_string(h), p.head_b[h]);
    }
}

inline RnnParams load_rnn(std::istream& in) {
    RnnParams p;
    p.space = model_io::read_space(in);
    std::string tag, value;
    if (!(in >> tag >> value) || tag != "cell") throw FormatError("rnn model: missing cell");
    p.cell = parse_cell(value);
    if (!(in >> tag >> value) || tag != "headmode")
        throw FormatError("rnn model: missing head mode");
    p.head = parse_head(value);
    if (!(in >> tag >> p.feature_dim) || tag != "features")
        throw FormatError("rnn model: missing feature count");
    if (!(in >> tag >> p.hidden) || tag != "hidden")
        throw FormatError("rnn model: missing hidden size");
    if (!(in >> tag >> p.seed) || tag != "seed") throw FormatError("rnn model: missing seed");
    p.input_w = model_io::read_matrix(in, "input_w");
    p.recur_w = model_io::read_matrix(in, "recur_w");
    p.gate_bias = model_io::read_vector(in, "gate_bias");
    const int heads = p.head == HeadMode::Combined ? 1 : p.space.residents;
    for (int h = 0; h < heads; ++h) {
        p.head_w.push_back(model_io::read_matrix(in, "head_w_" + std::to_string(h)));
        p.head_b.push_back(model_io::read_vector(in, "head_b_" + std::to_string(h)));
    }
    return p;
}

}  // namespace mrar
