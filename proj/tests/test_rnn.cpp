#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "mrar/rnn.hpp"
#include "test_support.hpp"

using namespace mrar;
using Catch::Approx;

namespace {

LabelSpace space_of(std::vector<int> sizes) {
    LabelSpace s;
    s.residents = static_cast<int>(sizes.size());
    s.sizes = std::move(sizes);
    return s;
}

Eigen::MatrixXd random_inputs(Rng& rng, int steps, int dim) {
    Eigen::MatrixXd x(steps, dim);
    for (int t = 0; t < steps; ++t)
        for (int d = 0; d < dim; ++d) x(t, d) = rng.uniform(-1.0, 1.0);
    return x;
}

std::vector<std::vector<int>> random_targets(Rng& rng, const RnnParams& p, int steps) {
    std::vector<std::vector<int>> targets(p.head_count());
    for (int h = 0; h < p.head_count(); ++h) {
        targets[h].resize(steps);
        for (int t = 0; t < steps; ++t)
            targets[h][t] = static_cast<int>(rng.uniform_int(p.head_classes(h)));
    }
    return targets;
}

/// Flat views over every parameter block, in a fixed order, for perturbation
/// and for pairing analytic gradients with finite differences.
std::vector<std::pair<double*, Eigen::Index>> param_blocks(RnnParams& p) {
    std::vector<std::pair<double*, Eigen::Index>> blocks;
    blocks.emplace_back(p.input_w.data(), p.input_w.size());
    blocks.emplace_back(p.recur_w.data(), p.recur_w.size());
    blocks.emplace_back(p.gate_bias.data(), p.gate_bias.size());
    for (auto& m : p.head_w) blocks.emplace_back(m.data(), m.size());
    for (auto& v : p.head_b) blocks.emplace_back(v.data(), v.size());
    return blocks;
}

std::vector<std::pair<const double*, Eigen::Index>> grad_blocks(const RnnGradients& g) {
    std::vector<std::pair<const double*, Eigen::Index>> blocks;
    blocks.emplace_back(g.input_w.data(), g.input_w.size());
    blocks.emplace_back(g.recur_w.data(), g.recur_w.size());
    blocks.emplace_back(g.gate_bias.data(), g.gate_bias.size());
    for (auto& m : g.head_w) blocks.emplace_back(m.data(), m.size());
    for (auto& v : g.head_b) blocks.emplace_back(v.data(), v.size());
    return blocks;
}

Eigen::Index total_params(RnnParams& p) {
    Eigen::Index n = 0;
    for (auto& [ptr, len] : param_blocks(p)) n += len;
    return n;
}

double loss_at(const RnnParams& p, const Eigen::MatrixXd& x,
               const std::vector<std::vector<int>>& targets) {
    return rnn_loss(rnn_forward(p, x), targets);
}

/// Central finite difference against the analytic BPTT gradient on >= 20
/// random coordinates; exercised for every cell/head combination.
void check_gradients(CellKind cell, HeadMode head, std::uint64_t seed) {
    Rng rng(seed);
    RnnConfig cfg;
    cfg.cell = cell;
    cfg.head = head;
    cfg.hidden = 3;
    cfg.learning_rate = 0.1;
    cfg.seed = seed;
    LabelSpace space = space_of({2, 3});
    RnnParams p = init_rnn(cfg, space, 2);
    const int steps = 5;
    Eigen::MatrixXd x = random_inputs(rng, steps, 2);
    auto targets = random_targets(rng, p, steps);

    RnnForward fwd = rnn_forward(p, x);
    RnnGradients g =
        rnn_backward(p, x, fwd, targets, std::numeric_limits<double>::infinity());
    auto analytic = grad_blocks(g);

    const Eigen::Index n = total_params(p);
    for (int probe = 0; probe < 24; ++probe) {
        Eigen::Index k = static_cast<Eigen::Index>(rng.uniform_int(n));
        // locate the block holding coordinate k
        Eigen::Index offset = k;
        std::size_t block = 0;
        auto blocks = param_blocks(p);
        while (offset >= blocks[block].second) offset -= blocks[block++].second;

        const double h = 1e-5;
        RnnParams plus = p;
        param_blocks(plus)[block].first[offset] += h;
        RnnParams minus = p;
        param_blocks(minus)[block].first[offset] -= h;
        double fd = (loss_at(plus, x, targets) - loss_at(minus, x, targets)) / (2.0 * h);
        double exact = analytic[block].first[offset];
        INFO("cell=" << cell_name(cell) << " head=" << head_name(head) << " block=" << block
                     << " offset=" << offset);
        CHECK(test_support::relative_error(fd, exact) < 1e-6);
    }
}

}  // namespace

TEST_CASE("zero parameters produce exactly uniform head distributions") {
    for (HeadMode head : {HeadMode::Combined, HeadMode::Separate}) {
        RnnConfig cfg;
        cfg.cell = CellKind::Gru;
        cfg.head = head;
        cfg.hidden = 4;
        LabelSpace space = space_of({2, 3});
        RnnParams p = init_rnn(cfg, space, 2);
        p.input_w.setZero();
        p.recur_w.setZero();
        for (auto& m : p.head_w) m.setZero();
        Rng rng(2);
        RnnForward fwd = rnn_forward(p, random_inputs(rng, 6, 2));
        for (int h = 0; h < p.head_count(); ++h) {
            double uniform = 1.0 / p.head_classes(h);
            CHECK((fwd.probs[h].array() - uniform).abs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("tanh recurrence matches the hand-computed two-step values") {
    RnnConfig cfg;
    cfg.cell = CellKind::Tanh;
    cfg.hidden = 1;
    LabelSpace space = space_of({2});
    RnnParams p = init_rnn(cfg, space, 1);
    p.input_w(0, 0) = 1.0;
    p.recur_w(0, 0) = 0.5;
    p.gate_bias(0) = 0.0;
    Eigen::MatrixXd x(2, 1);
    x << 1.0, 0.0;
    RnnForward fwd = rnn_forward(p, x);
    CHECK(fwd.hidden(0, 0) == Approx(0.761594).margin(1e-6));
    CHECK(fwd.hidden(1, 0) == Approx(0.363399).margin(1e-6));
    CHECK(fwd.hidden(0, 0) == Approx(std::tanh(1.0)).epsilon(1e-15));
    CHECK(fwd.hidden(1, 0) == Approx(std::tanh(0.5 * std::tanh(1.0))).epsilon(1e-15));
}

TEST_CASE("head distributions are normalized for random parameter draws") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        RnnConfig cfg;
        cfg.cell = trial % 3 == 0   ? CellKind::Tanh
                   : trial % 3 == 1 ? CellKind::Gru
                                    : CellKind::Lstm;
        cfg.head = trial % 2 ? HeadMode::Separate : HeadMode::Combined;
        cfg.hidden = 3;
        cfg.seed = trial;
        RnnParams p = init_rnn(cfg, space_of({2, 2}), 2);
        RnnForward fwd = rnn_forward(p, random_inputs(rng, 4, 2));
        for (const auto& probs : fwd.probs)
            for (Eigen::Index t = 0; t < probs.rows(); ++t)
                CHECK(probs.row(t).sum() == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("loss on uniform and one-hot outputs") {
    RnnForward fwd;
    fwd.probs.push_back(Eigen::MatrixXd::Constant(3, 4, 0.25));
    std::vector<std::vector<int>> targets{{0, 3, 1}};
    CHECK(rnn_loss(fwd, targets) == Approx(std::log(4.0)).epsilon(1e-12));

    RnnForward perfect;
    perfect.probs.push_back(Eigen::MatrixXd::Zero(3, 4));
    for (int t = 0; t < 3; ++t) perfect.probs[0](t, targets[0][t]) = 1.0;
    CHECK(rnn_loss(perfect, targets) == 0.0);

    // separate mode: per-step head losses add up
    RnnForward split;
    split.probs.push_back(Eigen::MatrixXd::Constant(2, 3, 1.0 / 3.0));
    split.probs.push_back(Eigen::MatrixXd::Constant(2, 5, 1.0 / 5.0));
    std::vector<std::vector<int>> two_heads{{0, 2}, {4, 1}};
    CHECK(rnn_loss(split, two_heads) == Approx(std::log(3.0) + std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("bptt gradients pass finite differences for every cell and head mode") {
    check_gradients(CellKind::Tanh, HeadMode::Combined, 101);
    check_gradients(CellKind::Tanh, HeadMode::Separate, 102);
    check_gradients(CellKind::Gru, HeadMode::Combined, 103);
    check_gradients(CellKind::Gru, HeadMode::Separate, 104);
    check_gradients(CellKind::Lstm, HeadMode::Combined, 105);
    check_gradients(CellKind::Lstm, HeadMode::Separate, 106);
}

TEST_CASE("gradient clipping caps the global norm") {
    Rng rng(7);
    RnnConfig cfg;
    cfg.cell = CellKind::Tanh;
    cfg.hidden = 4;
    cfg.seed = 7;
    RnnParams p = init_rnn(cfg, space_of({3, 3}), 3);
    Eigen::MatrixXd x = random_inputs(rng, 12, 3);
    auto targets = random_targets(rng, p, 12);
    RnnForward fwd = rnn_forward(p, x);
    RnnGradients raw =
        rnn_backward(p, x, fwd, targets, std::numeric_limits<double>::infinity());
    double norm = raw.global_norm();
    REQUIRE(norm > 1e-3);
    double clip = norm / 2.0;
    RnnGradients clipped = rnn_backward(p, x, fwd, targets, clip);
    CHECK(clipped.global_norm() == Approx(clip).epsilon(1e-9));
    // direction preserved
    CHECK(clipped.input_w(0, 0) == Approx(raw.input_w(0, 0) * clip / norm).epsilon(1e-9));
}

TEST_CASE("hidden states stay inside the cell's range") {
    Rng rng(9);
    for (int trial = 0; trial < 60; ++trial) {
        RnnConfig cfg;
        cfg.cell = trial % 3 == 0   ? CellKind::Tanh
                   : trial % 3 == 1 ? CellKind::Gru
                                    : CellKind::Lstm;
        cfg.hidden = 4;
        cfg.seed = 1000 + trial;
        RnnParams p = init_rnn(cfg, space_of({2}), 3);
        p.input_w *= 5.0;  // push the activations hard
        p.recur_w *= 5.0;
        RnnForward fwd = rnn_forward(p, random_inputs(rng, 20, 3));
        if (cfg.cell == CellKind::Lstm)
            CHECK(fwd.hidden.cwiseAbs().maxCoeff() < 1.0);
        else
            CHECK(fwd.hidden.cwiseAbs().maxCoeff() <= 1.0);
    }
}

namespace {

/// Toy corpus whose observation at each step is the one-hot code of the
/// combined label, so any head can read the answer off the input.
Dataset separable_rnn_corpus(const LabelSpace& space, int steps, int days,
                             std::uint64_t seed) {
    const int joint = space.combined_size();
    Dataset ds;
    ds.label_space = space;
    ds.feature_dim = joint;
    Rng rng(seed);
    for (int d = 0; d < days; ++d) {
        SequenceInstance inst;
        inst.day_id = "toy" + std::to_string(d);
        for (int t = 0; t < steps; ++t) {
            int j = static_cast<int>(rng.uniform_int(joint));
            Observation obs;
            obs.features.assign(joint, 0.0);
            obs.features[j] = 1.0;
            inst.observations.push_back(std::move(obs));
            inst.activities.push_back(decode_combined(j, space));
        }
        ds.instances.push_back(std::move(inst));
    }
    std::vector<std::vector<double>> rows;
    for (const auto& inst : ds.instances)
        for (const auto& obs : inst.observations) rows.push_back(obs.features);
    apply_codec(ds, ObservationCodec::build(rows));
    return ds;
}

double corpus_loss(const RnnParams& p, const Dataset& ds) {
    double total = 0.0;
    for (const auto& inst : ds.instances) {
        auto targets = head_targets(inst, ds.label_space, p.head);
        total += rnn_loss(rnn_forward(p, features_matrix(inst.observations)), targets);
    }
    return total / static_cast<double>(ds.instances.size());
}

}  // namespace

TEST_CASE("training is deterministic in the seed") {
    LabelSpace space = space_of({2, 2});
    Dataset ds = separable_rnn_corpus(space, 30, 3, 11);
    RnnConfig cfg;
    cfg.cell = CellKind::Gru;
    cfg.hidden = 5;
    cfg.learning_rate = 0.2;
    cfg.max_epochs = 8;
    cfg.patience = 8;
    cfg.seed = 99;
    RnnParams a = train_rnn(ds, ds, cfg);
    RnnParams b = train_rnn(ds, ds, cfg);
    CHECK(a.input_w == b.input_w);
    CHECK(a.recur_w == b.recur_w);
    CHECK(a.head_w[0] == b.head_w[0]);
    cfg.seed = 100;
    RnnParams c = train_rnn(ds, ds, cfg);
    CHECK(a.input_w != c.input_w);
}

TEST_CASE("the separable toy corpus trains to near-perfect accuracy") {
    LabelSpace space = space_of({2, 2});
    Dataset ds = separable_rnn_corpus(space, 60, 4, 13);
    for (HeadMode head : {HeadMode::Combined, HeadMode::Separate}) {
        RnnConfig cfg;
        cfg.cell = CellKind::Tanh;
        cfg.head = head;
        cfg.hidden = 16;
        cfg.learning_rate = 0.5;
        cfg.max_epochs = 150;
        cfg.patience = 25;
        cfg.seed = 5;
        RnnParams p = train_rnn(ds, ds, cfg);
        PredictionSet preds;
        for (const auto& inst : ds.instances)
            preds.frames.push_back(frames_from_per_resident(rnn_decode(p, inst.observations)));
        CHECK(accuracy_all(preds, ds) >= 0.99);
    }
}

TEST_CASE("loss decreases over the first epoch at a small learning rate") {
    LabelSpace space = space_of({2, 2});
    Dataset ds = separable_rnn_corpus(space, 40, 3, 17);
    RnnConfig cfg;
    cfg.cell = CellKind::Tanh;
    cfg.hidden = 8;
    cfg.learning_rate = 1e-3;
    cfg.max_epochs = 1;
    cfg.patience = 1;
    cfg.seed = 21;
    RnnParams before = init_rnn(cfg, space, ds.feature_dim);
    RnnParams after = train_rnn(ds, ds, cfg);
    CHECK(corpus_loss(after, ds) < corpus_loss(before, ds));
}

TEST_CASE("early stopping returns within patience of the best epoch") {
    LabelSpace space = space_of({2, 2});
    Dataset ds = separable_rnn_corpus(space, 40, 3, 23);
    RnnConfig cfg;
    cfg.cell = CellKind::Tanh;
    cfg.hidden = 12;
    cfg.learning_rate = 0.5;
    cfg.max_epochs = 200;
    cfg.patience = 6;
    cfg.seed = 31;
    std::vector<RnnTraceRow> trace;
    train_rnn(ds, ds, cfg, &trace);
    REQUIRE(!trace.empty());
    int best_epoch = 0;
    double best = -1.0;
    for (const auto& row : trace)
        if (row.val_accuracy > best) {
            best = row.val_accuracy;
            best_epoch = row.epoch;
        }
    CHECK(trace.back().epoch - best_epoch <= cfg.patience);
}

TEST_CASE("non-finite losses and gradients raise training errors") {
    // tanh/GRU/LSTM hidden states are bounded and the softmax is max-shifted,
    // so non-finite values enter through the data or the cached activations;
    // both paths must fail loudly rather than poison the parameters
    LabelSpace space = space_of({2});
    Dataset ds;
    ds.label_space = space;
    ds.feature_dim = 1;
    SequenceInstance inst;
    inst.day_id = "c0";
    for (int t = 0; t < 6; ++t) {
        Observation o;
        o.features = {1.0};
        inst.observations.push_back(o);
        inst.activities.push_back(ActivityFrame({t % 2}));
    }
    inst.observations[3].features[0] = std::numeric_limits<double>::quiet_NaN();
    ds.instances.push_back(inst);
    apply_codec(ds, ObservationCodec::build({{1.0}}));
    RnnConfig cfg;
    cfg.cell = CellKind::Tanh;
    cfg.hidden = 4;
    cfg.learning_rate = 0.1;
    cfg.max_epochs = 5;
    cfg.patience = 5;
    cfg.seed = 3;
    CHECK_THROWS_AS(train_rnn(ds, ds, cfg), TrainingError);

    // a poisoned cache surfaces as a step-numbered gradient error
    RnnParams p = init_rnn(cfg, space, 1);
    Eigen::MatrixXd x(4, 1);
    x << 1, 1, 1, 1;
    RnnForward fwd = rnn_forward(p, x);
    fwd.probs[0](2, 0) = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<int>> targets{{0, 1, 0, 1}};
    try {
        rnn_backward(p, x, fwd, targets, 5.0);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("decode ties fall to the lowest labels at zero logits") {
    RnnConfig cfg;
    cfg.cell = CellKind::Tanh;
    cfg.hidden = 2;
    LabelSpace space = space_of({3, 5});
    RnnParams p = init_rnn(cfg, space, 2);
    p.input_w.setZero();
    p.recur_w.setZero();
    for (auto& m : p.head_w) m.setZero();
    std::vector<Observation> obs(4);
    for (auto& o : obs) o.features = {0.3, 0.7};
    auto decoded = rnn_decode(p, obs);
    for (int t = 0; t < 4; ++t) {
        CHECK(decoded[0][t] == 0);
        CHECK(decoded[1][t] == 0);
    }
}

TEST_CASE("bias-forced heads decode the forced frame everywhere") {
    LabelSpace space = space_of({3, 5});
    for (HeadMode head : {HeadMode::Combined, HeadMode::Separate}) {
        RnnConfig cfg;
        cfg.cell = CellKind::Lstm;
        cfg.head = head;
        cfg.hidden = 3;
        RnnParams p = init_rnn(cfg, space, 2);
        if (head == HeadMode::Combined) {
            p.head_b[0](encode_combined(ActivityFrame({2, 4}), space)) = 25.0;
        } else {
            p.head_b[0](2) = 25.0;
            p.head_b[1](4) = 25.0;
        }
        std::vector<Observation> obs(5);
        Rng rng(1);
        for (auto& o : obs) o.features = {rng.uniform(), rng.uniform()};
        auto decoded = rnn_decode(p, obs);
        for (int t = 0; t < 5; ++t) {
            CHECK(decoded[0][t] == 2);
            CHECK(decoded[1][t] == 4);
        }
    }
}

TEST_CASE("combined decode equals the per-step argmax index, round-tripped") {
    Rng rng(33);
    LabelSpace space = space_of({2, 3});
    RnnConfig cfg;
    cfg.cell = CellKind::Gru;
    cfg.hidden = 4;
    cfg.seed = 77;
    RnnParams p = init_rnn(cfg, space, 3);
    std::vector<Observation> obs(10);
    for (auto& o : obs) o.features = {rng.uniform(), rng.uniform(), rng.uniform()};
    RnnForward fwd = rnn_forward(p, features_matrix(obs));
    auto decoded = rnn_decode(p, obs);
    for (int t = 0; t < 10; ++t) {
        int arg = 0;
        for (int j = 1; j < fwd.probs[0].cols(); ++j)
            if (fwd.probs[0](t, j) > fwd.probs[0](t, arg)) arg = j;
        ActivityFrame frame({decoded[0][t], decoded[1][t]});
        CHECK(encode_combined(frame, space) == arg);
    }
}

TEST_CASE("adding a constant to a head's logits leaves decoding unchanged") {
    Rng rng(35);
    LabelSpace space = space_of({2, 3});
    RnnConfig cfg;
    cfg.cell = CellKind::Tanh;
    cfg.head = HeadMode::Separate;
    cfg.hidden = 4;
    cfg.seed = 55;
    RnnParams p = init_rnn(cfg, space, 2);
    std::vector<Observation> obs(8);
    for (auto& o : obs) o.features = {rng.uniform(), rng.uniform()};
    auto base = rnn_decode(p, obs);
    RnnParams shifted = p;
    shifted.head_b[1].array() += 3.25;
    CHECK(rnn_decode(shifted, obs) == base);
}

TEST_CASE("rnn model files round trip exactly") {
    LabelSpace space = space_of({2, 3});
    space.activity_names = {{"x", "y"}, {"p", "q", "r"}};
    for (CellKind cell : {CellKind::Tanh, CellKind::Gru, CellKind::Lstm}) {
        RnnConfig cfg;
        cfg.cell = cell;
        cfg.head = cell == CellKind::Gru ? HeadMode::Separate : HeadMode::Combined;
        cfg.hidden = 4;
        cfg.seed = 123;
        RnnParams p = init_rnn(cfg, space, 3);
        std::stringstream buf;
        save_rnn(p, buf);
        REQUIRE(model_io::read_kind(buf) == "rnn");
        RnnParams q = load_rnn(buf);
        CHECK(q.cell == p.cell);
        CHECK(q.head == p.head);
        CHECK(q.input_w == p.input_w);
        CHECK(q.recur_w == p.recur_w);
        CHECK(q.gate_bias == p.gate_bias);
        for (int h = 0; h < p.head_count(); ++h) {
            CHECK(q.head_w[h] == p.head_w[h]);
            CHECK(q.head_b[h] == p.head_b[h]);
        }
        CHECK(q.seed == p.seed);
    }
}

TEST_CASE("shape mismatches are rejected") {
    RnnConfig cfg;
    cfg.hidden = 3;
    RnnParams p = init_rnn(cfg, space_of({2}), 4);
    Eigen::MatrixXd bad(5, 3);  // expects D=4
    bad.setZero();
    CHECK_THROWS_AS(rnn_forward(p, bad), ConfigError);
    cfg.hidden = 0;
    CHECK_THROWS_AS(init_rnn(cfg, space_of({2}), 4), ConfigError);
}
