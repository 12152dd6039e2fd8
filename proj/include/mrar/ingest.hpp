#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mrar/common.hpp"
#include "mrar/datamodel.hpp"

namespace mrar {

// Raw-data loaders for the CASAS and ARAS corpora, chronological day splits,
// and the synthetic factorial-chain sampler used by the benchmark and the
// test suites.

// ---------------------------------------------------------------- splits

struct SplitSpec {
    int train_days = 0;
    int val_days = 0;   // may be zero for models that need no validation set
    int test_days = 0;

    void validate(int available) const {
        if (train_days < 1 || test_days < 1 || val_days < 0)
            throw ConfigError("split: train and test need at least one day each");
        if (train_days + val_days + test_days > available)
            throw ConfigError("split: " + std::to_string(train_days + val_days + test_days) +
                              " days requested but only " + std::to_string(available) +
                              " available");
    }
};

struct Split {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Chronological partition (train days first, then val, then test; any
/// remaining days are unused). The symbol table is rebuilt from the training
/// rows only and applied to val/test with UNK fallback.
inline Split split_by_days(const Dataset& ds, const SplitSpec& spec) {
    spec.validate(static_cast<int>(ds.instances.size()));
    Split out;
    auto part = [&](int lo, int hi) {
        Dataset d;
        d.label_space = ds.label_space;
        d.feature_dim = ds.feature_dim;
        d.sensor_names = ds.sensor_names;
        for (int i = lo; i < hi; ++i) d.instances.push_back(ds.instances[i]);
        return d;
    };
    out.train = part(0, spec.train_days);
    out.val = part(spec.train_days, spec.train_days + spec.val_days);
    out.test = part(spec.train_days + spec.val_days,
                    spec.train_days + spec.val_days + spec.test_days);

    std::vector<std::vector<double>> train_rows;
    for (const auto& inst : out.train.instances)
        for (const auto& obs : inst.observations) train_rows.push_back(obs.features);
    ObservationCodec codec = ObservationCodec::build(train_rows);
    apply_codec(out.train, codec);
    apply_codec(out.val, codec);
    apply_codec(out.test, codec);
    return out;
}

// ---------------------------------------------------------------- casas

namespace detail {

inline double casas_sensor_value(const std::string& token, const std::string& where) {
    if (token == "ON" || token == "OPEN" || token == "PRESENT" || token == "TRUE") return 1.0;
    if (token == "OFF" || token == "CLOSE" || token == "CLOSED" || token == "ABSENT" ||
        token == "FALSE")
        return 0.0;
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
        throw FormatError(where + ": unrecognized sensor value '" + token + "'");
    return v;
}

inline std::vector<std::string> whitespace_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

/// Numeric-aware ordering so activity id "2" sorts before "10".
inline void sort_activity_tokens(std::vector<std::string>& tokens) {
    bool all_numeric = true;
    for (const auto& t : tokens) {
        char* end = nullptr;
        std::strtol(t.c_str(), &end, 10);
        if (end == t.c_str() || *end != '\0') {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric)
        std::sort(tokens.begin(), tokens.end(), [](const std::string& a, const std::string& b) {
            long la = std::strtol(a.c_str(), nullptr, 10);
            long lb = std::strtol(b.c_str(), nullptr, 10);
            return la != lb ? la < lb : a < b;
        });
    else
        std::sort(tokens.begin(), tokens.end());
}

}  // namespace detail

/// Loads a CASAS-style multi-resident event stream: whitespace-separated
/// lines of `date time sensor value resident activity`. One time step per
/// sensor event; the observation is the state-carry vector (last known value
/// of every sensor, zero before a sensor's first event, normalized per sensor
/// to [0,1]); each resident's annotation persists until superseded; days are
/// calendar dates. Leading steps where some resident has no annotation yet
/// are dropped. A `sensors.txt` manifest in the directory fixes the sensor
/// slots; without it, slots follow first appearance.
inline Dataset load_casas(const std::filesystem::path& path) {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> manifest;
    if (std::filesystem::is_directory(path)) {
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (!entry.is_regular_file()) continue;
            if (entry.path().filename() == "sensors.txt") {
                std::ifstream in(entry.path());
                std::string name;
                while (std::getline(in, name)) {
                    while (!name.empty() && (name.back() == '\r' || name.back() == ' '))
                        name.pop_back();
                    if (!name.empty()) manifest.push_back(name);
                }
                continue;
            }
            files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else if (std::filesystem::is_regular_file(path)) {
        files.push_back(path);
    } else {
        throw ConfigError("casas: path not found: " + path.string());
    }
    if (files.empty()) throw ConfigError("casas: no event files under " + path.string());

    struct Event {
        std::string day;
        int sensor = 0;
        double value = 0.0;
        int resident = 0;
        std::string activity;
    };

    std::map<std::string, int> sensor_slot;
    std::vector<std::string> sensor_names;
    for (const auto& name : manifest) {
        sensor_slot.emplace(name, static_cast<int>(sensor_names.size()));
        sensor_names.push_back(name);
    }

    std::vector<Event> events;
    int max_resident = 0;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw ConfigError("casas: cannot read " + file.string());
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto fields = detail::whitespace_fields(line);
            if (fields.empty() || fields[0][0] == '#') continue;
            const std::string where = file.filename().string() + ":" + std::to_string(lineno);
            if (fields.size() != 6)
                throw FormatError(where + ": expected 6 fields "
                                          "(date time sensor value resident activity), got " +
                                  std::to_string(fields.size()));
            Event ev;
            ev.day = fields[0];
            auto slot = sensor_slot.find(fields[2]);
            if (slot == sensor_slot.end()) {
                if (!manifest.empty())
                    throw FormatError(where + ": unknown sensor id '" + fields[2] + "'");
                slot = sensor_slot.emplace(fields[2], static_cast<int>(sensor_names.size()))
                           .first;
                sensor_names.push_back(fields[2]);
            }
            ev.sensor = slot->second;
            ev.value = detail::casas_sensor_value(fields[3], where);
            char* end = nullptr;
            long rid = std::strtol(fields[4].c_str(), &end, 10);
            if (end == fields[4].c_str() || *end != '\0' || rid < 1)
                throw FormatError(where + ": bad resident id '" + fields[4] + "'");
            ev.resident = static_cast<int>(rid);
            max_resident = std::max(max_resident, ev.resident);
            ev.activity = fields[5];
            events.push_back(std::move(ev));
        }
    }
    if (events.empty()) throw ConfigError("casas: no events parsed");

    const int residents = max_resident;
    const int dim = static_cast<int>(sensor_names.size());

    // activity alphabets, per resident, deterministic order
    std::vector<std::vector<std::string>> names(residents);
    {
        std::vector<std::set<std::string>> seen(residents);
        for (const auto& ev : events) seen[ev.resident - 1].insert(ev.activity);
        for (int m = 0; m < residents; ++m) {
            names[m].assign(seen[m].begin(), seen[m].end());
            detail::sort_activity_tokens(names[m]);
            if (names[m].empty())
                throw FormatError("casas: resident " + std::to_string(m + 1) +
                                  " has no annotations");
        }
    }
    std::vector<std::map<std::string, int>> label_of(residents);
    for (int m = 0; m < residents; ++m)
        for (std::size_t i = 0; i < names[m].size(); ++i) label_of[m][names[m][i]] = static_cast<int>(i);

    // replay the stream: state-carry features, annotations persist across days
    Dataset ds;
    ds.feature_dim = dim;
    ds.sensor_names = sensor_names;
    ds.label_space.residents = residents;
    for (int m = 0; m < residents; ++m)
        ds.label_space.sizes.push_back(static_cast<int>(names[m].size()));
    ds.label_space.activity_names = names;

    std::vector<double> carry(dim, 0.0);
    std::vector<int> current(residents, -1);
    SequenceInstance day;
    int skipped_days = 0;
    auto flush_day = [&]() {
        if (day.day_id.empty()) return;
        if (day.observations.empty()) {
            std::cerr << "warning: casas day " << day.day_id
                      << " has no usable events; skipped\n";
            ++skipped_days;
        } else {
            ds.instances.push_back(std::move(day));
        }
        day = SequenceInstance{};
    };
    for (const auto& ev : events) {
        if (ev.day != day.day_id) {
            flush_day();
            day.day_id = ev.day;
        }
        carry[ev.sensor] = ev.value;
        current[ev.resident - 1] = label_of[ev.resident - 1][ev.activity];
        bool labeled = true;
        for (int m = 0; m < residents; ++m) labeled &= current[m] >= 0;
        if (!labeled) continue;  // corpus prefix before every resident is annotated
        Observation obs;
        obs.features = carry;
        day.observations.push_back(std::move(obs));
        day.activities.push_back(ActivityFrame(current));
    }
    flush_day();
    if (ds.instances.empty()) throw ConfigError("casas: no labeled days");

    // per-sensor normalization to [0,1]; binary sensors pass through
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& inst : ds.instances)
        for (const auto& obs : inst.observations)
            for (int d = 0; d < dim; ++d) {
                lo[d] = std::min(lo[d], obs.features[d]);
                hi[d] = std::max(hi[d], obs.features[d]);
            }
    for (auto& inst : ds.instances)
        for (auto& obs : inst.observations)
            for (int d = 0; d < dim; ++d)
                obs.features[d] = hi[d] > lo[d] ? (obs.features[d] - lo[d]) / (hi[d] - lo[d])
                                                : 0.0;

    std::vector<std::vector<double>> rows;
    for (const auto& inst : ds.instances)
        for (const auto& obs : inst.observations) rows.push_back(obs.features);
    apply_codec(ds, ObservationCodec::build(rows));
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------- aras

/// Loads one ARAS house: 30 per-day files (DAY_<n>.txt), one row per second
/// with 20 binary sensor columns followed by the two residents' activity ids
/// (1-based, 27 activities), shifted here to 0-based.
inline Dataset load_aras(const std::filesystem::path& path, char house = 'A') {
    namespace fs = std::filesystem;
    fs::path dir = path;
    for (const auto& cand : {std::string("House ") + house, std::string("House") + house}) {
        if (fs::is_directory(path / cand)) {
            dir = path / cand;
            break;
        }
    }
    if (!fs::is_directory(dir)) throw ConfigError("aras: directory not found: " + dir.string());

    std::vector<std::pair<long, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string stem = entry.path().stem().string();
        if (stem.rfind("DAY_", 0) == 0)
            files.emplace_back(std::strtol(stem.c_str() + 4, nullptr, 10), entry.path());
    }
    if (files.empty()) throw ConfigError("aras: no DAY_<n> files under " + dir.string());
    std::sort(files.begin(), files.end());

    constexpr int kSensors = 20;
    constexpr int kActivities = 27;
    Dataset ds;
    ds.feature_dim = kSensors;
    ds.label_space.residents = 2;
    ds.label_space.sizes = {kActivities, kActivities};
    ds.label_space.activity_names.assign(2, {});
    for (int m = 0; m < 2; ++m)
        for (int a = 1; a <= kActivities; ++a) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "activity_%02d", a);
            ds.label_space.activity_names[m].push_back(buf);
        }
    for (int d = 0; d < kSensors; ++d) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "sensor_%02d", d + 1);
        ds.sensor_names.push_back(buf);
    }

    for (const auto& [num, file] : files) {
        std::ifstream in(file);
        if (!in) throw ConfigError("aras: cannot read " + file.string());
        SequenceInstance inst;
        inst.day_id = file.stem().string();
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto fields = detail::whitespace_fields(line);
            if (fields.empty()) continue;
            const std::string where = file.filename().string() + ":" + std::to_string(lineno);
            if (fields.size() != kSensors + 2)
                throw FormatError(where + ": expected 22 columns, got " +
                                  std::to_string(fields.size()));
            Observation obs;
            obs.features.resize(kSensors);
            for (int d = 0; d < kSensors; ++d) obs.features[d] = text_to_double(fields[d]);
            ActivityFrame frame;
            frame.labels.resize(2);
            for (int m = 0; m < 2; ++m) {
                long a = std::strtol(fields[kSensors + m].c_str(), nullptr, 10);
                if (a < 1 || a > kActivities)
                    throw FormatError(where + ": activity id " + fields[kSensors + m] +
                                      " outside 1.." + std::to_string(kActivities));
                frame.labels[m] = static_cast<int>(a - 1);
            }
            inst.observations.push_back(std::move(obs));
            inst.activities.push_back(std::move(frame));
        }
        if (inst.observations.empty())
            throw FormatError(file.filename().string() + ": empty day file");
        ds.instances.push_back(std::move(inst));
    }

    std::vector<std::vector<double>> rows;
    for (const auto& inst : ds.instances)
        for (const auto& obs : inst.observations) rows.push_back(obs.features);
    apply_codec(ds, ObservationCodec::build(rows));
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------- synthetic

/// Factorial-chain sampler configuration. Per-resident priors, per-resident
/// transitions conditioned on the full previous joint state, and a shared
/// emission over S symbols. Features encode the emitted symbol: one-hot when
/// feature_dim is 0 or equals S, otherwise a feature_dim-bit binary code.
struct SynthConfig {
    int residents = 2;
    std::vector<int> sizes;
    int symbols = 8;       // S
    int feature_dim = 0;   // 0 -> one-hot
    int steps_per_day = 1000;
    int days = 10;
    double noise = 0.0;    // chance an emitted symbol is replaced uniformly
    std::uint64_t seed = 0;
    std::vector<Eigen::VectorXd> priors;       // per resident: K^m
    std::vector<Eigen::MatrixXd> transitions;  // per resident: J x K^m
    Eigen::MatrixXd emission;                  // J x S

    LabelSpace label_space() const {
        LabelSpace space;
        space.residents = residents;
        space.sizes = sizes;
        return space;
    }

    int code_dim() const { return feature_dim == 0 ? symbols : feature_dim; }

    void validate() const {
        label_space().validate();
        if (symbols < 1) throw ConfigError("synth: need at least one symbol");
        if (steps_per_day < 1 || days < 1) throw ConfigError("synth: steps and days must be >= 1");
        if (!(noise >= 0.0 && noise < 1.0)) throw ConfigError("synth: noise must lie in [0,1)");
        if (feature_dim != 0 && feature_dim != symbols) {
            if (feature_dim < 1 || feature_dim > 62 || (1ll << feature_dim) < symbols)
                throw ConfigError("synth: 2^feature_dim must cover the symbol count");
        }
        const int joint = label_space().combined_size();
        auto check_rows = [&](const Eigen::MatrixXd& m, const std::string& name) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                if (m.row(r).minCoeff() < 0.0)
                    throw ConfigError("synth: negative probability in " + name);
                if (std::abs(m.row(r).sum() - 1.0) > 1e-12)
                    throw ConfigError("synth: " + name + " row " + std::to_string(r) +
                                      " is not normalized");
            }
        };
        if (static_cast<int>(priors.size()) != residents ||
            static_cast<int>(transitions.size()) != residents)
            throw ConfigError("synth: priors/transitions must cover every resident");
        for (int m = 0; m < residents; ++m) {
            if (priors[m].size() != sizes[m] || transitions[m].rows() != joint ||
                transitions[m].cols() != sizes[m])
                throw ConfigError("synth: generator table shapes are inconsistent");
            check_rows(priors[m].transpose(), "prior");
            check_rows(transitions[m], "transition");
        }
        if (emission.rows() != joint || emission.cols() != symbols)
            throw ConfigError("synth: emission shape is inconsistent");
        check_rows(emission, "emission");
    }

    std::vector<double> symbol_features(int s) const {
        if (feature_dim == 0 || feature_dim == symbols) {
            std::vector<double> v(symbols, 0.0);
            v[s] = 1.0;
            return v;
        }
        std::vector<double> v(feature_dim, 0.0);
        for (int d = 0; d < feature_dim; ++d)
            v[d] = static_cast<double>((s >> (feature_dim - 1 - d)) & 1);
        return v;
    }
};

/// Random generator tables with tunable self-stickiness (diagonal bonus),
/// cross-resident coupling (next label pulled toward the other resident's
/// previous label) and emission sharpness. Deterministic in the seed.
inline SynthConfig make_synth_generator(int residents, std::vector<int> sizes, int symbols,
                                        std::uint64_t seed, double self_stickiness = 2.0,
                                        double coupling = 0.0, double sharpness = 4.0) {
    SynthConfig cfg;
    cfg.residents = residents;
    cfg.sizes = std::move(sizes);
    cfg.symbols = symbols;
    cfg.seed = seed;
    LabelSpace space = cfg.label_space();
    space.validate();
    const int joint = space.combined_size();

    Rng rng(seed ^ 0xabcdef1234567890ull);
    for (int m = 0; m < residents; ++m) {
        Eigen::VectorXd prior(cfg.sizes[m]);
        for (int k = 0; k < cfg.sizes[m]; ++k) prior(k) = 0.5 + rng.uniform();
        cfg.priors.push_back(prior / prior.sum());
    }
    for (int m = 0; m < residents; ++m) {
        Eigen::MatrixXd trans(joint, cfg.sizes[m]);
        for (int i = 0; i < joint; ++i) {
            ActivityFrame prev = decode_combined(i, space);
            for (int k = 0; k < cfg.sizes[m]; ++k) {
                double w = 0.2 + rng.uniform();
                if (k == prev.labels[m]) w += self_stickiness;
                for (int other = 0; other < residents; ++other)
                    if (other != m && k == (prev.labels[other] + 1) % cfg.sizes[m])
                        w += coupling;
                trans(i, k) = w;
            }
            trans.row(i) /= trans.row(i).sum();
        }
        cfg.transitions.push_back(std::move(trans));
    }
    cfg.emission.resize(joint, symbols);
    for (int j = 0; j < joint; ++j) {
        for (int s = 0; s < symbols; ++s) {
            double w = 0.1 + rng.uniform();
            if (s == j % symbols) w += sharpness;
            cfg.emission(j, s) = w;
        }
        cfg.emission.row(j) /= cfg.emission.row(j).sum();
    }
    return cfg;
}

/// Samples the factorial chain: a^{m,1} ~ prior_m, a^{m,t} ~ A_m(. | a^{t-1})
/// for every resident, o^t ~ B(. | a^t), with probability noise the emitted
/// symbol replaced uniformly. Deterministic given the seed. The dataset's
/// codec covers all S symbol codes in symbol order.
inline Dataset generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    LabelSpace space = cfg.label_space();

    Dataset ds;
    ds.label_space = space;
    ds.feature_dim = cfg.code_dim();
    for (int d = 0; d < ds.feature_dim; ++d) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "synth_%02d", d);
        ds.sensor_names.push_back(buf);
    }

    // contiguous columns for row lookups during sampling
    std::vector<Eigen::MatrixXd> trans_t;
    for (int m = 0; m < cfg.residents; ++m) trans_t.push_back(cfg.transitions[m].transpose());
    Eigen::MatrixXd emit_t = cfg.emission.transpose();

    Rng rng(cfg.seed);
    for (int d = 0; d < cfg.days; ++d) {
        SequenceInstance inst;
        char buf[24];
        std::snprintf(buf, sizeof(buf), "synth_%03d", d);
        inst.day_id = buf;
        int prev = -1;
        for (int t = 0; t < cfg.steps_per_day; ++t) {
            ActivityFrame frame;
            frame.labels.resize(cfg.residents);
            for (int m = 0; m < cfg.residents; ++m) {
                if (t == 0)
                    frame.labels[m] = rng.discrete(cfg.priors[m].data(), cfg.sizes[m]);
                else
                    frame.labels[m] =
                        rng.discrete(trans_t[m].col(prev).data(), cfg.sizes[m]);
            }
            int state = encode_combined(frame, space);
            int symbol = rng.discrete(emit_t.col(state).data(), cfg.symbols);
            if (cfg.noise > 0.0 && rng.uniform() < cfg.noise)
                symbol = static_cast<int>(rng.uniform_int(cfg.symbols));
            Observation obs;
            obs.symbol = symbol;
            obs.features = cfg.symbol_features(symbol);
            inst.observations.push_back(std::move(obs));
            inst.activities.push_back(std::move(frame));
            prev = state;
        }
        ds.instances.push_back(std::move(inst));
    }

    std::vector<std::vector<double>> codes;
    for (int s = 0; s < cfg.symbols; ++s) codes.push_back(cfg.symbol_features(s));
    ds.codec = ObservationCodec::build(codes);  // ids align with generator symbols
    ds.validate();
    return ds;
}

}  // namespace mrar
