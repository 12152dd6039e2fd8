#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "mrar/common.hpp"

namespace mrar {

// ---------------------------------------------------------------- labels

/// Per-resident activity alphabets plus the derived combined (product) space.
struct LabelSpace {
    int residents = 0;                                   // M
    std::vector<int> sizes;                              // K^m, length M
    std::vector<std::vector<std::string>> activity_names;  // optional, per resident

    /// Size of the combined label space, prod_m K^m.
    int combined_size() const {
        std::int64_t j = 1;
        for (int k : sizes) j *= k;
        return static_cast<int>(j);
    }

    void validate() const {
        if (residents < 1) throw ConfigError("label space: residents must be >= 1");
        if (static_cast<int>(sizes.size()) != residents)
            throw ConfigError("label space: sizes length must equal residents");
        std::int64_t j = 1;
        for (int k : sizes) {
            if (k < 1) throw ConfigError("label space: every alphabet size must be >= 1");
            j *= k;
            if (j > INT32_MAX) throw ConfigError("label space: combined size overflows");
        }
        if (!activity_names.empty()) {
            if (static_cast<int>(activity_names.size()) != residents)
                throw ConfigError("label space: names list must cover every resident");
            for (int m = 0; m < residents; ++m)
                if (static_cast<int>(activity_names[m].size()) != sizes[m])
                    throw ConfigError("label space: names length must equal alphabet size");
        }
    }

    bool operator==(const LabelSpace& o) const {
        return residents == o.residents && sizes == o.sizes;
    }
};

/// The joint activity assignment at one time step: labels[m] in [0, K^m).
struct ActivityFrame {
    std::vector<int> labels;

    ActivityFrame() = default;
    explicit ActivityFrame(std::vector<int> l) : labels(std::move(l)) {}

    bool operator==(const ActivityFrame& o) const { return labels == o.labels; }
};

/// Row-major mixed-radix index of a frame; resident 0 is most significant.
inline int encode_combined(const ActivityFrame& frame, const LabelSpace& space) {
    if (static_cast<int>(frame.labels.size()) != space.residents)
        throw DomainError("encode_combined: frame length does not match resident count");
    int index = 0;
    for (int m = 0; m < space.residents; ++m) {
        int label = frame.labels[m];
        if (label < 0 || label >= space.sizes[m])
            throw DomainError("encode_combined: label out of range for resident " +
                              std::to_string(m + 1));
        index = index * space.sizes[m] + label;
    }
    return index;
}

/// Exact inverse of encode_combined.
inline ActivityFrame decode_combined(int index, const LabelSpace& space) {
    if (index < 0 || index >= space.combined_size())
        throw DomainError("decode_combined: index out of range");
    std::vector<int> labels(space.residents);
    for (int m = space.residents - 1; m >= 0; --m) {
        labels[m] = index % space.sizes[m];
        index /= space.sizes[m];
    }
    return ActivityFrame(std::move(labels));
}

/// Digit of the combined index belonging to resident m (no allocation).
inline int combined_digit(int index, const LabelSpace& space, int m) {
    for (int i = space.residents - 1; i > m; --i) index /= space.sizes[i];
    return index % space.sizes[m];
}

// ---------------------------------------------------------------- observations

/// One time step's sensor reading: categorical joint-state symbol for HMM
/// emissions plus the raw feature vector for CRF/RNN inputs.
struct Observation {
    int symbol = 0;
    std::vector<double> features;
};

/// Maps distinct joint sensor-state vectors to dense symbol ids in order of
/// first appearance; vectors never seen map to the reserved UNK id (== size).
class ObservationCodec {
  public:
    ObservationCodec() = default;

    static ObservationCodec build(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw ConfigError("observation codec: no rows given");
        ObservationCodec codec;
        codec.dim_ = static_cast<int>(rows.front().size());
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != codec.dim_)
                throw FormatError("observation codec: ragged feature rows");
            codec.insert(row);
        }
        return codec;
    }

    int size() const { return static_cast<int>(rows_.size()); }  // S
    int unk_id() const { return size(); }
    int dim() const { return dim_; }

    /// Symbol id of the vector, or unk_id() when absent from the table.
    int lookup(const std::vector<double>& v) const {
        auto it = index_.find(v);
        return it == index_.end() ? unk_id() : it->second;
    }

    const std::vector<double>& vector_of(int id) const { return rows_.at(id); }

    bool operator==(const ObservationCodec& o) const {
        return dim_ == o.dim_ && rows_ == o.rows_;
    }

    void insert(const std::vector<double>& row) {
        auto [it, fresh] = index_.try_emplace(row, size());
        if (fresh) rows_.push_back(row);
    }

  private:
    std::map<std::vector<double>, int> index_;
    std::vector<std::vector<double>> rows_;  // insertion order, id -> vector
    int dim_ = 0;
};

inline ObservationCodec build_observation_codec(const std::vector<std::vector<double>>& rows) {
    return ObservationCodec::build(rows);
}

/// Feature rows of a sequence as a T x D matrix (CRF/RNN input view).
inline Eigen::MatrixXd features_matrix(const std::vector<Observation>& obs) {
    if (obs.empty()) throw DomainError("features_matrix: empty sequence");
    const int steps = static_cast<int>(obs.size());
    const int dim = static_cast<int>(obs[0].features.size());
    Eigen::MatrixXd x(steps, dim);
    for (int t = 0; t < steps; ++t)
        for (int d = 0; d < dim; ++d) x(t, d) = obs[t].features[d];
    return x;
}

// ---------------------------------------------------------------- sequences

/// Aligned observation/activity pair for one day.
struct SequenceInstance {
    std::vector<Observation> observations;
    std::vector<ActivityFrame> activities;
    std::string day_id;

    int length() const { return static_cast<int>(observations.size()); }

    void validate(const LabelSpace& space, int feature_dim) const {
        if (observations.empty() || observations.size() != activities.size())
            throw DomainError("sequence " + day_id + ": observations and activities must align");
        for (const auto& obs : observations)
            if (static_cast<int>(obs.features.size()) != feature_dim)
                throw DomainError("sequence " + day_id + ": feature dimensionality drifts");
        for (const auto& frame : activities) {
            if (static_cast<int>(frame.labels.size()) != space.residents)
                throw DomainError("sequence " + day_id + ": frame arity mismatch");
            for (int m = 0; m < space.residents; ++m)
                if (frame.labels[m] < 0 || frame.labels[m] >= space.sizes[m])
                    throw DomainError("sequence " + day_id + ": label out of range");
        }
    }
};

struct Dataset {
    std::vector<SequenceInstance> instances;
    LabelSpace label_space;
    ObservationCodec codec;
    int feature_dim = 0;                    // D
    std::vector<std::string> sensor_names;  // optional, for the codec sidecar

    int total_steps() const {
        int n = 0;
        for (const auto& inst : instances) n += inst.length();
        return n;
    }

    void validate() const {
        label_space.validate();
        std::map<std::string, int> seen;
        for (const auto& inst : instances) {
            inst.validate(label_space, feature_dim);
            if (++seen[inst.day_id] > 1)
                throw DomainError("dataset: duplicate day id " + inst.day_id);
            for (const auto& obs : inst.observations)
                if (obs.symbol < 0 || obs.symbol > codec.size())
                    throw DomainError("dataset: symbol id beyond codec range");
        }
    }
};

/// Recompute every observation's symbol through the given codec (UNK fallback).
inline void apply_codec(Dataset& ds, const ObservationCodec& codec) {
    for (auto& inst : ds.instances)
        for (auto& obs : inst.observations) obs.symbol = codec.lookup(obs.features);
    ds.codec = codec;
}

// ---------------------------------------------------------------- canonical io
//
// Interchange layout: one file per day named day_<index>.tsv with
//   # sensors=D residents=M
//   # day=<day id>
//   t \t f_1,...,f_D \t a_1,...,a_M
// plus a codec.meta sidecar holding the symbol table, UNK id, sensor names
// and the activity alphabets. Feature values are printed with enough digits
// to round-trip doubles exactly.

namespace detail {

inline std::string feature_csv(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += double_to_text(v[i]);
    }
    return out;
}

inline std::vector<double> parse_feature_csv(const std::string& s, const char* where) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        try {
            out.push_back(text_to_double(tok));
        } catch (const FormatError&) {
            throw FormatError(std::string(where) + ": bad feature value '" + tok + "'");
        }
    }
    return out;
}

}  // namespace detail

inline void write_codec_meta(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "# mrar-codec sensors=" << ds.feature_dim << " symbols=" << ds.codec.size()
        << "\n";
    out << "unk\t" << ds.codec.unk_id() << "\n";
    for (std::size_t i = 0; i < ds.sensor_names.size(); ++i)
        out << "sensor\t" << i << "\t" << ds.sensor_names[i] << "\n";
    for (int m = 0; m < ds.label_space.residents; ++m) {
        out << "labels\t" << m << "\t" << ds.label_space.sizes[m] << "\t";
        if (!ds.label_space.activity_names.empty())
            out << join(ds.label_space.activity_names[m], ",");
        out << "\n";
    }
    for (int s = 0; s < ds.codec.size(); ++s)
        out << "symbol\t" << s << "\t" << detail::feature_csv(ds.codec.vector_of(s)) << "\n";
}

/// Reads the sidecar into codec/labels/sensor names. Returns false if absent.
inline bool read_codec_meta(const std::filesystem::path& path, ObservationCodec& codec,
                            LabelSpace& space, std::vector<std::string>& sensor_names) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<int, std::string>> label_lines;
    sensor_names.clear();
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields[0] == "sensor" && fields.size() >= 3) {
            sensor_names.push_back(fields[2]);
        } else if (fields[0] == "labels" && fields.size() >= 3) {
            int k = std::atoi(fields[2].c_str());
            label_lines.emplace_back(k, fields.size() > 3 ? fields[3] : "");
        } else if (fields[0] == "symbol" && fields.size() >= 3) {
            rows.push_back(detail::parse_feature_csv(fields[2], "codec.meta"));
        }
    }
    if (!rows.empty()) codec = ObservationCodec::build(rows);
    if (!label_lines.empty()) {
        space.residents = static_cast<int>(label_lines.size());
        space.sizes.clear();
        space.activity_names.clear();
        for (auto& [k, names] : label_lines) {
            space.sizes.push_back(k);
            space.activity_names.push_back(names.empty() ? std::vector<std::string>{}
                                                         : split(names, ','));
        }
        // drop ragged/absent name lists rather than fail the load
        for (int m = 0; m < space.residents; ++m)
            if (static_cast<int>(space.activity_names[m].size()) != space.sizes[m]) {
                space.activity_names.clear();
                break;
            }
    }
    return true;
}

inline void write_canonical(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        const auto& inst = ds.instances[i];
        char name[32];
        std::snprintf(name, sizeof(name), "day_%04zu.tsv", i);
        std::ofstream out(dir / name);
        if (!out) throw ConfigError("cannot write " + (dir / name).string());
        out << "# sensors=" << ds.feature_dim << " residents=" << ds.label_space.residents
            << "\n";
        out << "# day=" << inst.day_id << "\n";
        for (int t = 0; t < inst.length(); ++t) {
            out << t << '\t' << detail::feature_csv(inst.observations[t].features) << '\t';
            const auto& labels = inst.activities[t].labels;
            for (std::size_t m = 0; m < labels.size(); ++m) {
                if (m) out << ',';
                out << labels[m];
            }
            out << '\n';
        }
    }
    write_codec_meta(ds, dir / "codec.meta");
}

inline Dataset read_canonical(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("canonical dataset directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        auto name = entry.path().filename().string();
        if (name.rfind("day_", 0) == 0 && entry.path().extension() == ".tsv")
            files.push_back(entry.path());
    }
    if (files.empty()) throw ConfigError("no day files under " + dir.string());
    std::sort(files.begin(), files.end());

    Dataset ds;
    bool have_meta =
        read_codec_meta(dir / "codec.meta", ds.codec, ds.label_space, ds.sensor_names);

    int declared_d = -1, declared_m = -1;
    std::vector<int> max_label;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot read " + file.string());
        SequenceInstance inst;
        inst.day_id = file.stem().string();
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            if (line[0] == '#') {
                auto day_pos = line.find("day=");
                if (day_pos != std::string::npos) inst.day_id = line.substr(day_pos + 4);
                auto s_pos = line.find("sensors=");
                if (s_pos != std::string::npos)
                    declared_d = std::atoi(line.c_str() + s_pos + 8);
                auto r_pos = line.find("residents=");
                if (r_pos != std::string::npos)
                    declared_m = std::atoi(line.c_str() + r_pos + 10);
                continue;
            }
            auto fields = split(line, '\t');
            if (fields.size() != 3)
                throw FormatError(file.filename().string() + ":" + std::to_string(lineno) +
                                  ": expected 3 tab-separated fields");
            Observation obs;
            obs.features = detail::parse_feature_csv(fields[1], file.filename().string().c_str());
            if (declared_d >= 0 && static_cast<int>(obs.features.size()) != declared_d)
                throw FormatError(file.filename().string() + ":" + std::to_string(lineno) +
                                  ": feature count does not match header");
            ActivityFrame frame;
            for (const auto& tok : split(fields[2], ','))
                frame.labels.push_back(std::atoi(tok.c_str()));
            if (declared_m >= 0 && static_cast<int>(frame.labels.size()) != declared_m)
                throw FormatError(file.filename().string() + ":" + std::to_string(lineno) +
                                  ": label count does not match header");
            if (max_label.size() < frame.labels.size()) max_label.resize(frame.labels.size(), 0);
            for (std::size_t m = 0; m < frame.labels.size(); ++m)
                max_label[m] = std::max(max_label[m], frame.labels[m]);
            inst.observations.push_back(std::move(obs));
            inst.activities.push_back(std::move(frame));
        }
        if (inst.observations.empty())
            throw FormatError(file.filename().string() + ": empty day file");
        ds.instances.push_back(std::move(inst));
    }

    ds.feature_dim = declared_d >= 0
                         ? declared_d
                         : static_cast<int>(ds.instances[0].observations[0].features.size());
    if (!have_meta || ds.label_space.residents == 0) {
        ds.label_space.residents = static_cast<int>(max_label.size());
        ds.label_space.sizes.assign(max_label.begin(), max_label.end());
        for (auto& k : ds.label_space.sizes) ++k;
    }
    if (!have_meta || ds.codec.size() == 0) {
        std::vector<std::vector<double>> rows;
        for (const auto& inst : ds.instances)
            for (const auto& obs : inst.observations) rows.push_back(obs.features);
        ds.codec = ObservationCodec::build(rows);
    }
    Dataset& out = ds;
    apply_codec(out, ds.codec);
    out.validate();
    return out;
}

/// Canonical byte serialization of a dataset; loaders are pure, so equal
/// inputs must yield equal strings here.
inline std::string canonical_bytes(const Dataset& ds) {
    std::ostringstream out;
    out << "sensors=" << ds.feature_dim << " residents=" << ds.label_space.residents << "\n";
    for (int m = 0; m < ds.label_space.residents; ++m) out << "K " << ds.label_space.sizes[m] << "\n";
    for (const auto& inst : ds.instances) {
        out << "day " << inst.day_id << "\n";
        for (int t = 0; t < inst.length(); ++t) {
            out << inst.observations[t].symbol << '\t'
                << detail::feature_csv(inst.observations[t].features) << '\t';
            for (std::size_t m = 0; m < inst.activities[t].labels.size(); ++m) {
                if (m) out << ',';
                out << inst.activities[t].labels[m];
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace mrar
