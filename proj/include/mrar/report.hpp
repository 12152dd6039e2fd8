#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "mrar/common.hpp"
#include "mrar/eval.hpp"

namespace mrar {

// Benchmark report shapes: one row per model, one cell per dataset with
// per-resident and joint accuracies plus the wall-clock train+predict time.
// Renderers emit the aligned text table, the flat CSV, the timing table and
// the combined-vs-separate group summary.

enum class ModelFamily {
    RnnTanh,
    MRnnTanh,
    RnnGru,
    MRnnGru,
    RnnLstm,
    MRnnLstm,
    Hmm,
    Fhmm,
    Crf,
    Fcrf,
};

inline const std::vector<ModelFamily>& all_model_families() {
    static const std::vector<ModelFamily> families = {
        ModelFamily::RnnTanh, ModelFamily::MRnnTanh, ModelFamily::RnnGru,
        ModelFamily::MRnnGru, ModelFamily::RnnLstm,  ModelFamily::MRnnLstm,
        ModelFamily::Hmm,     ModelFamily::Fhmm,     ModelFamily::Crf,
        ModelFamily::Fcrf,
    };
    return families;
}

inline std::string family_display_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::RnnTanh: return "RNN_tanh";
        case ModelFamily::MRnnTanh: return "mRNN_tanh";
        case ModelFamily::RnnGru: return "RNN_gru";
        case ModelFamily::MRnnGru: return "mRNN_gru";
        case ModelFamily::RnnLstm: return "RNN_lstm";
        case ModelFamily::MRnnLstm: return "mRNN_lstm";
        case ModelFamily::Hmm: return "HMM";
        case ModelFamily::Fhmm: return "fHMM";
        case ModelFamily::Crf: return "CRF";
        case ModelFamily::Fcrf: return "fCRF";
    }
    throw ConfigError("unknown model family");
}

inline std::string family_key(ModelFamily f) {
    switch (f) {
        case ModelFamily::RnnTanh: return "rnn_tanh";
        case ModelFamily::MRnnTanh: return "mrnn_tanh";
        case ModelFamily::RnnGru: return "rnn_gru";
        case ModelFamily::MRnnGru: return "mrnn_gru";
        case ModelFamily::RnnLstm: return "rnn_lstm";
        case ModelFamily::MRnnLstm: return "mrnn_lstm";
        case ModelFamily::Hmm: return "hmm";
        case ModelFamily::Fhmm: return "fhmm";
        case ModelFamily::Crf: return "crf";
        case ModelFamily::Fcrf: return "fcrf";
    }
    throw ConfigError("unknown model family");
}

inline ModelFamily parse_family(const std::string& key) {
    for (ModelFamily f : all_model_families())
        if (family_key(f) == key || family_display_name(f) == key) return f;
    throw ConfigError("unknown model family '" + key + "'");
}

/// True for the separate-label encoding group (mRNN_*, fHMM, fCRF).
inline bool family_uses_separate_labels(ModelFamily f) {
    switch (f) {
        case ModelFamily::MRnnTanh:
        case ModelFamily::MRnnGru:
        case ModelFamily::MRnnLstm:
        case ModelFamily::Fhmm:
        case ModelFamily::Fcrf: return true;
        default: return false;
    }
}

inline bool family_is_rnn(ModelFamily f) {
    switch (f) {
        case ModelFamily::RnnTanh:
        case ModelFamily::MRnnTanh:
        case ModelFamily::RnnGru:
        case ModelFamily::MRnnGru:
        case ModelFamily::RnnLstm:
        case ModelFamily::MRnnLstm: return true;
        default: return false;
    }
}

// ---------------------------------------------------------------- report

struct DatasetResult {
    bool attempted = false;
    bool ok = false;
    std::string error;
    std::vector<double> per_resident;      // R1..RM accuracies, fractions
    double all = 0.0;                      // joint accuracy
    std::vector<double> per_resident_std;  // over repeats; empty when single-run
    double all_std = 0.0;
    double seconds = 0.0;  // train + predict wall clock
    int repeats = 1;
    int excluded = 0;  // diverged repeats dropped from the averages
};

struct ModelReportRow {
    ModelFamily family = ModelFamily::Hmm;
    std::vector<DatasetResult> results;  // aligned with BenchmarkReport::datasets

    /// Table-1 "Average": arithmetic mean over every per-dataset R and All
    /// cell in the row. Defined only when every dataset completed.
    bool average_defined() const {
        for (const auto& r : results)
            if (!r.ok) return false;
        return !results.empty();
    }
    double average() const {
        double sum = 0.0;
        int count = 0;
        for (const auto& r : results) {
            for (double v : r.per_resident) {
                sum += v;
                ++count;
            }
            sum += r.all;
            ++count;
        }
        return count ? sum / count : 0.0;
    }
};

struct GroupSummary {
    std::string dataset;
    int combined_models = 0, separate_models = 0;
    double combined_individual = 0.0, combined_joint = 0.0;
    double separate_individual = 0.0, separate_joint = 0.0;
};

struct BenchmarkReport {
    std::vector<std::string> datasets;
    std::vector<ModelReportRow> rows;

    bool all_ok() const {
        for (const auto& row : rows)
            for (const auto& r : row.results)
                if (!r.ok) return false;
        return true;
    }
};

/// Per-dataset mean accuracy of the combined-label model group against the
/// separate-label group: mean over models and residents of R_m, and mean of
/// the joint accuracy.
inline std::vector<GroupSummary> combined_vs_separate(const BenchmarkReport& report) {
    std::vector<GroupSummary> out;
    for (std::size_t d = 0; d < report.datasets.size(); ++d) {
        GroupSummary g;
        g.dataset = report.datasets[d];
        double ci = 0.0, cj = 0.0, si = 0.0, sj = 0.0;
        int ci_n = 0, si_n = 0;
        for (const auto& row : report.rows) {
            if (d >= row.results.size() || !row.results[d].ok) continue;
            const auto& r = row.results[d];
            double ind = 0.0;
            for (double v : r.per_resident) ind += v;
            if (family_uses_separate_labels(row.family)) {
                si += ind;
                si_n += static_cast<int>(r.per_resident.size());
                sj += r.all;
                ++g.separate_models;
            } else {
                ci += ind;
                ci_n += static_cast<int>(r.per_resident.size());
                cj += r.all;
                ++g.combined_models;
            }
        }
        if (g.combined_models) {
            g.combined_individual = ci / ci_n;
            g.combined_joint = cj / g.combined_models;
        }
        if (g.separate_models) {
            g.separate_individual = si / si_n;
            g.separate_joint = sj / g.separate_models;
        }
        out.push_back(g);
    }
    return out;
}

// ---------------------------------------------------------------- rendering

namespace detail {

inline std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

inline std::string pct4(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", fraction * 100.0);
    return buf;
}

inline int max_residents(const BenchmarkReport& report) {
    int m = 0;
    for (const auto& row : report.rows)
        for (const auto& r : row.results)
            m = std::max(m, static_cast<int>(r.per_resident.size()));
    return m;
}

}  // namespace detail

/// Aligned plain-text accuracy table (Table-1 shape) plus the group summary.
inline std::string render_report_text(const BenchmarkReport& report) {
    const int residents = detail::max_residents(report);
    std::ostringstream out;

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Model"};
    for (const auto& ds : report.datasets)
        for (int m = 0; m <= residents; ++m)
            header.push_back(m < residents ? ds + " R" + std::to_string(m + 1) : ds + " All");
    header.push_back("Average");
    cells.push_back(header);
    for (const auto& row : report.rows) {
        std::vector<std::string> line{family_display_name(row.family)};
        for (const auto& r : row.results) {
            for (int m = 0; m < residents; ++m)
                line.push_back(!r.ok ? "-"
                               : m < static_cast<int>(r.per_resident.size())
                                   ? detail::pct(r.per_resident[m])
                                   : "");
            line.push_back(r.ok ? detail::pct(r.all) : "-");
        }
        line.push_back(row.average_defined() ? detail::pct(row.average()) : "-");
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c)
            widths[c] = std::max(widths[c], line[c].size());
    out << "Prediction accuracy (percent):\n";
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) out << "  ";
            out << line[c] << std::string(widths[c] - line[c].size(), ' ');
        }
        out << "\n";
    }

    out << "\nCombined labels v.s separate labels (mean accuracy per group):\n";
    for (const auto& g : combined_vs_separate(report)) {
        out << "  " << g.dataset << ": combined individual=" << detail::pct(g.combined_individual)
            << " joint=" << detail::pct(g.combined_joint)
            << " | separate individual=" << detail::pct(g.separate_individual)
            << " joint=" << detail::pct(g.separate_joint) << "  ("
            << (g.combined_joint >= g.separate_joint ? "combined" : "separate")
            << " ahead on joint)\n";
    }

    bool failures = false;
    for (const auto& row : report.rows)
        for (std::size_t d = 0; d < row.results.size(); ++d)
            if (row.results[d].attempted && !row.results[d].ok) {
                if (!failures) out << "\nFailed rows:\n";
                failures = true;
                out << "  " << family_display_name(row.family) << " / " << report.datasets[d]
                    << ": " << row.results[d].error << "\n";
            }
    return out.str();
}

/// Flat CSV: model,dataset,R1..RM,All,seconds (accuracies in percent).
inline std::string render_report_csv(const BenchmarkReport& report) {
    const int residents = detail::max_residents(report);
    std::ostringstream out;
    out << "model,dataset";
    for (int m = 1; m <= residents; ++m) out << ",R" << m;
    out << ",All,seconds\n";
    for (const auto& row : report.rows)
        for (std::size_t d = 0; d < row.results.size(); ++d) {
            const auto& r = row.results[d];
            out << family_display_name(row.family) << "," << report.datasets[d];
            for (int m = 0; m < residents; ++m) {
                out << ",";
                if (r.ok && m < static_cast<int>(r.per_resident.size()))
                    out << detail::pct4(r.per_resident[m]);
            }
            out << "," << (r.ok ? detail::pct4(r.all) : "");
            char sec[32];
            std::snprintf(sec, sizeof(sec), "%.3f", r.seconds);
            out << "," << (r.ok ? sec : "") << "\n";
        }
    return out.str();
}

/// Timing table (Table-2 shape): seconds, or hours past 3600 s.
inline std::string render_timing_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "model";
    for (const auto& ds : report.datasets) out << "," << ds;
    out << "\n";
    for (const auto& row : report.rows) {
        out << family_display_name(row.family);
        for (const auto& r : row.results)
            out << "," << (r.ok ? format_duration(r.seconds) : "failed");
        out << "\n";
    }
    return out.str();
}

inline std::string render_combined_vs_separate_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "dataset,group,models,individual_mean,joint_mean\n";
    for (const auto& g : combined_vs_separate(report)) {
        out << g.dataset << ",combined," << g.combined_models << ","
            << detail::pct4(g.combined_individual) << "," << detail::pct4(g.combined_joint)
            << "\n";
        out << g.dataset << ",separate," << g.separate_models << ","
            << detail::pct4(g.separate_individual) << "," << detail::pct4(g.separate_joint)
            << "\n";
    }
    return out.str();
}

}  // namespace mrar
