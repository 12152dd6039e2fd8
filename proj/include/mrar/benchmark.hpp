#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mrar/common.hpp"
#include "mrar/crf.hpp"
#include "mrar/datamodel.hpp"
#include "mrar/eval.hpp"
#include "mrar/hmm.hpp"
#include "mrar/ingest.hpp"
#include "mrar/report.hpp"
#include "mrar/rnn.hpp"

namespace mrar {

// Full experimental protocol: per model family, grid-search selection on the
// validation split, final fit, test-set prediction, repeated runs for the
// RNN families, and one exclusively-timed train+predict pass per row.

inline std::vector<double> default_lr_grid() {
    // 1e-4 .. 1 in log space, half-decade steps
    std::vector<double> grid;
    for (int i = 0; i <= 8; ++i) grid.push_back(std::pow(10.0, -4.0 + 0.5 * i));
    return grid;
}

struct BenchmarkOptions {
    std::vector<ModelFamily> models = all_model_families();
    std::vector<double> smoothing_grid = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
    std::vector<double> hidden_grid = {10, 50, 100, 500, 1000};
    std::vector<double> lr_grid = default_lr_grid();
    int crf_max_iter = 1000;
    int rnn_max_epochs = 200;
    int rnn_patience = 10;
    double rnn_clip_norm = 5.0;
    int rnn_repeats = 50;
    int grid_expansions = 2;
    std::uint64_t seed = 1;
};

struct BenchmarkDataset {
    std::string name;
    Dataset data;
    SplitSpec split;
};

struct GridTrace {
    std::string model;
    std::string dataset;
    std::vector<std::string> axes;
    std::vector<GridPoint> points;
    std::vector<double> best;
    int expansions = 0;
};

struct BenchmarkOutcome {
    BenchmarkReport report;
    std::vector<GridTrace> grids;
};

// ---------------------------------------------------------------- predictions

inline PredictionSet predict_hmm(const HmmParams& p, const Dataset& test) {
    PredictionSet preds;
    preds.frames.resize(test.instances.size());
    parallel_for(test.instances.size(), [&](std::size_t i) {
        preds.frames[i] =
            frames_from_combined(viterbi(p, test.instances[i].observations), p.space);
    });
    return preds;
}

inline PredictionSet predict_fhmm(const FhmmParams& p, const Dataset& test) {
    PredictionSet preds;
    preds.frames.resize(test.instances.size());
    parallel_for(test.instances.size(), [&](std::size_t i) {
        preds.frames[i] =
            frames_from_per_resident(viterbi_fhmm(p, test.instances[i].observations));
    });
    return preds;
}

inline PredictionSet predict_crf(const CrfParams& p, const Dataset& test) {
    PredictionSet preds;
    preds.frames.resize(test.instances.size());
    parallel_for(test.instances.size(), [&](std::size_t i) {
        preds.frames[i] =
            frames_from_combined(crf_decode(p, test.instances[i].observations), p.space);
    });
    return preds;
}

inline PredictionSet predict_fcrf(const FcrfParams& p, const Dataset& test) {
    PredictionSet preds;
    preds.frames.resize(test.instances.size());
    parallel_for(test.instances.size(), [&](std::size_t i) {
        preds.frames[i] =
            frames_from_per_resident(fcrf_decode(p, test.instances[i].observations));
    });
    return preds;
}

inline PredictionSet predict_rnn(const RnnParams& p, const Dataset& test) {
    PredictionSet preds;
    preds.frames.resize(test.instances.size());
    parallel_for(test.instances.size(), [&](std::size_t i) {
        preds.frames[i] =
            frames_from_per_resident(rnn_decode(p, test.instances[i].observations));
    });
    return preds;
}

/// [R1..RM, All] as one metric vector.
inline std::vector<double> metrics_vector(const PredictionSet& preds, const Dataset& test) {
    std::vector<double> v;
    for (int m = 0; m < test.label_space.residents; ++m)
        v.push_back(accuracy_per_resident(preds, test, m));
    v.push_back(accuracy_all(preds, test));
    return v;
}

// ---------------------------------------------------------------- model variant

using ModelParams = std::variant<HmmParams, FhmmParams, CrfParams, FcrfParams, RnnParams>;

inline void save_model(const ModelParams& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write model file " + path.string());
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HmmParams>) save_hmm(p, out);
            else if constexpr (std::is_same_v<T, FhmmParams>) save_fhmm(p, out);
            else if constexpr (std::is_same_v<T, CrfParams>) save_crf(p, out);
            else if constexpr (std::is_same_v<T, FcrfParams>) save_fcrf(p, out);
            else save_rnn(p, out);
        },
        model);
}

inline ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file " + path.string());
    const std::string kind = model_io::read_kind(in);
    if (kind == "hmm") return load_hmm(in);
    if (kind == "fhmm") return load_fhmm(in);
    if (kind == "crf") return load_crf(in);
    if (kind == "fcrf") return load_fcrf(in);
    if (kind == "rnn") return load_rnn(in);
    throw FormatError("unknown model kind '" + kind + "'");
}

inline PredictionSet predict(const ModelParams& model, const Dataset& test) {
    return std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HmmParams>) return predict_hmm(p, test);
            else if constexpr (std::is_same_v<T, FhmmParams>) return predict_fhmm(p, test);
            else if constexpr (std::is_same_v<T, CrfParams>) return predict_crf(p, test);
            else if constexpr (std::is_same_v<T, FcrfParams>) return predict_fcrf(p, test);
            else return predict_rnn(p, test);
        },
        model);
}

// ---------------------------------------------------------------- per-row runs

namespace detail {

inline RnnConfig rnn_config_for(ModelFamily family, const BenchmarkOptions& opts, int hidden,
                                double lr, std::uint64_t seed) {
    RnnConfig cfg;
    switch (family) {
        case ModelFamily::RnnTanh:
        case ModelFamily::MRnnTanh: cfg.cell = CellKind::Tanh; break;
        case ModelFamily::RnnGru:
        case ModelFamily::MRnnGru: cfg.cell = CellKind::Gru; break;
        case ModelFamily::RnnLstm:
        case ModelFamily::MRnnLstm: cfg.cell = CellKind::Lstm; break;
        default: throw ConfigError("not an rnn family");
    }
    cfg.head = family_uses_separate_labels(family) ? HeadMode::Separate : HeadMode::Combined;
    cfg.hidden = hidden;
    cfg.learning_rate = lr;
    cfg.max_epochs = opts.rnn_max_epochs;
    cfg.patience = opts.rnn_patience;
    cfg.clip_norm = opts.rnn_clip_norm;
    cfg.seed = seed;
    return cfg;
}

inline DatasetResult run_family(ModelFamily family, const Split& split,
                                const BenchmarkOptions& opts, GridTrace* trace) {
    DatasetResult result;
    result.attempted = true;

    auto finish = [&](const PredictionSet& preds, const Dataset& test) {
        std::vector<double> metrics = metrics_vector(preds, test);
        result.per_resident.assign(metrics.begin(), metrics.end() - 1);
        result.all = metrics.back();
        result.ok = true;
    };

    switch (family) {
        case ModelFamily::Hmm:
        case ModelFamily::Fhmm: {
            if (split.val.instances.empty())
                throw ConfigError("smoothing selection needs a validation split");
            GridAxis axis{"smoothing", opts.smoothing_grid, /*prefer_smaller=*/false, false};
            auto score = [&](const std::vector<double>& v) {
                if (family == ModelFamily::Hmm) {
                    HmmParams p = train_hmm(split.train, v[0]);
                    return accuracy_all(predict_hmm(p, split.val), split.val);
                }
                FhmmParams p = train_fhmm(split.train, v[0]);
                return accuracy_all(predict_fhmm(p, split.val), split.val);
            };
            GridSearchResult grid = grid_search({axis}, score, opts.grid_expansions);
            if (trace) {
                trace->axes = {"smoothing"};
                trace->points = grid.trace;
                trace->best = grid.best;
                trace->expansions = grid.expansions;
            }
            const double alpha = grid.best[0];
            PredictionSet preds;
            result.seconds = measure_seconds([&] {
                if (family == ModelFamily::Hmm)
                    preds = predict_hmm(train_hmm(split.train, alpha), split.test);
                else
                    preds = predict_fhmm(train_fhmm(split.train, alpha), split.test);
            });
            finish(preds, split.test);
            break;
        }
        case ModelFamily::Crf:
        case ModelFamily::Fcrf: {
            PredictionSet preds;
            result.seconds = measure_seconds([&] {
                if (family == ModelFamily::Crf)
                    preds = predict_crf(train_crf(split.train, opts.crf_max_iter), split.test);
                else
                    preds =
                        predict_fcrf(train_fcrf(split.train, opts.crf_max_iter), split.test);
            });
            finish(preds, split.test);
            break;
        }
        default: {  // rnn families
            if (split.val.instances.empty())
                throw ConfigError("rnn selection needs a validation split");
            GridAxis hidden_axis{"hidden", opts.hidden_grid, true, /*integer=*/true};
            GridAxis lr_axis{"learning_rate", opts.lr_grid, true, false};
            auto score = [&](const std::vector<double>& v) {
                RnnConfig cfg = rnn_config_for(family, opts, static_cast<int>(v[0]), v[1],
                                               opts.seed);
                RnnParams p = train_rnn(split.train, split.val, cfg);
                return accuracy_all(predict_rnn(p, split.val), split.val);
            };
            GridSearchResult grid =
                grid_search({hidden_axis, lr_axis}, score, opts.grid_expansions);
            if (trace) {
                trace->axes = {"hidden", "learning_rate"};
                trace->points = grid.trace;
                trace->best = grid.best;
                trace->expansions = grid.expansions;
            }
            const int hidden = static_cast<int>(grid.best[0]);
            const double lr = grid.best[1];

            RepeatStats stats = repeated_runs(
                [&](std::uint64_t seed) {
                    RnnConfig cfg = rnn_config_for(family, opts, hidden, lr, seed);
                    RnnParams p = train_rnn(split.train, split.val, cfg);
                    return metrics_vector(predict_rnn(p, split.test), split.test);
                },
                opts.rnn_repeats, opts.seed);
            result.repeats = stats.requested;
            result.excluded = stats.excluded;
            result.per_resident.assign(stats.mean.begin(), stats.mean.end() - 1);
            result.all = stats.mean.back();
            result.per_resident_std.assign(stats.stddev.begin(), stats.stddev.end() - 1);
            result.all_std = stats.stddev.back();

            // one exclusive pass for the timing column
            RnnConfig cfg = rnn_config_for(family, opts, hidden, lr, opts.seed);
            result.seconds = measure_seconds([&] {
                RnnParams p = train_rnn(split.train, split.val, cfg);
                predict_rnn(p, split.test);
            });
            result.ok = true;
            break;
        }
    }
    return result;
}

}  // namespace detail

/// Runs the requested model rows over every dataset. Rows execute
/// sequentially (timing passes are exclusive); grid points and repeats run
/// concurrently inside each row. A failed row is recorded and the benchmark
/// continues.
inline BenchmarkOutcome run_benchmark(const std::vector<BenchmarkDataset>& datasets,
                                      const BenchmarkOptions& opts) {
    if (datasets.empty()) throw ConfigError("benchmark: no datasets given");
    if (opts.models.empty()) throw ConfigError("benchmark: no models requested");

    BenchmarkOutcome outcome;
    for (const auto& ds : datasets) outcome.report.datasets.push_back(ds.name);

    std::vector<Split> splits;
    for (const auto& ds : datasets) splits.push_back(split_by_days(ds.data, ds.split));

    for (ModelFamily family : opts.models) {
        ModelReportRow row;
        row.family = family;
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            GridTrace trace;
            trace.model = family_display_name(family);
            trace.dataset = datasets[d].name;
            DatasetResult result;
            result.attempted = true;
            try {
                result = detail::run_family(family, splits[d], opts, &trace);
            } catch (const std::exception& e) {
                result.ok = false;
                result.error = e.what();
            }
            row.results.push_back(std::move(result));
            if (!trace.axes.empty()) outcome.grids.push_back(std::move(trace));
        }
        outcome.report.rows.push_back(std::move(row));
    }
    return outcome;
}

// ---------------------------------------------------------------- outputs

inline nlohmann::json benchmark_json(const BenchmarkOutcome& outcome,
                                     const BenchmarkOptions& opts) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = opts.seed;
    j["rnn_repeats"] = opts.rnn_repeats;
    j["crf_max_iter"] = opts.crf_max_iter;
    j["datasets"] = outcome.report.datasets;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : outcome.report.rows) {
        nlohmann::json r;
        r["model"] = family_display_name(row.family);
        r["separate_labels"] = family_uses_separate_labels(row.family);
        r["results"] = nlohmann::json::array();
        for (std::size_t d = 0; d < row.results.size(); ++d) {
            const auto& res = row.results[d];
            nlohmann::json c;
            c["dataset"] = outcome.report.datasets[d];
            c["ok"] = res.ok;
            if (res.ok) {
                c["per_resident"] = res.per_resident;
                c["all"] = res.all;
                c["seconds"] = res.seconds;
                c["repeats"] = res.repeats;
                c["excluded"] = res.excluded;
                if (!res.per_resident_std.empty()) {
                    c["per_resident_std"] = res.per_resident_std;
                    c["all_std"] = res.all_std;
                }
            } else {
                c["error"] = res.error;
            }
            r["results"].push_back(std::move(c));
        }
        if (row.average_defined()) r["average"] = row.average();
        j["rows"].push_back(std::move(r));
    }
    j["grid_traces"] = nlohmann::json::array();
    for (const auto& g : outcome.grids) {
        nlohmann::json t;
        t["model"] = g.model;
        t["dataset"] = g.dataset;
        t["axes"] = g.axes;
        t["best"] = g.best;
        t["expansions"] = g.expansions;
        t["points"] = nlohmann::json::array();
        for (const auto& p : g.points) {
            nlohmann::json q;
            q["values"] = p.values;
            q["ok"] = p.ok;
            if (p.ok)
                q["score"] = p.score;
            else
                q["error"] = p.error;
            t["points"].push_back(std::move(q));
        }
        j["grid_traces"].push_back(std::move(t));
    }
    j["combined_vs_separate"] = nlohmann::json::array();
    for (const auto& g : combined_vs_separate(outcome.report)) {
        nlohmann::json s;
        s["dataset"] = g.dataset;
        s["combined_models"] = g.combined_models;
        s["separate_models"] = g.separate_models;
        s["combined_individual"] = g.combined_individual;
        s["combined_joint"] = g.combined_joint;
        s["separate_individual"] = g.separate_individual;
        s["separate_joint"] = g.separate_joint;
        j["combined_vs_separate"].push_back(std::move(s));
    }
    return j;
}

/// Writes report.txt, report.csv, timing.csv, combined_vs_separate.csv,
/// summary.json and manifest.txt under out_dir. config_dump is the resolved
/// run configuration; its hash plus the dataset content hashes make the
/// manifest sufficient to reproduce the outputs.
inline void write_benchmark_outputs(const BenchmarkOutcome& outcome,
                                    const BenchmarkOptions& opts,
                                    const std::vector<BenchmarkDataset>& datasets,
                                    const std::filesystem::path& out_dir,
                                    const std::string& config_dump) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(out_dir / name);
        if (!out) throw ConfigError("cannot write " + (out_dir / name).string());
        out << content;
    };
    write("report.txt", render_report_text(outcome.report));
    write("report.csv", render_report_csv(outcome.report));
    write("timing.csv", render_timing_csv(outcome.report));
    write("combined_vs_separate.csv", render_combined_vs_separate_csv(outcome.report));
    write("summary.json", benchmark_json(outcome, opts).dump(2) + "\n");

    std::ostringstream manifest;
    manifest << "mrar manifest\n";
    manifest << "version " << kVersion << "\n";
    manifest << "config_hash " << hex64(fnv1a64(config_dump)) << "\n";
    manifest << "seed " << opts.seed << "\n";
    manifest << "workers " << worker_count() << "\n";
    for (const auto& ds : datasets)
        manifest << "dataset " << ds.name << " days=" << ds.data.instances.size()
                 << " steps=" << ds.data.total_steps() << " hash="
                 << hex64(fnv1a64(canonical_bytes(ds.data))) << "\n";
    for (const auto& row : outcome.report.rows) {
        manifest << "model " << family_display_name(row.family);
        for (const auto& r : row.results) manifest << " " << (r.ok ? "ok" : "failed");
        manifest << "\n";
    }
    write("manifest.txt", manifest.str());
}

}  // namespace mrar
