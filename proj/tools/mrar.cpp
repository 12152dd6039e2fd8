// Command-line front end: ingestion, synthetic corpora, single-model
// training/evaluation, and the full benchmark matrix. Config-file driven
// ([section] key=value, flags mirror keys and win on conflict).

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mrar/benchmark.hpp"

namespace fs = std::filesystem;
using namespace mrar;

namespace {

SplitSpec parse_split(const std::string& text) {
    auto parts = split(text, text.find('/') != std::string::npos ? '/' : ',');
    if (parts.size() != 3) throw ConfigError("split must look like 24/1/1");
    SplitSpec spec;
    spec.train_days = std::atoi(parts[0].c_str());
    spec.val_days = std::atoi(parts[1].c_str());
    spec.test_days = std::atoi(parts[2].c_str());
    return spec;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& tok : split(text, ','))
        if (!tok.empty()) out.push_back(text_to_double(tok));
    if (out.empty()) throw ConfigError("empty numeric list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& tok : split(text, ','))
        if (!tok.empty()) out.push_back(std::atoi(tok.c_str()));
    if (out.empty()) throw ConfigError("empty integer list");
    return out;
}

Dataset load_any(const std::string& format, const std::string& path, char house) {
    if (format == "casas") return load_casas(path);
    if (format == "aras") return load_aras(path, house);
    if (format == "canonical") return read_canonical(path);
    throw ConfigError("unknown format '" + format + "' (casas|aras|canonical)");
}

struct TrainHyper {
    double smoothing = 1e-4;
    int max_iter = 1000;
    int hidden = 10;
    double lr = 0.1;
    int epochs = 200;
    int patience = 10;
    double clip = 5.0;
    std::uint64_t seed = 1;
};

ModelParams train_family(ModelFamily family, const Split& split, const TrainHyper& hyper,
                         std::vector<RnnTraceRow>* trace) {
    switch (family) {
        case ModelFamily::Hmm: return train_hmm(split.train, hyper.smoothing);
        case ModelFamily::Fhmm: return train_fhmm(split.train, hyper.smoothing);
        case ModelFamily::Crf: return train_crf(split.train, hyper.max_iter);
        case ModelFamily::Fcrf: return train_fcrf(split.train, hyper.max_iter);
        default: {
            BenchmarkOptions opts;
            opts.rnn_max_epochs = hyper.epochs;
            opts.rnn_patience = hyper.patience;
            opts.rnn_clip_norm = hyper.clip;
            RnnConfig cfg =
                detail::rnn_config_for(family, opts, hyper.hidden, hyper.lr, hyper.seed);
            return train_rnn(split.train, split.val, cfg, trace);
        }
    }
}

void print_metrics(std::ostream& out, const std::vector<double>& metrics) {
    for (std::size_t m = 0; m + 1 < metrics.size(); ++m) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", metrics[m] * 100.0);
        out << "R" << m + 1 << "=" << buf << " ";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", metrics.back() * 100.0);
    out << "All=" << buf << "\n";
}

/// `name=dir` or `name=dir:tr/va/te`; the colon split keeps Windows-free
/// canonical paths unambiguous.
struct DataArg {
    std::string name;
    std::string dir;
    std::string split;
};

DataArg parse_data_arg(const std::string& text, const std::string& default_split) {
    DataArg arg;
    auto eq = text.find('=');
    if (eq == std::string::npos) {
        arg.name = fs::path(text).filename().string();
        arg.dir = text;
    } else {
        arg.name = text.substr(0, eq);
        arg.dir = text.substr(eq + 1);
    }
    arg.split = default_split;
    auto colon = arg.dir.rfind(':');
    if (colon != std::string::npos) {
        const std::string suffix = arg.dir.substr(colon + 1);
        auto parts = split(suffix, suffix.find('/') != std::string::npos ? '/' : ',');
        bool numeric = parts.size() == 3;
        for (const auto& p : parts)
            numeric &= !p.empty() && p.find_first_not_of("0123456789") == std::string::npos;
        if (numeric) {
            arg.split = suffix;
            arg.dir = arg.dir.substr(0, colon);
        }
    }
    if (arg.name.empty() || arg.dir.empty())
        throw ConfigError("bad --data entry '" + text + "' (want name=dir[:tr/va/te])");
    return arg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-resident activity recognition benchmark toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file ([section] key=value; flags override)");

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "Convert raw corpora to the canonical format");
    ingest->configurable();
    ingest->fallthrough();
    std::string in_format = "canonical", in_dir, out_dir;
    std::string house = "A";
    ingest->add_option("--format", in_format, "casas|aras|canonical");
    ingest->add_option("--in", in_dir, "Input file or directory")->required();
    ingest->add_option("--out", out_dir, "Output directory")->required();
    ingest->add_option("--house", house, "ARAS house (A|B)");

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-resident corpus");
    synth->configurable();
    synth->fallthrough();
    std::string synth_out, sizes_text = "3,3";
    int residents = 2, symbols = 8, features = 0, steps = 1000, days = 10;
    double noise = 0.0, stickiness = 2.0, coupling = 0.0, sharpness = 4.0;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--residents", residents, "Resident count M");
    synth->add_option("--sizes", sizes_text, "Per-resident alphabet sizes, e.g. 3,3");
    synth->add_option("--symbols", symbols, "Sensor-state symbol count S");
    synth->add_option("--features", features, "Feature dim (0 = one-hot of the symbol)");
    synth->add_option("--steps", steps, "Steps per day");
    synth->add_option("--days", days, "Day count");
    synth->add_option("--noise", noise, "Chance an emitted symbol is replaced uniformly");
    synth->add_option("--seed", synth_seed, "Sampler seed");
    synth->add_option("--stickiness", stickiness, "Self-transition bonus");
    synth->add_option("--coupling", coupling, "Cross-resident transition bonus");
    synth->add_option("--sharpness", sharpness, "Emission peakedness");

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train one model with fixed hyperparameters");
    train->configurable();
    train->fallthrough();
    std::string train_data, train_split = "24/1/1", train_model = "hmm", train_out;
    TrainHyper hyper;
    train->add_option("--data", train_data, "Canonical dataset directory")->required();
    train->add_option("--split", train_split, "train/val/test day counts");
    train->add_option("--model", train_model,
                      "hmm|fhmm|crf|fcrf|rnn_tanh|mrnn_tanh|rnn_gru|mrnn_gru|rnn_lstm|mrnn_lstm");
    train->add_option("--out", train_out, "Output directory")->required();
    train->add_option("--smoothing", hyper.smoothing, "Laplace factor (hmm/fhmm)");
    train->add_option("--max-iter", hyper.max_iter, "Optimizer iteration cap (crf/fcrf)");
    train->add_option("--hidden", hyper.hidden, "Hidden units (rnn)");
    train->add_option("--lr", hyper.lr, "Learning rate (rnn)");
    train->add_option("--epochs", hyper.epochs, "Max epochs (rnn)");
    train->add_option("--patience", hyper.patience, "Early-stopping patience (rnn)");
    train->add_option("--clip", hyper.clip, "Gradient clip norm (rnn)");
    train->add_option("--seed", hyper.seed, "Init/shuffle seed (rnn)");

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on the test split");
    evaluate->configurable();
    evaluate->fallthrough();
    std::string eval_data, eval_split = "24/1/1", model_file, eval_out;
    evaluate->add_option("--data", eval_data, "Canonical dataset directory")->required();
    evaluate->add_option("--split", eval_split, "train/val/test day counts");
    evaluate->add_option("--model-file", model_file, "Saved model path")->required();
    evaluate->add_option("--out", eval_out, "Optional output directory for metrics.csv");

    // ---- benchmark ----
    auto* bench = app.add_subcommand("benchmark", "Run the full model matrix");
    bench->configurable();
    bench->fallthrough();
    std::vector<std::string> data_args;
    std::string models_text, bench_out, bench_split = "24/1/1";
    std::string smoothing_text, hidden_text, lr_text;
    BenchmarkOptions opts;
    bench->add_option("--data", data_args, "name=dir[:tr/va/te] (repeatable)")->required();
    bench->add_option("--models", models_text, "Comma list; default: all ten rows");
    bench->add_option("--out", bench_out, "Output directory")->required();
    bench->add_option("--split", bench_split, "Default train/val/test day counts");
    bench->add_option("--smoothing-grid", smoothing_text, "Laplace grid override");
    bench->add_option("--hidden-grid", hidden_text, "Hidden-unit grid override");
    bench->add_option("--lr-grid", lr_text, "Learning-rate grid override");
    bench->add_option("--crf-max-iter", opts.crf_max_iter, "CRF iteration cap");
    bench->add_option("--epochs", opts.rnn_max_epochs, "RNN max epochs");
    bench->add_option("--patience", opts.rnn_patience, "RNN early-stopping patience");
    bench->add_option("--clip", opts.rnn_clip_norm, "RNN gradient clip norm");
    bench->add_option("--repeats", opts.rnn_repeats, "RNN repeat count");
    bench->add_option("--seed", opts.seed, "Base seed");
    bench->add_option("--expansions", opts.grid_expansions, "Max grid boundary expansions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            Dataset ds = load_any(in_format, in_dir, house.empty() ? 'A' : house[0]);
            write_canonical(ds, out_dir);
            std::cout << "ingest: " << ds.instances.size() << " days, " << ds.total_steps()
                      << " steps, D=" << ds.feature_dim << ", symbols=" << ds.codec.size()
                      << " -> " << out_dir << "\n";
        } else if (*synth) {
            SynthConfig cfg = make_synth_generator(residents, parse_int_list(sizes_text),
                                                   symbols, synth_seed, stickiness, coupling,
                                                   sharpness);
            cfg.feature_dim = features;
            cfg.steps_per_day = steps;
            cfg.days = days;
            cfg.noise = noise;
            Dataset ds = generate_synthetic(cfg);
            write_canonical(ds, synth_out);
            std::cout << "synth: " << days << " days x " << steps << " steps -> " << synth_out
                      << "\n";
        } else if (*train) {
            ModelFamily family = parse_family(train_model);
            Dataset ds = read_canonical(train_data);
            Split split = split_by_days(ds, parse_split(train_split));
            if (family_is_rnn(family) && split.val.instances.empty())
                throw ConfigError("rnn training needs at least one validation day");
            std::vector<RnnTraceRow> trace;
            double seconds = 0.0;
            ModelParams model;
            seconds = measure_seconds(
                [&] { model = train_family(family, split, hyper, &trace); });
            fs::create_directories(train_out);
            save_model(model, fs::path(train_out) / "model.txt");
            if (!trace.empty()) {
                std::ofstream tf(fs::path(train_out) / "trace.csv");
                tf << "epoch,train_loss,val_accuracy_all\n";
                for (const auto& row : trace) {
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", row.epoch,
                                  row.train_loss, row.val_accuracy);
                    tf << buf;
                }
            }
            std::cout << "train: " << family_display_name(family) << " in "
                      << format_duration(seconds) << " -> " << train_out << "/model.txt\n";
        } else if (*evaluate) {
            Dataset ds = read_canonical(eval_data);
            Split split = split_by_days(ds, parse_split(eval_split));
            ModelParams model = load_model(model_file);
            PredictionSet preds = predict(model, split.test);
            std::vector<double> metrics = metrics_vector(preds, split.test);
            std::cout << "evaluate: ";
            print_metrics(std::cout, metrics);
            if (!eval_out.empty()) {
                fs::create_directories(eval_out);
                std::ofstream mf(fs::path(eval_out) / "metrics.csv");
                mf << "metric,value\n";
                for (std::size_t m = 0; m + 1 < metrics.size(); ++m) {
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "R%zu,%.4f\n", m + 1,
                                  metrics[m] * 100.0);
                    mf << buf;
                }
                char buf[64];
                std::snprintf(buf, sizeof(buf), "All,%.4f\n", metrics.back() * 100.0);
                mf << buf;
            }
        } else if (*bench) {
            if (!smoothing_text.empty()) opts.smoothing_grid = parse_double_list(smoothing_text);
            if (!hidden_text.empty()) opts.hidden_grid = parse_double_list(hidden_text);
            if (!lr_text.empty()) opts.lr_grid = parse_double_list(lr_text);
            if (!models_text.empty()) {
                opts.models.clear();
                for (const auto& tok : split(models_text, ','))
                    if (!tok.empty()) opts.models.push_back(parse_family(tok));
            }
            std::vector<BenchmarkDataset> datasets;
            for (const auto& raw : data_args) {
                DataArg arg = parse_data_arg(raw, bench_split);
                BenchmarkDataset ds;
                ds.name = arg.name;
                ds.data = read_canonical(arg.dir);
                ds.split = parse_split(arg.split);
                datasets.push_back(std::move(ds));
            }

            // resolved configuration dump; hashed into the manifest
            std::ostringstream config;
            config << "models=";
            for (ModelFamily f : opts.models) config << family_key(f) << ",";
            config << "\nseed=" << opts.seed << "\nrepeats=" << opts.rnn_repeats
                   << "\ncrf_max_iter=" << opts.crf_max_iter
                   << "\nepochs=" << opts.rnn_max_epochs << "\npatience=" << opts.rnn_patience
                   << "\nclip=" << double_to_text(opts.rnn_clip_norm)
                   << "\nexpansions=" << opts.grid_expansions << "\nsmoothing=";
            for (double v : opts.smoothing_grid) config << double_to_text(v) << ",";
            config << "\nhidden=";
            for (double v : opts.hidden_grid) config << double_to_text(v) << ",";
            config << "\nlr=";
            for (double v : opts.lr_grid) config << double_to_text(v) << ",";
            for (const auto& ds : datasets)
                config << "\ndata " << ds.name << " days=" << ds.data.instances.size()
                       << " split=" << ds.split.train_days << "/" << ds.split.val_days << "/"
                       << ds.split.test_days;

            BenchmarkOutcome outcome = run_benchmark(datasets, opts);
            write_benchmark_outputs(outcome, opts, datasets, bench_out, config.str());
            std::cout << render_report_text(outcome.report);
            std::cout << "benchmark: outputs under " << bench_out << "\n";
            if (!outcome.report.all_ok()) {
                std::cerr << "error: one or more benchmark rows failed (see report.txt)\n";
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
