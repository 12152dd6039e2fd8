#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mrar/common.hpp"
#include "mrar/datamodel.hpp"

namespace mrar {

// Benchmark metrics and selection machinery: the two accuracy measures
// (per resident and joint), deterministic grid search with boundary
// expansion, repeated-run averaging, and wall-clock timing.

// ---------------------------------------------------------------- predictions

struct PredictionSet {
    std::vector<std::vector<ActivityFrame>> frames;  // per instance, per step
};

inline std::vector<ActivityFrame> frames_from_per_resident(
    const std::vector<std::vector<int>>& per_resident) {
    if (per_resident.empty()) return {};
    const int residents = static_cast<int>(per_resident.size());
    const std::size_t steps = per_resident[0].size();
    std::vector<ActivityFrame> frames(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        frames[t].labels.resize(residents);
        for (int m = 0; m < residents; ++m) frames[t].labels[m] = per_resident[m][t];
    }
    return frames;
}

inline std::vector<ActivityFrame> frames_from_combined(const std::vector<int>& path,
                                                       const LabelSpace& space) {
    std::vector<ActivityFrame> frames;
    frames.reserve(path.size());
    for (int j : path) frames.push_back(decode_combined(j, space));
    return frames;
}

namespace detail {

inline void check_alignment(const PredictionSet& preds, const Dataset& truth) {
    if (preds.frames.size() != truth.instances.size())
        throw DomainError("metrics: prediction/test instance counts differ");
    for (std::size_t i = 0; i < preds.frames.size(); ++i) {
        if (static_cast<int>(preds.frames[i].size()) != truth.instances[i].length())
            throw DomainError("metrics: prediction length mismatch on instance " +
                              std::to_string(i));
        for (const auto& f : preds.frames[i])
            if (static_cast<int>(f.labels.size()) != truth.label_space.residents)
                throw DomainError("metrics: predicted frame arity mismatch");
    }
}

}  // namespace detail

/// Mean over instances of the per-instance fraction of steps where resident
/// m's prediction matches; instances weigh equally regardless of length.
inline double accuracy_per_resident(const PredictionSet& preds, const Dataset& truth, int m) {
    detail::check_alignment(preds, truth);
    if (m < 0 || m >= truth.label_space.residents)
        throw DomainError("accuracy_per_resident: no such resident");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.frames.size(); ++i) {
        const auto& inst = truth.instances[i];
        int hits = 0;
        for (int t = 0; t < inst.length(); ++t)
            if (preds.frames[i][t].labels[m] == inst.activities[t].labels[m]) ++hits;
        total += static_cast<double>(hits) / inst.length();
    }
    return total / static_cast<double>(preds.frames.size());
}

/// Joint accuracy: a step counts only when every resident's label matches.
inline double accuracy_all(const PredictionSet& preds, const Dataset& truth) {
    detail::check_alignment(preds, truth);
    double total = 0.0;
    for (std::size_t i = 0; i < preds.frames.size(); ++i) {
        const auto& inst = truth.instances[i];
        int hits = 0;
        for (int t = 0; t < inst.length(); ++t)
            if (preds.frames[i][t].labels == inst.activities[t].labels) ++hits;
        total += static_cast<double>(hits) / inst.length();
    }
    return total / static_cast<double>(preds.frames.size());
}

// ---------------------------------------------------------------- grid search

struct GridAxis {
    std::string name;
    std::vector<double> values;     // ascending
    bool prefer_smaller = true;     // tie-break direction
    bool integer_valued = false;    // round extension points (hidden sizes)
};

struct GridPoint {
    std::vector<double> values;  // aligned with the axis list
    double score = -std::numeric_limits<double>::infinity();
    bool ok = false;
    std::string error;
};

struct GridSearchResult {
    std::vector<double> best;  // axis values of the winning point
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<GridPoint> trace;
    int expansions = 0;
};

namespace detail {

inline std::vector<std::vector<double>> cartesian(const std::vector<GridAxis>& axes) {
    std::vector<std::vector<double>> points{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& partial : points)
            for (double v : axis.values) {
                auto p = partial;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        points = std::move(next);
    }
    return points;
}

/// True when `cand` beats `inc`: higher score, or an exact tie resolved
/// axis-by-axis in declaration order by each axis's preference.
inline bool grid_better(const GridPoint& cand, const GridPoint& inc,
                        const std::vector<GridAxis>& axes) {
    if (!inc.ok) return cand.ok;
    if (!cand.ok) return false;
    if (cand.score != inc.score) return cand.score > inc.score;
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (cand.values[a] == inc.values[a]) continue;
        return axes[a].prefer_smaller ? cand.values[a] < inc.values[a]
                                      : cand.values[a] > inc.values[a];
    }
    return false;
}

}  // namespace detail

/// Trains/scores every grid point (concurrently, deterministic slots) and
/// returns the argmax under the axes' tie rules. When the winner sits on the
/// boundary of an axis the grid grows one log-step in that direction and the
/// new points are scored, at most `max_expansions` times.
inline GridSearchResult grid_search(std::vector<GridAxis> axes,
                                    const std::function<double(const std::vector<double>&)>& score,
                                    int max_expansions = 2) {
    for (const auto& axis : axes)
        if (axis.values.empty()) throw ConfigError("grid_search: empty axis " + axis.name);

    GridSearchResult result;
    auto evaluate = [&](const std::vector<std::vector<double>>& points) {
        std::vector<GridPoint> scored(points.size());
        parallel_for(points.size(), [&](std::size_t i) {
            scored[i].values = points[i];
            try {
                scored[i].score = score(points[i]);
                scored[i].ok = true;
            } catch (const std::exception& e) {
                scored[i].error = e.what();
            }
        });
        for (auto& p : scored) result.trace.push_back(std::move(p));
    };

    evaluate(detail::cartesian(axes));
    while (true) {
        const GridPoint* best = nullptr;
        for (const auto& p : result.trace)
            if (!best || detail::grid_better(p, *best, axes)) best = &p;
        if (!best || !best->ok)
            throw TrainingError("grid_search: every grid point failed training");

        result.best = best->values;
        result.best_score = best->score;
        if (result.expansions >= max_expansions) break;

        // grow any axis whose winner sits on its edge
        std::vector<std::vector<std::vector<double>>> new_point_sets;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            auto& axis = axes[a];
            if (axis.values.size() < 2) continue;
            double extension = 0.0;
            if (best->values[a] == axis.values.front()) {
                double ratio = axis.values[1] / axis.values[0];
                extension = axis.values.front() / ratio;
            } else if (best->values[a] == axis.values.back()) {
                double ratio = axis.values.back() / axis.values[axis.values.size() - 2];
                extension = axis.values.back() * ratio;
            } else {
                continue;
            }
            if (axis.integer_valued) extension = std::max(1.0, std::round(extension));
            bool duplicate = false;
            for (double v : axis.values) duplicate |= v == extension;
            if (duplicate) continue;

            std::vector<GridAxis> slab = axes;
            slab[a].values = {extension};
            new_point_sets.push_back(detail::cartesian(slab));
            axis.values.push_back(extension);
            std::sort(axis.values.begin(), axis.values.end());
        }
        if (new_point_sets.empty()) break;
        ++result.expansions;
        for (const auto& pts : new_point_sets) evaluate(pts);
    }
    return result;
}

// ---------------------------------------------------------------- repeats

struct RepeatStats {
    int requested = 0;
    int completed = 0;
    int excluded = 0;  // diverged runs, dropped from the averages
    std::vector<double> mean;
    std::vector<double> stddev;  // population form; zero when n = 1
};

/// Runs the experiment with seeds base_seed + 0 .. n-1 (concurrently) and
/// averages the returned metric vectors. Runs that throw TrainingError are
/// excluded and counted.
inline RepeatStats repeated_runs(const std::function<std::vector<double>(std::uint64_t)>& run,
                                 int n, std::uint64_t base_seed) {
    if (n < 1) throw ConfigError("repeated_runs: n must be >= 1");
    std::vector<std::optional<std::vector<double>>> metrics(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        try {
            metrics[i] = run(base_seed + i);
        } catch (const TrainingError&) {
            metrics[i] = std::nullopt;
        }
    });

    RepeatStats stats;
    stats.requested = n;
    for (const auto& m : metrics) {
        if (!m) {
            ++stats.excluded;
            continue;
        }
        if (stats.mean.empty()) {
            stats.mean.assign(m->size(), 0.0);
            stats.stddev.assign(m->size(), 0.0);
        }
        for (std::size_t k = 0; k < m->size(); ++k) stats.mean[k] += (*m)[k];
        ++stats.completed;
    }
    if (stats.completed == 0)
        throw TrainingError("repeated_runs: every repeat diverged");
    for (auto& v : stats.mean) v /= stats.completed;
    for (const auto& m : metrics) {
        if (!m) continue;
        for (std::size_t k = 0; k < m->size(); ++k) {
            double d = (*m)[k] - stats.mean[k];
            stats.stddev[k] += d * d;
        }
    }
    for (auto& v : stats.stddev) v = std::sqrt(v / stats.completed);
    return stats;
}

// ---------------------------------------------------------------- timing

/// Wall-clock seconds of one task run (train plus predict in benchmark use).
inline double measure_seconds(const std::function<void()>& task) {
    auto start = std::chrono::steady_clock::now();
    task();
    auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

/// Table rendering rule: hours once a task exceeds 3600 seconds.
inline std::string format_duration(double seconds) {
    char buf[48];
    if (seconds > 3600.0)
        std::snprintf(buf, sizeof(buf), "%.2f hrs", seconds / 3600.0);
    else
        std::snprintf(buf, sizeof(buf), "%.2f sec", seconds);
    return buf;
}

}  // namespace mrar
