#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include "mrar/common.hpp"

namespace mrar {

// Limited-memory quasi-Newton minimizer (two-loop recursion) with a
// backtracking line search under the Armijo sufficient-decrease condition.
// Fully deterministic: no randomized restarts, fixed evaluation order.

struct LbfgsOptions {
    int max_iterations = 1000;
    double grad_tolerance = 1e-5;  // max-norm stopping test
    int history = 10;
    int max_backtracks = 60;
    double armijo_c = 1e-4;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    double grad_max_norm = 0.0;
    int iterations = 0;
    bool converged = false;              // gradient tolerance reached
    std::vector<double> objective_trace;  // accepted iterates, non-increasing
};

/// objective(x, grad_out) -> f(x); grad_out is resized/overwritten.
using LbfgsObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

inline LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, Eigen::VectorXd x0,
                                  const LbfgsOptions& opts = {}) {
    if (opts.max_iterations < 1) throw ConfigError("lbfgs: max_iterations must be >= 1");

    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd grad(n);
    double fx = objective(x, grad);
    if (!std::isfinite(fx)) throw TrainingError("lbfgs: objective not finite at start");

    LbfgsResult result;
    result.objective_trace.push_back(fx);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    Eigen::VectorXd direction(n), x_next(n), grad_next(n), alpha_work;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        result.grad_max_norm = grad.cwiseAbs().maxCoeff();
        if (result.grad_max_norm < opts.grad_tolerance) {
            result.converged = true;
            break;
        }

        // two-loop recursion
        direction = -grad;
        const int k = static_cast<int>(s_hist.size());
        alpha_work.resize(k);
        for (int i = k - 1; i >= 0; --i) {
            alpha_work(i) = rho_hist[i] * s_hist[i].dot(direction);
            direction -= alpha_work(i) * y_hist[i];
        }
        if (k > 0) {
            double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            direction *= gamma;
        }
        for (int i = 0; i < k; ++i) {
            double beta = rho_hist[i] * y_hist[i].dot(direction);
            direction += (alpha_work(i) - beta) * s_hist[i];
        }

        double slope = grad.dot(direction);
        if (!(slope < 0.0)) {  // degenerate curvature; fall back to steepest descent
            direction = -grad;
            slope = grad.dot(direction);
        }

        // backtracking: halve on non-finite values or insufficient decrease
        double step = 1.0;
        double f_next = 0.0;
        bool accepted = false;
        bool saw_finite = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            x_next = x + step * direction;
            f_next = objective(x_next, grad_next);
            if (std::isfinite(f_next)) {
                saw_finite = true;
                if (f_next <= fx + opts.armijo_c * step * slope) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!saw_finite)
                throw TrainingError("lbfgs: no finite step along the search direction");
            break;  // finite but no further decrease; return the current iterate
        }

        Eigen::VectorXd s = x_next - x;
        Eigen::VectorXd y = grad_next - grad;
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        x.swap(x_next);
        grad.swap(grad_next);
        fx = f_next;
        result.iterations = iter + 1;
        result.objective_trace.push_back(fx);
    }

    result.x = std::move(x);
    result.objective = fx;
    result.grad_max_norm = grad.cwiseAbs().maxCoeff();
    if (!result.converged)
        result.converged = result.grad_max_norm < opts.grad_tolerance;
    return result;
}

}  // namespace mrar
