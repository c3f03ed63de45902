// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "tarsim/error.hpp"

namespace tarsim {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// The training problem restricted to columns that occur in labeled rows.
/// Every other weight is zero at the optimum since its gradient is w_j.
class Problem {
public:
    Problem(const FeatureMatrix& features, const LabeledSet& labeled, double penalty)
        : penalty_(penalty), regularize_intercept_(labeled.negatives() == 0) {
        std::unordered_map<std::uint32_t, std::uint32_t> local;
        for (const auto& entry : labeled.entries()) {
            if (entry.doc >= features.rows()) {
                throw ArgumentError("labeled document outside the feature matrix");
            }
            for (const auto& e : features.row(entry.doc)) {
                if (!std::isfinite(e.value)) {
                    throw ValidationError("non-finite feature value in row " + std::to_string(entry.doc));
                }
                if (local.emplace(e.column, 0).second) {
                    columns_.push_back(e.column);
                }
            }
        }
        std::sort(columns_.begin(), columns_.end());
        for (std::uint32_t i = 0; i < columns_.size(); ++i) {
            local[columns_[i]] = i;
        }
        row_ptr_.push_back(0);
        for (const auto& entry : labeled.entries()) {
            for (const auto& e : features.row(entry.doc)) {
                entries_.push_back({local[e.column], e.value});
            }
            row_ptr_.push_back(entries_.size());
            y_.push_back(entry.relevant ? 1.0 : -1.0);
        }
    }

    std::size_t dim() const { return columns_.size() + 1; }
    std::size_t samples() const { return y_.size(); }
    bool regularize_intercept() const { return regularize_intercept_; }
    const std::vector<std::uint32_t>& columns() const { return columns_; }

    // theta = (w_local..., b)
    double margin(std::size_t i, const std::vector<double>& theta) const {
        double z = theta.back();
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            z += entries_[k].value * theta[entries_[k].column];
        }
        return z;
    }

    double objective(const std::vector<double>& theta) const {
        double loss = 0.0;
        for (std::size_t i = 0; i < samples(); ++i) {
            loss += softplus(-y_[i] * margin(i, theta));
        }
        double reg = 0.0;
        for (std::size_t j = 0; j + 1 < theta.size(); ++j) {
            reg += theta[j] * theta[j];
        }
        if (regularize_intercept_) {
            reg += theta.back() * theta.back();
        }
        return penalty_ * loss + 0.5 * reg;
    }

    /// Gradient into `g`; curvature weights D_i into `d`.
    void gradient(const std::vector<double>& theta, std::vector<double>& g, std::vector<double>& d) const {
        g.assign(theta.begin(), theta.end());
        if (!regularize_intercept_) {
            g.back() = 0.0;
        }
        d.resize(samples());
        for (std::size_t i = 0; i < samples(); ++i) {
            const double z = margin(i, theta);
            const double p = sigmoid(z);
            d[i] = p * (1.0 - p);
            // d/dz softplus(-y z) = -y * sigmoid(-y z)
            const double coef = penalty_ * -y_[i] * sigmoid(-y_[i] * z);
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                g[entries_[k].column] += coef * entries_[k].value;
            }
            g.back() += coef;
        }
    }

    void hessian_times(const std::vector<double>& d, const std::vector<double>& v, std::vector<double>& out) const {
        out.assign(v.begin(), v.end());
        if (!regularize_intercept_) {
            out.back() = 0.0;
        }
        for (std::size_t i = 0; i < samples(); ++i) {
            const double xv = margin(i, v);
            const double coef = penalty_ * d[i] * xv;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                out[entries_[k].column] += coef * entries_[k].value;
            }
            out.back() += coef;
        }
    }

private:
    double penalty_;
    bool regularize_intercept_;
    std::vector<std::uint32_t> columns_;
    std::vector<std::size_t> row_ptr_;
    std::vector<FeatureEntry> entries_;
    std::vector<double> y_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

} // namespace

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LinearModel fit_logreg(const FeatureMatrix& features, const LabeledSet& labeled, double penalty,
                       const SolverOptions& options) {
    if (!(penalty > 0.0) || !std::isfinite(penalty)) {
        throw ArgumentError("logistic regression penalty must be > 0");
    }
    if (labeled.positives() == 0) {
        throw TrainingError("training set has no positive example");
    }
    const Problem problem(features, labeled, penalty);
    const std::size_t dim = problem.dim();

    std::vector<double> theta(dim, 0.0), g, d, step(dim), r(dim), p(dim), hp(dim), trial(dim);
    double f = problem.objective(theta);
    double gnorm = 0.0;
    int iter = 0;
    for (;; ++iter) {
        problem.gradient(theta, g, d);
        gnorm = inf_norm(g);
        if (gnorm <= options.gradient_tolerance || iter >= options.max_newton_iterations) {
            break;
        }
        // Truncated conjugate gradient on H step = -g.
        const double g2 = std::sqrt(dot(g, g));
        const double cg_tol = std::min(0.5, std::sqrt(g2)) * g2;
        std::fill(step.begin(), step.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            r[i] = -g[i];
        }
        p = r;
        double rr = dot(r, r);
        for (int k = 0; k < options.max_cg_iterations; ++k) {
            problem.hessian_times(d, p, hp);
            const double php = dot(p, hp);
            if (!(php > 0.0)) {
                break;
            }
            const double alpha = rr / php;
            for (std::size_t i = 0; i < dim; ++i) {
                step[i] += alpha * p[i];
                r[i] -= alpha * hp[i];
            }
            const double rr_next = dot(r, r);
            if (std::sqrt(rr_next) <= cg_tol) {
                break;
            }
            const double beta = rr_next / rr;
            rr = rr_next;
            for (std::size_t i = 0; i < dim; ++i) {
                p[i] = r[i] + beta * p[i];
            }
        }
        double slope = dot(g, step);
        if (!(slope < 0.0)) {
            // CG made no progress; fall back to steepest descent.
            for (std::size_t i = 0; i < dim; ++i) {
                step[i] = -g[i];
            }
            slope = -dot(g, g);
        }
        // Backtracking (Armijo) line search.
        double t = 1.0;
        bool accepted = false;
        while (t > 1e-12) {
            for (std::size_t i = 0; i < dim; ++i) {
                trial[i] = theta[i] + t * step[i];
            }
            const double f_trial = problem.objective(trial);
            if (f_trial <= f + 1e-4 * t * slope) {
                theta.swap(trial);
                f = f_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Objective differences are below rounding; gradient decides.
            break;
        }
    }

    if (!(gnorm <= options.required_tolerance) || !std::isfinite(f)) {
        std::ostringstream msg;
        msg << "logistic regression did not converge: gradient norm " << gnorm << " after " << iter
            << " Newton iterations";
        throw TrainingError(msg.str());
    }

    LinearModel model;
    model.weights.assign(features.cols(), 0.0);
    const auto& cols = problem.columns();
    for (std::size_t j = 0; j < cols.size(); ++j) {
        model.weights[cols[j]] = theta[j];
    }
    model.intercept = theta.back();
    model.penalty = penalty;
    model.intercept_regularized = problem.regularize_intercept();
    return model;
}

double logreg_objective(const LinearModel& model, const FeatureMatrix& features, const LabeledSet& labeled) {
    double loss = 0.0;
    for (const auto& entry : labeled.entries()) {
        const double y = entry.relevant ? 1.0 : -1.0;
        loss += softplus(-y * (features.dot(entry.doc, model.weights) + model.intercept));
    }
    double reg = 0.0;
    for (double w : model.weights) {
        reg += w * w;
    }
    if (model.intercept_regularized) {
        reg += model.intercept * model.intercept;
    }
    return model.penalty * loss + 0.5 * reg;
}

std::vector<double> logreg_gradient(const LinearModel& model, const FeatureMatrix& features,
                                    const LabeledSet& labeled) {
    std::vector<double> g(model.weights);
    g.push_back(model.intercept_regularized ? model.intercept : 0.0);
    for (const auto& entry : labeled.entries()) {
        const double y = entry.relevant ? 1.0 : -1.0;
        const double z = features.dot(entry.doc, model.weights) + model.intercept;
        const double coef = model.penalty * -y * sigmoid(-y * z);
        for (const auto& e : features.row(entry.doc)) {
            g[e.column] += coef * e.value;
        }
        g.back() += coef;
    }
    return g;
}

ScoreVector predict_proba(const LinearModel& model, const FeatureMatrix& features) {
    if (model.weights.size() != features.cols()) {
        throw ArgumentError("model has " + std::to_string(model.weights.size()) + " weights but the matrix has " +
                            std::to_string(features.cols()) + " columns");
    }
    ScoreVector scores(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        scores[i] = sigmoid(features.dot(i, model.weights) + model.intercept);
    }
    return scores;
}

std::string LogRegScorer::name() const {
    std::ostringstream s;
    s << "logreg-C" << penalty_;
    return s.str();
}

} // namespace tarsim
