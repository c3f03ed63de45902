// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tarsim/classifier.hpp"
#include "tarsim/features.hpp"

namespace tarsim {

/// L2-regularized logistic regression.
///
/// Objective:  C * sum_i log(1 + exp(-y_i (w.x_i + b))) + 0.5 * |w|^2
/// with y in {-1,+1} and the intercept b unpenalized. When the training set
/// has a single class the unpenalized problem has no finite minimizer, so
/// 0.5 * b^2 is added and `intercept_regularized` is set.
struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double penalty = 1.0;
    bool intercept_regularized = false;
};

struct SolverOptions {
    /// Stop once the infinity norm of the gradient falls below this.
    double gradient_tolerance = 1e-8;
    /// The postcondition checked before returning; TrainingError above it.
    double required_tolerance = 1e-6;
    int max_newton_iterations = 200;
    int max_cg_iterations = 500;
};

/// Fits from scratch (no warm start). Throws TrainingError with no positive
/// example or on failure to converge, ValidationError on non-finite
/// features, ArgumentError on penalty <= 0.
LinearModel fit_logreg(const FeatureMatrix& features, const LabeledSet& labeled, double penalty,
                       const SolverOptions& options = {});

double logreg_objective(const LinearModel& model, const FeatureMatrix& features, const LabeledSet& labeled);

/// Gradient of the objective; the last element is the intercept component.
std::vector<double> logreg_gradient(const LinearModel& model, const FeatureMatrix& features,
                                    const LabeledSet& labeled);

/// sigmoid(w.x + b) per row. Throws ArgumentError on dimension mismatch.
ScoreVector predict_proba(const LinearModel& model, const FeatureMatrix& features);

double sigmoid(double z);

/// Retrains from scratch on every fit call.
class LogRegScorer : public Scorer {
public:
    LogRegScorer(const FeatureMatrix& features, double penalty) : features_(features), penalty_(penalty) {}

    std::string name() const override;
    void fit(const LabeledSet& labeled) override { model_ = fit_logreg(features_, labeled, penalty_); }
    ScoreVector score() override { return predict_proba(model_, features_); }

    const LinearModel& model() const noexcept { return model_; }

private:
    const FeatureMatrix& features_;
    double penalty_;
    LinearModel model_;
};

} // namespace tarsim
