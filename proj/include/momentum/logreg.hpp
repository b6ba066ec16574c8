#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "momentum/feature_table.hpp"

namespace momentum::logreg {

struct TrainConfig {
    double alpha = 0.1;        // learning rate on standardized features
    int max_iterations = 10000;
    double tolerance = 1e-8;   // on |ΔJ| between accepted iterations
    double cutoff = 0.5;       // classification threshold, probability >= cutoff -> 1
    void validate() const;
};

struct LogisticModel {
    std::vector<std::string> feature_names;  // excludes the intercept
    std::vector<double> coefficients;        // original (report) scale
    double intercept = 0.0;
    std::vector<double> std_coefficients;    // standardized scale
    double std_intercept = 0.0;
    std::vector<double> feature_means;
    std::vector<double> feature_stds;
    std::vector<std::string> dropped_features;  // constant over the training rows
    int iterations = 0;
    double final_loss = 0.0;
    bool converged = false;
    bool separation = false;  // any standardized |coefficient| > 15 at convergence
    std::vector<std::string> warnings;

    // Linear predictor + probability on the report scale.
    double probability(std::span<const double> row) const;
    double std_probability(std::span<const double> row) const;  // standardizes internally
};

// Numerically stable for |z| well past 700.
double sigmoid(double z);

// theta[0] is the intercept; theta[1 + j] multiplies column j of `features`
// (rows without an explicit 1s column). Labels must be 0/1.
double loss(std::span<const double> theta,
            const std::vector<std::vector<double>>& features,
            std::span<const int> labels);
std::vector<double> gradient(std::span<const double> theta,
                             const std::vector<std::vector<double>>& features,
                             std::span<const int> labels);

// Standardize -> zero init -> gradient descent with step-halving on loss
// increase -> de-standardize for reporting. Constant features are dropped and
// listed in dropped_features.
LogisticModel fit(const FeatureTable& features, std::span<const int> labels,
                  const TrainConfig& config = {});

struct Prediction {
    double probability = 0.0;
    int predicted = 0;  // probability >= cutoff -> 1
};

// Row aligned to model.feature_names; a NaN entry raises DataError naming the feature.
Prediction predict(const LogisticModel& model, std::span<const double> row,
                   double cutoff = 0.5);

struct ConfusionMatrix {
    long n00 = 0;  // measured 0, predicted 0
    long n01 = 0;  // measured 0, predicted 1
    long n10 = 0;
    long n11 = 0;

    long total() const { return n00 + n01 + n10 + n11; }
    double pct_correct_0() const;  // 100 * n00 / (n00 + n01)
    double pct_correct_1() const;
    double overall_pct() const;
};

ConfusionMatrix confusion(const LogisticModel& model, const FeatureTable& features,
                          std::span<const int> labels, double cutoff = 0.5);

struct CoefficientStats {
    std::string name;  // feature name, or "constant"
    double b = 0.0;
    double std_error = 0.0;  // +inf when the information matrix is singular
    double wald = 0.0;       // (B/SE)^2
    int df = 1;
    double p_value = 1.0;
    double exp_b = 1.0;
};

struct InferenceTable {
    std::vector<CoefficientStats> rows;  // features first, then "constant"
    double omnibus_chi_square = 0.0;
    int omnibus_df = 0;
    double omnibus_sig = 1.0;
    double log_likelihood = 0.0;
    double minus_two_log_likelihood = 0.0;
    double cox_snell_r2 = 0.0;
    double nagelkerke_r2 = 0.0;
    bool separation_note = false;
    std::vector<std::string> warnings;
};

// Standard errors from the inverse observed information at the fitted
// coefficients, on the report scale; `features`/`labels` must be the data the
// model was fitted on.
InferenceTable wald_inference(const LogisticModel& model, const FeatureTable& features,
                              std::span<const int> labels);

std::string to_csv(const InferenceTable& table);
std::string to_csv(const ConfusionMatrix& cm);
nlohmann::ordered_json to_json(const InferenceTable& table);
nlohmann::ordered_json to_json(const ConfusionMatrix& cm);

}  // namespace momentum::logreg
