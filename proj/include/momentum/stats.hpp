#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "momentum/feature_table.hpp"

namespace momentum::stats {

struct SpearmanResult {
    double rho = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    bool defined = true;  // false when either input is constant
};

// Average ranks for ties; p from the two-sided t approximation with n-2 df.
// Requires n >= 3; constant input yields defined == false, not an exception.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

// Exact permutation p-value, |rho_perm| >= |rho_obs| over all n! permutations.
// Oracle mode; requires 3 <= n <= 10 and non-constant inputs.
double spearman_permutation_p(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
    std::vector<std::string> variables;
    std::vector<std::vector<double>> rho;       // NaN where undefined
    std::vector<std::vector<double>> p;
    std::vector<std::vector<std::size_t>> n;    // pairwise-complete sample sizes
    std::vector<bool> constant_flags;           // per variable
    std::string target;
    struct TargetEntry {
        std::string variable;
        double rho = 0.0;
        double p = 1.0;
        bool defined = true;
    };
    std::vector<TargetEntry> target_ranking;  // sorted by p ascending, undefined last
    std::vector<std::string> warnings;
};

// All-pairs Spearman over pairwise-complete rows. NaN table entries mark
// missing values; pairs with fewer than 3 complete rows are undefined.
CorrelationReport correlation_matrix(const FeatureTable& table, const std::string& target);

struct PcaResult {
    std::vector<std::string> variables;
    std::vector<std::vector<double>> loadings;  // variables x components, unit columns
    std::vector<double> eigenvalues;            // descending
    std::vector<double> contributions;          // eigenvalue / sum
    std::vector<double> cumulative;
    std::size_t sample_size = 0;
};

// Correlation-matrix PCA over the complete rows of the selected variables.
// Each component is flipped so its largest-magnitude loading is positive.
PcaResult pca(const FeatureTable& table, const std::vector<std::string>& variables);

struct RankedFactor {
    std::string variable;
    double loading = 0.0;   // on the first component
    double target_p = 1.0;  // p-value against the report's target column
};

// Variables ranked by |loading| on the first principal component.
std::vector<RankedFactor> top_factors(const CorrelationReport& report,
                                      const PcaResult& components, std::size_t k);

// Matrix CSV layouts, 6 significant digits.
std::string rho_csv(const CorrelationReport& report);
std::string p_csv(const CorrelationReport& report);
std::string loadings_csv(const PcaResult& result);
std::string to_csv(const std::vector<RankedFactor>& factors);
nlohmann::ordered_json to_json(const CorrelationReport& report);
nlohmann::ordered_json to_json(const PcaResult& result);
nlohmann::ordered_json to_json(const std::vector<RankedFactor>& factors);

}  // namespace momentum::stats
