#include "momentum/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "momentum/errors.hpp"
#include "internal/format.hpp"

namespace momentum::logreg {
namespace {

constexpr double kLogClamp = 1e-15;
constexpr double kSeparationThreshold = 15.0;

double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

double linear_term(std::span<const double> theta, const std::vector<double>& row) {
    double z = theta[0];
    for (std::size_t j = 0; j + 1 < theta.size(); ++j) {
        z += theta[j + 1] * row[j];
    }
    return z;
}

void check_shapes(std::span<const double> theta,
                  const std::vector<std::vector<double>>& features,
                  std::span<const int> labels) {
    if (features.size() != labels.size()) {
        throw DataError("feature rows and labels differ in length");
    }
    if (features.empty()) {
        throw DataError("empty training data");
    }
    const std::size_t width = theta.size() - 1;
    for (const auto& row : features) {
        if (row.size() != width) {
            throw DataError("feature row width does not match parameter vector");
        }
    }
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw DataError("labels must be 0 or 1");
        }
    }
}

double chi2_upper_tail(double x, double df) {
    if (!(x >= 0.0) || df <= 0.0) return 1.0;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

}  // namespace

void TrainConfig::validate() const {
    if (!(alpha > 0.0)) throw DataError("learning rate must be positive");
    if (max_iterations < 1) throw DataError("max_iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw DataError("tolerance must be >= 0");
    if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw DataError("cutoff must be in [0,1]");
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double loss(std::span<const double> theta,
            const std::vector<std::vector<double>>& features,
            std::span<const int> labels) {
    check_shapes(theta, features, labels);
    const double m = static_cast<double>(features.size());
    double total = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double h = sigmoid(linear_term(theta, features[i]));
        total += labels[i] == 1 ? clamped_log(h) : clamped_log(1.0 - h);
    }
    return -total / m;
}

std::vector<double> gradient(std::span<const double> theta,
                             const std::vector<std::vector<double>>& features,
                             std::span<const int> labels) {
    check_shapes(theta, features, labels);
    const double m = static_cast<double>(features.size());
    std::vector<double> g(theta.size(), 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double err = sigmoid(linear_term(theta, features[i])) - labels[i];
        g[0] += err;
        for (std::size_t j = 0; j + 1 < theta.size(); ++j) {
            g[j + 1] += err * features[i][j];
        }
    }
    for (double& v : g) v /= m;
    return g;
}

LogisticModel fit(const FeatureTable& features, std::span<const int> labels,
                  const TrainConfig& config) {
    config.validate();
    if (features.row_count() != labels.size()) {
        throw DataError("feature rows and labels differ in length");
    }
    if (features.row_count() == 0) {
        throw DataError("empty training data");
    }
    for (const auto& row : features.rows) {
        for (double v : row) {
            if (std::isnan(v)) {
                throw DataError(
                    "feature matrix contains missing values; drop incomplete rows "
                    "before fitting");
            }
        }
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
    }

    LogisticModel model;
    const std::size_t m = features.row_count();

    // Constant columns carry no gradient and break standardization; drop them.
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < features.column_count(); ++j) {
        double lo = features.rows[0][j];
        double hi = lo;
        for (const auto& row : features.rows) {
            lo = std::min(lo, row[j]);
            hi = std::max(hi, row[j]);
        }
        if (hi > lo) {
            active.push_back(j);
        } else {
            model.dropped_features.push_back(features.columns[j].name);
            model.warnings.push_back("dropped constant feature '" +
                                     features.columns[j].name + "'");
        }
    }
    for (std::size_t j : active) {
        model.feature_names.push_back(features.columns[j].name);
    }

    const std::size_t k = active.size();
    model.feature_means.assign(k, 0.0);
    model.feature_stds.assign(k, 1.0);
    std::vector<std::vector<double>> z(m, std::vector<double>(k, 0.0));
    for (std::size_t jj = 0; jj < k; ++jj) {
        const std::size_t j = active[jj];
        double mean = 0.0;
        for (const auto& row : features.rows) mean += row[j];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (const auto& row : features.rows) {
            const double d = row[j] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(m));
        model.feature_means[jj] = mean;
        model.feature_stds[jj] = sd;
        for (std::size_t i = 0; i < m; ++i) {
            z[i][jj] = (features.rows[i][j] - mean) / sd;
        }
    }

    bool single_class = true;
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] != labels[0]) {
            single_class = false;
            break;
        }
    }
    if (single_class) {
        model.warnings.push_back("all labels share one class; fit is degenerate");
    }

    std::vector<double> theta(k + 1, 0.0);
    double prev = loss(theta, z, labels);
    bool converged = false;
    int iterations = 0;
    for (int t = 1; t <= config.max_iterations; ++t) {
        const std::vector<double> g = gradient(theta, z, labels);
        double step = config.alpha;
        std::vector<double> candidate(theta.size());
        double next = prev;
        bool descended = false;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t j = 0; j < theta.size(); ++j) {
                candidate[j] = theta[j] - step * g[j];
            }
            next = loss(candidate, z, labels);
            if (next <= prev) {
                descended = true;
                break;
            }
            step *= 0.5;
        }
        iterations = t;
        if (!descended) {
            converged = true;  // no descent direction at machine precision
            break;
        }
        theta = candidate;
        const double drop = prev - next;
        prev = next;
        if (drop < config.tolerance) {
            converged = true;
            break;
        }
    }
    model.iterations = iterations;
    model.final_loss = prev;
    model.converged = converged;
    if (!converged) {
        model.warnings.push_back("stopped at max_iterations without meeting tolerance");
    }

    model.std_intercept = theta[0];
    model.std_coefficients.assign(theta.begin() + 1, theta.end());
    for (double c : model.std_coefficients) {
        if (std::abs(c) > kSeparationThreshold) {
            model.separation = true;
        }
    }
    if (model.separation) {
        model.warnings.push_back(
            "possible complete separation: a standardized coefficient magnitude "
            "exceeds 15");
    }

    model.coefficients.assign(k, 0.0);
    model.intercept = theta[0];
    for (std::size_t jj = 0; jj < k; ++jj) {
        model.coefficients[jj] = theta[jj + 1] / model.feature_stds[jj];
        model.intercept -= theta[jj + 1] * model.feature_means[jj] / model.feature_stds[jj];
    }
    return model;
}

double LogisticModel::probability(std::span<const double> row) const {
    if (row.size() != coefficients.size()) {
        throw DataError("row width does not match model features");
    }
    double zv = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        zv += coefficients[j] * row[j];
    }
    return sigmoid(zv);
}

double LogisticModel::std_probability(std::span<const double> row) const {
    if (row.size() != std_coefficients.size()) {
        throw DataError("row width does not match model features");
    }
    double zv = std_intercept;
    for (std::size_t j = 0; j < std_coefficients.size(); ++j) {
        zv += std_coefficients[j] * (row[j] - feature_means[j]) / feature_stds[j];
    }
    return sigmoid(zv);
}

Prediction predict(const LogisticModel& model, std::span<const double> row,
                   double cutoff) {
    if (row.size() != model.feature_names.size()) {
        throw DataError("row width does not match model features");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (std::isnan(row[j])) {
            throw DataError("missing value for feature '" + model.feature_names[j] + "'");
        }
    }
    Prediction p;
    p.probability = model.probability(row);
    p.predicted = p.probability >= cutoff ? 1 : 0;
    return p;
}

namespace {

// Column indices in `features` for each model feature, by name.
std::vector<std::size_t> align_columns(const LogisticModel& model,
                                       const FeatureTable& features) {
    std::vector<std::size_t> map;
    map.reserve(model.feature_names.size());
    for (const auto& name : model.feature_names) {
        const auto idx = features.column_index(name);
        if (!idx) {
            throw DataError("evaluation data lacks feature '" + name + "'");
        }
        map.push_back(*idx);
    }
    return map;
}

}  // namespace

double ConfusionMatrix::pct_correct_0() const {
    const long d = n00 + n01;
    return d == 0 ? std::nan("") : 100.0 * static_cast<double>(n00) / d;
}

double ConfusionMatrix::pct_correct_1() const {
    const long d = n10 + n11;
    return d == 0 ? std::nan("") : 100.0 * static_cast<double>(n11) / d;
}

double ConfusionMatrix::overall_pct() const {
    const long t = total();
    return t == 0 ? std::nan("") : 100.0 * static_cast<double>(n00 + n11) / t;
}

ConfusionMatrix confusion(const LogisticModel& model, const FeatureTable& features,
                          std::span<const int> labels, double cutoff) {
    if (features.row_count() != labels.size()) {
        throw DataError("feature rows and labels differ in length");
    }
    const std::vector<std::size_t> cols = align_columns(model, features);
    ConfusionMatrix cm;
    std::vector<double> row(cols.size(), 0.0);
    for (std::size_t i = 0; i < features.row_count(); ++i) {
        bool complete = true;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            row[j] = features.rows[i][cols[j]];
            if (std::isnan(row[j])) complete = false;
        }
        if (!complete) continue;  // incomplete evaluation rows are skipped
        const int predicted = model.probability(row) >= cutoff ? 1 : 0;
        const int measured = labels[i];
        if (measured == 0) {
            (predicted == 0 ? cm.n00 : cm.n01) += 1;
        } else {
            (predicted == 0 ? cm.n10 : cm.n11) += 1;
        }
    }
    return cm;
}

InferenceTable wald_inference(const LogisticModel& model, const FeatureTable& features,
                              std::span<const int> labels) {
    if (features.row_count() != labels.size()) {
        throw DataError("feature rows and labels differ in length");
    }
    if (features.row_count() == 0) {
        throw DataError("empty training data");
    }
    const std::vector<std::size_t> cols = align_columns(model, features);
    const std::size_t m = features.row_count();
    const std::size_t k = cols.size();

    InferenceTable table;
    table.separation_note = model.separation;

    // Observed information of the unnormalized negative log-likelihood at the
    // fitted report-scale coefficients: H = sum_i h_i (1-h_i) x_i x_i^T.
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k + 1, k + 1);
    double ll_full = 0.0;
    long positives = 0;
    std::vector<double> row(k, 0.0);
    Eigen::VectorXd xi(k + 1);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = features.rows[i][cols[j]];
            if (std::isnan(row[j])) {
                throw DataError("missing value for feature '" + model.feature_names[j] +
                                "' in inference data");
            }
        }
        const double h = model.probability(row);
        xi(0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) xi(j + 1) = row[j];
        info += h * (1.0 - h) * xi * xi.transpose();
        ll_full += labels[i] == 1 ? clamped_log(h) : clamped_log(1.0 - h);
        positives += labels[i];
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    std::vector<double> se(k + 1, std::numeric_limits<double>::infinity());
    if (lu.isInvertible()) {
        const Eigen::MatrixXd cov = lu.inverse();
        bool bad = false;
        for (std::size_t j = 0; j <= k; ++j) {
            const double v = cov(j, j);
            if (!(v > 0.0) || !std::isfinite(v)) {
                bad = true;
                break;
            }
            se[j] = std::sqrt(v);
        }
        if (bad) {
            std::fill(se.begin(), se.end(), std::numeric_limits<double>::infinity());
            table.separation_note = true;
            table.warnings.push_back(
                "information matrix is numerically singular; standard errors "
                "unavailable");
        }
    } else {
        table.separation_note = true;
        table.warnings.push_back(
            "information matrix is singular; standard errors unavailable");
    }

    auto make_row = [&](const std::string& name, double b, double sd) {
        CoefficientStats cs;
        cs.name = name;
        cs.b = b;
        cs.std_error = sd;
        cs.wald = std::isinf(sd) ? 0.0 : (b / sd) * (b / sd);
        cs.df = 1;
        cs.p_value = chi2_upper_tail(cs.wald, 1.0);
        cs.exp_b = std::exp(b);
        return cs;
    };
    for (std::size_t j = 0; j < k; ++j) {
        table.rows.push_back(make_row(model.feature_names[j], model.coefficients[j],
                                      se[j + 1]));
    }
    table.rows.push_back(make_row("constant", model.intercept, se[0]));

    const double rate = static_cast<double>(positives) / static_cast<double>(m);
    double ll_null = 0.0;
    if (rate > 0.0 && rate < 1.0) {
        ll_null = static_cast<double>(m) *
                  (rate * std::log(rate) + (1.0 - rate) * std::log(1.0 - rate));
    }
    table.log_likelihood = ll_full;
    table.minus_two_log_likelihood = -2.0 * ll_full;
    table.omnibus_chi_square = std::max(0.0, 2.0 * (ll_full - ll_null));
    table.omnibus_df = static_cast<int>(k);
    table.omnibus_sig = chi2_upper_tail(table.omnibus_chi_square,
                                        static_cast<double>(table.omnibus_df));

    const double md = static_cast<double>(m);
    table.cox_snell_r2 = 1.0 - std::exp((2.0 / md) * (ll_null - ll_full));
    const double denom = 1.0 - std::exp((2.0 / md) * ll_null);
    if (denom > 0.0) {
        table.nagelkerke_r2 = table.cox_snell_r2 / denom;
    } else {
        table.nagelkerke_r2 = 0.0;
        table.warnings.push_back("single-class labels; pseudo-R2 undefined, set to 0");
    }
    if (table.separation_note) {
        table.warnings.push_back(
            "coefficient magnitudes may be unstable (possible complete separation)");
    }
    return table;
}

std::string to_csv(const InferenceTable& table) {
    using detail::csv_num;
    std::ostringstream out;
    out << "variable,b,std_error,wald,df,sig,exp_b\n";
    for (const auto& r : table.rows) {
        out << r.name << ',' << csv_num(r.b) << ',' << csv_num(r.std_error) << ','
            << csv_num(r.wald) << ',' << r.df << ',' << csv_num(r.p_value) << ','
            << csv_num(r.exp_b) << '\n';
    }
    out << "\nstatistic,value\n";
    out << "omnibus_chi_square," << csv_num(table.omnibus_chi_square) << '\n';
    out << "omnibus_df," << table.omnibus_df << '\n';
    out << "omnibus_sig," << csv_num(table.omnibus_sig) << '\n';
    out << "log_likelihood," << csv_num(table.log_likelihood) << '\n';
    out << "minus_two_log_likelihood," << csv_num(table.minus_two_log_likelihood)
        << '\n';
    out << "cox_snell_r2," << csv_num(table.cox_snell_r2) << '\n';
    out << "nagelkerke_r2," << csv_num(table.nagelkerke_r2) << '\n';
    return out.str();
}

std::string to_csv(const ConfusionMatrix& cm) {
    using detail::csv_num;
    std::ostringstream out;
    out << "measured,predicted_0,predicted_1,pct_correct\n";
    out << "0," << cm.n00 << ',' << cm.n01 << ',' << csv_num(cm.pct_correct_0()) << '\n';
    out << "1," << cm.n10 << ',' << cm.n11 << ',' << csv_num(cm.pct_correct_1()) << '\n';
    out << "overall,,," << csv_num(cm.overall_pct()) << '\n';
    return out.str();
}

nlohmann::ordered_json to_json(const InferenceTable& table) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"variable", r.name},
                        {"b", r.b},
                        {"std_error", r.std_error},
                        {"wald", r.wald},
                        {"df", r.df},
                        {"sig", r.p_value},
                        {"exp_b", r.exp_b}});
    }
    nlohmann::ordered_json out;
    out["coefficients"] = std::move(rows);
    out["omnibus"] = {{"chi_square", table.omnibus_chi_square},
                      {"df", table.omnibus_df},
                      {"sig", table.omnibus_sig}};
    out["log_likelihood"] = table.log_likelihood;
    out["minus_two_log_likelihood"] = table.minus_two_log_likelihood;
    out["cox_snell_r2"] = table.cox_snell_r2;
    out["nagelkerke_r2"] = table.nagelkerke_r2;
    out["separation"] = table.separation_note;
    if (!table.warnings.empty()) {
        out["warnings"] = table.warnings;
    }
    return out;
}

nlohmann::ordered_json to_json(const ConfusionMatrix& cm) {
    nlohmann::ordered_json out;
    out["measured_0"] = {{"predicted_0", cm.n00}, {"predicted_1", cm.n01}};
    out["measured_1"] = {{"predicted_0", cm.n10}, {"predicted_1", cm.n11}};
    out["pct_correct_0"] = cm.pct_correct_0();
    out["pct_correct_1"] = cm.pct_correct_1();
    out["overall_pct"] = cm.overall_pct();
    return out;
}

}  // namespace momentum::logreg
