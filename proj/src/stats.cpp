#include "momentum/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "momentum/errors.hpp"
#include "internal/format.hpp"

namespace momentum::stats {
namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Average ranks, 1-based; ties share the mean of their positional ranks.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

bool is_constant(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(),
                       [&](double v) { return v == values.front(); });
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return kNaN;
    return sxy / std::sqrt(sxx * syy);
}

double t_two_sided_p(double t, double df) {
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

void check_pair(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DataError("input vectors differ in length");
    }
    if (x.size() < 3) {
        throw DataError("need at least 3 observations");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) {
            throw DataError("input contains missing values");
        }
    }
}

}  // namespace

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y);
    SpearmanResult result;
    result.n = x.size();
    if (is_constant(x) || is_constant(y)) {
        result.defined = false;
        result.rho = kNaN;
        result.p = kNaN;
        return result;
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);

    // Identical (or exactly reversed) rank vectors are perfect monotone
    // relations; report exactly +/-1 rather than a rounding neighbour.
    const double nn = static_cast<double>(result.n);
    bool same = true, reversed = true;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        same = same && rx[i] == ry[i];
        reversed = reversed && rx[i] == (nn + 1.0) - ry[i];
    }
    if (same || reversed) {
        result.rho = same ? 1.0 : -1.0;
        result.p = 0.0;
        return result;
    }

    double rho = pearson(rx, ry);
    rho = std::clamp(rho, -1.0, 1.0);
    result.rho = rho;
    const double df = nn - 2.0;
    const double denom = 1.0 - rho * rho;
    const double t = denom <= 0.0 ? std::numeric_limits<double>::infinity()
                                  : rho * std::sqrt(df / denom);
    result.p = t_two_sided_p(t, df);
    return result;
}

double spearman_permutation_p(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y);
    if (x.size() > 10) {
        throw DataError("permutation p-value limited to n <= 10");
    }
    if (is_constant(x) || is_constant(y)) {
        throw DataError("permutation p-value undefined for constant input");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double observed = std::abs(pearson(rx, ry));

    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> shuffled(x.size());
    long long hits = 0, total = 0;
    do {
        for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = ry[perm[i]];
        const double rho = std::abs(pearson(rx, shuffled));
        if (rho >= observed - 1e-12) ++hits;
        ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

CorrelationReport correlation_matrix(const FeatureTable& table,
                                     const std::string& target) {
    const std::size_t p = table.column_count();
    if (p == 0) {
        throw DataError("feature table has no columns");
    }
    CorrelationReport report;
    for (const auto& col : table.columns) report.variables.push_back(col.name);
    if (std::find(report.variables.begin(), report.variables.end(), target) ==
        report.variables.end()) {
        throw DataError("target variable '" + target + "' not in table");
    }
    report.target = target;
    report.rho.assign(p, std::vector<double>(p, kNaN));
    report.p.assign(p, std::vector<double>(p, kNaN));
    report.n.assign(p, std::vector<std::size_t>(p, 0));
    report.constant_flags.assign(p, false);

    // Per-variable completeness and constancy over complete rows.
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> values;
        for (const auto& row : table.rows) {
            if (!std::isnan(row[j])) values.push_back(row[j]);
        }
        if (values.size() >= 1 && is_constant(values)) {
            report.constant_flags[j] = true;
            report.warnings.push_back("variable '" + report.variables[j] +
                                     "' is constant; correlations undefined");
        }
        report.n[j][j] = values.size();
        if (!report.constant_flags[j] && values.size() >= 3) {
            report.rho[j][j] = 1.0;
            report.p[j][j] = 0.0;
        }
    }

    std::vector<double> xs, ys;
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            xs.clear();
            ys.clear();
            for (const auto& row : table.rows) {
                if (!std::isnan(row[a]) && !std::isnan(row[b])) {
                    xs.push_back(row[a]);
                    ys.push_back(row[b]);
                }
            }
            report.n[a][b] = report.n[b][a] = xs.size();
            if (xs.size() < 3 || is_constant(xs) || is_constant(ys)) {
                continue;  // stays NaN
            }
            const SpearmanResult r = spearman(xs, ys);
            report.rho[a][b] = report.rho[b][a] = r.rho;
            report.p[a][b] = report.p[b][a] = r.p;
        }
    }

    const std::size_t ti = static_cast<std::size_t>(
        std::find(report.variables.begin(), report.variables.end(), target) -
        report.variables.begin());
    for (std::size_t j = 0; j < p; ++j) {
        if (j == ti) continue;
        CorrelationReport::TargetEntry entry;
        entry.variable = report.variables[j];
        entry.rho = report.rho[j][ti];
        entry.p = report.p[j][ti];
        entry.defined = !std::isnan(report.rho[j][ti]);
        report.target_ranking.push_back(entry);
    }
    std::stable_sort(report.target_ranking.begin(), report.target_ranking.end(),
                     [](const auto& a, const auto& b) {
                         if (a.defined != b.defined) return a.defined;
                         if (!a.defined) return false;
                         return a.p < b.p;
                     });
    return report;
}

PcaResult pca(const FeatureTable& table, const std::vector<std::string>& variables) {
    if (variables.empty()) {
        throw DataError("no variables selected for components");
    }
    std::vector<std::size_t> cols;
    for (const auto& name : variables) {
        const auto idx = table.column_index(name);
        if (!idx) {
            throw DataError("unknown variable '" + name + "'");
        }
        cols.push_back(*idx);
    }
    const std::size_t p = cols.size();

    std::vector<std::vector<double>> complete;
    for (const auto& row : table.rows) {
        bool ok = true;
        for (std::size_t c : cols) {
            if (std::isnan(row[c])) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        std::vector<double> r(p);
        for (std::size_t j = 0; j < p; ++j) r[j] = row[cols[j]];
        complete.push_back(std::move(r));
    }
    const std::size_t m = complete.size();
    if (m < 3) {
        throw DataError("need at least 3 complete rows for components");
    }

    // z-scores with sample standard deviation, then Pearson correlations.
    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (const auto& row : complete) mean[j] += row[j];
        mean[j] /= static_cast<double>(m);
        for (const auto& row : complete) {
            const double d = row[j] - mean[j];
            sd[j] += d * d;
        }
        sd[j] = std::sqrt(sd[j] / static_cast<double>(m - 1));
        if (sd[j] == 0.0) {
            throw DataError("variable '" + variables[j] +
                            "' is constant over complete rows");
        }
    }
    Eigen::MatrixXd z(m, p);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            z(i, j) = (complete[i][j] - mean[j]) / sd[j];
        }
    }
    Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(m - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
    if (solver.info() != Eigen::Success) {
        throw NumericError("eigendecomposition failed");
    }

    // Eigen returns ascending eigenvalues; we report descending with each
    // component's largest-magnitude loading made positive.
    struct Component {
        double eigenvalue;
        std::vector<double> loading;
    };
    std::vector<Component> comps;
    for (std::size_t c = 0; c < p; ++c) {
        Component comp;
        comp.eigenvalue = solver.eigenvalues()(static_cast<Eigen::Index>(c));
        comp.loading.resize(p);
        std::size_t arg = 0;
        for (std::size_t j = 0; j < p; ++j) {
            comp.loading[j] = solver.eigenvectors()(static_cast<Eigen::Index>(j),
                                                    static_cast<Eigen::Index>(c));
            if (std::abs(comp.loading[j]) > std::abs(comp.loading[arg])) arg = j;
        }
        if (comp.loading[arg] < 0.0) {
            for (double& v : comp.loading) v = -v;
        }
        comps.push_back(std::move(comp));
    }
    std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
        if (a.eigenvalue != b.eigenvalue) return a.eigenvalue > b.eigenvalue;
        return a.loading > b.loading;  // deterministic order for exact ties
    });

    PcaResult result;
    result.variables = variables;
    result.sample_size = m;
    double total = 0.0;
    for (const auto& comp : comps) total += comp.eigenvalue;
    result.loadings.assign(p, std::vector<double>(p, 0.0));
    double running = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
        result.eigenvalues.push_back(comps[c].eigenvalue);
        const double share = total > 0.0 ? comps[c].eigenvalue / total : 0.0;
        result.contributions.push_back(share);
        running += share;
        result.cumulative.push_back(running);
        for (std::size_t j = 0; j < p; ++j) {
            result.loadings[j][c] = comps[c].loading[j];
        }
    }
    return result;
}

std::vector<RankedFactor> top_factors(const CorrelationReport& report,
                                      const PcaResult& components, std::size_t k) {
    if (components.variables.empty()) return {};
    const auto target_it = std::find(report.variables.begin(), report.variables.end(),
                                     report.target);
    const std::size_t ti =
        static_cast<std::size_t>(target_it - report.variables.begin());
    std::vector<RankedFactor> factors;
    for (std::size_t j = 0; j < components.variables.size(); ++j) {
        RankedFactor f;
        f.variable = components.variables[j];
        f.loading = components.loadings[j][0];
        const auto it = std::find(report.variables.begin(), report.variables.end(),
                                  f.variable);
        if (it != report.variables.end() && target_it != report.variables.end()) {
            f.target_p =
                report.p[static_cast<std::size_t>(it - report.variables.begin())][ti];
        } else {
            f.target_p = kNaN;
        }
        factors.push_back(std::move(f));
    }
    std::stable_sort(factors.begin(), factors.end(), [](const auto& a, const auto& b) {
        return std::abs(a.loading) > std::abs(b.loading);
    });
    if (factors.size() > k) factors.resize(k);
    return factors;
}

namespace {

std::string matrix_csv(const std::vector<std::string>& variables,
                       const std::vector<std::vector<double>>& m) {
    using detail::csv_num;
    std::ostringstream out;
    out << "variable";
    for (const auto& v : variables) out << ',' << v;
    out << '\n';
    for (std::size_t i = 0; i < variables.size(); ++i) {
        out << variables[i];
        for (std::size_t j = 0; j < variables.size(); ++j) {
            out << ',' << csv_num(m[i][j]);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string rho_csv(const CorrelationReport& report) {
    return matrix_csv(report.variables, report.rho);
}

std::string p_csv(const CorrelationReport& report) {
    return matrix_csv(report.variables, report.p);
}

std::string loadings_csv(const PcaResult& result) {
    using detail::csv_num;
    const std::size_t p = result.variables.size();
    std::ostringstream out;
    out << "variable";
    for (std::size_t c = 0; c < p; ++c) out << ",F" << (c + 1);
    out << '\n';
    for (std::size_t j = 0; j < p; ++j) {
        out << result.variables[j];
        for (std::size_t c = 0; c < p; ++c) out << ',' << csv_num(result.loadings[j][c]);
        out << '\n';
    }
    out << "\ncomponent,eigenvalue,contribution,cumulative\n";
    for (std::size_t c = 0; c < p; ++c) {
        out << 'F' << (c + 1) << ',' << csv_num(result.eigenvalues[c]) << ','
            << csv_num(result.contributions[c]) << ',' << csv_num(result.cumulative[c])
            << '\n';
    }
    return out.str();
}

std::string to_csv(const std::vector<RankedFactor>& factors) {
    using detail::csv_num;
    std::ostringstream out;
    out << "rank,variable,loading,target_p\n";
    for (std::size_t i = 0; i < factors.size(); ++i) {
        out << (i + 1) << ',' << factors[i].variable << ','
            << csv_num(factors[i].loading) << ',' << csv_num(factors[i].target_p)
            << '\n';
    }
    return out.str();
}

nlohmann::ordered_json to_json(const CorrelationReport& report) {
    nlohmann::ordered_json out;
    out["variables"] = report.variables;
    out["target"] = report.target;
    out["rho"] = report.rho;
    out["p"] = report.p;
    out["n"] = report.n;
    nlohmann::ordered_json constants = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < report.variables.size(); ++j) {
        if (report.constant_flags[j]) constants.push_back(report.variables[j]);
    }
    out["constant_variables"] = std::move(constants);
    nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
    for (const auto& e : report.target_ranking) {
        ranking.push_back({{"variable", e.variable},
                           {"rho", e.rho},
                           {"p", e.p},
                           {"defined", e.defined}});
    }
    out["target_ranking"] = std::move(ranking);
    if (!report.warnings.empty()) out["warnings"] = report.warnings;
    return out;
}

nlohmann::ordered_json to_json(const PcaResult& result) {
    nlohmann::ordered_json out;
    out["variables"] = result.variables;
    out["sample_size"] = result.sample_size;
    out["eigenvalues"] = result.eigenvalues;
    out["contributions"] = result.contributions;
    out["cumulative"] = result.cumulative;
    nlohmann::ordered_json loadings = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < result.variables.size(); ++j) {
        loadings.push_back({{"variable", result.variables[j]},
                            {"loadings", result.loadings[j]}});
    }
    out["loadings"] = std::move(loadings);
    return out;
}

nlohmann::ordered_json to_json(const std::vector<RankedFactor>& factors) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < factors.size(); ++i) {
        out.push_back({{"rank", i + 1},
                       {"variable", factors[i].variable},
                       {"loading", factors[i].loading},
                       {"target_p", factors[i].target_p}});
    }
    return out;
}

}  // namespace momentum::stats
