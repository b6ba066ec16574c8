// Acceptance gate: one line per criterion, PASS/FAIL/SKIP, nonzero exit on any
// FAIL. Dataset-dependent criteria read MOMENTUM_DATASET and are skipped when
// the file is not supplied.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "momentum/errors.hpp"
#include "momentum/logreg.hpp"
#include "momentum/pipeline.hpp"
#include "momentum/stats.hpp"
#include "momentum/topsis.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace momentum;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << " — " << detail;
    std::cout << '\n';
    if (!ok) ++g_failures;
}

void skip(const std::string& name, const std::string& reason) {
    std::cout << "SKIP  " << name << " — " << reason << '\n';
}

void run(const std::string& name, const std::function<bool(std::ostream&)>& fn) {
    std::ostringstream detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail.str("");
        detail << "exception: " << e.what();
    }
    report(name, ok, detail.str());
}

FeatureTable plain_table(const std::vector<std::string>& names,
                         std::vector<std::vector<double>> rows) {
    FeatureTable t;
    for (const auto& n : names) {
        FeatureColumn c;
        c.name = n;
        c.source = n;
        t.columns.push_back(c);
    }
    t.rows = std::move(rows);
    t.input_rows = t.rows.size();
    for (std::size_t i = 0; i < t.rows.size(); ++i) t.source_rows.push_back(i);
    return t;
}

// --- criterion bodies -------------------------------------------------------

bool topsis_hand_example(std::ostream& detail) {
    topsis::DecisionMatrix mat;
    mat.criteria = {"c1", "c2"};
    mat.directions = {topsis::Direction::Benefit, topsis::Direction::Benefit};
    mat.values = {{1.0, 2.0}, {2.0, 1.0}};
    const topsis::TopsisResult r =
        topsis::evaluate(mat, topsis::WeightVector({0.6, 0.4}));
    const bool ok = std::abs(r.closeness[0] - 0.4) < 1e-9 &&
                    std::abs(r.closeness[1] - 0.6) < 1e-9 &&
                    r.ranking == std::vector<std::size_t>{1, 0};
    detail << "C = (" << r.closeness[0] << ", " << r.closeness[1]
           << "), tolerance 1e-9";
    return ok;
}

bool topsis_property_suite(std::ostream& detail) {
    std::mt19937 rng(20240202);
    std::uniform_int_distribution<std::size_t> n_dist(2, 8);
    std::uniform_int_distribution<std::size_t> m_dist(1, 5);
    std::uniform_real_distribution<double> value(0.1, 10.0);
    std::uniform_real_distribution<double> scale(0.5, 4.0);
    std::uniform_int_distribution<int> coin(0, 1);

    double worst_oracle = 0.0, worst_scale = 0.0, worst_dominance = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = n_dist(rng);
        const std::size_t m = m_dist(rng);
        topsis::DecisionMatrix mat;
        std::vector<double> raw_weights;
        for (std::size_t j = 0; j < m; ++j) {
            mat.criteria.push_back("c" + std::to_string(j));
            mat.directions.push_back(coin(rng) ? topsis::Direction::Benefit
                                               : topsis::Direction::Cost);
            raw_weights.push_back(value(rng));
        }
        double wsum = 0.0;
        for (double w : raw_weights) wsum += w;
        for (double& w : raw_weights) w /= wsum;
        const topsis::WeightVector weights(raw_weights);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row;
            for (std::size_t j = 0; j < m; ++j) row.push_back(value(rng));
            mat.values.push_back(row);
        }

        const topsis::TopsisResult base = topsis::evaluate(mat, weights);
        for (double c : base.closeness) {
            if (c < 0.0 || c > 1.0) {
                detail << "closeness out of [0,1]: " << c;
                return false;
            }
        }
        const testsupport::TopsisOracleResult oracle =
            testsupport::topsis_oracle(mat, raw_weights);
        for (std::size_t i = 0; i < n; ++i) {
            worst_oracle = std::max(
                worst_oracle, std::abs(base.closeness[i] - oracle.closeness[i]));
        }

        topsis::DecisionMatrix scaled = mat;
        for (std::size_t j = 0; j < m; ++j) {
            const double k = scale(rng);
            for (std::size_t i = 0; i < n; ++i) scaled.values[i][j] *= k;
        }
        const topsis::TopsisResult rescaled = topsis::evaluate(scaled, weights);
        for (std::size_t i = 0; i < n; ++i) {
            worst_scale = std::max(
                worst_scale, std::abs(base.closeness[i] - rescaled.closeness[i]));
        }

        // Dominance: append a copy of a row improved in every criterion.
        topsis::DecisionMatrix augmented = mat;
        const std::size_t target = trial % n;
        std::vector<double> improved = mat.values[target];
        for (std::size_t j = 0; j < m; ++j) {
            const double delta = 0.05 + 0.1 * value(rng) / 10.0;
            if (mat.directions[j] == topsis::Direction::Benefit) {
                improved[j] += delta;
            } else {
                improved[j] = std::max(0.01, improved[j] - delta);
            }
        }
        augmented.values.push_back(improved);
        const topsis::TopsisResult dom = topsis::evaluate(augmented, weights);
        worst_dominance = std::max(
            worst_dominance, dom.closeness[target] - dom.closeness[n]);
    }
    detail << "oracle diff " << worst_oracle << " (1e-10), scaling diff "
           << worst_scale << " (1e-12), dominance slack " << worst_dominance;
    return worst_oracle < 1e-10 && worst_scale < 1e-12 && worst_dominance < 1e-12;
}

bool gradient_fd(std::ostream& detail) {
    std::mt19937 rng(424242);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> n_dist(5, 60);
    std::uniform_int_distribution<int> k_dist(1, 5);
    std::uniform_int_distribution<int> coin(0, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = n_dist(rng);
        const int k = k_dist(rng);
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        for (int i = 0; i < n; ++i) {
            std::vector<double> row;
            for (int j = 0; j < k; ++j) row.push_back(normal(rng));
            x.push_back(row);
            y.push_back(coin(rng));
        }
        std::vector<double> theta;
        for (int j = 0; j <= k; ++j) theta.push_back(0.4 * normal(rng));
        const auto g = logreg::gradient(theta, x, y);
        const auto fd = testsupport::fd_gradient(theta, x, y);
        double num = 0.0, den = 1.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            num += (g[j] - fd[j]) * (g[j] - fd[j]);
            den += g[j] * g[j];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    detail << "max relative error " << worst << " over 50 instances (1e-6)";
    return worst < 1e-6;
}

bool loss_anchor(std::ostream& detail) {
    std::mt19937 rng(7);
    std::normal_distribution<double> normal(0.0, 5.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 83; ++i) {
        x.push_back({normal(rng), normal(rng), normal(rng)});
        y.push_back(i % 5 == 0 ? 1 : 0);
    }
    const std::vector<double> zero(4, 0.0);
    const double j0 = logreg::loss(zero, x, y);
    detail << "J(0) = " << j0 << " vs ln 2 (1e-12)";
    return std::abs(j0 - std::log(2.0)) < 1e-12;
}

bool parameter_recovery(std::ostream& detail) {
    std::mt19937 rng(20240404);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 20000; ++i) {
        const double x1 = normal(rng);
        const double x2 = normal(rng);
        const double z = 0.5 - 1.0 * x1 + 2.0 * x2;
        rows.push_back({x1, x2});
        labels.push_back(unif(rng) < logreg::sigmoid(z) ? 1 : 0);
    }
    const logreg::LogisticModel model =
        logreg::fit(plain_table({"x1", "x2"}, std::move(rows)), labels);
    const double e0 = std::abs(model.intercept - 0.5);
    const double e1 = std::abs(model.coefficients[0] + 1.0);
    const double e2 = std::abs(model.coefficients[1] - 2.0);
    detail << "theta = (" << model.intercept << ", " << model.coefficients[0]
           << ", " << model.coefficients[1] << "), errors (" << e0 << ", " << e1
           << ", " << e2 << ") vs 0.1";
    return e0 <= 0.1 && e1 <= 0.1 && e2 <= 0.1;
}

bool separable_data(std::ostream& detail) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        const double v = (i % 6) - 2.5;
        rows.push_back({v});
        labels.push_back(v > 0 ? 1 : 0);
    }
    const FeatureTable t = plain_table({"x"}, std::move(rows));
    logreg::TrainConfig config;
    config.alpha = 50.0;  // the default step grows too slowly to trip the flag
    const logreg::LogisticModel model = logreg::fit(t, labels, config);
    const logreg::ConfusionMatrix cm = logreg::confusion(model, t, labels, 0.5);
    char printed[32];
    std::snprintf(printed, sizeof printed, "%.1f", cm.overall_pct());
    detail << "training accuracy " << printed << "%, separation flag "
           << (model.separation ? "set" : "NOT set");
    return std::string(printed) == "100.0" && model.separation;
}

bool confusion_arithmetic(std::ostream& detail) {
    auto one_decimal = [](double v) { return std::llround(v * 10.0); };
    logreg::ConfusionMatrix a;
    a.n00 = 108;
    a.n01 = 34;
    a.n10 = 21;
    a.n11 = 136;
    logreg::ConfusionMatrix b;
    b.n00 = 144;
    b.n01 = 14;
    b.n10 = 39;
    b.n11 = 103;
    const bool ok = one_decimal(a.pct_correct_0()) == 761 &&
                    one_decimal(a.pct_correct_1()) == 866 &&
                    one_decimal(a.overall_pct()) == 816 &&
                    one_decimal(b.pct_correct_0()) == 911 &&
                    one_decimal(b.pct_correct_1()) == 725 &&
                    one_decimal(b.overall_pct()) == 823;
    detail << "(108,34,21,136) -> " << a.pct_correct_0() << "/"
           << a.pct_correct_1() << "/" << a.overall_pct()
           << "; (144,14,39,103) -> " << b.pct_correct_0() << "/"
           << b.pct_correct_1() << "/" << b.overall_pct();
    return ok;
}

bool spearman_criteria(std::ostream& detail) {
    const std::vector<double> x = {0.5, 1.5, 2.0, 4.0, 8.0};
    std::vector<double> up, down;
    for (double v : x) {
        up.push_back(std::log(v) * 3.0);
        down.push_back(-v * v);
    }
    const stats::SpearmanResult mono = stats::spearman(x, up);
    const stats::SpearmanResult anti = stats::spearman(x, down);
    if (mono.rho != 1.0 || anti.rho != -1.0) {
        detail << "monotone rho " << mono.rho << ", anti " << anti.rho;
        return false;
    }

    std::mt19937 rng(31337);
    std::uniform_int_distribution<int> small(0, 5);
    std::uniform_int_distribution<int> len(3, 25);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst_tie = 0.0, worst_invariance = 0.0;
    int tie_checked = 0;
    while (tie_checked < 100) {
        const int n = len(rng);
        std::vector<double> a, b;
        for (int i = 0; i < n; ++i) {
            a.push_back(static_cast<double>(small(rng)));
            b.push_back(static_cast<double>(small(rng)));
        }
        if (std::count(a.begin(), a.end(), a[0]) == n ||
            std::count(b.begin(), b.end(), b[0]) == n) {
            continue;
        }
        const double lib = stats::spearman(a, b).rho;
        const double oracle = std::clamp(
            testsupport::counting_spearman_rho(a, b), -1.0, 1.0);
        worst_tie = std::max(worst_tie, std::abs(lib - oracle));
        ++tie_checked;
    }
    for (int trial = 0; trial < 100; ++trial) {
        const int n = len(rng);
        std::vector<double> a, b, fa, gb;
        for (int i = 0; i < n; ++i) {
            a.push_back(normal(rng));
            b.push_back(normal(rng));
        }
        for (double v : a) fa.push_back(std::exp(v));
        for (double v : b) gb.push_back(v * v * v + 5.0 * v);
        const stats::SpearmanResult base = stats::spearman(a, b);
        const stats::SpearmanResult mapped = stats::spearman(fa, gb);
        if (base.defined && mapped.defined) {
            worst_invariance =
                std::max(worst_invariance, std::abs(base.rho - mapped.rho));
        }
    }
    detail << "exact +/-1 with p = (" << mono.p << ", " << anti.p
           << "); tie-oracle diff " << worst_tie << "; transform diff "
           << worst_invariance << " (1e-12)";
    return mono.p == 0.0 && anti.p == 0.0 && worst_tie < 1e-12 &&
           worst_invariance < 1e-12;
}

bool pca_invariants(std::ostream& detail) {
    std::mt19937 rng(555);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 100; ++i) {
        const double shared = normal(rng);
        rows.push_back({shared + 0.4 * normal(rng), shared - 0.4 * normal(rng),
                        normal(rng), 0.7 * shared + normal(rng)});
    }
    const std::vector<std::string> names = {"a", "b", "c", "d"};
    const stats::PcaResult result = stats::pca(plain_table(names, rows), names);

    double sum = 0.0;
    for (double c : result.contributions) sum += c;
    if (std::abs(sum - 1.0) >= 1e-9) {
        detail << "contribution sum " << sum;
        return false;
    }
    for (std::size_t i = 1; i < result.cumulative.size(); ++i) {
        if (result.cumulative[i] < result.cumulative[i - 1]) {
            detail << "cumulative decreased at " << i;
            return false;
        }
    }

    // Literal Pearson correlations for the reconstruction target.
    const std::size_t p = names.size();
    double worst_recon = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double mi = 0.0, mj = 0.0;
            for (const auto& row : rows) {
                mi += row[i];
                mj += row[j];
            }
            mi /= rows.size();
            mj /= rows.size();
            double sij = 0.0, sii = 0.0, sjj = 0.0;
            for (const auto& row : rows) {
                sij += (row[i] - mi) * (row[j] - mj);
                sii += (row[i] - mi) * (row[i] - mi);
                sjj += (row[j] - mj) * (row[j] - mj);
            }
            const double target = i == j ? 1.0 : sij / std::sqrt(sii * sjj);
            double rebuilt = 0.0;
            for (std::size_t c = 0; c < p; ++c) {
                rebuilt += result.eigenvalues[c] * result.loadings[i][c] *
                           result.loadings[j][c];
            }
            worst_recon = std::max(worst_recon, std::abs(rebuilt - target));
        }
    }

    std::vector<std::vector<double>> pair_rows;
    for (int i = 0; i < 30; ++i) {
        const double v = std::cos(i * 0.9);
        pair_rows.push_back({v, -3.0 * v + 2.0});
    }
    const stats::PcaResult pair =
        stats::pca(plain_table({"u", "v"}, std::move(pair_rows)), {"u", "v"});
    const bool pair_ok = std::abs(pair.contributions[0] - 1.0) < 1e-9 &&
                         std::abs(pair.contributions[1]) < 1e-9;
    detail << "contribution sum " << sum << ", reconstruction diff "
           << worst_recon << " (1e-8), perfect pair -> ("
           << pair.contributions[0] << ", " << pair.contributions[1] << ")";
    return worst_recon < 1e-8 && pair_ok;
}

bool end_to_end(std::ostream& detail) {
    testsupport::TempDir dir;
    testsupport::SyntheticSpec spec;
    spec.max_points = 300;
    spec.seed = 12021;
    testsupport::SyntheticSpec other = spec;
    other.match_id = "2099-test-0002";
    other.seed = 30103;
    const ingest::MatchDataset combined = testsupport::concat(
        {testsupport::make_match(spec), testsupport::make_match(other)});
    const std::string input =
        dir.write_file("fixture.csv", testsupport::to_csv_text(combined)).string();

    auto run_all = [&](const std::string& sub) {
        namespace fs = std::filesystem;
        pipeline::RunConfig base;
        base.input_path = input;
        base.match_id = spec.match_id;
        base.out_dir = (dir.path() / sub / "momentum").string();
        pipeline::run_momentum(base);
        pipeline::RunConfig rnd = base;
        rnd.out_dir = (dir.path() / sub / "randomness").string();
        pipeline::run_randomness(rnd);
        pipeline::RunConfig swing = base;
        swing.match_id.clear();
        swing.train_matches = {spec.match_id};
        swing.test_match = other.match_id;
        swing.out_dir = (dir.path() / sub / "swing").string();
        pipeline::run_swing(swing);
        pipeline::RunConfig factors = base;
        factors.match_id.clear();
        factors.key_rule.select_all = true;
        factors.encoding = ingest::CategoricalEncoding::Ordinal;
        factors.out_dir = (dir.path() / sub / "factors").string();
        pipeline::run_factors(factors);
        return dir.path() / sub;
    };

    const auto start = std::chrono::steady_clock::now();
    const std::filesystem::path first = run_all("one");
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const std::filesystem::path second = run_all("two");

    std::size_t compared = 0;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(first)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), first);
        const auto twin = second / rel;
        if (!std::filesystem::exists(twin) ||
            testsupport::TempDir::read_file(entry.path()) !=
                testsupport::TempDir::read_file(twin)) {
            detail << "output differs across runs: " << rel.string();
            return false;
        }
        ++compared;
    }
    detail << compared << " files byte-identical across two runs, first pass "
           << seconds << " s (< 5 s)";
    return compared > 0 && seconds < 5.0;
}

// --- dataset-gated criteria -------------------------------------------------

const char* kBandName = "dataset_accuracy_band";
const char* kAceName = "dataset_ace_constant";
const char* kPcaName = "dataset_first_contribution";
const char* kMatchId = "2023-wimbledon-1701";

void dataset_criteria() {
    const char* path = std::getenv("MOMENTUM_DATASET");
    if (path == nullptr) {
        const std::string reason =
            "MOMENTUM_DATASET not set; property suites above are the binding "
            "tests";
        skip(kBandName, reason);
        skip(kAceName, reason);
        skip(kPcaName, reason);
        return;
    }

    run(kBandName, [&](std::ostream& detail) {
        testsupport::TempDir dir;
        pipeline::RunConfig config;
        config.input_path = path;
        config.match_id = kMatchId;
        config.player = "1";
        config.set_no = 1;
        config.out_dir = (dir.path() / "band").string();
        const pipeline::StudyReport report = pipeline::run_randomness(config);
        const double pct = report.confusion->overall_pct();
        detail << "set-1 overall accuracy " << pct << "% vs band [75, 90]";
        return pct >= 75.0 && pct <= 90.0;
    });

    run(kAceName, [&](std::ostream& detail) {
        testsupport::TempDir dir;
        pipeline::RunConfig config;
        config.input_path = path;
        config.match_id = kMatchId;
        config.player = "1";
        config.encoding = ingest::CategoricalEncoding::Ordinal;
        config.out_dir = (dir.path() / "ace").string();
        const pipeline::StudyReport report = pipeline::run_factors(config);
        const auto& corr = *report.correlation;
        for (std::size_t j = 0; j < corr.variables.size(); ++j) {
            if (corr.variables[j].find("ace") != std::string::npos) {
                detail << corr.variables[j] << " constant flag "
                       << (corr.constant_flags[j] ? "set" : "NOT set")
                       << " over key games";
                return static_cast<bool>(corr.constant_flags[j]);
            }
        }
        detail << "no ace variable in the correlation report";
        return false;
    });

    run(kPcaName, [&](std::ostream& detail) {
        testsupport::TempDir dir;
        pipeline::RunConfig config;
        config.input_path = path;
        config.match_id = kMatchId;
        config.player = "1";
        config.encoding = ingest::CategoricalEncoding::Ordinal;
        config.out_dir = (dir.path() / "pca").string();
        const pipeline::StudyReport report = pipeline::run_factors(config);
        const double first = report.components->contributions.at(0);
        detail << "first contribution " << first << " (> 0.40)";
        return first > 0.40;
    });
}

}  // namespace

int main() {
    std::cout << "acceptance criteria\n" << std::string(72, '-') << '\n';
    run("topsis_hand_example", topsis_hand_example);
    run("topsis_property_suite", topsis_property_suite);
    run("logreg_gradient_fd", gradient_fd);
    run("logreg_loss_anchor", loss_anchor);
    run("logreg_parameter_recovery", parameter_recovery);
    run("logreg_separable_flag", separable_data);
    run("confusion_arithmetic", confusion_arithmetic);
    run("spearman_exact_ties_invariance", spearman_criteria);
    run("pca_invariants", pca_invariants);
    dataset_criteria();
    run("end_to_end_determinism", end_to_end);
    std::cout << std::string(72, '-') << '\n';
    if (g_failures == 0) {
        std::cout << "all runnable criteria passed\n";
    } else {
        std::cout << g_failures << " criteria FAILED\n";
    }
    return g_failures == 0 ? 0 : 1;
}
