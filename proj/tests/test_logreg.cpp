#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "momentum/errors.hpp"
#include "momentum/logreg.hpp"
#include "support/oracles.hpp"

using namespace momentum;
using namespace momentum::logreg;

namespace {

FeatureTable make_table(const std::vector<std::string>& names,
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
    t.source_rows.resize(t.rows.size());
    std::iota(t.source_rows.begin(), t.source_rows.end(), std::size_t{0});
    return t;
}

struct Generated {
    FeatureTable table;
    std::vector<int> labels;
};

// Bernoulli draws from a known linear model over standard normal features.
Generated generate(std::size_t n, double intercept,
                   const std::vector<double>& coef, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < coef.size(); ++j) {
        names.push_back("x" + std::to_string(j + 1));
    }
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(coef.size());
        double z = intercept;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            row[j] = normal(rng);
            z += coef[j] * row[j];
        }
        labels.push_back(unif(rng) < sigmoid(z) ? 1 : 0);
        rows.push_back(std::move(row));
    }
    return {make_table(names, std::move(rows)), std::move(labels)};
}

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("sigmoid is stable and symmetric") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == 0.0);
    CHECK(std::isfinite(sigmoid(-1e308)));
    CHECK(sigmoid(2.0) == doctest::Approx(1.0 - sigmoid(-2.0)).epsilon(1e-15));
    CHECK(sigmoid(3.0) > sigmoid(2.9));
}

TEST_CASE("loss at the zero vector is ln 2 regardless of data") {
    std::mt19937 rng(99);
    std::normal_distribution<double> normal(0.0, 3.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 37; ++i) {
        x.push_back({normal(rng), normal(rng)});
        y.push_back(i % 3 == 0 ? 1 : 0);
    }
    const std::vector<double> zero(3, 0.0);
    CHECK(std::abs(loss(zero, x, y) - std::log(2.0)) < 1e-12);
}

TEST_CASE("loss matches a hand computation") {
    // One row, theta = (0, 1), x = 2, y = 1: J = -ln sigmoid(2).
    const std::vector<std::vector<double>> x = {{2.0}};
    const std::vector<int> y = {1};
    const std::vector<double> theta = {0.0, 1.0};
    CHECK(loss(theta, x, y) ==
          doctest::Approx(-std::log(sigmoid(2.0))).epsilon(1e-14));

    // Clamping keeps the loss finite even for a certain wrong prediction.
    const std::vector<double> extreme = {0.0, -800.0};
    const double clamped = loss(extreme, x, y);
    CHECK(std::isfinite(clamped));
    CHECK(clamped == doctest::Approx(-std::log(1e-15)).epsilon(1e-9));
}

TEST_CASE("analytic gradient agrees with central differences") {
    std::mt19937 rng(20240214);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> n_dist(5, 40);
    std::uniform_int_distribution<int> k_dist(1, 4);
    std::uniform_int_distribution<int> coin(0, 1);

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
        for (int j = 0; j <= k; ++j) theta.push_back(0.5 * normal(rng));

        const std::vector<double> g = gradient(theta, x, y);
        const std::vector<double> fd = testsupport::fd_gradient(theta, x, y);
        REQUIRE(g.size() == fd.size());
        double num = 0.0, den = 1.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            num += (g[j] - fd[j]) * (g[j] - fd[j]);
            den += g[j] * g[j];
        }
        CHECK(std::sqrt(num / den) < 1e-6);
    }
}

TEST_CASE("loss and gradient validate their inputs") {
    const std::vector<std::vector<double>> x = {{1.0}, {2.0}};
    const std::vector<int> good = {0, 1};
    const std::vector<int> bad = {0, 2};
    const std::vector<double> theta = {0.0, 0.0};
    CHECK_THROWS_AS(loss(theta, x, bad), DataError);
    CHECK_THROWS_AS(gradient(theta, x, bad), DataError);
    const std::vector<int> short_y = {1};
    CHECK_THROWS_AS(loss(theta, x, short_y), DataError);
    const std::vector<double> narrow = {0.0};
    CHECK_THROWS_AS(loss(narrow, x, good), DataError);
    CHECK_THROWS_AS(loss(theta, {}, {}), DataError);
}

TEST_CASE("fit recovers planted coefficients") {
    const Generated data = generate(4000, 0.5, {-1.0, 2.0}, 7);
    const LogisticModel model = fit(data.table, data.labels);
    CHECK(model.converged);
    CHECK_FALSE(model.separation);
    CHECK(model.intercept == doctest::Approx(0.5).epsilon(0.3));
    REQUIRE(model.coefficients.size() == 2);
    CHECK(model.coefficients[0] == doctest::Approx(-1.0).epsilon(0.15));
    CHECK(model.coefficients[1] == doctest::Approx(2.0).epsilon(0.15));

    // Report-scale and standardized-scale probabilities are the same function.
    std::mt19937 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> row = {normal(rng), normal(rng)};
        CHECK(rel_diff(model.probability(row), model.std_probability(row)) <
              1e-10);
    }
}

TEST_CASE("constant features are dropped with a warning") {
    FeatureTable t = make_table({"signal", "flat"}, {});
    std::mt19937 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        const double v = normal(rng);
        t.rows.push_back({v, 3.0});
        labels.push_back(v + 0.3 * normal(rng) > 0 ? 1 : 0);
    }
    t.input_rows = t.rows.size();
    const LogisticModel model = fit(t, labels);
    REQUIRE(model.feature_names.size() == 1);
    CHECK(model.feature_names[0] == "signal");
    REQUIRE(model.dropped_features.size() == 1);
    CHECK(model.dropped_features[0] == "flat");
    bool warned = false;
    for (const auto& w : model.warnings) {
        if (w.find("flat") != std::string::npos) warned = true;
    }
    CHECK(warned);
    CHECK(model.coefficients[0] > 0.0);
}

TEST_CASE("fit rejects missing values and degenerate shapes") {
    FeatureTable t = make_table(
        {"a"}, {{1.0}, {std::numeric_limits<double>::quiet_NaN()}});
    const std::vector<int> y = {0, 1};
    CHECK_THROWS_AS(fit(t, y), DataError);

    FeatureTable empty = make_table({"a"}, {});
    CHECK_THROWS_AS(fit(empty, {}), DataError);

    TrainConfig bad;
    bad.alpha = -1.0;
    FeatureTable ok = make_table({"a"}, {{1.0}, {2.0}});
    CHECK_THROWS_AS(fit(ok, y, bad), DataError);
}

TEST_CASE("single-class labels warn") {
    FeatureTable t = make_table({"a"}, {{1.0}, {2.0}, {3.0}});
    const std::vector<int> y = {1, 1, 1};
    const LogisticModel model = fit(t, y);
    bool warned = false;
    for (const auto& w : model.warnings) {
        if (w.find("one class") != std::string::npos) warned = true;
    }
    CHECK(warned);
}

TEST_CASE("a large step size still converges via step halving") {
    const Generated data = generate(500, 0.0, {1.5}, 21);
    TrainConfig config;
    config.alpha = 1000.0;
    const LogisticModel model = fit(data.table, data.labels, config);
    CHECK(model.converged);
    CHECK(std::isfinite(model.final_loss));
    CHECK(model.final_loss < std::log(2.0));
}

TEST_CASE("separable data is flagged and classified perfectly") {
    // The descent path grows coefficients too slowly at the default step size
    // to cross the flag threshold within the iteration budget, so the
    // separation check is exercised with a large alpha.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        const double v = (i % 4) - 1.5;  // -1.5, -0.5, 0.5, 1.5
        rows.push_back({v});
        labels.push_back(v > 0 ? 1 : 0);
    }
    FeatureTable t = make_table({"x"}, std::move(rows));
    TrainConfig config;
    config.alpha = 50.0;
    const LogisticModel model = fit(t, labels, config);
    CHECK(model.separation);
    bool warned = false;
    for (const auto& w : model.warnings) {
        if (w.find("separation") != std::string::npos) warned = true;
    }
    CHECK(warned);

    const ConfusionMatrix cm = confusion(model, t, labels);
    CHECK(cm.total() == 40);
    CHECK(cm.overall_pct() == 100.0);
    CHECK(cm.n01 == 0);
    CHECK(cm.n10 == 0);
}

TEST_CASE("shuffled labels give chance-level held-out accuracy") {
    std::mt19937 rng(404);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 300; ++i) {
        rows.push_back({normal(rng), normal(rng), normal(rng)});
        labels.push_back(coin(rng) ? 1 : 0);
    }
    FeatureTable train = make_table({"a", "b", "c"}, {});
    FeatureTable held = make_table({"a", "b", "c"}, {});
    std::vector<int> train_y, held_y;
    for (int i = 0; i < 300; ++i) {
        if (i < 150) {
            train.rows.push_back(rows[i]);
            train_y.push_back(labels[i]);
        } else {
            held.rows.push_back(rows[i]);
            held_y.push_back(labels[i]);
        }
    }
    train.input_rows = 150;
    held.input_rows = 150;
    const LogisticModel model = fit(train, train_y);
    const ConfusionMatrix cm = confusion(model, held, held_y);
    CHECK(cm.overall_pct() >= 40.0);
    CHECK(cm.overall_pct() <= 60.0);
}

TEST_CASE("predict applies the cutoff inclusively and rejects bad rows") {
    LogisticModel model;
    model.feature_names = {"x"};
    model.coefficients = {1.0};
    model.intercept = 0.0;

    const Prediction at_half = predict(model, std::vector<double>{0.0}, 0.5);
    CHECK(at_half.probability == 0.5);
    CHECK(at_half.predicted == 1);  // probability >= cutoff
    const Prediction below = predict(model, std::vector<double>{-0.001}, 0.5);
    CHECK(below.predicted == 0);

    CHECK_THROWS_AS(predict(model, std::vector<double>{1.0, 2.0}, 0.5),
                    DataError);
    const std::vector<double> holed = {std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_WITH_AS(predict(model, holed, 0.5), doctest::Contains("x"),
                         DataError);
}

TEST_CASE("classification percentages match hand-checked tables") {
    // Values are compared after rounding to one decimal, the precision such
    // tables are conventionally printed at.
    auto rounded = [](double v) { return std::llround(v * 10.0) / 10.0; };

    ConfusionMatrix first;
    first.n00 = 108;
    first.n01 = 34;
    first.n10 = 21;
    first.n11 = 136;
    CHECK(rounded(first.pct_correct_0()) == doctest::Approx(76.1));
    CHECK(rounded(first.pct_correct_1()) == doctest::Approx(86.6));
    CHECK(rounded(first.overall_pct()) == doctest::Approx(81.6));

    ConfusionMatrix second;
    second.n00 = 144;
    second.n01 = 14;
    second.n10 = 39;
    second.n11 = 103;
    CHECK(rounded(second.pct_correct_0()) == doctest::Approx(91.1));
    CHECK(rounded(second.pct_correct_1()) == doctest::Approx(72.5));
    CHECK(rounded(second.overall_pct()) == doctest::Approx(82.3));

    ConfusionMatrix empty;
    CHECK(std::isnan(empty.pct_correct_0()));
    CHECK(std::isnan(empty.pct_correct_1()));
    CHECK(std::isnan(empty.overall_pct()));
}

TEST_CASE("standard errors agree with a finite-difference information oracle") {
    const Generated data = generate(400, 0.3, {0.8, -0.6}, 31);
    const LogisticModel model = fit(data.table, data.labels);
    const InferenceTable table = wald_inference(model, data.table, data.labels);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].name == "x1");
    CHECK(table.rows[1].name == "x2");
    CHECK(table.rows[2].name == "constant");

    const std::vector<double> theta = {model.intercept, model.coefficients[0],
                                       model.coefficients[1]};
    const auto info =
        testsupport::fd_information(theta, data.table.rows, data.labels, 1e-4);
    const auto inv = testsupport::gauss_jordan_inverse(info);
    const double se_const = std::sqrt(inv[0][0]);
    const double se_x1 = std::sqrt(inv[1][1]);
    const double se_x2 = std::sqrt(inv[2][2]);
    CHECK(rel_diff(table.rows[0].std_error, se_x1) < 1e-4);
    CHECK(rel_diff(table.rows[1].std_error, se_x2) < 1e-4);
    CHECK(rel_diff(table.rows[2].std_error, se_const) < 1e-4);

    for (const auto& row : table.rows) {
        CHECK(row.df == 1);
        CHECK(row.p_value >= 0.0);
        CHECK(row.p_value <= 1.0);
        CHECK(rel_diff(row.exp_b, std::exp(row.b)) < 1e-12);
        CHECK(rel_diff(row.wald,
                       (row.b / row.std_error) * (row.b / row.std_error)) <
              1e-10);
    }

    // Omnibus and pseudo R^2 recomputed from first principles.
    const double m = static_cast<double>(data.labels.size());
    const double ones =
        static_cast<double>(std::count(data.labels.begin(), data.labels.end(), 1));
    const double rate = ones / m;
    const double ll_null =
        ones * std::log(rate) + (m - ones) * std::log(1.0 - rate);
    const double ll_full = table.log_likelihood;
    CHECK(rel_diff(table.minus_two_log_likelihood, -2.0 * ll_full) < 1e-12);
    CHECK(rel_diff(table.omnibus_chi_square,
                   std::max(0.0, 2.0 * (ll_full - ll_null))) < 1e-8);
    CHECK(table.omnibus_df == 2);
    CHECK(table.omnibus_sig < 1e-6);  // strong planted signal
    const double cs = 1.0 - std::exp((2.0 / m) * (ll_null - ll_full));
    CHECK(rel_diff(table.cox_snell_r2, cs) < 1e-10);
    const double nk = cs / (1.0 - std::exp((2.0 / m) * ll_null));
    CHECK(rel_diff(table.nagelkerke_r2, nk) < 1e-10);
    CHECK(table.nagelkerke_r2 >= table.cox_snell_r2);
}

TEST_CASE("omnibus p-value is large when there is no signal") {
    const Generated null_data = generate(400, 0.0, {0.0, 0.0}, 77);
    const LogisticModel model = fit(null_data.table, null_data.labels);
    const InferenceTable table =
        wald_inference(model, null_data.table, null_data.labels);
    CHECK(table.omnibus_sig > 0.05);
    CHECK(table.cox_snell_r2 < 0.05);
}

TEST_CASE("a singular information matrix yields infinite standard errors") {
    // Two identical columns cannot be separated; the information matrix is
    // exactly rank-deficient.
    std::mt19937 rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 120; ++i) {
        const double v = normal(rng);
        rows.push_back({v, v});
        labels.push_back(v + normal(rng) > 0 ? 1 : 0);
    }
    FeatureTable t = make_table({"a", "a_copy"}, std::move(rows));
    const LogisticModel model = fit(t, labels);
    const InferenceTable table = wald_inference(model, t, labels);
    for (const auto& row : table.rows) {
        CHECK(std::isinf(row.std_error));
        CHECK(row.wald == 0.0);
    }
    CHECK(table.separation_note);
    REQUIRE_FALSE(table.warnings.empty());
}

TEST_CASE("inference serializers") {
    const Generated data = generate(200, 0.2, {1.0}, 55);
    const LogisticModel model = fit(data.table, data.labels);
    const InferenceTable table = wald_inference(model, data.table, data.labels);

    const std::string csv = to_csv(table);
    CHECK(csv.rfind("variable,b,std_error,wald,df,sig,exp_b", 0) == 0);
    CHECK(csv.find("\nconstant,") != std::string::npos);
    CHECK(csv.find("omnibus_chi_square,") != std::string::npos);
    CHECK(csv.find("nagelkerke_r2,") != std::string::npos);

    const nlohmann::ordered_json j = to_json(table);
    REQUIRE(j.contains("coefficients"));
    CHECK(j["coefficients"].size() == table.rows.size());
    CHECK(j.contains("omnibus"));
    CHECK(j["omnibus"].contains("chi_square"));

    const ConfusionMatrix cm = confusion(model, data.table, data.labels);
    const std::string cm_csv = to_csv(cm);
    CHECK(cm_csv.rfind("measured,predicted_0,predicted_1,pct_correct", 0) == 0);
    CHECK(cm_csv.find("overall") != std::string::npos);

    ConfusionMatrix empty;
    const std::string dumped = to_json(empty).dump();
    CHECK(dumped.find("null") != std::string::npos);  // NaN percentages
}
