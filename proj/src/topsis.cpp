#include "momentum/topsis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "momentum/errors.hpp"
#include "momentum/ingest.hpp"

namespace momentum::topsis {

void DecisionMatrix::validate() const {
    if (values.empty() || criteria.empty()) {
        throw DataError("decision matrix must have at least one alternative and one criterion");
    }
    if (directions.size() != criteria.size()) {
        throw DataError("decision matrix has " + std::to_string(criteria.size()) +
                        " criteria but " + std::to_string(directions.size()) + " directions");
    }
    for (const auto& row : values) {
        if (row.size() != criteria.size()) {
            throw DataError("ragged decision matrix row");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw NumericError("non-finite entry in decision matrix");
            }
        }
    }
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw DataError("weight vector is empty");
    double sum = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) {
            throw DataError("weights must be finite and nonnegative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "weights must sum to 1, got " << sum;
        throw DataError(msg.str());
    }
}

WeightVector default_momentum_weights() {
    return WeightVector({0.4, 0.25, 0.2, 0.15});
}

std::vector<std::vector<double>> normalize(const DecisionMatrix& mat) {
    mat.validate();
    const std::size_t n = mat.rows();
    const std::size_t m = mat.cols();
    std::vector<std::vector<double>> out(n, std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        double sumsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sumsq += mat.values[i][j] * mat.values[i][j];
        }
        const double norm = std::sqrt(sumsq);
        if (norm > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                out[i][j] = mat.values[i][j] / norm;
            }
        }
        // all-zero column stays all-zero
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> ideal_vectors(
    const std::vector<std::vector<double>>& weighted,
    const std::vector<Direction>& directions) {
    const std::size_t m = directions.size();
    std::vector<double> ideal(m), anti(m);
    for (std::size_t j = 0; j < m; ++j) {
        double lo = weighted[0][j];
        double hi = weighted[0][j];
        for (const auto& row : weighted) {
            lo = std::min(lo, row[j]);
            hi = std::max(hi, row[j]);
        }
        if (directions[j] == Direction::Benefit) {
            ideal[j] = hi;
            anti[j] = lo;
        } else {
            ideal[j] = lo;
            anti[j] = hi;
        }
    }
    return {ideal, anti};
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double sumsq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sumsq += d * d;
    }
    return std::sqrt(sumsq);
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> distances(
    const std::vector<std::vector<double>>& weighted, const std::vector<double>& ideal,
    const std::vector<double>& anti_ideal) {
    std::vector<double> d_plus, d_minus;
    d_plus.reserve(weighted.size());
    d_minus.reserve(weighted.size());
    for (const auto& row : weighted) {
        if (row.size() != ideal.size() || row.size() != anti_ideal.size()) {
            throw DataError("distance vectors are not dimension-consistent");
        }
        d_plus.push_back(euclidean(row, ideal));
        d_minus.push_back(euclidean(row, anti_ideal));
    }
    return {d_plus, d_minus};
}

std::vector<double> closeness(const std::vector<double>& dist_ideal,
                              const std::vector<double>& dist_anti,
                              std::vector<std::string>* warnings) {
    std::vector<double> c(dist_ideal.size());
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double total = dist_ideal[i] + dist_anti[i];
        if (total == 0.0) {
            c[i] = 0.5;
            ++degenerate;
        } else {
            c[i] = dist_anti[i] / total;
        }
    }
    if (degenerate > 0 && warnings != nullptr) {
        warnings->push_back("degenerate closeness: " + std::to_string(degenerate) +
                            " alternative(s) at zero distance to both ideals, scored 0.5");
    }
    return c;
}

TopsisResult evaluate(const DecisionMatrix& mat, const WeightVector& weights,
                      const EvaluateOptions& opts) {
    if (weights.size() != mat.cols()) {
        throw DataError("weight vector has " + std::to_string(weights.size()) +
                        " entries for " + std::to_string(mat.cols()) + " criteria");
    }
    TopsisResult result;
    result.normalized = normalize(mat);
    result.weighted = result.normalized;
    if (opts.apply_weights) {
        for (auto& row : result.weighted) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] *= weights[j];
            }
        }
    }
    auto [ideal, anti] = ideal_vectors(result.weighted, mat.directions);
    result.ideal = std::move(ideal);
    result.anti_ideal = std::move(anti);
    auto [d_plus, d_minus] = distances(result.weighted, result.ideal, result.anti_ideal);
    result.dist_ideal = std::move(d_plus);
    result.dist_anti = std::move(d_minus);
    result.closeness = closeness(result.dist_ideal, result.dist_anti, &result.warnings);

    result.ranking.resize(mat.rows());
    std::iota(result.ranking.begin(), result.ranking.end(), std::size_t{0});
    std::stable_sort(result.ranking.begin(), result.ranking.end(),
                     [&](std::size_t a, std::size_t b) {
                         return result.closeness[a] > result.closeness[b];
                     });
    return result;
}

MomentumSeries momentum_series(const ingest::MatchDataset& match,
                               const WeightVector& weights) {
    if (match.empty()) {
        throw DataError("empty series: match has no points");
    }
    if (match.match_index.size() != 1) {
        throw DataError("momentum series needs exactly one match, got " +
                        std::to_string(match.match_index.size()));
    }
    if (weights.size() != 4) {
        throw DataError("momentum series uses 4 criteria (sets, games, points, server)");
    }

    const auto& records = match.records;
    DecisionMatrix mat;
    mat.criteria = {"sets_won", "games_won", "points_won", "is_server"};
    mat.directions.assign(4, Direction::Benefit);
    mat.values.reserve(records.size() * 2);
    for (const auto& rec : records) {
        mat.values.push_back({static_cast<double>(rec.p1_sets),
                              static_cast<double>(rec.p1_games),
                              static_cast<double>(rec.p1_points_won),
                              rec.server == 1 ? 1.0 : 0.0});
        mat.values.push_back({static_cast<double>(rec.p2_sets),
                              static_cast<double>(rec.p2_games),
                              static_cast<double>(rec.p2_points_won),
                              rec.server == 2 ? 1.0 : 0.0});
    }

    TopsisResult eval = evaluate(mat, weights);

    MomentumSeries series;
    series.match_id = match.match_index.front().match_id;
    series.player_names = {match.match_index.front().player1,
                           match.match_index.front().player2};
    series.warnings = eval.warnings;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        MomentumPoint base{rec.elapsed_seconds, rec.set_no, rec.game_no, rec.point_no,
                           0.0, 0};
        MomentumPoint p1 = base;
        p1.closeness = eval.closeness[2 * i];
        p1.points_won = rec.p1_points_won;
        MomentumPoint p2 = base;
        p2.closeness = eval.closeness[2 * i + 1];
        p2.points_won = rec.p2_points_won;
        series.players[0].push_back(p1);
        series.players[1].push_back(p2);
    }
    return series;
}

std::string to_csv(const MomentumSeries& series) {
    std::ostringstream out;
    out << "elapsed_seconds,set_no,game_no,point_no,player,closeness\n";
    char buf[64];
    const std::size_t count = series.players[0].size();
    for (std::size_t i = 0; i < count; ++i) {
        for (int player = 0; player < 2; ++player) {
            const MomentumPoint& p = series.players[player][i];
            std::snprintf(buf, sizeof(buf), "%.9g", p.closeness);
            out << p.elapsed_seconds << ',' << p.set_no << ',' << p.game_no << ','
                << p.point_no << ',' << (player + 1) << ',' << buf << '\n';
        }
    }
    return out.str();
}

}  // namespace momentum::topsis
