#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace momentum::ingest {
struct MatchDataset;
}

namespace momentum::topsis {

enum class Direction { Benefit, Cost };

struct DecisionMatrix {
    std::vector<std::string> criteria;        // names, one per column
    std::vector<Direction> directions;        // one per column
    std::vector<std::vector<double>> values;  // n alternatives x m criteria

    std::size_t rows() const { return values.size(); }
    std::size_t cols() const { return criteria.size(); }
    void validate() const;  // throws NumericError on non-finite, DataError on shape
};

class WeightVector {
public:
    // Nonnegative, summing to 1 within 1e-9.
    explicit WeightVector(std::vector<double> weights);
    const std::vector<double>& values() const { return weights_; }
    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }

private:
    std::vector<double> weights_;
};

// The 0.4 / 0.25 / 0.2 / 0.15 momentum weighting.
WeightVector default_momentum_weights();

struct TopsisResult {
    std::vector<std::vector<double>> normalized;
    std::vector<std::vector<double>> weighted;
    std::vector<double> ideal;        // A*
    std::vector<double> anti_ideal;   // A-
    std::vector<double> dist_ideal;   // D+
    std::vector<double> dist_anti;    // D-
    std::vector<double> closeness;    // C, in [0,1]
    std::vector<std::size_t> ranking; // row indices, best first, stable ties
    std::vector<std::string> warnings;
};

struct EvaluateOptions {
    // Weight the normalized matrix before distances (standard form). false
    // reproduces the literal unweighted distance formulas for comparison.
    bool apply_weights = true;
};

// Column-wise x / sqrt(sum x^2); an all-zero column stays all-zero.
std::vector<std::vector<double>> normalize(const DecisionMatrix& mat);

std::pair<std::vector<double>, std::vector<double>> ideal_vectors(
    const std::vector<std::vector<double>>& weighted,
    const std::vector<Direction>& directions);

std::pair<std::vector<double>, std::vector<double>> distances(
    const std::vector<std::vector<double>>& weighted, const std::vector<double>& ideal,
    const std::vector<double>& anti_ideal);

// C = D- / (D+ + D-); both zero -> 0.5 with a degeneracy warning.
std::vector<double> closeness(const std::vector<double>& dist_ideal,
                              const std::vector<double>& dist_anti,
                              std::vector<std::string>* warnings = nullptr);

TopsisResult evaluate(const DecisionMatrix& mat, const WeightVector& weights,
                      const EvaluateOptions& opts = {});

struct MomentumPoint {
    int elapsed_seconds = 0;
    int set_no = 0;
    int game_no = 0;
    int point_no = 0;
    double closeness = 0.0;
    int points_won = 0;  // cumulative match points for this player
};

struct MomentumSeries {
    std::string match_id;
    std::array<std::string, 2> player_names;
    std::array<std::vector<MomentumPoint>, 2> players;  // [0] = player 1
    std::vector<std::string> warnings;

    bool empty() const { return players[0].empty() && players[1].empty(); }
};

// One decision matrix over all (point, player) rows of a single match;
// criteria: sets won, games won in current set, cumulative points, is-server.
MomentumSeries momentum_series(const ingest::MatchDataset& match,
                               const WeightVector& weights);

// Columns: elapsed_seconds,set_no,game_no,point_no,player,closeness
std::string to_csv(const MomentumSeries& series);

}  // namespace momentum::topsis
