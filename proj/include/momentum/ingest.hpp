#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "momentum/feature_table.hpp"

namespace momentum::ingest {

// One row of point-by-point match data. Optional fields are absent when the
// source cell is empty (or NA); everything else is validated on parse.
struct PointRecord {
    std::string match_id;
    std::string player1;
    std::string player2;
    int elapsed_seconds = 0;  // parsed from H:MM:SS
    int set_no = 0;
    int game_no = 0;
    int point_no = 0;
    int p1_sets = 0;
    int p2_sets = 0;
    int p1_games = 0;
    int p2_games = 0;
    std::string p1_score;  // token: 0/15/30/40/AD
    std::string p2_score;
    int server = 0;        // 1 or 2
    int serve_no = 0;      // 1 or 2
    int point_victor = 0;  // 1 or 2
    int p1_points_won = 0;
    int p2_points_won = 0;
    int game_victor = 0;  // 0/1/2
    int set_victor = 0;   // 0/1/2
    int p1_ace = 0;
    int p2_ace = 0;
    int p1_winner = 0;
    int p2_winner = 0;
    int p1_double_fault = 0;
    int p2_double_fault = 0;
    int p1_unf_err = 0;
    int p2_unf_err = 0;
    int p1_net_pt = 0;
    int p2_net_pt = 0;
    int p1_net_pt_won = 0;
    int p2_net_pt_won = 0;
    int p1_break_pt = 0;
    int p2_break_pt = 0;
    int p1_break_pt_won = 0;
    int p2_break_pt_won = 0;
    int p1_break_pt_missed = 0;
    int p2_break_pt_missed = 0;
    double p1_distance_run = 0.0;
    double p2_distance_run = 0.0;
    int rally_count = 0;
    std::optional<double> speed_mph;
    std::optional<std::string> winner_shot_type;  // F/B
    std::optional<std::string> serve_width;       // B/BC/BW/C/W
    std::optional<std::string> serve_depth;       // CTL/NCTL
    std::optional<std::string> return_depth;      // D/ND
};

struct MatchInfo {
    std::string match_id;
    std::string player1;
    std::string player2;
    std::size_t first_row = 0;
    std::size_t point_count = 0;
};

// Immutable after construction. Records are grouped by match in first-appearance
// order and sorted by (set_no, game_no, point_no) within each match.
struct MatchDataset {
    std::vector<PointRecord> records;
    std::vector<MatchInfo> match_index;
    std::size_t unknown_columns = 0;
    std::vector<std::string> warnings;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    const MatchInfo* find_match(const std::string& id) const;
};

// Parsing. Row numbers in error messages count data rows from 1.
MatchDataset parse_match_csv(std::istream& in);
MatchDataset parse_match_csv_file(const std::string& path);

// Serializes in the canonical column order. Text cells round-trip exactly;
// numeric cells to 6 significant digits.
void write_match_csv(const MatchDataset& dataset, std::ostream& out);
std::string match_csv_header();

int parse_elapsed(const std::string& hms);  // "0:10:27" -> 627
std::string format_elapsed(int seconds);

// In-game score token -> ordinal 0..4 over the order 0,15,30,40,AD.
int encode_score(const std::string& token);

struct KeyGameRule {
    bool select_all = false;
    bool break_point = true;  // game contains a break point
    bool game_count = true;   // either player's game count >= min_games
    int min_games = 5;
};

// Comma- or plus-separated tokens out of "break_pt" | "games>=N" | "all".
KeyGameRule parse_key_rule(const std::string& spec);
std::string to_string(const KeyGameRule& rule);

MatchDataset select_key_games(const MatchDataset& dataset, const KeyGameRule& rule = {});

// Subset helpers. filter_match throws DataError for an unknown id.
MatchDataset filter_match(const MatchDataset& dataset, const std::string& match_id);
MatchDataset filter_set(const MatchDataset& dataset, int set_no);

// k-1 dummy columns per requested categorical (reference level = lexicographically
// first observed level); rows missing any requested value are dropped and counted.
FeatureTable one_hot_encode(const MatchDataset& dataset,
                            const std::vector<std::string>& columns);

enum class CategoricalEncoding { Dummy, Ordinal };
enum class MissingPolicy { Drop, Keep };

// General feature assembler over logical per-player field names ("ace",
// "distance_run", ...) plus shared fields ("speed_mph", "serve_width", ...).
// Dummy encoding expands categoricals to k-1 indicators; Ordinal maps levels to
// their rank among lexicographically sorted observed levels. MissingPolicy::Drop
// removes incomplete rows and counts them; Keep stores NaN.
FeatureTable build_features(const MatchDataset& dataset,
                            const std::vector<std::string>& fields, int player,
                            CategoricalEncoding encoding, MissingPolicy missing);

// Per-record side variant for datasets where the selected player switches
// between p1 and p2 across matches. player_side.size() must equal records.
// Per-player columns get a pN_ prefix only when every side agrees.
FeatureTable build_features(const MatchDataset& dataset,
                            const std::vector<std::string>& fields,
                            const std::vector<int>& player_side,
                            CategoricalEncoding encoding, MissingPolicy missing);

// 1 if the given player won the point, else 0.
std::vector<int> point_labels(const MatchDataset& dataset, int player);
std::vector<int> point_labels(const MatchDataset& dataset,
                              const std::vector<int>& player_side);

// "1" | "2" | exact player name -> side. Throws DataError if the name does not
// identify one side consistently across the dataset's matches.
int resolve_player(const MatchDataset& dataset, const std::string& selector);
int resolve_player(const MatchInfo& match, const std::string& selector);

bool is_categorical_field(const std::string& field);

}  // namespace momentum::ingest
