#include "momentum/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "momentum/errors.hpp"

namespace momentum::ingest {
namespace {

[[noreturn]] void row_fail(std::size_t row, const std::string& msg) {
    throw DataError("row " + std::to_string(row) + ": " + msg);
}

bool cell_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

int to_int(const std::string& cell, const char* col, std::size_t row) {
    int value = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        row_fail(row, std::string("column '") + col + "': expected integer, got '" + cell + "'");
    }
    return value;
}

int to_int_range(const std::string& cell, const char* col, std::size_t row, int lo, int hi) {
    const int v = to_int(cell, col, row);
    if (v < lo || v > hi) {
        row_fail(row, std::string("column '") + col + "': value " + std::to_string(v) +
                          " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
    return v;
}

double to_double(const std::string& cell, const char* col, std::size_t row, double lo) {
    char* endp = nullptr;
    const double v = std::strtod(cell.c_str(), &endp);
    if (cell.empty() || endp != cell.c_str() + cell.size() || !std::isfinite(v) || v < lo) {
        row_fail(row, std::string("column '") + col + "': expected number >= " +
                          std::to_string(lo) + ", got '" + cell + "'");
    }
    return v;
}

bool is_nonneg_int(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// In-game tokens are 0/15/30/40/AD; tiebreak rows carry plain point counts.
void check_score_token(const std::string& cell, const char* col, std::size_t row) {
    if (cell == "AD" || is_nonneg_int(cell)) return;
    row_fail(row, std::string("column '") + col + "': invalid score token '" + cell + "'");
}

std::optional<std::string> opt_token(const std::string& cell, const char* col, std::size_t row,
                                     const std::set<std::string>& allowed) {
    if (cell_missing(cell)) return std::nullopt;
    if (allowed.count(cell) == 0) {
        row_fail(row, std::string("column '") + col + "': invalid token '" + cell + "'");
    }
    return cell;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string opt_str(const std::optional<std::string>& v) { return v ? *v : std::string(); }

using Setter = std::function<void(PointRecord&, const std::string&, std::size_t)>;
using Getter = std::function<std::string(const PointRecord&)>;

struct ColumnSpec {
    const char* name;
    Setter set;
    Getter get;
};

ColumnSpec int_col(const char* name, int PointRecord::* field, int lo, int hi) {
    return {name,
            [name, field, lo, hi](PointRecord& r, const std::string& cell, std::size_t row) {
                r.*field = to_int_range(cell, name, row, lo, hi);
            },
            [field](const PointRecord& r) { return std::to_string(r.*field); }};
}

ColumnSpec flag_col(const char* name, int PointRecord::* field) {
    return int_col(name, field, 0, 1);
}

std::vector<ColumnSpec> make_schema() {
    const std::set<std::string> widths{"B", "BC", "BW", "C", "W"};
    const std::set<std::string> depths{"CTL", "NCTL"};
    const std::set<std::string> returns{"D", "ND"};
    const std::set<std::string> shots{"F", "B"};

    std::vector<ColumnSpec> cols;
    cols.push_back({"match_id",
                    [](PointRecord& r, const std::string& c, std::size_t row) {
                        if (c.empty()) row_fail(row, "column 'match_id': empty");
                        r.match_id = c;
                    },
                    [](const PointRecord& r) { return r.match_id; }});
    cols.push_back({"player1",
                    [](PointRecord& r, const std::string& c, std::size_t) { r.player1 = c; },
                    [](const PointRecord& r) { return r.player1; }});
    cols.push_back({"player2",
                    [](PointRecord& r, const std::string& c, std::size_t) { r.player2 = c; },
                    [](const PointRecord& r) { return r.player2; }});
    cols.push_back({"elapsed_time",
                    [](PointRecord& r, const std::string& c, std::size_t row) {
                        try {
                            r.elapsed_seconds = parse_elapsed(c);
                        } catch (const DataError& e) {
                            row_fail(row, e.what());
                        }
                    },
                    [](const PointRecord& r) { return format_elapsed(r.elapsed_seconds); }});
    cols.push_back(int_col("set_no", &PointRecord::set_no, 1, 1 << 20));
    cols.push_back(int_col("game_no", &PointRecord::game_no, 1, 1 << 20));
    cols.push_back(int_col("point_no", &PointRecord::point_no, 1, 1 << 20));
    cols.push_back(int_col("p1_sets", &PointRecord::p1_sets, 0, 2));
    cols.push_back(int_col("p2_sets", &PointRecord::p2_sets, 0, 2));
    cols.push_back(int_col("p1_games", &PointRecord::p1_games, 0, 7));
    cols.push_back(int_col("p2_games", &PointRecord::p2_games, 0, 7));
    cols.push_back({"p1_score",
                    [](PointRecord& r, const std::string& c, std::size_t row) {
                        check_score_token(c, "p1_score", row);
                        r.p1_score = c;
                    },
                    [](const PointRecord& r) { return r.p1_score; }});
    cols.push_back({"p2_score",
                    [](PointRecord& r, const std::string& c, std::size_t row) {
                        check_score_token(c, "p2_score", row);
                        r.p2_score = c;
                    },
                    [](const PointRecord& r) { return r.p2_score; }});
    cols.push_back(int_col("server", &PointRecord::server, 1, 2));
    cols.push_back(int_col("serve_no", &PointRecord::serve_no, 1, 2));
    cols.push_back(int_col("point_victor", &PointRecord::point_victor, 1, 2));
    cols.push_back(int_col("p1_points_won", &PointRecord::p1_points_won, 0, 1 << 20));
    cols.push_back(int_col("p2_points_won", &PointRecord::p2_points_won, 0, 1 << 20));
    cols.push_back(int_col("game_victor", &PointRecord::game_victor, 0, 2));
    cols.push_back(int_col("set_victor", &PointRecord::set_victor, 0, 2));
    cols.push_back(flag_col("p1_ace", &PointRecord::p1_ace));
    cols.push_back(flag_col("p2_ace", &PointRecord::p2_ace));
    cols.push_back(flag_col("p1_winner", &PointRecord::p1_winner));
    cols.push_back(flag_col("p2_winner", &PointRecord::p2_winner));
    cols.push_back({"winner_shot_type",
                    [shots](PointRecord& r, const std::string& c, std::size_t row) {
                        r.winner_shot_type = opt_token(c, "winner_shot_type", row, shots);
                    },
                    [](const PointRecord& r) { return opt_str(r.winner_shot_type); }});
    cols.push_back(flag_col("p1_double_fault", &PointRecord::p1_double_fault));
    cols.push_back(flag_col("p2_double_fault", &PointRecord::p2_double_fault));
    cols.push_back(flag_col("p1_unf_err", &PointRecord::p1_unf_err));
    cols.push_back(flag_col("p2_unf_err", &PointRecord::p2_unf_err));
    cols.push_back(flag_col("p1_net_pt", &PointRecord::p1_net_pt));
    cols.push_back(flag_col("p2_net_pt", &PointRecord::p2_net_pt));
    cols.push_back(flag_col("p1_net_pt_won", &PointRecord::p1_net_pt_won));
    cols.push_back(flag_col("p2_net_pt_won", &PointRecord::p2_net_pt_won));
    cols.push_back(flag_col("p1_break_pt", &PointRecord::p1_break_pt));
    cols.push_back(flag_col("p2_break_pt", &PointRecord::p2_break_pt));
    cols.push_back(flag_col("p1_break_pt_won", &PointRecord::p1_break_pt_won));
    cols.push_back(flag_col("p2_break_pt_won", &PointRecord::p2_break_pt_won));
    cols.push_back(flag_col("p1_break_pt_missed", &PointRecord::p1_break_pt_missed));
    cols.push_back(flag_col("p2_break_pt_missed", &PointRecord::p2_break_pt_missed));
    cols.push_back({"p1_distance_run",
                    [](PointRecord& r, const std::string& c, std::size_t row) {
                        r.p1_distance_run = to_double(c, "p1_distance_run", row, 0.0);
                    },
                    [](const PointRecord& r) { return fmt_double(r.p1_distance_run); }});
    cols.push_back({"p2_distance_run",
                    [](PointRecord& r, const std::string& c, std::size_t row) {
                        r.p2_distance_run = to_double(c, "p2_distance_run", row, 0.0);
                    },
                    [](const PointRecord& r) { return fmt_double(r.p2_distance_run); }});
    cols.push_back(int_col("rally_count", &PointRecord::rally_count, 1, 1 << 20));
    cols.push_back({"speed_mph",
                    [](PointRecord& r, const std::string& c, std::size_t row) {
                        if (cell_missing(c)) {
                            r.speed_mph.reset();
                        } else {
                            r.speed_mph = to_double(c, "speed_mph", row, 0.0);
                        }
                    },
                    [](const PointRecord& r) {
                        return r.speed_mph ? fmt_double(*r.speed_mph) : std::string();
                    }});
    cols.push_back({"serve_width",
                    [widths](PointRecord& r, const std::string& c, std::size_t row) {
                        r.serve_width = opt_token(c, "serve_width", row, widths);
                    },
                    [](const PointRecord& r) { return opt_str(r.serve_width); }});
    cols.push_back({"serve_depth",
                    [depths](PointRecord& r, const std::string& c, std::size_t row) {
                        r.serve_depth = opt_token(c, "serve_depth", row, depths);
                    },
                    [](const PointRecord& r) { return opt_str(r.serve_depth); }});
    cols.push_back({"return_depth",
                    [returns](PointRecord& r, const std::string& c, std::size_t row) {
                        r.return_depth = opt_token(c, "return_depth", row, returns);
                    },
                    [](const PointRecord& r) { return opt_str(r.return_depth); }});
    return cols;
}

const std::vector<ColumnSpec>& schema() {
    static const std::vector<ColumnSpec> cols = make_schema();
    return cols;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

std::tuple<int, int, int> order_key(const PointRecord& r) {
    return {r.set_no, r.game_no, r.point_no};
}

}  // namespace

const MatchInfo* MatchDataset::find_match(const std::string& id) const {
    for (const auto& m : match_index) {
        if (m.match_id == id) return &m;
    }
    return nullptr;
}

int parse_elapsed(const std::string& hms) {
    int h = 0, m = 0, s = 0;
    char extra = 0;
    if (std::sscanf(hms.c_str(), "%d:%d:%d%c", &h, &m, &s, &extra) != 3 || h < 0 ||
        m < 0 || m > 59 || s < 0 || s > 59) {
        throw DataError("invalid elapsed time '" + hms + "', expected H:MM:SS");
    }
    return h * 3600 + m * 60 + s;
}

std::string format_elapsed(int seconds) {
    if (seconds < 0) throw DataError("negative elapsed seconds");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%d:%02d:%02d", seconds / 3600, (seconds / 60) % 60,
                  seconds % 60);
    return buf;
}

int encode_score(const std::string& token) {
    static const std::map<std::string, int> order{
        {"0", 0}, {"15", 1}, {"30", 2}, {"40", 3}, {"AD", 4}};
    const auto it = order.find(token);
    if (it == order.end()) {
        throw DataError("unknown score token '" + token + "'");
    }
    return it->second;
}

MatchDataset parse_match_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty dataset: no header row");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    const auto& cols = schema();
    std::vector<int> position(cols.size(), -1);  // schema column -> cell index
    std::vector<std::string> unknown;
    for (std::size_t i = 0; i < header.size(); ++i) {
        bool known = false;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (header[i] == cols[j].name) {
                if (position[j] >= 0) {
                    throw DataError("schema error: duplicate column '" + header[i] + "'");
                }
                position[j] = static_cast<int>(i);
                known = true;
                break;
            }
        }
        if (!known) unknown.push_back(header[i]);
    }
    std::string missing;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (position[j] < 0) {
            if (!missing.empty()) missing += ", ";
            missing += cols[j].name;
        }
    }
    if (!missing.empty()) {
        throw DataError("schema error: missing column(s): " + missing);
    }

    MatchDataset dataset;
    dataset.unknown_columns = unknown.size();
    if (!unknown.empty()) {
        std::string names;
        for (const auto& u : unknown) {
            if (!names.empty()) names += ", ";
            names += u;
        }
        dataset.warnings.push_back("ignored " + std::to_string(unknown.size()) +
                                   " unknown column(s): " + names);
    }

    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row_no;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            row_fail(row_no, "expected " + std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()));
        }
        PointRecord rec;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            cols[j].set(rec, cells[static_cast<std::size_t>(position[j])], row_no);
        }
        dataset.records.push_back(std::move(rec));
    }
    if (dataset.records.empty()) {
        throw DataError("empty dataset: header but no data rows");
    }

    // Group by match in first-appearance order, sort within match, validate.
    std::vector<std::string> match_order;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& id = dataset.records[i].match_id;
        auto [it, inserted] = groups.try_emplace(id);
        if (inserted) match_order.push_back(id);
        it->second.push_back(i);
    }

    std::vector<PointRecord> ordered;
    ordered.reserve(dataset.records.size());
    for (const auto& id : match_order) {
        auto& idx = groups[id];
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return order_key(dataset.records[a]) < order_key(dataset.records[b]);
        });
        MatchInfo info;
        info.match_id = id;
        info.player1 = dataset.records[idx.front()].player1;
        info.player2 = dataset.records[idx.front()].player2;
        info.first_row = ordered.size();
        info.point_count = idx.size();

        int prev_elapsed = -1;
        std::tuple<int, int, int> prev_key{-1, -1, -1};
        std::size_t elapsed_anomalies = 0;
        std::size_t count_anomalies = 0;
        std::size_t ordinal = 0;
        for (std::size_t k : idx) {
            const PointRecord& rec = dataset.records[k];
            ++ordinal;
            const auto key = order_key(rec);
            if (key == prev_key) {
                throw DataError("duplicate point (" + id + ", set " +
                                std::to_string(rec.set_no) + ", game " +
                                std::to_string(rec.game_no) + ", point " +
                                std::to_string(rec.point_no) + ")");
            }
            prev_key = key;
            if (rec.elapsed_seconds < prev_elapsed) ++elapsed_anomalies;
            prev_elapsed = rec.elapsed_seconds;
            if (static_cast<std::size_t>(rec.p1_points_won + rec.p2_points_won) != ordinal) {
                ++count_anomalies;
            }
            if (rec.player1 != info.player1 || rec.player2 != info.player2) {
                dataset.warnings.push_back("match " + id + ": inconsistent player names");
            }
            ordered.push_back(rec);
        }
        if (elapsed_anomalies > 0) {
            dataset.warnings.push_back("match " + id + ": elapsed_time decreases at " +
                                       std::to_string(elapsed_anomalies) + " point(s)");
        }
        if (count_anomalies > 0) {
            dataset.warnings.push_back("match " + id + ": points_won totals break at " +
                                       std::to_string(count_anomalies) + " point(s)");
        }
        dataset.match_index.push_back(std::move(info));
    }
    dataset.records = std::move(ordered);
    return dataset;
}

MatchDataset parse_match_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open input file '" + path + "'");
    }
    return parse_match_csv(in);
}

std::string match_csv_header() {
    std::string out;
    for (const auto& col : schema()) {
        if (!out.empty()) out += ',';
        out += col.name;
    }
    return out;
}

void write_match_csv(const MatchDataset& dataset, std::ostream& out) {
    out << match_csv_header() << '\n';
    for (const auto& rec : dataset.records) {
        bool first = true;
        for (const auto& col : schema()) {
            if (!first) out << ',';
            first = false;
            out << csv_escape(col.get(rec));
        }
        out << '\n';
    }
}

KeyGameRule parse_key_rule(const std::string& spec) {
    KeyGameRule rule;
    rule.break_point = false;
    rule.game_count = false;
    std::string normalized = spec;
    std::replace(normalized.begin(), normalized.end(), '+', ',');
    std::istringstream in(normalized);
    std::string piece;
    bool any = false;
    while (std::getline(in, piece, ',')) {
        if (piece.empty()) continue;
        any = true;
        if (piece == "all") {
            rule.select_all = true;
        } else if (piece == "break_pt") {
            rule.break_point = true;
        } else if (piece.rfind("games>=", 0) == 0) {
            rule.game_count = true;
            rule.min_games = to_int(piece.substr(7), "key-rule games", 0);
        } else {
            throw DataError("unknown key-rule token '" + piece +
                            "' (expected break_pt, games>=N, or all)");
        }
    }
    if (!any) {
        throw DataError("empty key-rule spec");
    }
    return rule;
}

std::string to_string(const KeyGameRule& rule) {
    if (rule.select_all) return "all";
    std::string out;
    if (rule.break_point) out = "break_pt";
    if (rule.game_count) {
        if (!out.empty()) out += ",";
        out += "games>=" + std::to_string(rule.min_games);
    }
    return out.empty() ? "none" : out;
}

namespace {

MatchDataset subset(const MatchDataset& dataset, const std::vector<char>& keep) {
    MatchDataset out;
    std::vector<std::string> match_order;
    std::map<std::string, MatchInfo> infos;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        if (!keep[i]) continue;
        const auto& rec = dataset.records[i];
        auto [it, inserted] = infos.try_emplace(rec.match_id);
        if (inserted) {
            match_order.push_back(rec.match_id);
            it->second.match_id = rec.match_id;
            it->second.player1 = rec.player1;
            it->second.player2 = rec.player2;
            it->second.first_row = out.records.size();
        }
        it->second.point_count += 1;
        out.records.push_back(rec);
    }
    for (const auto& id : match_order) {
        out.match_index.push_back(infos[id]);
    }
    return out;
}

}  // namespace

MatchDataset select_key_games(const MatchDataset& dataset, const KeyGameRule& rule) {
    if (dataset.empty()) {
        throw DataError("empty dataset: nothing to select key games from");
    }
    if (rule.select_all) {
        std::vector<char> keep(dataset.records.size(), 1);
        return subset(dataset, keep);
    }
    // First pass: mark qualifying (match, set, game) triples.
    std::set<std::tuple<std::string, int, int>> key_games;
    for (const auto& rec : dataset.records) {
        const bool has_break = rule.break_point && (rec.p1_break_pt == 1 || rec.p2_break_pt == 1);
        const bool late_game =
            rule.game_count &&
            (rec.p1_games >= rule.min_games || rec.p2_games >= rule.min_games);
        if (has_break || late_game) {
            key_games.insert({rec.match_id, rec.set_no, rec.game_no});
        }
    }
    std::vector<char> keep(dataset.records.size(), 0);
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& rec = dataset.records[i];
        keep[i] = key_games.count({rec.match_id, rec.set_no, rec.game_no}) > 0 ? 1 : 0;
    }
    return subset(dataset, keep);
}

MatchDataset filter_match(const MatchDataset& dataset, const std::string& match_id) {
    if (dataset.find_match(match_id) == nullptr) {
        throw DataError("unknown match id '" + match_id + "'");
    }
    std::vector<char> keep(dataset.records.size(), 0);
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        keep[i] = dataset.records[i].match_id == match_id ? 1 : 0;
    }
    return subset(dataset, keep);
}

MatchDataset filter_set(const MatchDataset& dataset, int set_no) {
    std::vector<char> keep(dataset.records.size(), 0);
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        keep[i] = dataset.records[i].set_no == set_no ? 1 : 0;
    }
    return subset(dataset, keep);
}

namespace {

struct FieldDef {
    bool per_player = false;
    bool categorical = false;
    std::function<std::optional<double>(const PointRecord&, int side)> num;
    std::function<std::optional<std::string>(const PointRecord&)> cat;
};

std::optional<double> side_pick(int side, double p1, double p2) {
    return side == 1 ? p1 : p2;
}

const std::map<std::string, FieldDef>& field_defs() {
    static const std::map<std::string, FieldDef> defs = [] {
        std::map<std::string, FieldDef> d;
        auto per_player = [&](const char* name,
                              std::function<std::optional<double>(const PointRecord&, int)> f) {
            d[name] = FieldDef{true, false, std::move(f), nullptr};
        };
        per_player("ace", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_ace, r.p2_ace);
        });
        per_player("winner", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_winner, r.p2_winner);
        });
        per_player("double_fault", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_double_fault, r.p2_double_fault);
        });
        per_player("unf_err", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_unf_err, r.p2_unf_err);
        });
        per_player("net_pt", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_net_pt, r.p2_net_pt);
        });
        per_player("net_pt_won", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_net_pt_won, r.p2_net_pt_won);
        });
        per_player("break_pt", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_break_pt, r.p2_break_pt);
        });
        per_player("break_pt_won", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_break_pt_won, r.p2_break_pt_won);
        });
        per_player("break_pt_missed", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_break_pt_missed, r.p2_break_pt_missed);
        });
        per_player("distance_run", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_distance_run, r.p2_distance_run);
        });
        per_player("sets", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_sets, r.p2_sets);
        });
        per_player("games", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_games, r.p2_games);
        });
        per_player("points_won", [](const PointRecord& r, int s) {
            return side_pick(s, r.p1_points_won, r.p2_points_won);
        });
        per_player("score", [](const PointRecord& r, int s) -> std::optional<double> {
            const std::string& tok = s == 1 ? r.p1_score : r.p2_score;
            try {
                return encode_score(tok);
            } catch (const DataError&) {
                return std::nullopt;  // tiebreak rows fall outside the token set
            }
        });
        auto shared = [&](const char* name,
                          std::function<std::optional<double>(const PointRecord&)> f) {
            d[name] = FieldDef{false, false,
                               [f](const PointRecord& r, int) { return f(r); }, nullptr};
        };
        shared("speed_mph", [](const PointRecord& r) -> std::optional<double> {
            return r.speed_mph;
        });
        shared("rally_count", [](const PointRecord& r) -> std::optional<double> {
            return r.rally_count;
        });
        shared("serve_no", [](const PointRecord& r) -> std::optional<double> {
            return r.serve_no;
        });
        shared("elapsed_seconds", [](const PointRecord& r) -> std::optional<double> {
            return r.elapsed_seconds;
        });
        auto categorical = [&](const char* name,
                               std::function<std::optional<std::string>(const PointRecord&)> f) {
            d[name] = FieldDef{false, true, nullptr, std::move(f)};
        };
        categorical("winner_shot_type",
                    [](const PointRecord& r) { return r.winner_shot_type; });
        categorical("serve_width", [](const PointRecord& r) { return r.serve_width; });
        categorical("serve_depth", [](const PointRecord& r) { return r.serve_depth; });
        categorical("return_depth", [](const PointRecord& r) { return r.return_depth; });
        return d;
    }();
    return defs;
}

}  // namespace

bool is_categorical_field(const std::string& field) {
    const auto it = field_defs().find(field);
    return it != field_defs().end() && it->second.categorical;
}

FeatureTable build_features(const MatchDataset& dataset,
                            const std::vector<std::string>& fields,
                            const std::vector<int>& player_side,
                            CategoricalEncoding encoding, MissingPolicy missing) {
    if (player_side.size() != dataset.records.size()) {
        throw DataError("player_side size does not match record count");
    }
    for (int s : player_side) {
        if (s != 1 && s != 2) throw DataError("player side must be 1 or 2");
    }
    const bool uniform_side =
        player_side.empty() ||
        std::all_of(player_side.begin(), player_side.end(),
                    [&](int s) { return s == player_side.front(); });

    FeatureTable table;
    table.input_rows = dataset.records.size();

    struct ColumnPlan {
        const FieldDef* def;
        std::string field;
        std::string name;        // emitted column name
        ColumnOrigin origin;
        std::string level;       // one-hot level
        int level_index = -1;    // ordinal level count marker (unused for raw)
        std::vector<std::string> levels;  // for ordinal lookup
    };
    std::vector<ColumnPlan> plan;

    for (const auto& field : fields) {
        const auto it = field_defs().find(field);
        if (it == field_defs().end()) {
            throw DataError("unknown feature field '" + field + "'");
        }
        const FieldDef& def = it->second;
        std::string base = field;
        if (def.per_player && uniform_side && !player_side.empty()) {
            base = "p" + std::to_string(player_side.front()) + "_" + field;
        }
        if (!def.categorical) {
            plan.push_back({&def, field, base, ColumnOrigin::Raw, "", -1, {}});
            continue;
        }
        std::set<std::string> levels;
        for (const auto& rec : dataset.records) {
            if (auto v = def.cat(rec)) levels.insert(*v);
        }
        std::vector<std::string> sorted(levels.begin(), levels.end());
        if (encoding == CategoricalEncoding::Ordinal) {
            ColumnPlan cp{&def, field, base, ColumnOrigin::Ordinal, "", -1, sorted};
            plan.push_back(std::move(cp));
            if (sorted.size() <= 1) {
                table.warnings.push_back("column '" + field +
                                         "' is constant over this subset");
            }
            continue;
        }
        if (sorted.size() <= 1) {
            table.warnings.push_back("column '" + field +
                                     "' has a single observed level; no indicators emitted");
            continue;
        }
        // reference level = lexicographically first observed level, dropped
        for (std::size_t k = 1; k < sorted.size(); ++k) {
            plan.push_back({&def, field, base + "=" + sorted[k], ColumnOrigin::OneHot,
                            sorted[k], static_cast<int>(k), sorted});
        }
    }

    for (const auto& cp : plan) {
        FeatureColumn col;
        col.name = cp.name;
        col.source = cp.field;
        col.origin = cp.origin;
        col.level = cp.level;
        table.columns.push_back(col);
    }

    const double nan = std::nan("");
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const PointRecord& rec = dataset.records[i];
        const int side = player_side[i];
        std::vector<double> row;
        row.reserve(plan.size());
        bool complete = true;
        for (const auto& cp : plan) {
            double value = nan;
            if (cp.origin == ColumnOrigin::Raw) {
                if (auto v = cp.def->num(rec, side)) value = *v;
            } else {
                const auto v = cp.def->cat(rec);
                if (v) {
                    if (cp.origin == ColumnOrigin::OneHot) {
                        value = (*v == cp.level) ? 1.0 : 0.0;
                    } else {
                        const auto pos =
                            std::find(cp.levels.begin(), cp.levels.end(), *v);
                        value = static_cast<double>(pos - cp.levels.begin());
                    }
                }
            }
            if (std::isnan(value)) complete = false;
            row.push_back(value);
        }
        if (!complete && missing == MissingPolicy::Drop) {
            ++table.masked_rows;
            continue;
        }
        table.rows.push_back(std::move(row));
        table.source_rows.push_back(i);
    }
    return table;
}

FeatureTable build_features(const MatchDataset& dataset,
                            const std::vector<std::string>& fields, int player,
                            CategoricalEncoding encoding, MissingPolicy missing) {
    std::vector<int> sides(dataset.records.size(), player);
    return build_features(dataset, fields, sides, encoding, missing);
}

FeatureTable one_hot_encode(const MatchDataset& dataset,
                            const std::vector<std::string>& columns) {
    // Schema-level categorical columns only. Score columns are categorical over
    // their raw tokens here, not the numeric encode_score path.
    std::vector<std::string> fields;
    for (const auto& col : columns) {
        if (col != "p1_score" && col != "p2_score" && !is_categorical_field(col)) {
            throw DataError("unknown or non-categorical column '" + col + "'");
        }
        fields.push_back(col);
    }

    FeatureTable table;
    table.input_rows = dataset.records.size();
    struct Plan {
        std::string source;
        std::function<std::optional<std::string>(const PointRecord&)> get;
        std::vector<std::string> levels;  // observed, sorted
    };
    std::vector<Plan> plans;
    for (const auto& col : fields) {
        Plan p;
        p.source = col;
        if (col == "p1_score") {
            p.get = [](const PointRecord& r) -> std::optional<std::string> {
                return r.p1_score;
            };
        } else if (col == "p2_score") {
            p.get = [](const PointRecord& r) -> std::optional<std::string> {
                return r.p2_score;
            };
        } else {
            const FieldDef& def = field_defs().at(col);
            p.get = def.cat;
        }
        std::set<std::string> levels;
        for (const auto& rec : dataset.records) {
            if (auto v = p.get(rec)) levels.insert(*v);
        }
        p.levels.assign(levels.begin(), levels.end());
        if (p.levels.size() <= 1) {
            table.warnings.push_back("column '" + col +
                                     "' has a single observed level; no indicators emitted");
        }
        plans.push_back(std::move(p));
    }

    for (const auto& p : plans) {
        for (std::size_t k = 1; k < p.levels.size(); ++k) {
            FeatureColumn col;
            col.name = p.source + "=" + p.levels[k];
            col.source = p.source;
            col.origin = ColumnOrigin::OneHot;
            col.level = p.levels[k];
            table.columns.push_back(col);
        }
    }

    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const PointRecord& rec = dataset.records[i];
        std::vector<double> row;
        row.reserve(table.columns.size());
        bool complete = true;
        for (const auto& p : plans) {
            const auto v = p.get(rec);
            if (!v) {
                complete = false;
            }
            for (std::size_t k = 1; k < p.levels.size(); ++k) {
                row.push_back(v && *v == p.levels[k] ? 1.0 : v ? 0.0 : std::nan(""));
            }
        }
        if (!complete) {
            ++table.masked_rows;
            continue;
        }
        table.rows.push_back(std::move(row));
        table.source_rows.push_back(i);
    }
    return table;
}

std::vector<int> point_labels(const MatchDataset& dataset, int player) {
    std::vector<int> labels;
    labels.reserve(dataset.records.size());
    for (const auto& rec : dataset.records) {
        labels.push_back(rec.point_victor == player ? 1 : 0);
    }
    return labels;
}

std::vector<int> point_labels(const MatchDataset& dataset,
                              const std::vector<int>& player_side) {
    if (player_side.size() != dataset.records.size()) {
        throw DataError("player_side size does not match record count");
    }
    std::vector<int> labels;
    labels.reserve(dataset.records.size());
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        labels.push_back(dataset.records[i].point_victor == player_side[i] ? 1 : 0);
    }
    return labels;
}

int resolve_player(const MatchInfo& match, const std::string& selector) {
    if (selector == "1") return 1;
    if (selector == "2") return 2;
    if (selector == match.player1) return 1;
    if (selector == match.player2) return 2;
    throw DataError("player '" + selector + "' not found in match '" + match.match_id +
                    "' (" + match.player1 + " vs " + match.player2 + ")");
}

int resolve_player(const MatchDataset& dataset, const std::string& selector) {
    if (dataset.match_index.empty()) {
        throw DataError("empty dataset: cannot resolve player");
    }
    int side = 0;
    for (const auto& match : dataset.match_index) {
        const int s = resolve_player(match, selector);
        if (side == 0) {
            side = s;
        } else if (side != s) {
            throw DataError("player '" + selector +
                            "' is on different sides across matches; select per match");
        }
    }
    return side;
}

}  // namespace momentum::ingest
