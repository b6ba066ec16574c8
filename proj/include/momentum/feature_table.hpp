#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace momentum {

enum class ColumnOrigin { Raw, Ordinal, OneHot };

struct FeatureColumn {
    std::string name;    // e.g. "p1_distance_run", "serve_width=C"
    std::string source;  // schema column the values came from
    ColumnOrigin origin = ColumnOrigin::Raw;
    std::string level;   // one-hot level; empty otherwise
};

// Row-aligned numeric matrix with per-column provenance. Missing entries are
// stored as NaN; builders that require complete rows drop them up front and
// record the count, so masked_rows + rows.size() == input_rows always holds.
struct FeatureTable {
    std::vector<FeatureColumn> columns;
    std::vector<std::vector<double>> rows;  // rows[i].size() == columns.size()
    std::vector<std::size_t> source_rows;   // index into the source dataset, per row
    std::size_t input_rows = 0;
    std::size_t masked_rows = 0;
    std::vector<std::string> warnings;

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return columns.size(); }

    std::optional<std::size_t> column_index(const std::string& name) const {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (columns[j].name == name) return j;
        }
        return std::nullopt;
    }

    static bool is_missing(double v) { return std::isnan(v); }

    bool row_complete(std::size_t i) const {
        for (double v : rows[i]) {
            if (std::isnan(v)) return false;
        }
        return true;
    }
};

}  // namespace momentum
