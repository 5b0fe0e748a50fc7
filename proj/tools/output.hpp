#pragma once

// Table and document writers for the CLI: CSV (schema-versioned, RFC 4180
// quoting) and JSON, written atomically.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fracshrink::cli {

inline constexpr int kCsvSchema = 1;

/// Shortest decimal that round-trips.
std::string format_number(double x);

/// Quotes a field only when it contains a comma, quote or line break.
std::string csv_field(const std::string& raw);

struct CsvTable {
    std::vector<std::string> comments;  // "key=value", written as "# key=value"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    std::string render() const;
};

std::string cell(double x);
std::string cell(const std::optional<double>& x);  // empty when absent

/// JSON value for a number that may be missing or non-finite.
nlohmann::json number_or_null(double x);
nlohmann::json number_or_null(const std::optional<double>& x);

/// Writes via a sibling temporary and rename; empty path means `fallback`.
void write_atomically(const std::string& path, const std::string& content, std::ostream& fallback);

}  // namespace fracshrink::cli
