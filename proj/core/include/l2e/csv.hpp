#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "l2e/model.hpp"

namespace l2e {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of the named column; throws InvalidArgument if absent.
    std::size_t column(const std::string& name) const;
};

/// Reads comma-separated text with a header row. Quoted fields may contain commas,
/// doubled quotes and newlines. Ragged rows and unterminated quotes throw
/// InvalidArgument naming the line. Blank lines are skipped.
CsvTable read_csv(std::istream& in);

/// Response from column `response`; every other column becomes a predictor, in
/// file order. With add_intercept a leading column of ones is prepended.
/// Non-numeric or non-finite cells throw InvalidArgument.
Dataset dataset_from_csv(const CsvTable& table, const std::string& response, bool add_intercept);

/// Parses a full-string double ("1e3", "-0.5"); throws InvalidArgument otherwise.
double parse_double(const std::string& text, const std::string& what);

} // namespace l2e
