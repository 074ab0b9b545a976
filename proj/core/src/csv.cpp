#include "l2e/csv.hpp"

#include <cmath>
#include <istream>

#include "l2e/error.hpp"

namespace l2e {

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return j;
    throw InvalidArgument("csv: no column named '" + name + "'");
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace

CsvTable read_csv(std::istream& in)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_line;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    bool record_has_content = false;
    std::size_t line = 1;
    std::size_t start_line = 1;

    auto end_field = [&] {
        record.push_back(field_was_quoted ? field : trim(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = !record_has_content && record.size() == 1 && record[0].empty();
        if (!blank) {
            records.push_back(std::move(record));
            record_line.push_back(start_line);
        }
        record.clear();
        record_has_content = false;
    };

    char c = 0;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (record.empty() && field.empty() && !record_has_content) start_line = line;
        switch (c) {
        case '"':
            if (!trim(field).empty())
                throw InvalidArgument("csv: line " + std::to_string(line) + ": quote inside unquoted field");
            field.clear();
            quoted = true;
            field_was_quoted = true;
            record_has_content = true;
            break;
        case ',':
            end_field();
            record_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            break;
        default:
            if (field_was_quoted && c != ' ' && c != '\t')
                throw InvalidArgument("csv: line " + std::to_string(line) + ": text after closing quote");
            if (!field_was_quoted) field += c;
            if (c != ' ' && c != '\t') record_has_content = true;
        }
    }
    if (quoted) throw InvalidArgument("csv: line " + std::to_string(start_line) + ": unterminated quoted field");
    if (record_has_content || !field.empty() || !record.empty()) end_record();

    if (records.empty()) throw InvalidArgument("csv: input is empty");
    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != t.header.size()) {
            throw InvalidArgument("csv: line " + std::to_string(record_line[i]) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, found " +
                                  std::to_string(records[i].size()));
        }
        t.rows.push_back(std::move(records[i]));
    }
    return t;
}

double parse_double(const std::string& text, const std::string& what)
{
    const std::string s = trim(text);
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument(what + ": '" + text + "' is not a number");
    }
    if (pos != s.size()) throw InvalidArgument(what + ": '" + text + "' is not a number");
    return v;
}

Dataset dataset_from_csv(const CsvTable& table, const std::string& response, bool add_intercept)
{
    if (table.rows.empty()) throw InvalidArgument("csv: no data rows");
    const std::size_t resp = table.column(response);
    const auto n = static_cast<Index>(table.rows.size());
    const auto n_pred = static_cast<Index>(table.header.size()) - 1;
    const Index p = n_pred + (add_intercept ? 1 : 0);
    if (p < 1) throw InvalidArgument("csv: no predictor columns (use an intercept or an identity design)");

    VectorXd y(n);
    MatrixXd X(n, p);
    for (Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        Index col = 0;
        if (add_intercept) X(i, col++) = 1.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const std::string where = "csv row " + std::to_string(i + 1) + ", column '" + table.header[j] + "'";
            const double v = parse_double(row[j], where);
            if (!std::isfinite(v)) throw InvalidArgument(where + ": value is not finite");
            if (j == resp) y[i] = v;
            else X(i, col++) = v;
        }
    }
    return Dataset(std::move(y), std::move(X));
}

} // namespace l2e
