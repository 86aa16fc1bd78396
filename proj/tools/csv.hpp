#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace darklattice::cli {

inline constexpr const char* kVersion = "0.4.1";

using Cell = std::variant<double, long, std::string>;

// Floats as %.17g so values round-trip exactly; NaN/inf spelled nan/inf/-inf.
std::string format_cell(const Cell& c);

// Comma-separated table with '#'-prefixed metadata lines above the header.
// Everything is buffered and written in one go by save().
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void meta(const std::string& key, const std::string& value);
    void meta(const std::string& key, double value);
    void add_row(std::vector<Cell> row);

    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void save(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<Cell>> rows_;
};

void write_text(const std::string& path, const std::string& text);

} // namespace darklattice::cli
