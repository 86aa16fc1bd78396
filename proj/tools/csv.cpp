#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace darklattice::cli {

std::string format_cell(const Cell& c)
{
    if (const double* d = std::get_if<double>(&c)) {
        if (std::isnan(*d))
            return "nan";
        if (std::isinf(*d))
            return *d > 0 ? "inf" : "-inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const long* l = std::get_if<long>(&c))
        return std::to_string(*l);
    return std::get<std::string>(c);
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

void CsvTable::meta(const std::string& key, double value) { meta_.emplace_back(key, format_cell(value)); }

void CsvTable::add_row(std::vector<Cell> row)
{
    if (row.size() != columns_.size())
        throw std::logic_error("csv row width does not match the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::ostringstream out;
    for (const auto& [k, v] : meta_)
        out << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i)
        out << (i ? "," : "") << columns_[i];
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_cell(row[i]);
        out << '\n';
    }
    return out.str();
}

void CsvTable::save(const std::string& path) const { write_text(path, str()); }

void write_text(const std::string& path, const std::string& text)
{
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    if (!f)
        throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace darklattice::cli
