#pragma once

// Minimal delimited-text reader: one header row, string cells, RFC 4180
// style quoting ("" escapes a quote inside a quoted cell). Cells cannot span
// lines; the microdata and benchmark files never need that.

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "ultisim/errors.hpp"

namespace ultisim {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    }
};

namespace detail {

inline std::vector<std::string> split_record(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    bool cell_started = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"' && !cell_started) {
            quoted = true;
            cell_started = true;
        } else if (c == delim) {
            cells.push_back(std::move(cell));
            cell.clear();
            cell_started = false;
        } else {
            cell += c;
            cell_started = true;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

}  // namespace detail

// Reads header + rows. Enforces a uniform cell count against the header;
// blank lines are skipped. Row numbers in errors are 1-based data rows.
inline CsvTable read_delimited(std::istream& in, char delim = ',') {
    CsvTable table;
    std::string line;
    bool saw_header = false;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = detail::split_record(line, delim);
        if (!saw_header) {
            table.header = std::move(cells);
            saw_header = true;
            continue;
        }
        ++data_row;
        if (cells.size() != table.header.size()) {
            throw SchemaError("row " + std::to_string(data_row) + ": expected " +
                              std::to_string(table.header.size()) + " cells, got " +
                              std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!saw_header) throw SchemaError("empty file: no header row");
    return table;
}

inline CsvTable read_delimited_file(const std::string& path, char delim = ',') {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_delimited(in, delim);
}

// Integer stream: one value per line, blank lines skipped. A non-numeric
// first line is treated as a single-column CSV header; anywhere else it is
// an error. Used for offer lists and the human proposer benchmark.
inline std::vector<int> load_offers(std::istream& in) {
    std::vector<int> offers;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int value = 0;
        const char* first = line.data();
        const char* last = line.data() + line.size();
        auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc{} || res.ptr != last) {
            if (first_content_line) {
                first_content_line = false;  // header row of a one-column CSV
                continue;
            }
            throw SchemaError("offers line " + std::to_string(line_no) + ": not an integer: \"" +
                              line + "\"");
        }
        first_content_line = false;
        offers.push_back(value);
    }
    return offers;
}

inline std::vector<int> load_offers_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return load_offers(in);
}

}  // namespace ultisim
