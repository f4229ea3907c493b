#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairkm/errors.hpp"

namespace fairkm {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

// One record, honoring quoted fields with "" escapes; quoted fields may span
// physical lines. Unquoted fields are trimmed of surrounding blanks so
// comma-space separated files parse cleanly.
inline bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in, line)) return false;

    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    std::size_t pos = 0;
    auto flush = [&]() {
        fields.push_back(field_was_quoted ? field : trim(field));
        field.clear();
        field_was_quoted = false;
    };
    while (true) {
        if (pos == line.size()) {
            if (quoted) {
                if (!std::getline(in, line)) {
                    throw PreprocessError("unterminated quoted field at end of file");
                }
                field += '\n';
                pos = 0;
                continue;
            }
            break;
        }
        const char c = line[pos++];
        if (quoted) {
            if (c == '"') {
                if (pos < line.size() && line[pos] == '"') {
                    field += '"';
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty()) {
            quoted = true;
            field_was_quoted = true;
            field.clear();
        } else if (c == ',') {
            flush();
        } else {
            field += c;
        }
    }
    flush();
    return true;
}

}  // namespace detail

/// Read a whole CSV file with a header row. Blank lines are skipped; every
/// data row must have as many fields as the header.
inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    CsvTable table;
    if (!detail::read_record(in, table.header) || table.header.empty()) {
        throw PreprocessError("empty CSV file: " + path.string());
    }
    std::vector<std::string> fields;
    std::size_t line_no = 1;
    while (detail::read_record(in, fields)) {
        ++line_no;
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != table.header.size()) {
            throw PreprocessError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        }
        table.rows.push_back(fields);
    }
    return table;
}

/// Quote a field only when it needs it.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw IoError("cannot write " + path.string());
    }

    void raw_row(const std::string& line) { out_ << line << "\n"; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_escape(fields[i]);
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

}  // namespace fairkm
