#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fairkm/errors.hpp"

namespace fairkm {

enum class ColumnRole {
    continuous_feature,
    categorical_feature,
    sensitive,
    drop,
};

/// Declarative description of how to ingest a CSV: a role per column plus the
/// token marking missing values. Columns not listed are dropped.
struct DatasetSchema {
    struct Column {
        std::string name;
        ColumnRole role;
    };
    std::vector<Column> columns;
    std::string missing_token = "?";

    const Column* find(const std::string& name) const {
        for (const auto& column : columns) {
            if (column.name == name) return &column;
        }
        return nullptr;
    }

    std::string sensitive_column() const {
        std::string found;
        for (const auto& column : columns) {
            if (column.role != ColumnRole::sensitive) continue;
            if (!found.empty()) throw SchemaError("schema has more than one sensitive column");
            found = column.name;
        }
        if (found.empty()) throw SchemaError("schema has no sensitive column");
        return found;
    }

    std::size_t feature_count() const {
        std::size_t n = 0;
        for (const auto& column : columns) {
            if (column.role == ColumnRole::continuous_feature ||
                column.role == ColumnRole::categorical_feature) {
                ++n;
            }
        }
        return n;
    }

    /// Same schema with `name` as the sensitive column; whichever column was
    /// sensitive before is dropped. `name` must already be listed.
    DatasetSchema with_sensitive(const std::string& name) const {
        DatasetSchema out = *this;
        bool found = false;
        for (auto& column : out.columns) {
            if (column.role == ColumnRole::sensitive) column.role = ColumnRole::drop;
            if (column.name == name) {
                column.role = ColumnRole::sensitive;
                found = true;
            }
        }
        if (!found) throw SchemaError("schema has no column named " + name);
        return out;
    }

    void validate() const {
        sensitive_column();
        if (feature_count() == 0) throw SchemaError("schema has no feature columns");
        for (std::size_t i = 0; i < columns.size(); ++i) {
            for (std::size_t j = i + 1; j < columns.size(); ++j) {
                if (columns[i].name == columns[j].name) {
                    throw SchemaError("schema lists column " + columns[i].name + " twice");
                }
            }
        }
    }
};

inline ColumnRole parse_role(const std::string& word) {
    if (word == "continuous" || word == "continuous_feature") return ColumnRole::continuous_feature;
    if (word == "categorical" || word == "categorical_feature") {
        return ColumnRole::categorical_feature;
    }
    if (word == "sensitive") return ColumnRole::sensitive;
    if (word == "drop") return ColumnRole::drop;
    throw SchemaError("unknown column role: " + word);
}

inline const char* role_name(ColumnRole role) {
    switch (role) {
        case ColumnRole::continuous_feature: return "continuous";
        case ColumnRole::categorical_feature: return "categorical";
        case ColumnRole::sensitive: return "sensitive";
        case ColumnRole::drop: return "drop";
    }
    return "?";
}

/// Parse the plain-text schema format:
///   # comment
///   missing <token>
///   column <name> <role>        role: continuous|categorical|sensitive|drop
inline DatasetSchema parse_schema(std::istream& in, const std::string& origin) {
    DatasetSchema schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream words(line);
        std::string head;
        if (!(words >> head) || head[0] == '#') continue;
        if (head == "missing") {
            if (!(words >> schema.missing_token)) {
                throw SchemaError(origin + ":" + std::to_string(line_no) +
                                  ": missing directive needs a token");
            }
        } else if (head == "column") {
            std::string name, role;
            if (!(words >> name >> role)) {
                throw SchemaError(origin + ":" + std::to_string(line_no) +
                                  ": column directive needs a name and a role");
            }
            schema.columns.push_back({name, parse_role(role)});
        } else {
            throw SchemaError(origin + ":" + std::to_string(line_no) + ": unknown directive " +
                              head);
        }
    }
    schema.validate();
    return schema;
}

inline DatasetSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file " + path.string());
    return parse_schema(in, path.string());
}

/// Preprocessing presets for the two reference datasets. "adult" keeps the
/// six census features with sex sensitive (switch to race via
/// with_sensitive); "creditcard" keeps the billing features with SEX
/// sensitive and the repayment-status codes one-hot encoded.
inline DatasetSchema preset_schema(const std::string& name) {
    using enum ColumnRole;
    if (name == "adult") {
        DatasetSchema schema;
        schema.missing_token = "?";
        schema.columns = {
            {"workclass", categorical_feature},
            {"fnlwgt", drop},
            {"education", drop},
            {"education-num", continuous_feature},
            {"occupation", categorical_feature},
            {"capital-gain", continuous_feature},
            {"capital-loss", continuous_feature},
            {"hours-per-week", continuous_feature},
            {"sex", sensitive},
            {"race", drop},
        };
        return schema;
    }
    if (name == "creditcard") {
        DatasetSchema schema;
        schema.missing_token = "?";
        schema.columns = {
            {"LIMIT_BAL", continuous_feature}, {"SEX", sensitive},
            {"PAY_0", categorical_feature},    {"PAY_2", categorical_feature},
            {"PAY_3", categorical_feature},    {"PAY_4", categorical_feature},
            {"PAY_5", categorical_feature},    {"PAY_6", categorical_feature},
            {"BILL_AMT1", continuous_feature}, {"BILL_AMT2", continuous_feature},
            {"BILL_AMT3", continuous_feature}, {"BILL_AMT4", continuous_feature},
            {"BILL_AMT5", continuous_feature}, {"BILL_AMT6", continuous_feature},
            {"PAY_AMT1", continuous_feature},  {"PAY_AMT2", continuous_feature},
            {"PAY_AMT3", continuous_feature},  {"PAY_AMT4", continuous_feature},
            {"PAY_AMT5", continuous_feature},  {"PAY_AMT6", continuous_feature},
        };
        return schema;
    }
    throw SchemaError("unknown schema preset: " + name);
}

/// Resolve a --schema argument: a preset name first, then a file path.
inline DatasetSchema resolve_schema(const std::string& ref) {
    if (ref == "adult" || ref == "creditcard") return preset_schema(ref);
    return load_schema(ref);
}

}  // namespace fairkm
