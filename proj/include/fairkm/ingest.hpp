#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "fairkm/csv.hpp"
#include "fairkm/matrix.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/schema.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

/// A fully preprocessed dataset: standardized / one-hot features plus the
/// sensitive-group labels.
struct ProcessedDataset {
    Matrix data;
    GroupLabels labels;
    std::vector<std::string> feature_names;
    std::size_t rows_dropped = 0;

    std::vector<std::int64_t> group_counts() const {
        std::vector<std::int64_t> counts(labels.group_count(), 0);
        for (int s : labels.group_of) ++counts[s];
        return counts;
    }
};

/// Shift to zero mean and scale to unit population variance.
inline std::vector<double> standardize(const std::vector<double>& column,
                                       const std::string& name = "") {
    const double n = static_cast<double>(column.size());
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= n;
    double variance = 0.0;
    for (double v : column) variance += (v - mean) * (v - mean);
    variance /= n;
    if (!(variance > 0.0)) {
        throw PreprocessError("column " + (name.empty() ? "<anonymous>" : name) +
                              " has zero variance");
    }
    const double scale = 1.0 / std::sqrt(variance);
    std::vector<double> out(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - mean) * scale;
    return out;
}

/// One binary column per distinct category, ordered lexicographically.
struct OneHot {
    std::vector<std::string> categories;
    std::vector<std::vector<double>> columns;  // categories x rows
};

inline OneHot one_hot(const std::vector<std::string>& column) {
    OneHot out;
    out.categories = column;
    std::sort(out.categories.begin(), out.categories.end());
    out.categories.erase(std::unique(out.categories.begin(), out.categories.end()),
                         out.categories.end());
    out.columns.assign(out.categories.size(), std::vector<double>(column.size(), 0.0));
    for (std::size_t i = 0; i < column.size(); ++i) {
        const auto it =
            std::lower_bound(out.categories.begin(), out.categories.end(), column[i]);
        out.columns[static_cast<std::size_t>(it - out.categories.begin())][i] = 1.0;
    }
    return out;
}

namespace detail {

inline double parse_number(const std::string& field, const std::string& column,
                           std::size_t row) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw PreprocessError("column " + column + ", row " + std::to_string(row) +
                              ": cannot parse number from '" + field + "'");
    }
    return value;
}

}  // namespace detail

/// Load and preprocess a CSV under a schema: rows carrying the missing-value
/// token in any used column are dropped, continuous features standardized,
/// categorical features one-hot encoded, and the sensitive column mapped to
/// group indices ordered by name.
inline ProcessedDataset load_csv(const std::filesystem::path& path,
                                 const DatasetSchema& schema) {
    schema.validate();
    const CsvTable table = read_csv(path);

    // Schema columns must all exist in the file.
    std::vector<std::size_t> column_index(schema.columns.size());
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
        const auto it =
            std::find(table.header.begin(), table.header.end(), schema.columns[i].name);
        if (it == table.header.end()) {
            throw SchemaError("schema column " + schema.columns[i].name + " not found in " +
                              path.string());
        }
        column_index[i] = static_cast<std::size_t>(it - table.header.begin());
    }

    // Used columns in file order (continuous / categorical / sensitive).
    struct Used {
        std::size_t file_index;
        ColumnRole role;
        std::string name;
    };
    std::vector<Used> used;
    for (std::size_t f = 0; f < table.header.size(); ++f) {
        for (std::size_t i = 0; i < schema.columns.size(); ++i) {
            if (column_index[i] != f || schema.columns[i].role == ColumnRole::drop) continue;
            used.push_back({f, schema.columns[i].role, schema.columns[i].name});
        }
    }

    std::vector<std::size_t> keep;
    keep.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        bool missing = false;
        for (const auto& column : used) {
            if (table.rows[r][column.file_index] == schema.missing_token) {
                missing = true;
                break;
            }
        }
        if (!missing) keep.push_back(r);
    }
    if (keep.empty()) throw PreprocessError("no rows left after dropping missing values");

    ProcessedDataset out;
    out.rows_dropped = table.rows.size() - keep.size();

    // Sensitive column first: group names sorted for a stable index order.
    std::vector<std::vector<double>> feature_columns;
    for (const auto& column : used) {
        if (column.role != ColumnRole::sensitive) continue;
        std::vector<std::string> raw(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            raw[i] = table.rows[keep[i]][column.file_index];
        }
        std::vector<std::string> names = raw;
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        if (names.size() < 2) {
            throw DegenerateGroupError("sensitive column " + column.name +
                                       " has fewer than two distinct values");
        }
        out.labels.names = names;
        out.labels.group_of.resize(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const auto it = std::lower_bound(names.begin(), names.end(), raw[i]);
            out.labels.group_of[i] = static_cast<int>(it - names.begin());
        }
    }

    for (const auto& column : used) {
        if (column.role == ColumnRole::continuous_feature) {
            std::vector<double> values(keep.size());
            for (std::size_t i = 0; i < keep.size(); ++i) {
                values[i] =
                    detail::parse_number(table.rows[keep[i]][column.file_index], column.name, i);
            }
            feature_columns.push_back(standardize(values, column.name));
            out.feature_names.push_back(column.name);
        } else if (column.role == ColumnRole::categorical_feature) {
            // Categories come from every raw row (missing token aside), so a
            // category whose rows were all dropped still contributes an
            // (all-zero) column; this is what reproduces the reference
            // dataset shapes exactly.
            std::vector<std::string> categories;
            categories.reserve(table.rows.size());
            for (const auto& row : table.rows) {
                if (row[column.file_index] != schema.missing_token) {
                    categories.push_back(row[column.file_index]);
                }
            }
            std::sort(categories.begin(), categories.end());
            categories.erase(std::unique(categories.begin(), categories.end()),
                             categories.end());

            std::vector<std::vector<double>> columns(categories.size(),
                                                     std::vector<double>(keep.size(), 0.0));
            for (std::size_t i = 0; i < keep.size(); ++i) {
                const auto& value = table.rows[keep[i]][column.file_index];
                const auto it = std::lower_bound(categories.begin(), categories.end(), value);
                columns[static_cast<std::size_t>(it - categories.begin())][i] = 1.0;
            }
            for (std::size_t c = 0; c < categories.size(); ++c) {
                feature_columns.push_back(std::move(columns[c]));
                out.feature_names.push_back(column.name + "=" + categories[c]);
            }
        }
    }

    out.data = Matrix(keep.size(), feature_columns.size());
    for (std::size_t j = 0; j < feature_columns.size(); ++j) {
        for (std::size_t i = 0; i < keep.size(); ++i) {
            out.data(i, j) = feature_columns[j][i];
        }
    }
    return out;
}

/// Audit dump: the processed feature matrix plus the group name per row.
inline void write_processed_csv(const ProcessedDataset& dataset,
                                const std::filesystem::path& path) {
    CsvWriter writer(path);
    std::vector<std::string> header = dataset.feature_names;
    header.push_back("group");
    writer.row(header);
    for (std::size_t i = 0; i < dataset.data.rows(); ++i) {
        std::vector<std::string> fields;
        fields.reserve(header.size());
        for (std::size_t j = 0; j < dataset.data.cols(); ++j) {
            fields.push_back(format_double(dataset.data(i, j)));
        }
        fields.push_back(dataset.labels.names[dataset.labels.group_of[i]]);
        writer.row(fields);
    }
}

}  // namespace fairkm
