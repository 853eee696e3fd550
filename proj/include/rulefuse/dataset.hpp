#ifndef RULEFUSE_DATASET_HPP
#define RULEFUSE_DATASET_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "rulefuse/schema.hpp"

namespace rulefuse {

using Value = std::variant<double, std::string>;

// Immutable tabular dataset: N rows of feature values plus a {0,1} label per
// row (1 = churn). Cells are stored row-major.
class Dataset {
public:
    Dataset() = default;
    Dataset(FeatureSchema schema, std::vector<Value> cells, std::vector<int> labels);

    std::size_t n_rows() const { return labels_.size(); }
    std::size_t n_features() const { return schema_.features.size(); }
    const FeatureSchema& schema() const { return schema_; }
    const std::vector<int>& labels() const { return labels_; }

    const Value& cell(std::size_t row, std::size_t feature) const {
        return cells_[row * n_features() + feature];
    }
    double numeric_at(std::size_t row, std::size_t feature) const {
        return std::get<double>(cell(row, feature));
    }
    const std::string& categorical_at(std::size_t row, std::size_t feature) const {
        return std::get<std::string>(cell(row, feature));
    }

    // -1 when absent.
    int feature_index(const std::string& name) const { return schema_.feature_index(name); }

    std::size_t churn_count() const;

    // New dataset holding the given rows, in the given order.
    Dataset select(const std::vector<std::size_t>& rows) const;

private:
    FeatureSchema schema_;
    std::vector<Value> cells_;
    std::vector<int> labels_;
};

// Loads an RFC 4180 CSV with a header row. Columns listed in
// schema.id_columns are dropped; the label column must hold literal "0"/"1".
Dataset load_csv(const std::string& path, const FeatureSchema& schema);

// Same, from an in-memory CSV body (used by tests).
Dataset load_csv_text(const std::string& content, const FeatureSchema& schema);

// Seeded stratified split. Per-label test counts are rounded to nearest;
// both sides keep the original row order. Throws DataError when either side
// would be empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace rulefuse

#endif
