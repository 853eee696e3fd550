#include "rulefuse/dataset.hpp"

#include <cmath>
#include <unordered_map>

#include "rulefuse/csv.hpp"
#include "rulefuse/error.hpp"
#include "rulefuse/rng.hpp"
#include "rulefuse/text.hpp"

namespace rulefuse {

Dataset::Dataset(FeatureSchema schema, std::vector<Value> cells, std::vector<int> labels)
    : schema_(std::move(schema)), cells_(std::move(cells)), labels_(std::move(labels)) {
    schema_.validate();
    const std::size_t nf = schema_.features.size();
    if (nf == 0) {
        if (!cells_.empty()) throw DataError("cells present but schema has no features");
    } else if (cells_.size() != labels_.size() * nf) {
        throw DataError("cell count does not match rows x features");
    }
    for (std::size_t r = 0; r < labels_.size(); ++r) {
        if (labels_[r] != 0 && labels_[r] != 1) {
            throw DataError("label outside {0,1} at row " + std::to_string(r));
        }
        for (std::size_t f = 0; f < nf; ++f) {
            const Value& v = cells_[r * nf + f];
            if (schema_.is_numeric(f)) {
                if (!std::isfinite(std::get<double>(v))) {
                    throw DataError("non-finite value in feature " + schema_.features[f].name +
                                    " at row " + std::to_string(r));
                }
            } else if (std::get<std::string>(v).empty()) {
                throw DataError("empty categorical value in feature " + schema_.features[f].name +
                                " at row " + std::to_string(r));
            }
        }
    }
}

std::size_t Dataset::churn_count() const {
    std::size_t c = 0;
    for (int y : labels_) c += static_cast<std::size_t>(y);
    return c;
}

Dataset Dataset::select(const std::vector<std::size_t>& rows) const {
    const std::size_t nf = n_features();
    std::vector<Value> cells;
    cells.reserve(rows.size() * nf);
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) {
        for (std::size_t f = 0; f < nf; ++f) cells.push_back(cell(r, f));
        labels.push_back(labels_[r]);
    }
    return Dataset(schema_, std::move(cells), std::move(labels));
}

namespace {

Dataset build_from_records(const std::vector<std::vector<std::string>>& records,
                           const FeatureSchema& schema) {
    schema.validate();
    if (records.empty()) throw DataError("CSV has no header row");
    const auto& header = records.front();

    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t i = 0; i < header.size(); ++i) col_of[trim(header[i])] = i;

    auto require = [&](const std::string& name) -> std::size_t {
        auto it = col_of.find(name);
        if (it == col_of.end()) throw SchemaError("missing column: " + name);
        return it->second;
    };

    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(schema.features.size());
    for (const auto& f : schema.features) feature_cols.push_back(require(f.name));
    const std::size_t label_col = require(schema.label_column);
    // id columns are dropped, but must exist so a bad sidecar is caught early
    for (const auto& id : schema.id_columns) require(id);

    const std::size_t nf = schema.features.size();
    std::vector<Value> cells;
    cells.reserve((records.size() - 1) * nf);
    std::vector<int> labels;
    labels.reserve(records.size() - 1);

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const std::size_t row_idx = r - 1;
        auto field = [&](std::size_t col) -> const std::string& {
            if (col >= rec.size()) {
                throw ParseError("row " + std::to_string(row_idx) + ": too few fields");
            }
            return rec[col];
        };
        for (std::size_t f = 0; f < nf; ++f) {
            const std::string& raw = field(feature_cols[f]);
            if (schema.is_numeric(f)) {
                auto v = parse_double(raw);
                if (!v) {
                    throw ParseError("row " + std::to_string(row_idx) + ": cannot parse numeric value '" +
                                     raw + "' in column " + schema.features[f].name);
                }
                cells.emplace_back(*v);
            } else {
                cells.emplace_back(trim(raw));
            }
        }
        const std::string label = trim(field(label_col));
        if (label == "0") labels.push_back(0);
        else if (label == "1") labels.push_back(1);
        else {
            throw DataError("row " + std::to_string(row_idx) + ": label value '" + label +
                            "' outside {0,1}");
        }
    }
    return Dataset(schema, std::move(cells), std::move(labels));
}

}  // namespace

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
    return build_from_records(read_csv(path), schema);
}

Dataset load_csv_text(const std::string& content, const FeatureSchema& schema) {
    return build_from_records(parse_csv(content), schema);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0,1)");
    }
    std::vector<std::size_t> by_label[2];
    for (std::size_t r = 0; r < ds.n_rows(); ++r) by_label[ds.labels()[r]].push_back(r);

    Rng rng(seed);
    std::vector<std::size_t> test_rows;
    for (auto& idx : by_label) {
        rng.shuffle(idx);
        const auto want = static_cast<std::size_t>(
            std::llround(static_cast<double>(idx.size()) * test_fraction));
        test_rows.insert(test_rows.end(), idx.begin(), idx.begin() + std::min(want, idx.size()));
    }

    std::vector<bool> in_test(ds.n_rows(), false);
    for (std::size_t r : test_rows) in_test[r] = true;
    std::vector<std::size_t> train_sorted, test_sorted;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        (in_test[r] ? test_sorted : train_sorted).push_back(r);
    }
    if (train_sorted.empty() || test_sorted.empty()) {
        throw DataError("degenerate split: one side is empty");
    }
    return {ds.select(train_sorted), ds.select(test_sorted)};
}

}  // namespace rulefuse
