#ifndef RULEFUSE_BINARIZER_HPP
#define RULEFUSE_BINARIZER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rulefuse/dataset.hpp"
#include "rulefuse/predicate.hpp"

namespace rulefuse {

// Encodes raw features as atomic propositions and their negations. Each
// numeric threshold t yields the complementary pair (f <= t, f > t); each
// category c yields (f == c, f != c).
struct BinarizerModel {
    FeatureSchema schema;
    // feature name -> sorted deduplicated thresholds (numeric features)
    std::map<std::string, std::vector<double>> thresholds;
    // feature name -> sorted category vocabulary (categorical features)
    std::map<std::string, std::vector<std::string>> categories;
    // deterministic order: schema feature order, thresholds ascending
    // (<= before >), categories lexicographic (== before !=)
    std::vector<AtomicPredicate> column_layout;

    nlohmann::json to_json() const;
    static BinarizerModel from_json(const nlohmann::json& j);
};

struct BinarizedMatrix {
    std::vector<AtomicPredicate> columns;
    std::size_t n_rows = 0;
    std::vector<std::uint8_t> bits;  // row-major, n_rows x columns.size()

    std::size_t n_cols() const { return columns.size(); }
    bool bit(std::size_t row, std::size_t col) const { return bits[row * n_cols() + col] != 0; }

    // Row indices where the column bit is set.
    std::vector<std::uint32_t> column_indices(std::size_t col) const;
};

// Derives thresholds as the n_quantiles internal quantiles of each numeric
// feature (linear interpolation), deduplicated; thresholds that fail to split
// the observed values are dropped, so constant features emit no columns.
BinarizerModel fit_binarizer(const Dataset& ds, int n_quantiles);

// bit(i,j) = truth of column predicate j on row i. Categories unseen at fit
// time make every == column false and every != column true.
BinarizedMatrix binarize(const BinarizerModel& model, const Dataset& ds);

// Bits for a single row, in column_layout order.
std::vector<std::uint8_t> binarize_row(const BinarizerModel& model, const Dataset& ds, std::size_t row);

}  // namespace rulefuse

#endif
