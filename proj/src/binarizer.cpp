#include "rulefuse/binarizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rulefuse/error.hpp"

namespace rulefuse {

namespace {

// Linear-interpolation quantile of sorted values at fraction q in [0,1].
double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void check_schema_match(const FeatureSchema& fitted, const FeatureSchema& given) {
    for (const auto& f : fitted.features) {
        const int idx = given.feature_index(f.name);
        if (idx < 0) throw SchemaError("dataset is missing fitted feature: " + f.name);
        if (given.features[static_cast<std::size_t>(idx)].kind != f.kind) {
            throw SchemaError("feature kind mismatch: " + f.name);
        }
    }
}

}  // namespace

BinarizerModel fit_binarizer(const Dataset& ds, int n_quantiles) {
    if (n_quantiles < 1) throw ConfigError("n_quantiles must be >= 1");
    if (ds.n_rows() == 0) throw DataError("cannot fit binarizer on an empty dataset");

    BinarizerModel model;
    model.schema = ds.schema();

    for (std::size_t f = 0; f < ds.n_features(); ++f) {
        const auto& name = ds.schema().features[f].name;
        if (ds.schema().is_numeric(f)) {
            std::vector<double> values(ds.n_rows());
            for (std::size_t r = 0; r < ds.n_rows(); ++r) values[r] = ds.numeric_at(r, f);
            std::sort(values.begin(), values.end());
            const double max_value = values.back();

            std::vector<double> ts;
            for (int k = 1; k <= n_quantiles; ++k) {
                const double t = quantile(values, static_cast<double>(k) / (n_quantiles + 1));
                // t >= max would give an all-ones <= column; constants drop out here
                if (t >= max_value) continue;
                if (ts.empty() || t != ts.back()) ts.push_back(t);
            }
            model.thresholds[name] = ts;
            for (double t : ts) {
                model.column_layout.push_back({name, Comparator::le, t, ""});
                model.column_layout.push_back({name, Comparator::gt, t, ""});
            }
        } else {
            std::set<std::string> vocab;
            for (std::size_t r = 0; r < ds.n_rows(); ++r) vocab.insert(ds.categorical_at(r, f));
            auto& cats = model.categories[name];
            cats.assign(vocab.begin(), vocab.end());
            for (const auto& c : cats) {
                model.column_layout.push_back({name, Comparator::eq, 0.0, c});
                model.column_layout.push_back({name, Comparator::ne, 0.0, c});
            }
        }
    }
    return model;
}

BinarizedMatrix binarize(const BinarizerModel& model, const Dataset& ds) {
    check_schema_match(model.schema, ds.schema());

    BinarizedMatrix bm;
    bm.columns = model.column_layout;
    bm.n_rows = ds.n_rows();
    bm.bits.resize(bm.n_rows * bm.n_cols());

    const std::size_t m = bm.n_cols();
    std::vector<std::size_t> feature_of(m);
    for (std::size_t c = 0; c < m; ++c) {
        feature_of[c] = static_cast<std::size_t>(ds.feature_index(bm.columns[c].feature));
    }
    for (std::size_t r = 0; r < bm.n_rows; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            const auto& p = bm.columns[c];
            const std::size_t f = feature_of[c];
            bool v;
            if (p.is_numeric_op()) {
                const double x = ds.numeric_at(r, f);
                v = p.op == Comparator::le ? x <= p.threshold : x > p.threshold;
            } else {
                const std::string& x = ds.categorical_at(r, f);
                v = p.op == Comparator::eq ? x == p.category : x != p.category;
            }
            bm.bits[r * m + c] = v ? 1 : 0;
        }
    }
    return bm;
}

std::vector<std::uint8_t> binarize_row(const BinarizerModel& model, const Dataset& ds, std::size_t row) {
    check_schema_match(model.schema, ds.schema());
    std::vector<std::uint8_t> bits(model.column_layout.size());
    for (std::size_t c = 0; c < model.column_layout.size(); ++c) {
        bits[c] = eval_predicate(model.column_layout[c], ds, row) ? 1 : 0;
    }
    return bits;
}

std::vector<std::uint32_t> BinarizedMatrix::column_indices(std::size_t col) const {
    std::vector<std::uint32_t> idx;
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (bit(r, col)) idx.push_back(static_cast<std::uint32_t>(r));
    }
    return idx;
}

namespace {

nlohmann::json predicate_to_json(const AtomicPredicate& p) {
    nlohmann::json j;
    j["feature"] = p.feature;
    j["op"] = comparator_token(p.op);
    if (p.is_numeric_op()) j["threshold"] = p.threshold;
    else j["category"] = p.category;
    return j;
}

AtomicPredicate predicate_from_json(const nlohmann::json& j) {
    AtomicPredicate p;
    p.feature = j.at("feature").get<std::string>();
    const std::string op = j.at("op").get<std::string>();
    if (op == "<=") p.op = Comparator::le;
    else if (op == ">") p.op = Comparator::gt;
    else if (op == "==") p.op = Comparator::eq;
    else if (op == "!=") p.op = Comparator::ne;
    else throw ParseError("unknown comparator in serialized predicate: " + op);
    if (p.is_numeric_op()) p.threshold = j.at("threshold").get<double>();
    else p.category = j.at("category").get<std::string>();
    return p;
}

}  // namespace

nlohmann::json BinarizerModel::to_json() const {
    nlohmann::json features = nlohmann::json::object();
    for (const auto& [name, ts] : thresholds) features[name] = {{"thresholds", ts}};
    for (const auto& [name, cats] : categories) features[name] = {{"categories", cats}};

    auto layout = nlohmann::json::array();
    for (const auto& p : column_layout) layout.push_back(predicate_to_json(p));

    nlohmann::json j;
    j["schema"] = schema.to_json();
    j["features"] = features;
    j["column_layout"] = layout;
    return j;
}

BinarizerModel BinarizerModel::from_json(const nlohmann::json& j) {
    BinarizerModel m;
    m.schema = FeatureSchema::from_json(j.at("schema"));
    for (const auto& [name, spec] : j.at("features").items()) {
        if (spec.contains("thresholds")) {
            m.thresholds[name] = spec["thresholds"].get<std::vector<double>>();
        } else {
            m.categories[name] = spec["categories"].get<std::vector<std::string>>();
        }
    }
    for (const auto& pj : j.at("column_layout")) {
        m.column_layout.push_back(predicate_from_json(pj));
    }
    return m;
}

}  // namespace rulefuse
