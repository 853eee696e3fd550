#ifndef RULEFUSE_SCHEMA_HPP
#define RULEFUSE_SCHEMA_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace rulefuse {

enum class FeatureKind { numeric, categorical };

// Column roles for a tabular dataset. Feature order is load order from the
// sidecar: numeric entries first, then categorical entries.
struct FeatureSchema {
    struct Feature {
        std::string name;
        FeatureKind kind;
    };

    std::vector<Feature> features;
    std::string label_column;
    std::vector<std::string> id_columns;

    // Throws SchemaError on duplicate/empty names or label listed as id.
    void validate() const;

    // -1 when the feature does not exist.
    int feature_index(const std::string& name) const;

    bool is_numeric(std::size_t idx) const { return features[idx].kind == FeatureKind::numeric; }

    // Sidecar format: { "label": str, "ids": [str], "numeric": [str], "categorical": [str] }
    static FeatureSchema from_json(const nlohmann::json& j);
    static FeatureSchema load(const std::string& path);
    nlohmann::json to_json() const;
};

}  // namespace rulefuse

#endif
