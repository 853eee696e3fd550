#include "rulefuse/schema.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "rulefuse/error.hpp"

namespace rulefuse {

void FeatureSchema::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& f : features) {
        if (f.name.empty()) throw SchemaError("feature with empty name");
        if (!seen.insert(f.name).second) throw SchemaError("duplicate feature name: " + f.name);
    }
    if (label_column.empty()) throw SchemaError("label column not set");
    for (const auto& id : id_columns) {
        if (id == label_column) throw SchemaError("label column listed as id: " + id);
    }
}

int FeatureSchema::feature_index(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
    FeatureSchema s;
    if (!j.contains("label") || !j["label"].is_string()) {
        throw SchemaError("schema sidecar: missing string field \"label\"");
    }
    s.label_column = j["label"].get<std::string>();
    if (j.contains("ids")) {
        for (const auto& v : j["ids"]) s.id_columns.push_back(v.get<std::string>());
    }
    if (j.contains("numeric")) {
        for (const auto& v : j["numeric"]) {
            s.features.push_back({v.get<std::string>(), FeatureKind::numeric});
        }
    }
    if (j.contains("categorical")) {
        for (const auto& v : j["categorical"]) {
            s.features.push_back({v.get<std::string>(), FeatureKind::categorical});
        }
    }
    s.validate();
    return s;
}

FeatureSchema FeatureSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema file ") + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json FeatureSchema::to_json() const {
    nlohmann::json j;
    j["label"] = label_column;
    j["ids"] = id_columns;
    auto numeric = nlohmann::json::array();
    auto categorical = nlohmann::json::array();
    for (const auto& f : features) {
        (f.kind == FeatureKind::numeric ? numeric : categorical).push_back(f.name);
    }
    j["numeric"] = numeric;
    j["categorical"] = categorical;
    return j;
}

}  // namespace rulefuse
