#ifndef RULEFUSE_SYNTH_HPP
#define RULEFUSE_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rulefuse/dataset.hpp"
#include "rulefuse/explanation.hpp"
#include "rulefuse/predicate.hpp"

namespace rulefuse {

// Synthetic churn data with planted structure: a few dense homogeneous
// "stay" patterns, many sparse disjoint churn disjuncts (each a pattern
// context plus a narrow trigger), and an unexplained churn remainder
// ("drift"). Label noise flips labels without touching features.
struct SynthConfig {
    std::size_t n_rows = 3000;
    double churn_rate = 0.56;
    std::size_t n_safety_patterns = 2;   // <= 4 (built-in pattern library)
    std::size_t n_risk_disjuncts = 4;    // <= 8 (explanation codes 4..11)
    double risk_disjunct_coverage = 0.04;  // per disjunct, fraction of all rows
    double noise_rate = 0.05;            // in [0, 0.5)
    std::uint64_t seed = 20240811;

    void validate() const;
};

// A planted conjunction. code is a safety tier (1..3) for patterns and an
// explanation code (4..11) for disjuncts/anxiety rules.
struct PlantedRule {
    std::string name;
    int code = 0;
    std::string quadrant;
    std::vector<AtomicPredicate> conditions;
};

struct SynthResult {
    Dataset data;
    ExplanationVector truth;
    std::vector<PlantedRule> safety_patterns;
    std::vector<PlantedRule> risk_disjuncts;
    // Over-specific low-coverage rules for the "manual" expert-set analog;
    // emitted only while codes 4..11 have room left.
    std::vector<PlantedRule> anxiety_rules;
};

SynthResult generate_synthetic(const SynthConfig& cfg);

// Renders planted rules (codes 4..11) in the risk-rule DSL.
std::string render_rules_dsl(const std::vector<PlantedRule>& rules);

// data.csv with a leading customer_id column (listed under schema ids).
void write_dataset_csv(const Dataset& ds, const std::string& path);
void write_truth_csv(const ExplanationVector& truth, const std::string& path);

// Schema sidecar matching write_dataset_csv output.
void write_schema_json(const FeatureSchema& schema, const std::string& path);

}  // namespace rulefuse

#endif
