#ifndef RULEFUSE_PARETO_HPP
#define RULEFUSE_PARETO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rulefuse/dataset.hpp"
#include "rulefuse/ruledsl.hpp"

namespace rulefuse {

struct RuleStats {
    RiskRule rule;
    double coverage = 0.0;                   // churn rows matched / churn rows
    std::vector<std::uint32_t> match_set;    // all matched rows, ascending
};

// Match set over all rows; coverage over churn rows only. Throws DataError
// when the dataset holds no churn rows (coverage undefined).
RuleStats rule_coverage(const RiskRule& rule, const Dataset& ds);

// |A n B| / |A u B| over sorted index vectors; 0 when both are empty.
double jaccard(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

struct DroppedRule {
    enum class Reason { low_coverage, redundant };
    RuleStats stats;
    Reason reason = Reason::low_coverage;
    std::string redundant_with;   // kept rule name (redundant only)
    double jaccard_value = 0.0;   // overlap with that rule (redundant only)
};

struct SelectionReport {
    std::vector<RuleStats> kept;     // greedy order: coverage descending, ties by code
    std::vector<DroppedRule> dropped;
    std::vector<std::vector<double>> pairwise_jaccard;  // over kept rules

    double mean_offdiagonal() const;
    double max_offdiagonal() const;
    nlohmann::json to_json() const;
};

// Drops rules under min_coverage, then greedily keeps rules in descending
// coverage order (ties by ascending code) whose Jaccard overlap with every
// already-kept rule stays <= max_jaccard.
SelectionReport select_rules(const RiskRuleSet& rules, const Dataset& ds, double min_coverage,
                             double max_jaccard);

}  // namespace rulefuse

#endif
