#ifndef RULEFUSE_RULEDSL_HPP
#define RULEFUSE_RULEDSL_HPP

#include <string>
#include <vector>

#include "rulefuse/dataset.hpp"
#include "rulefuse/predicate.hpp"

namespace rulefuse {

// An expert-authored churn trigger: code 4..11, one of four behavioural
// quadrants, and a conjunction of up to four conditions on raw features.
struct RiskRule {
    std::string name;
    int code = 0;
    std::string quadrant;
    std::vector<AtomicPredicate> predicate;

    bool operator==(const RiskRule& other) const = default;
};

struct RiskRuleSet {
    std::vector<RiskRule> rules;  // file order; evaluation precedence is ascending code

    bool operator==(const RiskRuleSet& other) const = default;

    // Rules sorted by ascending code.
    std::vector<const RiskRule*> by_code() const;
};

// Grammar:
//   ruleset := rule+
//   rule    := "rule" STRING "code" INT "quadrant" IDENT ":" conj
//   conj    := cond ("AND" cond)*
//   cond    := IDENT op literal
//   op      := "<" | "<=" | ">" | ">=" | "==" | "!="
// '#' starts a comment running to end of line. Strict '<' and '>=' are
// normalized onto the (<=, >) convention by moving the threshold one double
// ulp down, which preserves exact semantics for double comparisons.
RiskRuleSet parse_rules(const std::string& source);
RiskRuleSet load_rules(const std::string& path);

// Inverse of parse_rules up to normalization: parse(print(rs)) == rs.
std::string print_rules(const RiskRuleSet& rs);

// Conjunction truth value on a raw row. Throws SchemaError when a referenced
// feature is missing or of the wrong kind.
bool evaluate_rule(const RiskRule& rule, const Dataset& ds, std::size_t row);

// Validates every rule against a schema (feature existence and kinds).
void bind_rules(const RiskRuleSet& rs, const FeatureSchema& schema);

}  // namespace rulefuse

#endif
