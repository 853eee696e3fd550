#ifndef RULEFUSE_EXPLAIN_HPP
#define RULEFUSE_EXPLAIN_HPP

#include <string>
#include <utility>

#include "rulefuse/binarizer.hpp"
#include "rulefuse/dataset.hpp"
#include "rulefuse/explanation.hpp"
#include "rulefuse/lrr.hpp"
#include "rulefuse/ruledsl.hpp"

namespace rulefuse {

// Which logic stream wins when a row matches both. Default is risk_first:
// expert exceptions override automated safety defaults.
enum class Precedence { risk_first, safety_first };

Precedence precedence_from_string(const std::string& s);
const char* precedence_to_string(Precedence p);

// One explanation code for a single row: risk rules in ascending code order
// (first match wins), then safety tiers strongest first, else drift (12).
// Safety rules are tested on the binarized row. Label-free.
std::pair<int, std::string> assign_code(const Dataset& ds, std::size_t row, const SafetyTiers& tiers,
                                        const BinarizerModel& binarizer, const RiskRuleSet& risks,
                                        Precedence precedence = Precedence::risk_first);

// Row-wise assign_code over the whole dataset.
ExplanationVector build_explanations(const Dataset& ds, const SafetyTiers& tiers,
                                     const BinarizerModel& binarizer, const RiskRuleSet& risks,
                                     Precedence precedence = Precedence::risk_first);

}  // namespace rulefuse

#endif
