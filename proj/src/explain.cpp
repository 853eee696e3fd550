#include "rulefuse/explain.hpp"

#include "rulefuse/error.hpp"

namespace rulefuse {

Precedence precedence_from_string(const std::string& s) {
    if (s == "risk_first") return Precedence::risk_first;
    if (s == "safety_first") return Precedence::safety_first;
    throw ConfigError("unknown precedence '" + s + "' (expected risk_first|safety_first)");
}

const char* precedence_to_string(Precedence p) {
    return p == Precedence::risk_first ? "risk_first" : "safety_first";
}

namespace {

bool candidate_matches(const RuleCandidate& cand, const std::vector<std::uint8_t>& row_bits) {
    for (std::size_t a : cand.atoms) {
        if (!row_bits[a]) return false;
    }
    return true;
}

// Strongest tier whose rule list holds a matching conjunction; 0 when none.
int tier_match(const SafetyTiers& tiers, const std::vector<std::uint8_t>& row_bits) {
    for (int code = 1; code <= 3; ++code) {
        auto it = tiers.tiers.find(code);
        if (it == tiers.tiers.end()) continue;
        for (const auto& cand : it->second) {
            if (candidate_matches(cand, row_bits)) return code;
        }
    }
    return 0;
}

std::pair<int, std::string> risk_match(const Dataset& ds, std::size_t row, const RiskRuleSet& risks) {
    for (const RiskRule* rule : risks.by_code()) {
        if (evaluate_rule(*rule, ds, row)) return {rule->code, rule->name};
    }
    return {0, ""};
}

std::pair<int, std::string> fuse(const Dataset& ds, std::size_t row, const SafetyTiers& tiers,
                                 const std::vector<std::uint8_t>& row_bits, const RiskRuleSet& risks,
                                 Precedence precedence) {
    if (precedence == Precedence::risk_first) {
        auto risk = risk_match(ds, row, risks);
        if (risk.first != 0) return risk;
        const int tier = tier_match(tiers, row_bits);
        if (tier != 0) return {tier, "tier" + std::to_string(tier)};
    } else {
        const int tier = tier_match(tiers, row_bits);
        if (tier != 0) return {tier, "tier" + std::to_string(tier)};
        auto risk = risk_match(ds, row, risks);
        if (risk.first != 0) return risk;
    }
    return {kDriftCode, "drift"};
}

}  // namespace

std::pair<int, std::string> assign_code(const Dataset& ds, std::size_t row, const SafetyTiers& tiers,
                                        const BinarizerModel& binarizer, const RiskRuleSet& risks,
                                        Precedence precedence) {
    return fuse(ds, row, tiers, binarize_row(binarizer, ds, row), risks, precedence);
}

ExplanationVector build_explanations(const Dataset& ds, const SafetyTiers& tiers,
                                     const BinarizerModel& binarizer, const RiskRuleSet& risks,
                                     Precedence precedence) {
    bind_rules(risks, ds.schema());
    const BinarizedMatrix bm = binarize(binarizer, ds);

    ExplanationVector out;
    out.codes.reserve(ds.n_rows());
    out.provenance.reserve(ds.n_rows());
    std::vector<std::uint8_t> row_bits(bm.n_cols());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        for (std::size_t c = 0; c < bm.n_cols(); ++c) row_bits[c] = bm.bit(r, c) ? 1 : 0;
        auto [code, prov] = fuse(ds, r, tiers, row_bits, risks, precedence);
        out.codes.push_back(code);
        out.provenance.push_back(std::move(prov));
    }
    return out;
}

}  // namespace rulefuse
