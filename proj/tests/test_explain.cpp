#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "rulefuse/error.hpp"
#include "rulefuse/explain.hpp"
#include "rulefuse/synth.hpp"

using namespace rulefuse;

namespace {

// Safety tiers whose rules are the planted pattern conjunctions, mapped to
// the generator's tier codes via bit-identical binarizer columns.
SafetyTiers tiers_from_planted(const SynthResult& res, const BinarizerModel& model,
                               const BinarizedMatrix& bm) {
    SafetyTiers tiers;
    for (const auto& pattern : res.safety_patterns) {
        RuleCandidate cand;
        for (const auto& atom : pattern.conditions) {
            bool found = false;
            for (std::size_t c = 0; c < bm.n_cols() && !found; ++c) {
                bool equal = true;
                for (std::size_t r = 0; r < res.data.n_rows() && equal; ++r) {
                    equal = bm.bit(r, c) == eval_predicate(atom, res.data, r);
                }
                if (equal) {
                    cand.atoms.push_back(c);
                    found = true;
                }
            }
            REQUIRE(found);
        }
        tiers.tiers[pattern.code].push_back(cand);
    }
    (void)model;
    return tiers;
}

RiskRuleSet rules_from_planted(const std::vector<PlantedRule>& planted) {
    RiskRuleSet rs;
    for (const auto& p : planted) rs.rules.push_back({p.name, p.code, p.quadrant, p.conditions});
    return rs;
}

struct Fixture {
    SynthResult res;
    BinarizerModel model;
    BinarizedMatrix bm;
    SafetyTiers tiers;
    RiskRuleSet risks;

    explicit Fixture(SynthConfig cfg)
        : res(generate_synthetic(cfg)),
          model(fit_binarizer(res.data, 9)),
          bm(binarize(model, res.data)),
          tiers(tiers_from_planted(res, model, bm)),
          risks(rules_from_planted(res.risk_disjuncts)) {}
};

SynthConfig clean_config() {
    SynthConfig cfg;
    cfg.n_rows = 900;
    cfg.churn_rate = 0.5;
    cfg.n_safety_patterns = 2;
    cfg.n_risk_disjuncts = 4;
    cfg.risk_disjunct_coverage = 0.03;
    cfg.noise_rate = 0.0;
    cfg.seed = 2024;
    return cfg;
}

}  // namespace

TEST_CASE("risk rules take precedence over safety tiers by default") {
    const Fixture fx{clean_config()};
    // disjunct rows match both their pattern (safety) and their trigger (risk)
    for (std::size_t r = 0; r < fx.res.data.n_rows(); ++r) {
        if (fx.res.truth.codes[r] < kMinRiskCode || fx.res.truth.codes[r] == kDriftCode) continue;
        auto [code, prov] = assign_code(fx.res.data, r, fx.tiers, fx.model, fx.risks);
        CHECK(code == fx.res.truth.codes[r]);
        CHECK(prov == fx.res.truth.provenance[r]);
    }
}

TEST_CASE("safety_first precedence flips the overlap outcome") {
    const Fixture fx{clean_config()};
    bool saw_overlap = false;
    for (std::size_t r = 0; r < fx.res.data.n_rows() && !saw_overlap; ++r) {
        if (fx.res.truth.codes[r] < kMinRiskCode || fx.res.truth.codes[r] == kDriftCode) continue;
        auto [code, prov] = assign_code(fx.res.data, r, fx.tiers, fx.model, fx.risks,
                                        Precedence::safety_first);
        // the disjunct row sits inside a safety pattern, so safety wins here
        if (code >= 1 && code <= 3) {
            CHECK(prov == "tier" + std::to_string(code));
            saw_overlap = true;
        }
    }
    CHECK(saw_overlap);
}

TEST_CASE("rows matching only a safety tier get that tier's code") {
    const Fixture fx{clean_config()};
    for (std::size_t r = 0; r < fx.res.data.n_rows(); ++r) {
        if (fx.res.truth.codes[r] > 3) continue;
        auto [code, prov] = assign_code(fx.res.data, r, fx.tiers, fx.model, fx.risks);
        CHECK(code == fx.res.truth.codes[r]);
    }
}

TEST_CASE("rows matching nothing drift to code 12") {
    const Fixture fx{clean_config()};
    for (std::size_t r = 0; r < fx.res.data.n_rows(); ++r) {
        if (fx.res.truth.codes[r] != kDriftCode) continue;
        auto [code, prov] = assign_code(fx.res.data, r, fx.tiers, fx.model, fx.risks);
        CHECK(code == kDriftCode);
        CHECK(prov == "drift");
    }
}

TEST_CASE("empty tiers and empty rules make every row drift") {
    const Fixture fx{clean_config()};
    const ExplanationVector ev =
        build_explanations(fx.res.data, SafetyTiers{}, fx.model, RiskRuleSet{});
    for (int code : ev.codes) CHECK(code == kDriftCode);
}

TEST_CASE("build_explanations reproduces the generator's truth on clean data") {
    const Fixture fx{clean_config()};
    const ExplanationVector ev = build_explanations(fx.res.data, fx.tiers, fx.model, fx.risks);
    REQUIRE(ev.size() == fx.res.data.n_rows());
    for (std::size_t r = 0; r < ev.size(); ++r) {
        CHECK(ev.codes[r] == fx.res.truth.codes[r]);
        CHECK(ev.provenance[r] == fx.res.truth.provenance[r]);
    }
}

TEST_CASE("histogram sums to the row count") {
    const Fixture fx{clean_config()};
    const ExplanationVector ev = build_explanations(fx.res.data, fx.tiers, fx.model, fx.risks);
    const auto hist = ev.histogram();
    const std::size_t total = std::accumulate(hist.begin(), hist.end(), std::size_t{0});
    CHECK(total == fx.res.data.n_rows());
    CHECK(hist[0] == 0);
}

TEST_CASE("totality: every row gets exactly one code in 1..12") {
    const Fixture fx{clean_config()};
    const ExplanationVector ev = build_explanations(fx.res.data, fx.tiers, fx.model, fx.risks);
    for (int code : ev.codes) {
        CHECK(code >= 1);
        CHECK(code <= kDriftCode);
    }
}

TEST_CASE("provenance is sound: the recorded trigger re-evaluates to true") {
    const Fixture fx{clean_config()};
    const ExplanationVector ev = build_explanations(fx.res.data, fx.tiers, fx.model, fx.risks);
    for (std::size_t r = 0; r < ev.size(); ++r) {
        const int code = ev.codes[r];
        if (code >= kMinRiskCode && code <= kMaxRiskCode) {
            bool matched = false;
            for (const auto& rule : fx.risks.rules) {
                if (rule.name == ev.provenance[r]) {
                    CHECK(rule.code == code);
                    CHECK(evaluate_rule(rule, fx.res.data, r));
                    matched = true;
                }
            }
            CHECK(matched);
        } else if (code <= 3) {
            const auto bits = binarize_row(fx.model, fx.res.data, r);
            bool any = false;
            for (const auto& cand : fx.tiers.tiers.at(code)) {
                bool all = true;
                for (std::size_t a : cand.atoms) all = all && bits[a];
                any = any || all;
            }
            CHECK(any);
            CHECK(ev.provenance[r] == "tier" + std::to_string(code));
        } else {
            // drift: nothing matches
            for (const auto& rule : fx.risks.rules) CHECK_FALSE(evaluate_rule(rule, fx.res.data, r));
        }
    }
}

TEST_CASE("codes are independent of row order") {
    const Fixture fx{clean_config()};
    const ExplanationVector ev = build_explanations(fx.res.data, fx.tiers, fx.model, fx.risks);

    std::vector<std::size_t> reversed(fx.res.data.n_rows());
    for (std::size_t i = 0; i < reversed.size(); ++i) reversed[i] = reversed.size() - 1 - i;
    const Dataset flipped = fx.res.data.select(reversed);
    const ExplanationVector ev2 = build_explanations(flipped, fx.tiers, fx.model, fx.risks);
    for (std::size_t i = 0; i < reversed.size(); ++i) {
        CHECK(ev2.codes[i] == ev.codes[reversed[i]]);
    }
}

TEST_CASE("risk precedence follows ascending code on multi-rule matches") {
    // two rules matching the same rows: the lower code wins
    FeatureSchema s;
    s.label_column = "churn";
    s.features = {{"v", FeatureKind::numeric}};
    const Dataset ds(s, {Value{5.0}}, {1});
    const BinarizerModel model = fit_binarizer(ds, 1);

    RiskRuleSet risks;
    risks.rules.push_back({"later", 9, "financial", {{"v", Comparator::gt, 1, ""}}});
    risks.rules.push_back({"earlier", 4, "structural", {{"v", Comparator::gt, 2, ""}}});
    auto [code, prov] = assign_code(ds, 0, SafetyTiers{}, model, risks);
    CHECK(code == 4);
    CHECK(prov == "earlier");
}
