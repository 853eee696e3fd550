#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "rulefuse/error.hpp"
#include "rulefuse/pareto.hpp"
#include "rulefuse/rng.hpp"
#include "rulefuse/synth.hpp"

using namespace rulefuse;

namespace {

FeatureSchema value_schema() {
    FeatureSchema s;
    s.label_column = "churn";
    s.features = {{"v", FeatureKind::numeric}};
    return s;
}

// n rows with v = row index; churn labels given explicitly.
Dataset indexed_dataset(const std::vector<int>& labels) {
    std::vector<Value> cells;
    for (std::size_t i = 0; i < labels.size(); ++i) cells.emplace_back(static_cast<double>(i));
    return Dataset(value_schema(), std::move(cells), std::vector<int>(labels));
}

RiskRule threshold_rule(const std::string& name, int code, double gt) {
    RiskRule r;
    r.name = name;
    r.code = code;
    r.quadrant = "financial";
    r.predicate = {{"v", Comparator::gt, gt, ""}};
    return r;
}

std::vector<std::uint32_t> brute_force_matches(const RiskRule& rule, const Dataset& ds) {
    std::vector<std::uint32_t> out;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        if (evaluate_rule(rule, ds, r)) out.push_back(static_cast<std::uint32_t>(r));
    }
    return out;
}

}  // namespace

TEST_CASE("coverage counts churn rows only") {
    // 1000 churners at indices 0..999, 100 stay rows after them
    std::vector<int> labels(1100, 1);
    for (std::size_t i = 1000; i < 1100; ++i) labels[i] = 0;
    const Dataset ds = indexed_dataset(labels);
    // matches rows 995..1099: 5 churners of 1000
    const RuleStats stats = rule_coverage(threshold_rule("r", 4, 994.5), ds);
    CHECK(stats.coverage == doctest::Approx(0.005));
    CHECK(stats.match_set.size() == 105);
}

TEST_CASE("coverage is 1 when every churn row matches") {
    const Dataset ds = indexed_dataset({1, 1, 0, 0});
    const RuleStats stats = rule_coverage(threshold_rule("r", 4, -1.0), ds);
    CHECK(stats.coverage == 1.0);
}

TEST_CASE("a rule matching only stay rows has zero coverage and a non-empty match set") {
    const Dataset ds = indexed_dataset({1, 1, 0, 0});
    const RuleStats stats = rule_coverage(threshold_rule("r", 4, 1.5), ds);
    CHECK(stats.coverage == 0.0);
    CHECK(stats.match_set.size() == 2);
}

TEST_CASE("coverage is undefined without churn rows") {
    const Dataset ds = indexed_dataset({0, 0, 0});
    CHECK_THROWS_AS(rule_coverage(threshold_rule("r", 4, 1.0), ds), DataError);
}

TEST_CASE("jaccard examples") {
    CHECK(jaccard({1, 2, 3}, {2, 3, 4}) == doctest::Approx(0.5));
    CHECK(jaccard({1, 2, 3}, {1, 2, 3}) == 1.0);
    CHECK(jaccard({1, 2}, {3, 4}) == 0.0);
    CHECK(jaccard({}, {}) == 0.0);
}

TEST_CASE("jaccard properties: symmetry, bounds, identity") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<std::uint32_t> sa, sb;
        const std::size_t na = rng.bounded(12);
        const std::size_t nb = rng.bounded(12);
        for (std::size_t i = 0; i < na; ++i) sa.insert(static_cast<std::uint32_t>(rng.bounded(20)));
        for (std::size_t i = 0; i < nb; ++i) sb.insert(static_cast<std::uint32_t>(rng.bounded(20)));
        const std::vector<std::uint32_t> a(sa.begin(), sa.end());
        const std::vector<std::uint32_t> b(sb.begin(), sb.end());
        const double jab = jaccard(a, b);
        CHECK(jab == jaccard(b, a));
        CHECK(jab >= 0.0);
        CHECK(jab <= 1.0);
        if (!a.empty()) CHECK(jaccard(a, a) == 1.0);
    }
}

TEST_CASE("select keeps exactly the planted rules on the synthetic oracle") {
    SynthConfig cfg;
    cfg.n_rows = 2000;
    cfg.churn_rate = 0.56;
    cfg.n_safety_patterns = 2;
    cfg.n_risk_disjuncts = 4;
    cfg.risk_disjunct_coverage = 0.015;
    cfg.noise_rate = 0.0;
    cfg.seed = 404;
    const SynthResult res = generate_synthetic(cfg);
    REQUIRE(res.anxiety_rules.size() == 4);

    RiskRuleSet rules;
    for (const auto& p : res.risk_disjuncts) rules.rules.push_back({p.name, p.code, p.quadrant, p.conditions});
    for (const auto& p : res.anxiety_rules) rules.rules.push_back({p.name, p.code, p.quadrant, p.conditions});

    const SelectionReport report = select_rules(rules, res.data, 0.01, 0.5);

    std::set<std::string> kept_names;
    for (const auto& s : report.kept) kept_names.insert(s.rule.name);
    std::set<std::string> planted_names;
    for (const auto& p : res.risk_disjuncts) planted_names.insert(p.name);
    CHECK(kept_names == planted_names);
    CHECK(report.dropped.size() == 4);

    // drop reasons recomputable from brute-force coverage
    const double churn_total = static_cast<double>(res.data.churn_count());
    for (const auto& d : report.dropped) {
        CHECK(d.reason == DroppedRule::Reason::low_coverage);
        std::size_t churn_matched = 0;
        for (std::uint32_t r : brute_force_matches(d.stats.rule, res.data)) {
            churn_matched += static_cast<std::size_t>(res.data.labels()[r]);
        }
        CHECK(static_cast<double>(churn_matched) / churn_total == doctest::Approx(d.stats.coverage));
        CHECK(d.stats.coverage < 0.01);
    }
}

TEST_CASE("select drops an identical duplicate as redundant with jaccard 1") {
    const Dataset ds = indexed_dataset({1, 1, 1, 0, 0, 0});
    RiskRuleSet rules;
    rules.rules.push_back(threshold_rule("original", 4, 0.5));
    rules.rules.push_back(threshold_rule("copy", 5, 0.5));
    const SelectionReport report = select_rules(rules, ds, 0.0, 0.5);
    REQUIRE(report.kept.size() == 1);
    CHECK(report.kept[0].rule.name == "original");  // tie broken by ascending code
    REQUIRE(report.dropped.size() == 1);
    CHECK(report.dropped[0].reason == DroppedRule::Reason::redundant);
    CHECK(report.dropped[0].redundant_with == "original");
    CHECK(report.dropped[0].jaccard_value == 1.0);
}

TEST_CASE("select with filters disabled keeps everything ordered by coverage") {
    const Dataset ds = indexed_dataset({1, 1, 1, 1, 0, 0});
    RiskRuleSet rules;
    rules.rules.push_back(threshold_rule("narrow", 4, 2.5));   // covers churn row 3
    rules.rules.push_back(threshold_rule("broad", 5, -1.0));   // covers all
    rules.rules.push_back(threshold_rule("medium", 6, 1.5));   // covers churn rows 2,3
    const SelectionReport report = select_rules(rules, ds, 0.0, 1.0);
    REQUIRE(report.kept.size() == 3);
    CHECK(report.kept[0].rule.name == "broad");
    CHECK(report.kept[1].rule.name == "medium");
    CHECK(report.kept[2].rule.name == "narrow");
    CHECK(report.dropped.empty());
}

TEST_CASE("select is idempotent on its own kept set") {
    const Dataset ds = indexed_dataset({1, 1, 1, 1, 1, 0, 0, 0, 1, 0});
    RiskRuleSet rules;
    rules.rules.push_back(threshold_rule("a", 4, 0.5));
    rules.rules.push_back(threshold_rule("b", 5, 4.5));
    rules.rules.push_back(threshold_rule("c", 6, 7.5));
    const SelectionReport first = select_rules(rules, ds, 0.05, 0.6);

    RiskRuleSet kept;
    for (const auto& s : first.kept) kept.rules.push_back(s.rule);
    const SelectionReport second = select_rules(kept, ds, 0.05, 0.6);
    REQUIRE(second.kept.size() == first.kept.size());
    for (std::size_t i = 0; i < first.kept.size(); ++i) {
        CHECK(second.kept[i].rule.name == first.kept[i].rule.name);
    }
    CHECK(second.dropped.empty());
}

TEST_CASE("pairwise jaccard matrix is recomputable from match sets") {
    const Dataset ds = indexed_dataset({1, 1, 1, 1, 1, 1, 0, 0});
    RiskRuleSet rules;
    rules.rules.push_back(threshold_rule("a", 4, 1.5));
    rules.rules.push_back(threshold_rule("b", 5, 3.5));
    const SelectionReport report = select_rules(rules, ds, 0.0, 1.0);
    REQUIRE(report.kept.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double expect =
                jaccard(report.kept[i].match_set, report.kept[j].match_set);
            if (i == j) CHECK(report.pairwise_jaccard[i][j] == 1.0);
            else CHECK(report.pairwise_jaccard[i][j] == expect);
        }
    }
    CHECK(report.max_offdiagonal() == doctest::Approx(jaccard(report.kept[0].match_set,
                                                              report.kept[1].match_set)));
}

TEST_CASE("select validates its thresholds") {
    const Dataset ds = indexed_dataset({1, 0});
    RiskRuleSet rules;
    rules.rules.push_back(threshold_rule("a", 4, 0.5));
    CHECK_THROWS_AS(select_rules(rules, ds, -0.1, 0.5), ConfigError);
    CHECK_THROWS_AS(select_rules(rules, ds, 0.0, 1.5), ConfigError);
}
