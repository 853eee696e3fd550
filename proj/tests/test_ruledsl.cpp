#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rulefuse/error.hpp"
#include "rulefuse/ruledsl.hpp"

using namespace rulefuse;

namespace {

FeatureSchema churn_schema() {
    FeatureSchema s;
    s.label_column = "churn";
    s.features = {{"payment_delay", FeatureKind::numeric},
                  {"tenure", FeatureKind::numeric},
                  {"contract", FeatureKind::categorical}};
    return s;
}

Dataset one_row(double delay, double tenure, const std::string& contract) {
    return Dataset(churn_schema(), {Value{delay}, Value{tenure}, Value{contract}}, {1});
}

}  // namespace

TEST_CASE("parse: a single risk rule with one condition") {
    const RiskRuleSet rs =
        parse_rules("rule \"late_payer\" code 4 quadrant financial: payment_delay > 20\n");
    REQUIRE(rs.rules.size() == 1);
    const RiskRule& r = rs.rules[0];
    CHECK(r.name == "late_payer");
    CHECK(r.code == 4);
    CHECK(r.quadrant == "financial");
    REQUIRE(r.predicate.size() == 1);
    CHECK(r.predicate[0].repr() == "payment_delay > 20");
}

TEST_CASE("parse: conjunctions and comments") {
    const char* src =
        "# expert rules\n"
        "rule \"locked_out\" code 7 quadrant structural: contract == \"monthly\" AND tenure <= 6\n";
    const RiskRuleSet rs = parse_rules(src);
    REQUIRE(rs.rules.size() == 1);
    REQUIRE(rs.rules[0].predicate.size() == 2);
    CHECK(rs.rules[0].predicate[0].repr() == "contract == \"monthly\"");
    CHECK(rs.rules[0].predicate[1].repr() == "tenure <= 6");
}

TEST_CASE("parse: duplicate codes are rejected with the rule's line") {
    const char* src =
        "rule \"a\" code 5 quadrant financial: tenure <= 6\n"
        "rule \"b\" code 5 quadrant structural: tenure > 50\n";
    try {
        parse_rules(src);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("duplicate rule code 5") != std::string::npos);
    }
}

TEST_CASE("parse: codes outside 4..11 are rejected") {
    CHECK_THROWS_AS(parse_rules("rule \"a\" code 3 quadrant financial: tenure <= 6\n"), ParseError);
    CHECK_THROWS_AS(parse_rules("rule \"a\" code 12 quadrant financial: tenure <= 6\n"), ParseError);
}

TEST_CASE("parse: unknown quadrants are rejected") {
    CHECK_THROWS_AS(parse_rules("rule \"a\" code 4 quadrant fiscal: tenure <= 6\n"), ParseError);
}

TEST_CASE("parse: syntax errors carry line and column") {
    try {
        parse_rules("rule \"a\" code 4 quadrant financial:\n  tenure ><= 6\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() > 0);
    }
}

TEST_CASE("parse: an empty file is an error") {
    CHECK_THROWS_AS(parse_rules(""), ParseError);
    CHECK_THROWS_AS(parse_rules("# only a comment\n"), ParseError);
}

TEST_CASE("parse: more than 4 conditions is an error") {
    CHECK_THROWS_AS(
        parse_rules("rule \"a\" code 4 quadrant financial: tenure > 1 AND tenure > 2 AND "
                    "tenure > 3 AND tenure > 4 AND tenure > 5\n"),
        ParseError);
}

TEST_CASE("parse: equality needs a quoted literal, orderings need numbers") {
    CHECK_THROWS_AS(parse_rules("rule \"a\" code 4 quadrant financial: contract == monthly\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_rules("rule \"a\" code 4 quadrant financial: tenure > \"6\"\n"),
                    ParseError);
}

TEST_CASE("parse: duplicate names are rejected") {
    const char* src =
        "rule \"a\" code 4 quadrant financial: tenure <= 6\n"
        "rule \"a\" code 5 quadrant structural: tenure > 50\n";
    CHECK_THROWS_AS(parse_rules(src), ParseError);
}

TEST_CASE("strict < and >= normalize onto (<=, >) with exact semantics") {
    const RiskRuleSet rs = parse_rules(
        "rule \"a\" code 4 quadrant financial: payment_delay < 20\n"
        "rule \"b\" code 5 quadrant financial: payment_delay >= 20\n");
    const auto& lt = rs.rules[0];
    const auto& ge = rs.rules[1];
    CHECK(lt.predicate[0].op == Comparator::le);
    CHECK(ge.predicate[0].op == Comparator::gt);

    // boundary behaves exactly like the original strict comparisons
    CHECK(evaluate_rule(lt, one_row(19.999999, 1, "monthly"), 0));
    CHECK_FALSE(evaluate_rule(lt, one_row(20.0, 1, "monthly"), 0));
    CHECK(evaluate_rule(ge, one_row(20.0, 1, "monthly"), 0));
    CHECK_FALSE(evaluate_rule(ge, one_row(std::nextafter(20.0, 0.0), 1, "monthly"), 0));
}

TEST_CASE("print/parse round-trips to an equal ruleset") {
    const char* src =
        "rule \"late_payer\" code 4 quadrant financial: payment_delay < 20.5\n"
        "rule \"locked_out\" code 7 quadrant structural: contract == \"monthly\" AND tenure <= 6\n"
        "rule \"quiet\" code 9 quadrant engagement: tenure >= 3 AND contract != \"annual\"\n";
    const RiskRuleSet rs = parse_rules(src);
    const RiskRuleSet back = parse_rules(print_rules(rs));
    CHECK(back == rs);
}

TEST_CASE("evaluate: numeric comparisons on raw values") {
    const RiskRuleSet rs =
        parse_rules("rule \"late\" code 4 quadrant financial: payment_delay > 20\n");
    CHECK(evaluate_rule(rs.rules[0], one_row(25, 1, "monthly"), 0));
    CHECK_FALSE(evaluate_rule(rs.rules[0], one_row(20, 1, "monthly"), 0));
}

TEST_CASE("evaluate: conjunction short-circuits to false") {
    const RiskRuleSet rs = parse_rules(
        "rule \"locked\" code 7 quadrant structural: contract == \"monthly\" AND tenure <= 6\n");
    CHECK_FALSE(evaluate_rule(rs.rules[0], one_row(0, 3, "annual"), 0));
    CHECK(evaluate_rule(rs.rules[0], one_row(0, 3, "monthly"), 0));
}

TEST_CASE("evaluate: closed boundary on <=") {
    const RiskRuleSet rs = parse_rules("rule \"new\" code 4 quadrant structural: tenure <= 6\n");
    CHECK(evaluate_rule(rs.rules[0], one_row(0, 6, "monthly"), 0));
    CHECK_FALSE(evaluate_rule(rs.rules[0], one_row(0, 6.0001, "monthly"), 0));
}

TEST_CASE("evaluate: missing features raise SchemaError") {
    const RiskRuleSet rs = parse_rules("rule \"x\" code 4 quadrant financial: mystery > 1\n");
    CHECK_THROWS_AS(evaluate_rule(rs.rules[0], one_row(0, 1, "monthly"), 0), SchemaError);
}

TEST_CASE("bind_rules validates features and kinds against a schema") {
    const RiskRuleSet ok = parse_rules("rule \"x\" code 4 quadrant financial: tenure > 1\n");
    CHECK_NOTHROW(bind_rules(ok, churn_schema()));

    const RiskRuleSet unknown = parse_rules("rule \"x\" code 4 quadrant financial: mystery > 1\n");
    CHECK_THROWS_AS(bind_rules(unknown, churn_schema()), SchemaError);

    const RiskRuleSet kind =
        parse_rules("rule \"x\" code 4 quadrant financial: contract > 1\n");
    CHECK_THROWS_AS(bind_rules(kind, churn_schema()), SchemaError);
}

TEST_CASE("evaluate is pure: a rule is false iff some condition is false") {
    const RiskRuleSet rs = parse_rules(
        "rule \"r\" code 4 quadrant financial: payment_delay > 10 AND tenure <= 12 AND "
        "contract == \"monthly\"\n");
    const RiskRule& rule = rs.rules[0];

    const double delays[] = {5, 15};
    const double tenures[] = {6, 24};
    const char* contracts[] = {"monthly", "annual"};
    for (double d : delays) {
        for (double t : tenures) {
            for (const char* c : contracts) {
                const Dataset row = one_row(d, t, c);
                bool expected = true;
                for (const auto& cond : rule.predicate) {
                    expected = expected && eval_predicate(cond, row, 0);
                }
                CHECK(evaluate_rule(rule, row, 0) == expected);
                CHECK(evaluate_rule(rule, row, 0) == evaluate_rule(rule, row, 0));
            }
        }
    }
}

TEST_CASE("by_code orders evaluation precedence by ascending code") {
    const RiskRuleSet rs = parse_rules(
        "rule \"second\" code 9 quadrant financial: tenure > 1\n"
        "rule \"first\" code 4 quadrant financial: tenure > 1\n");
    const auto ordered = rs.by_code();
    REQUIRE(ordered.size() == 2);
    CHECK(ordered[0]->name == "first");
    CHECK(ordered[1]->name == "second");
}
