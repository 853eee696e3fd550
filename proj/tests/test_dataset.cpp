#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "rulefuse/dataset.hpp"
#include "rulefuse/error.hpp"
#include "rulefuse/synth.hpp"

using namespace rulefuse;

namespace {

FeatureSchema toy_schema() {
    FeatureSchema s;
    s.label_column = "churn";
    s.id_columns = {"id"};
    s.features = {{"tenure", FeatureKind::numeric}, {"contract", FeatureKind::categorical}};
    return s;
}

const char* kToyCsv =
    "id,tenure,contract,churn\n"
    "a,12,monthly,0\n"
    "b,3,annual,1\n"
    "c,40,monthly,1\n";

// rows described as (label count per label) for split tests
Dataset labeled_dataset(std::size_t n0, std::size_t n1) {
    FeatureSchema s;
    s.label_column = "churn";
    s.features = {{"x", FeatureKind::numeric}};
    std::vector<Value> cells;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        cells.emplace_back(static_cast<double>(i));
        labels.push_back(i < n0 ? 0 : 1);
    }
    return Dataset(s, std::move(cells), std::move(labels));
}

std::multiset<double> row_values(const Dataset& ds) {
    std::multiset<double> out;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) out.insert(ds.numeric_at(r, 0));
    return out;
}

}  // namespace

TEST_CASE("load_csv drops id columns and keeps file order") {
    const Dataset ds = load_csv_text(kToyCsv, toy_schema());
    CHECK(ds.n_features() == 2);
    CHECK(ds.n_rows() == 3);
    CHECK(ds.numeric_at(0, 0) == 12.0);
    CHECK(ds.categorical_at(1, 1) == "annual");
    CHECK(ds.feature_index("id") == -1);
}

TEST_CASE("load_csv parses labels verbatim") {
    const Dataset ds = load_csv_text(kToyCsv, toy_schema());
    CHECK(ds.labels() == std::vector<int>{0, 1, 1});
    CHECK(ds.churn_count() == 2);
}

TEST_CASE("load_csv reports a missing schema column by name") {
    const char* csv = "id,contract,churn\na,monthly,0\n";
    CHECK_THROWS_WITH_AS(load_csv_text(csv, toy_schema()), "missing column: tenure", SchemaError);
}

TEST_CASE("load_csv rejects unparsable numeric cells with the row index") {
    const char* csv = "id,tenure,contract,churn\na,12,monthly,0\nb,oops,annual,1\n";
    CHECK_THROWS_WITH_AS(load_csv_text(csv, toy_schema()),
                         "row 1: cannot parse numeric value 'oops' in column tenure", ParseError);
}

TEST_CASE("load_csv rejects labels outside {0,1}") {
    const char* csv = "id,tenure,contract,churn\na,12,monthly,2\n";
    CHECK_THROWS_AS(load_csv_text(csv, toy_schema()), DataError);
}

TEST_CASE("load_csv handles RFC 4180 quoting") {
    FeatureSchema s;
    s.label_column = "y";
    s.features = {{"note", FeatureKind::categorical}};
    const char* csv = "note,y\n\"hello, \"\"world\"\"\",1\n\"two\nlines\",0\n";
    const Dataset ds = load_csv_text(csv, s);
    REQUIRE(ds.n_rows() == 2);
    CHECK(ds.categorical_at(0, 0) == "hello, \"world\"");
    CHECK(ds.categorical_at(1, 0) == "two\nlines");
}

TEST_CASE("split is deterministic for a fixed seed") {
    const Dataset ds = labeled_dataset(6, 4);
    auto [train_a, test_a] = split(ds, 0.2, 99);
    auto [train_b, test_b] = split(ds, 0.2, 99);
    CHECK(row_values(train_a) == row_values(train_b));
    CHECK(row_values(test_a) == row_values(test_b));
    CHECK(train_a.labels() == train_b.labels());
}

TEST_CASE("split stratifies by label") {
    const Dataset ds = labeled_dataset(2, 2);
    auto [train, test] = split(ds, 0.5, 1);
    REQUIRE(train.n_rows() == 2);
    REQUIRE(test.n_rows() == 2);
    CHECK(train.churn_count() == 1);
    CHECK(test.churn_count() == 1);
}

TEST_CASE("split keeps per-class ratios at the paper's test scale") {
    // 2000 rows at the 860/1140 class balance of the held-out support
    const Dataset ds = labeled_dataset(860, 1140);
    auto [train, test] = split(ds, 0.5, 7);
    CHECK(test.n_rows() == 1000);
    CHECK(test.churn_count() == 570);
    CHECK(train.churn_count() == 570);
}

TEST_CASE("split partitions exhaustively and disjointly") {
    const Dataset ds = labeled_dataset(23, 17);
    auto [train, test] = split(ds, 0.3, 5);
    CHECK(train.n_rows() + test.n_rows() == ds.n_rows());
    std::multiset<double> merged = row_values(train);
    for (double v : row_values(test)) merged.insert(v);
    CHECK(merged == row_values(ds));
}

TEST_CASE("split rejects degenerate fractions") {
    const Dataset ds = labeled_dataset(2, 2);
    CHECK_THROWS_AS(split(ds, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split(ds, 1.0, 1), ConfigError);
    // rounds to an empty test side
    CHECK_THROWS_AS(split(ds, 0.05, 1), DataError);
}

TEST_CASE("generate_synthetic hits the churn count exactly at zero noise") {
    SynthConfig cfg;
    cfg.n_rows = 1000;
    cfg.churn_rate = 0.56;
    cfg.noise_rate = 0.0;
    cfg.n_risk_disjuncts = 4;
    cfg.risk_disjunct_coverage = 0.015;
    const SynthResult res = generate_synthetic(cfg);
    CHECK(res.data.n_rows() == 1000);
    CHECK(res.data.churn_count() == 560);
}

TEST_CASE("generate_synthetic plants disjuncts with the requested coverage") {
    SynthConfig cfg;
    cfg.n_rows = 1000;
    cfg.churn_rate = 0.56;
    cfg.noise_rate = 0.0;
    cfg.n_risk_disjuncts = 8;
    cfg.risk_disjunct_coverage = 0.015;
    const SynthResult res = generate_synthetic(cfg);
    REQUIRE(res.risk_disjuncts.size() == 8);
    // brute-force: planted conjunctions match exactly their own rows
    for (const auto& rule : res.risk_disjuncts) {
        std::size_t matched = 0;
        for (std::size_t r = 0; r < res.data.n_rows(); ++r) {
            if (eval_conjunction(rule.conditions, res.data, r)) {
                ++matched;
                CHECK(res.truth.codes[r] == rule.code);
            }
        }
        CHECK(matched == 15);
    }
}

TEST_CASE("generate_synthetic is bit-identical across calls") {
    SynthConfig cfg;
    cfg.seed = 4242;
    const SynthResult a = generate_synthetic(cfg);
    const SynthResult b = generate_synthetic(cfg);
    REQUIRE(a.data.n_rows() == b.data.n_rows());
    CHECK(a.data.labels() == b.data.labels());
    CHECK(a.truth.codes == b.truth.codes);
    for (std::size_t r = 0; r < a.data.n_rows(); ++r) {
        for (std::size_t f = 0; f < a.data.n_features(); ++f) {
            CHECK(a.data.cell(r, f) == b.data.cell(r, f));
        }
    }
}

TEST_CASE("generate_synthetic rejects an impossible coverage budget") {
    SynthConfig cfg;
    cfg.churn_rate = 0.1;
    cfg.n_risk_disjuncts = 8;
    cfg.risk_disjunct_coverage = 0.05;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}

TEST_CASE("synthetic truth is consistent with planted structure at zero noise") {
    SynthConfig cfg;
    cfg.n_rows = 1200;
    cfg.churn_rate = 0.5;
    cfg.noise_rate = 0.0;
    cfg.n_safety_patterns = 2;
    cfg.n_risk_disjuncts = 4;
    cfg.risk_disjunct_coverage = 0.03;
    const SynthResult res = generate_synthetic(cfg);

    std::map<int, const PlantedRule*> by_code;
    for (const auto& p : res.safety_patterns) by_code[p.code] = &p;
    for (const auto& d : res.risk_disjuncts) by_code[d.code] = &d;

    for (std::size_t r = 0; r < res.data.n_rows(); ++r) {
        const int code = res.truth.codes[r];
        if (code == kDriftCode) {
            // drift matches no planted pattern and no planted disjunct
            for (const auto& p : res.safety_patterns) {
                CHECK_FALSE(eval_conjunction(p.conditions, res.data, r));
            }
            for (const auto& d : res.risk_disjuncts) {
                CHECK_FALSE(eval_conjunction(d.conditions, res.data, r));
            }
        } else {
            REQUIRE(by_code.count(code) == 1);
            CHECK(eval_conjunction(by_code[code]->conditions, res.data, r));
            CHECK(res.data.labels()[r] == (code >= kMinRiskCode ? 1 : 0));
        }
    }
}

TEST_CASE("noise flips labels but keeps features re-derivable") {
    SynthConfig cfg;
    cfg.n_rows = 800;
    cfg.churn_rate = 0.5;
    cfg.noise_rate = 0.1;
    cfg.seed = 11;
    const SynthResult noisy = generate_synthetic(cfg);
    cfg.noise_rate = 0.0;
    const SynthResult clean = generate_synthetic(cfg);

    // same seed, same features; only labels and truth codes differ
    REQUIRE(noisy.data.n_rows() == clean.data.n_rows());
    for (std::size_t r = 0; r < noisy.data.n_rows(); ++r) {
        for (std::size_t f = 0; f < noisy.data.n_features(); ++f) {
            CHECK(noisy.data.cell(r, f) == clean.data.cell(r, f));
        }
    }
    std::size_t flips = 0;
    for (std::size_t r = 0; r < noisy.data.n_rows(); ++r) {
        flips += noisy.data.labels()[r] != clean.data.labels()[r] ? 1 : 0;
    }
    CHECK(flips == 80);
}
