#include "rulefuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "rulefuse/csv.hpp"
#include "rulefuse/error.hpp"
#include "rulefuse/rng.hpp"
#include "rulefuse/text.hpp"

namespace rulefuse {

namespace {

struct NumDraw {
    std::string feature;
    std::vector<double> values;
};
struct CatDraw {
    std::string feature;
    std::vector<std::string> values;
};

struct Region {
    std::vector<AtomicPredicate> conditions;
    std::vector<NumDraw> num_draws;
    std::vector<CatDraw> cat_draws;
};

struct TriggerSpec {
    std::string name;
    std::string quadrant;
    Region region;
};

// Background value pools. Pattern-range values appear in the background too
// (repeats weight the draw), so telling a pattern member from a lookalike
// needs the full conjunction; no single atom gives membership away. Trigger
// ranges are excluded from the background: a trigger fires only on rows
// planted inside its disjunct.
FeatureSchema synth_schema() {
    FeatureSchema s;
    s.label_column = "churn";
    s.id_columns = {"customer_id"};
    s.features = {
        {"tenure", FeatureKind::numeric},        {"monthly_spend", FeatureKind::numeric},
        {"support_calls", FeatureKind::numeric}, {"payment_delay", FeatureKind::numeric},
        {"usage_hours", FeatureKind::numeric},   {"contract", FeatureKind::categorical},
        {"autopay", FeatureKind::categorical},   {"plan", FeatureKind::categorical},
    };
    return s;
}

const std::vector<NumDraw>& background_numeric() {
    // boundary values (24, 50, 1, 30) carry extra weight so a decile always
    // lands in their block and the planted thresholds stay binarizable
    static const std::vector<NumDraw> bg = {
        {"tenure", {1, 3, 6, 12, 18, 24, 24, 36, 48, 60, 72}},
        {"monthly_spend", {20, 30, 30, 60, 75, 90, 110, 130, 150}},
        {"support_calls", {0, 0, 1, 1, 2, 3, 4, 5, 6, 7}},
        {"payment_delay", {0, 2, 5, 8, 12, 16, 21, 27}},
        {"usage_hours", {5, 10, 20, 30, 40, 50, 50, 60, 75, 90}},
    };
    return bg;
}

const std::vector<CatDraw>& background_categorical() {
    static const std::vector<CatDraw> bg = {
        {"contract", {"monthly", "annual", "two_year"}},
        {"autopay", {"yes", "no"}},
        {"plan", {"basic", "plus", "premium"}},
    };
    return bg;
}

AtomicPredicate num_pred(const std::string& f, Comparator op, double t) {
    return {f, op, t, ""};
}
AtomicPredicate cat_pred(const std::string& f, Comparator op, const std::string& c) {
    return {f, op, 0.0, c};
}

// Dense stay patterns, in library order.
const std::vector<Region>& pattern_library() {
    static const std::vector<Region> lib = {
        {{num_pred("tenure", Comparator::gt, 24), cat_pred("contract", Comparator::eq, "two_year")},
         {{"tenure", {36, 48, 60, 72}}},
         {{"contract", {"two_year"}}}},
        {{num_pred("usage_hours", Comparator::gt, 50), num_pred("support_calls", Comparator::le, 1)},
         {{"usage_hours", {60, 75, 90}}, {"support_calls", {0, 1}}},
         {}},
        {{cat_pred("plan", Comparator::eq, "premium"), num_pred("tenure", Comparator::gt, 24)},
         {{"tenure", {36, 48, 60, 72}}},
         {{"plan", {"premium"}}}},
        {{num_pred("monthly_spend", Comparator::le, 40), num_pred("usage_hours", Comparator::gt, 50)},
         {{"monthly_spend", {20, 30}}, {"usage_hours", {60, 75, 90}}},
         {}},
    };
    return lib;
}

// Sparse churn triggers, in library order. The first four span the four
// behavioural quadrants and alternate between the first two patterns.
// Trigger values never satisfy a pattern condition on the same feature, so
// planted safety atoms stay clean of trigger rows.
const std::vector<TriggerSpec>& trigger_library() {
    static const std::vector<TriggerSpec> lib = {
        {"late_payment", "financial",
         {{num_pred("payment_delay", Comparator::gt, 38)}, {{"payment_delay", {40, 50, 60}}}, {}}},
        {"contract_suspension", "structural",
         {{cat_pred("contract", Comparator::eq, "suspended")}, {}, {{"contract", {"suspended"}}}}},
        {"usage_collapse", "engagement",
         {{num_pred("usage_hours", Comparator::le, 2)}, {{"usage_hours", {1, 2}}}, {}}},
        {"autopay_failure", "interaction",
         {{cat_pred("autopay", Comparator::eq, "failed")}, {}, {{"autopay", {"failed"}}}}},
        {"support_storm", "interaction",
         {{num_pred("support_calls", Comparator::gt, 7)}, {{"support_calls", {9, 10}}}, {}}},
        {"bill_shock", "financial",
         {{num_pred("monthly_spend", Comparator::gt, 150)}, {{"monthly_spend", {175, 200}}}, {}}},
        {"payment_wobble", "financial",
         {{num_pred("payment_delay", Comparator::gt, 33), num_pred("payment_delay", Comparator::le, 38)},
          {{"payment_delay", {35, 38}}},
          {}}},
        {"legacy_plan", "structural",
         {{cat_pred("plan", Comparator::eq, "legacy")}, {}, {{"plan", {"legacy"}}}}},
    };
    return lib;
}

bool value_satisfies(const AtomicPredicate& cond, double v) {
    return cond.op == Comparator::le ? v <= cond.threshold : v > cond.threshold;
}
bool value_satisfies(const AtomicPredicate& cond, const std::string& v) {
    return cond.op == Comparator::eq ? v == cond.category : v != cond.category;
}

// A trigger is compatible with a pattern when the trigger's pinned values do
// not break any pattern condition on a shared feature.
bool compatible(const Region& pattern, const Region& trigger) {
    for (const auto& cond : pattern.conditions) {
        for (const auto& nd : trigger.num_draws) {
            if (nd.feature != cond.feature) continue;
            for (double v : nd.values) {
                if (!value_satisfies(cond, v)) return false;
            }
        }
        for (const auto& cd : trigger.cat_draws) {
            if (cd.feature != cond.feature) continue;
            for (const auto& v : cd.values) {
                if (!value_satisfies(cond, v)) return false;
            }
        }
    }
    return true;
}

void apply_region(const Region& region, const FeatureSchema& schema, std::vector<Value>& row,
                  Rng& rng) {
    for (const auto& nd : region.num_draws) {
        const auto idx = static_cast<std::size_t>(schema.feature_index(nd.feature));
        row[idx] = nd.values[rng.bounded(nd.values.size())];
    }
    for (const auto& cd : region.cat_draws) {
        const auto idx = static_cast<std::size_t>(schema.feature_index(cd.feature));
        row[idx] = cd.values[rng.bounded(cd.values.size())];
    }
}

bool row_matches(const Region& region, const FeatureSchema& schema, const std::vector<Value>& row) {
    for (const auto& cond : region.conditions) {
        const auto idx = static_cast<std::size_t>(schema.feature_index(cond.feature));
        if (cond.is_numeric_op()) {
            if (!value_satisfies(cond, std::get<double>(row[idx]))) return false;
        } else if (!value_satisfies(cond, std::get<std::string>(row[idx]))) {
            return false;
        }
    }
    return true;
}

void redraw_background(const std::string& feature, const FeatureSchema& schema,
                       std::vector<Value>& row, Rng& rng) {
    const auto idx = static_cast<std::size_t>(schema.feature_index(feature));
    for (const auto& nd : background_numeric()) {
        if (nd.feature == feature) {
            row[idx] = nd.values[rng.bounded(nd.values.size())];
            return;
        }
    }
    for (const auto& cd : background_categorical()) {
        if (cd.feature == feature) {
            row[idx] = cd.values[rng.bounded(cd.values.size())];
            return;
        }
    }
}

// Redraws the pattern's unpinned condition features until the conjunction no
// longer matches, so lookalike rows never collide with a planted region.
void break_pattern(const Region& pattern, const std::set<std::string>& pinned,
                   const FeatureSchema& schema, std::vector<Value>& row, Rng& rng) {
    for (int attempt = 0; row_matches(pattern, schema, row); ++attempt) {
        if (attempt > 1000) throw ConfigError("cannot break pattern: all condition features pinned");
        for (const auto& cond : pattern.conditions) {
            if (!pinned.count(cond.feature)) redraw_background(cond.feature, schema, row, rng);
        }
    }
}

std::set<std::string> region_features(const Region& region) {
    std::set<std::string> out;
    for (const auto& nd : region.num_draws) out.insert(nd.feature);
    for (const auto& cd : region.cat_draws) out.insert(cd.feature);
    return out;
}

std::vector<PlantedRule> build_anxiety_rules(const std::vector<PlantedRule>& disjuncts) {
    // Over-specific narrowings of real triggers; statistically marginal by
    // construction. Candidate i narrows trigger i when it exists.
    struct Extra {
        std::size_t base;
        AtomicPredicate cond;
        const char* name;
    };
    static const std::vector<Extra> extras = {
        {0, num_pred("support_calls", Comparator::gt, 6), "anxiety_angry_late_payer"},
        {1, num_pred("monthly_spend", Comparator::gt, 140), "anxiety_big_bill_suspension"},
        {2, num_pred("payment_delay", Comparator::gt, 20), "anxiety_idle_and_late"},
        {3, num_pred("usage_hours", Comparator::gt, 89), "anxiety_heavy_autopay_failure"},
    };
    std::vector<PlantedRule> out;
    int next_code = kMinRiskCode + static_cast<int>(disjuncts.size());
    for (const auto& ex : extras) {
        if (next_code > kMaxRiskCode) break;
        if (ex.base >= disjuncts.size()) continue;
        PlantedRule r;
        r.name = ex.name;
        r.code = next_code++;
        r.quadrant = disjuncts[ex.base].quadrant;
        r.conditions = disjuncts[ex.base].conditions;
        r.conditions.push_back(ex.cond);
        if (r.conditions.size() > 4) {
            throw ConfigError("anxiety rule " + r.name + " exceeds 4 conditions");
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_rows == 0) throw ConfigError("n_rows must be positive");
    if (!(churn_rate > 0.0 && churn_rate < 1.0)) throw ConfigError("churn_rate must lie in (0,1)");
    if (n_safety_patterns < 1) throw ConfigError("n_safety_patterns must be >= 1");
    if (n_safety_patterns > pattern_library().size()) {
        throw ConfigError("n_safety_patterns exceeds the pattern library (max " +
                          std::to_string(pattern_library().size()) + ")");
    }
    if (n_risk_disjuncts > trigger_library().size()) {
        throw ConfigError("n_risk_disjuncts exceeds explanation codes 4..11 (max " +
                          std::to_string(trigger_library().size()) + ")");
    }
    if (risk_disjunct_coverage < 0.0) throw ConfigError("risk_disjunct_coverage must be >= 0");
    if (!(noise_rate >= 0.0 && noise_rate < 0.5)) throw ConfigError("noise_rate must lie in [0,0.5)");
    const double budget = static_cast<double>(n_risk_disjuncts) * risk_disjunct_coverage;
    if (budget > churn_rate + 1e-12) {
        throw ConfigError("coverage budget exceeded: disjuncts claim " + format_double(budget) +
                          " of rows but churn_rate is " + format_double(churn_rate));
    }
}

SynthResult generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const FeatureSchema schema = synth_schema();
    const auto& patterns = pattern_library();
    const auto& triggers = trigger_library();

    const auto n = cfg.n_rows;
    const auto n_churn = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * cfg.churn_rate));
    const auto per_disjunct = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * cfg.risk_disjunct_coverage));
    const std::size_t disjunct_total = per_disjunct * cfg.n_risk_disjuncts;
    if (disjunct_total > n_churn) {
        throw ConfigError("coverage budget exceeded after rounding");
    }
    const std::size_t n_drift = n_churn - disjunct_total;
    const std::size_t n_stay = n - n_churn;

    // pattern index per disjunct, skipping ones the trigger would break
    std::vector<int> pattern_of(cfg.n_risk_disjuncts, -1);
    for (std::size_t d = 0; d < cfg.n_risk_disjuncts; ++d) {
        for (std::size_t k = 0; k < cfg.n_safety_patterns; ++k) {
            const std::size_t p = (d + k) % cfg.n_safety_patterns;
            if (compatible(patterns[p], triggers[d].region)) {
                pattern_of[d] = static_cast<int>(p);
                break;
            }
        }
    }

    SynthResult result;
    for (std::size_t p = 0; p < cfg.n_safety_patterns; ++p) {
        PlantedRule r;
        r.name = "pattern_" + std::to_string(p);
        r.code = 1 + static_cast<int>(p % 3);
        r.conditions = patterns[p].conditions;
        result.safety_patterns.push_back(std::move(r));
    }
    for (std::size_t d = 0; d < cfg.n_risk_disjuncts; ++d) {
        PlantedRule r;
        r.name = triggers[d].name;
        r.code = kMinRiskCode + static_cast<int>(d);
        r.quadrant = triggers[d].quadrant;
        if (pattern_of[d] >= 0) {
            r.conditions = patterns[static_cast<std::size_t>(pattern_of[d])].conditions;
        }
        for (const auto& c : triggers[d].region.conditions) r.conditions.push_back(c);
        if (r.conditions.size() > 4) {
            throw ConfigError("planted rule " + r.name + " exceeds 4 conditions");
        }
        result.risk_disjuncts.push_back(std::move(r));
    }
    result.anxiety_rules = build_anxiety_rules(result.risk_disjuncts);

    Rng rng(cfg.seed);
    const std::size_t nf = schema.features.size();
    std::vector<Value> cells;
    cells.reserve(n * nf);
    std::vector<int> labels;
    labels.reserve(n);
    ExplanationVector truth;
    truth.codes.reserve(n);
    truth.provenance.reserve(n);

    auto background_row = [&](std::vector<Value>& row) {
        row.clear();
        row.resize(nf);
        for (const auto& nd : background_numeric()) {
            const auto idx = static_cast<std::size_t>(schema.feature_index(nd.feature));
            row[idx] = nd.values[rng.bounded(nd.values.size())];
        }
        for (const auto& cd : background_categorical()) {
            const auto idx = static_cast<std::size_t>(schema.feature_index(cd.feature));
            row[idx] = cd.values[rng.bounded(cd.values.size())];
        }
    };

    std::vector<Value> row;
    auto emit = [&](int label, int code, const std::string& prov) {
        for (auto& v : row) cells.push_back(std::move(v));
        labels.push_back(label);
        truth.codes.push_back(code);
        truth.provenance.push_back(prov);
    };

    // stay rows, spread over the active patterns; lookalikes of other
    // patterns are redrawn away so the truth codes stay exact
    for (std::size_t p = 0; p < cfg.n_safety_patterns; ++p) {
        const std::set<std::string> pinned = region_features(patterns[p]);
        std::size_t count = n_stay / cfg.n_safety_patterns;
        if (p < n_stay % cfg.n_safety_patterns) ++count;
        for (std::size_t i = 0; i < count; ++i) {
            background_row(row);
            apply_region(patterns[p], schema, row, rng);
            for (std::size_t q = 0; q < cfg.n_safety_patterns; ++q) {
                if (q != p) break_pattern(patterns[q], pinned, schema, row, rng);
            }
            emit(0, result.safety_patterns[p].code,
                 "tier" + std::to_string(result.safety_patterns[p].code));
        }
    }
    // churn rows inside planted disjuncts: pattern context plus trigger
    for (std::size_t d = 0; d < cfg.n_risk_disjuncts; ++d) {
        for (std::size_t i = 0; i < per_disjunct; ++i) {
            background_row(row);
            if (pattern_of[d] >= 0) {
                apply_region(patterns[static_cast<std::size_t>(pattern_of[d])], schema, row, rng);
            }
            apply_region(triggers[d].region, schema, row, rng);
            emit(1, kMinRiskCode + static_cast<int>(d), triggers[d].name);
        }
    }
    // unexplained churn: background rows kept clear of every pattern
    for (std::size_t i = 0; i < n_drift; ++i) {
        background_row(row);
        for (std::size_t q = 0; q < cfg.n_safety_patterns; ++q) {
            break_pattern(patterns[q], {}, schema, row, rng);
        }
        emit(1, kDriftCode, "drift");
    }

    // deterministic shuffle of row order
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<Value> shuffled_cells(n * nf);
    std::vector<int> shuffled_labels(n);
    ExplanationVector shuffled_truth;
    shuffled_truth.codes.resize(n);
    shuffled_truth.provenance.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = order[i];
        for (std::size_t f = 0; f < nf; ++f) shuffled_cells[i * nf + f] = cells[src * nf + f];
        shuffled_labels[i] = labels[src];
        shuffled_truth.codes[i] = truth.codes[src];
        shuffled_truth.provenance[i] = truth.provenance[src];
    }

    // label noise: flipped rows become truth-code 12 (their planted story no
    // longer explains their label)
    const auto n_noise = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * cfg.noise_rate));
    for (std::size_t idx : rng.sample_indices(n, n_noise)) {
        shuffled_labels[idx] = 1 - shuffled_labels[idx];
        shuffled_truth.codes[idx] = kDriftCode;
        shuffled_truth.provenance[idx] = "drift";
    }

    result.data = Dataset(schema, std::move(shuffled_cells), std::move(shuffled_labels));
    result.truth = std::move(shuffled_truth);
    return result;
}

std::string render_rules_dsl(const std::vector<PlantedRule>& rules) {
    std::string out;
    for (const auto& r : rules) {
        if (r.code < kMinRiskCode || r.code > kMaxRiskCode) {
            throw ConfigError("rule " + r.name + " has code " + std::to_string(r.code) +
                              " outside the DSL range 4..11");
        }
        out += "rule \"" + r.name + "\" code " + std::to_string(r.code) + " quadrant " + r.quadrant +
               ": " + conjunction_repr(r.conditions) + "\n";
    }
    return out;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << "customer_id";
    for (const auto& f : ds.schema().features) out << ',' << csv_escape(f.name);
    out << ',' << csv_escape(ds.schema().label_column) << '\n';
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        out << "C" << (100000 + r);
        for (std::size_t f = 0; f < ds.n_features(); ++f) {
            out << ',';
            if (ds.schema().is_numeric(f)) out << format_double(ds.numeric_at(r, f));
            else out << csv_escape(ds.categorical_at(r, f));
        }
        out << ',' << ds.labels()[r] << '\n';
    }
}

void write_truth_csv(const ExplanationVector& truth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << "row_index,code,provenance\n";
    for (std::size_t i = 0; i < truth.size(); ++i) {
        out << i << ',' << truth.codes[i] << ',' << csv_escape(truth.provenance[i]) << '\n';
    }
}

void write_schema_json(const FeatureSchema& schema, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << schema.to_json().dump(2) << '\n';
}

}  // namespace rulefuse
