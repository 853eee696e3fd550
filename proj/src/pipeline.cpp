#include "rulefuse/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "rulefuse/csv.hpp"
#include "rulefuse/error.hpp"
#include "rulefuse/text.hpp"

namespace rulefuse {

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
}

void write_artifact(const std::string& path, const char* kind, nlohmann::json body) {
    body["version"] = kArtifactVersion;
    body["kind"] = kind;
    write_text(path, body.dump(2) + "\n");
}

bool has_rules(const PipelineConfig& cfg) {
    return !cfg.rules_path.empty() && cfg.rules_path != "none";
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    if (j.contains("data")) {
        const auto& d = j["data"];
        if (d.contains("csv")) cfg.csv_path = d["csv"].get<std::string>();
        if (d.contains("schema")) cfg.schema_path = d["schema"].get<std::string>();
        if (d.contains("rules")) cfg.rules_path = d["rules"].get<std::string>();
    }
    if (j.contains("split")) {
        const auto& s = j["split"];
        if (s.contains("test_fraction")) cfg.test_fraction = s["test_fraction"].get<double>();
        if (s.contains("seed")) cfg.split_seed = s["seed"].get<std::uint64_t>();
    }
    if (j.contains("binarizer") && j["binarizer"].contains("n_quantiles")) {
        cfg.n_quantiles = j["binarizer"]["n_quantiles"].get<int>();
    }
    if (j.contains("lrr")) {
        const auto& l = j["lrr"];
        if (l.contains("lambda1") && !l["lambda1"].is_null()) cfg.lambda1 = l["lambda1"].get<double>();
        if (l.contains("lambda2") && !l["lambda2"].is_null()) cfg.lambda2 = l["lambda2"].get<double>();
        if (l.contains("tol")) cfg.lrr_tol = l["tol"].get<double>();
        if (l.contains("max_iters")) cfg.lrr_max_iters = l["max_iters"].get<std::size_t>();
        if (l.contains("max_degree")) cfg.max_degree = l["max_degree"].get<int>();
        if (l.contains("max_pairs")) cfg.max_pairs = l["max_pairs"].get<std::size_t>();
    }
    if (j.contains("pareto")) {
        const auto& p = j["pareto"];
        if (p.contains("min_coverage")) cfg.min_coverage = p["min_coverage"].get<double>();
        if (p.contains("max_jaccard")) cfg.max_jaccard = p["max_jaccard"].get<double>();
    }
    if (j.contains("explain") && j["explain"].contains("precedence")) {
        cfg.precedence = precedence_from_string(j["explain"]["precedence"].get<std::string>());
    }
    if (j.contains("ted")) {
        const auto& t = j["ted"];
        if (t.contains("learning_rate")) cfg.ted.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("epochs")) cfg.ted.epochs = t["epochs"].get<std::size_t>();
        if (t.contains("l2")) cfg.ted.l2 = t["l2"].get<double>();
        if (t.contains("seed")) cfg.ted.seed = t["seed"].get<std::uint64_t>();
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        if (s.contains("n_rows")) cfg.synth.n_rows = s["n_rows"].get<std::size_t>();
        if (s.contains("churn_rate")) cfg.synth.churn_rate = s["churn_rate"].get<double>();
        if (s.contains("n_safety_patterns")) {
            cfg.synth.n_safety_patterns = s["n_safety_patterns"].get<std::size_t>();
        }
        if (s.contains("n_risk_disjuncts")) {
            cfg.synth.n_risk_disjuncts = s["n_risk_disjuncts"].get<std::size_t>();
        }
        if (s.contains("risk_disjunct_coverage")) {
            cfg.synth.risk_disjunct_coverage = s["risk_disjunct_coverage"].get<double>();
        }
        if (s.contains("noise_rate")) cfg.synth.noise_rate = s["noise_rate"].get<double>();
        if (s.contains("seed")) cfg.synth.seed = s["seed"].get<std::uint64_t>();
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config file ") + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["data"] = {{"csv", csv_path}, {"schema", schema_path}, {"rules", rules_path}};
    j["split"] = {{"test_fraction", test_fraction}, {"seed", split_seed}};
    j["binarizer"] = {{"n_quantiles", n_quantiles}};
    j["lrr"] = {{"lambda1", lambda1 ? nlohmann::json(*lambda1) : nlohmann::json()},
                {"lambda2", lambda2 ? nlohmann::json(*lambda2) : nlohmann::json()},
                {"tol", lrr_tol},
                {"max_iters", lrr_max_iters},
                {"max_degree", max_degree},
                {"max_pairs", max_pairs}};
    j["pareto"] = {{"min_coverage", min_coverage}, {"max_jaccard", max_jaccard}};
    j["explain"] = {{"precedence", precedence_to_string(precedence)}};
    j["ted"] = {{"learning_rate", ted.learning_rate},
                {"epochs", ted.epochs},
                {"l2", ted.l2},
                {"seed", ted.seed}};
    j["synth"] = {{"n_rows", synth.n_rows},
                  {"churn_rate", synth.churn_rate},
                  {"n_safety_patterns", synth.n_safety_patterns},
                  {"n_risk_disjuncts", synth.n_risk_disjuncts},
                  {"risk_disjunct_coverage", synth.risk_disjunct_coverage},
                  {"noise_rate", synth.noise_rate},
                  {"seed", synth.seed}};
    return j;
}

nlohmann::json safety_tiers_to_json(const SafetyTiers& tiers, const RuleModel& model) {
    nlohmann::json tiers_json = nlohmann::json::object();
    for (const auto& [code, rules] : tiers.tiers) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& cand : rules) {
            std::vector<AtomicPredicate> preds;
            for (std::size_t a : cand.atoms) preds.push_back(model.column_layout[a]);
            arr.push_back({{"atoms", cand.atoms}, {"rule", conjunction_repr(preds)}});
        }
        tiers_json[std::to_string(code)] = arr;
    }
    return {{"tiers", tiers_json},
            {"cutoffs", {tiers.tier_cutoffs[0], tiers.tier_cutoffs[1]}}};
}

SafetyTiers safety_tiers_from_json(const nlohmann::json& j) {
    SafetyTiers tiers;
    for (const auto& [code_str, arr] : j.at("tiers").items()) {
        const int code = std::stoi(code_str);
        for (const auto& item : arr) {
            RuleCandidate cand;
            cand.atoms = item.at("atoms").get<std::vector<std::size_t>>();
            tiers.tiers[code].push_back(std::move(cand));
        }
    }
    tiers.tier_cutoffs[0] = j.at("cutoffs")[0].get<double>();
    tiers.tier_cutoffs[1] = j.at("cutoffs")[1].get<double>();
    return tiers;
}

void write_explanations_csv(const ExplanationVector& train, const ExplanationVector& test,
                            const std::string& path) {
    std::string out = "split,row_index,code,provenance\n";
    for (std::size_t i = 0; i < train.size(); ++i) {
        out += "train," + std::to_string(i) + ',' + std::to_string(train.codes[i]) + ',' +
               csv_escape(train.provenance[i]) + '\n';
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
        out += "test," + std::to_string(i) + ',' + std::to_string(test.codes[i]) + ',' +
               csv_escape(test.provenance[i]) + '\n';
    }
    write_text(path, out);
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
    auto stage = [](const char* name, const std::string& detail) {
        return std::string(name) + ": " + detail;
    };

    PipelineResult result;

    // data
    FeatureSchema schema;
    Dataset train, test;
    try {
        schema = FeatureSchema::load(cfg.schema_path);
        const Dataset ds = load_csv(cfg.csv_path, schema);
        auto parts = split(ds, cfg.test_fraction, cfg.split_seed);
        train = std::move(parts.first);
        test = std::move(parts.second);
    } catch (const Error& e) {
        throw DataError(stage("data", e.what()));
    }

    // binarize
    BinarizedMatrix bm_train;
    try {
        result.binarizer = fit_binarizer(train, cfg.n_quantiles);
        bm_train = binarize(result.binarizer, train);
    } catch (const Error& e) {
        throw DataError(stage("binarizer", e.what()));
    }

    // lrr
    try {
        const auto candidates =
            enumerate_candidates(bm_train, train.labels(), cfg.max_degree, cfg.max_pairs);
        const RuleMatrix rm = build_rule_matrix(bm_train, candidates);
        const std::vector<double> y = labels_as_reals(train.labels());
        LrrFitOptions opt;
        opt.lambda1 = cfg.lambda1 ? *cfg.lambda1 : default_lambda1(y, rm);
        opt.lambda2 = cfg.lambda2 ? *cfg.lambda2 : opt.lambda1 / 4.0;
        opt.tol = cfg.lrr_tol;
        opt.max_iters = cfg.lrr_max_iters;
        result.rule_model = fit_lrr(y, rm, candidates, bm_train.columns, opt);
        result.tiers = extract_safety_tiers(result.rule_model);
    } catch (const Error& e) {
        throw DataError(stage("lrr", e.what()));
    }

    // expert rules + pareto filter
    RiskRuleSet kept_rules;
    try {
        RiskRuleSet rules;
        if (has_rules(cfg)) {
            rules = load_rules(cfg.rules_path);
            bind_rules(rules, schema);
        }
        result.selection = select_rules(rules, train, cfg.min_coverage, cfg.max_jaccard);
        for (const auto& stats : result.selection.kept) kept_rules.rules.push_back(stats.rule);
    } catch (const ParseError&) {
        throw;  // rule-file syntax errors keep their line diagnostics
    } catch (const Error& e) {
        throw DataError(stage("pareto", e.what()));
    }

    // explanation matrix
    try {
        result.train_explanations =
            build_explanations(train, result.tiers, result.binarizer, kept_rules, cfg.precedence);
        result.test_explanations =
            build_explanations(test, result.tiers, result.binarizer, kept_rules, cfg.precedence);
    } catch (const Error& e) {
        throw DataError(stage("explain", e.what()));
    }

    // ted
    try {
        result.ted = fit_ted(bm_train, train.labels(), result.train_explanations, cfg.ted);
        const BinarizedMatrix bm_test = binarize(result.binarizer, test);
        result.train_report = evaluate(result.ted, bm_train, train.labels(), result.train_explanations);
        result.test_report = evaluate(result.ted, bm_test, test.labels(), result.test_explanations);
    } catch (const Error& e) {
        throw DataError(stage("ted", e.what()));
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto path = [&](const char* name) { return out_dir + "/" + name; };
        write_artifact(path("binarizer.json"), "binarizer", result.binarizer.to_json());
        nlohmann::json lrr_json = result.rule_model.to_json();
        lrr_json["safety_tiers"] = safety_tiers_to_json(result.tiers, result.rule_model);
        write_artifact(path("lrr.json"), "rule_model", lrr_json);
        write_artifact(path("selection.json"), "selection", result.selection.to_json());
        write_explanations_csv(result.train_explanations, result.test_explanations,
                               path("explanations.csv"));
        write_artifact(path("ted.json"), "ted_model", result.ted.to_json());

        auto hist_json = [](const ExplanationVector& ev) {
            nlohmann::json h = nlohmann::json::object();
            const auto counts = ev.histogram();
            for (int c = 1; c <= kDriftCode; ++c) {
                h[std::to_string(c)] = counts[static_cast<std::size_t>(c)];
            }
            return h;
        };
        write_artifact(path("report.json"), "report",
                       {{"train", result.train_report.to_json()},
                        {"test", result.test_report.to_json()},
                        {"train_code_histogram", hist_json(result.train_explanations)},
                        {"test_code_histogram", hist_json(result.test_explanations)},
                        {"kept_rule_count", result.kept_rule_count()},
                        {"config", cfg.to_json()}});
    }
    return result;
}

std::vector<FrontierRow> run_frontier(const PipelineConfig& cfg,
                                      const std::vector<std::pair<std::string, std::string>>& subsets,
                                      const std::string& out_dir) {
    if (subsets.size() < 2) {
        throw ConfigError("frontier needs at least 2 rule subsets, got " +
                          std::to_string(subsets.size()));
    }
    std::vector<FrontierRow> rows;
    for (const auto& [name, rules_path] : subsets) {
        PipelineConfig sub_cfg = cfg;
        sub_cfg.rules_path = rules_path;
        const std::string sub_dir = out_dir.empty() ? out_dir : out_dir + "/" + name;
        const PipelineResult res = run_pipeline(sub_cfg, sub_dir);
        rows.push_back({name, res.kept_rule_count(), res.test_report.y_accuracy,
                        res.test_report.e_accuracy, res.test_report.ye_accuracy});
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text(out_dir + "/frontier.csv", frontier_csv(rows));
    }
    return rows;
}

std::string frontier_csv(const std::vector<FrontierRow>& rows) {
    std::string out = "configuration,rule_count,y_acc,e_acc,ye_acc\n";
    for (const auto& r : rows) {
        out += csv_escape(r.configuration) + ',' + std::to_string(r.rule_count) + ',' +
               format_double(r.y_accuracy) + ',' + format_double(r.e_accuracy) + ',' +
               format_double(r.ye_accuracy) + '\n';
    }
    return out;
}

}  // namespace rulefuse
