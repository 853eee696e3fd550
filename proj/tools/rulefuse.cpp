#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rulefuse/error.hpp"
#include "rulefuse/pipeline.hpp"
#include "rulefuse/text.hpp"

namespace {

using namespace rulefuse;

PipelineConfig load_config_or_default(const std::string& config_path) {
    if (config_path.empty()) return PipelineConfig{};
    return PipelineConfig::load(config_path);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
}

int cmd_synth(const PipelineConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const SynthResult synth = generate_synthetic(cfg.synth);

    write_dataset_csv(synth.data, out_dir + "/data.csv");
    write_schema_json(synth.data.schema(), out_dir + "/schema.json");
    write_truth_csv(synth.truth, out_dir + "/truth.csv");
    if (!synth.risk_disjuncts.empty()) {
        write_file(out_dir + "/planted.rules", render_rules_dsl(synth.risk_disjuncts));
        std::vector<PlantedRule> golden(
            synth.risk_disjuncts.begin(),
            synth.risk_disjuncts.begin() +
                std::min<std::size_t>(4, synth.risk_disjuncts.size()));
        write_file(out_dir + "/golden.rules", render_rules_dsl(golden));
        std::vector<PlantedRule> manual = golden;
        manual.insert(manual.end(), synth.anxiety_rules.begin(), synth.anxiety_rules.end());
        write_file(out_dir + "/manual.rules", render_rules_dsl(manual));
    }

    const auto hist = synth.truth.histogram();
    std::cout << "generated " << synth.data.n_rows() << " rows ("
              << synth.data.churn_count() << " churn) into " << out_dir << "\n";
    std::cout << "truth codes:";
    for (int c = 1; c <= kDriftCode; ++c) {
        if (hist[static_cast<std::size_t>(c)] > 0) {
            std::cout << " " << c << ":" << hist[static_cast<std::size_t>(c)];
        }
    }
    std::cout << "\n";
    return 0;
}

int cmd_run(const PipelineConfig& cfg, const std::string& out_dir) {
    const PipelineResult result = run_pipeline(cfg, out_dir);
    for (const auto& w : result.ted.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "kept expert rules: " << result.kept_rule_count() << "\n";
    std::cout << "safety rules (tiers 1-3): " << result.tiers.rule_count() << "\n\n";
    std::cout << "held-out evaluation\n" << result.test_report.to_table();
    if (!out_dir.empty()) std::cout << "\nartifacts written to " << out_dir << "\n";
    return 0;
}

int cmd_frontier(const PipelineConfig& cfg, const std::vector<std::string>& subset_args,
                 const std::string& out_dir) {
    std::vector<std::pair<std::string, std::string>> subsets;
    for (const auto& arg : subset_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--subset expects name=path, got '" + arg + "'");
        }
        subsets.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
    }
    const auto rows = run_frontier(cfg, subsets, out_dir);
    std::cout << frontier_csv(rows);
    if (!out_dir.empty()) std::cout << "\nartifacts written to " << out_dir << "\n";
    return 0;
}

int cmd_inspect(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open artifact: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    const std::string kind = j.value("kind", "unknown");
    std::cout << "kind: " << kind << " (version " << j.value("version", 0) << ")\n";

    if (kind == "report") {
        std::cout << "\ntrain\n" << EvalReport::from_json(j.at("train")).to_table();
        std::cout << "\nheld-out\n" << EvalReport::from_json(j.at("test")).to_table();
        std::cout << "\nkept expert rules: " << j.value("kept_rule_count", 0) << "\n";
    } else if (kind == "rule_model") {
        std::cout << "intercept " << j.at("intercept").get<double>() << ", lambda1 "
                  << j.at("lambda1").get<double>() << ", lambda2 " << j.at("lambda2").get<double>()
                  << ", converged " << (j.at("converged").get<bool>() ? "yes" : "no") << "\n";
        struct Row {
            double weight;
            std::string rule;
        };
        std::vector<Row> rows;
        for (const auto& c : j.at("candidates")) {
            const double w = c.at("weight").get<double>();
            if (w != 0.0) rows.push_back({w, c.at("rule").get<std::string>()});
        }
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.weight < b.weight; });
        std::cout << rows.size() << " active rules:\n";
        for (const auto& r : rows) std::cout << "  " << format_double(r.weight) << "  " << r.rule << "\n";
    } else if (kind == "selection") {
        std::cout << "kept:\n";
        for (const auto& k : j.at("kept")) {
            std::cout << "  code " << k.at("code").get<int>() << " \"" << k.at("name").get<std::string>()
                      << "\" coverage " << format_double(k.at("coverage").get<double>()) << "\n";
        }
        std::cout << "dropped:\n";
        for (const auto& d : j.at("dropped")) {
            std::cout << "  \"" << d.at("name").get<std::string>() << "\" "
                      << d.at("reason").get<std::string>();
            if (d.contains("with")) {
                std::cout << " with \"" << d.at("with").get<std::string>() << "\" (jaccard "
                          << format_double(d.at("jaccard").get<double>()) << ")";
            } else {
                std::cout << " (coverage " << format_double(d.at("coverage").get<double>()) << ")";
            }
            std::cout << "\n";
        }
        std::cout << "mean pairwise jaccard " << format_double(j.at("mean_pairwise_jaccard").get<double>())
                  << ", max " << format_double(j.at("max_pairwise_jaccard").get<double>()) << "\n";
    } else if (kind == "ted_model") {
        const auto& codec = j.at("codec");
        std::cout << codec.size() << " classes over " << j.at("n_features").get<std::size_t>()
                  << " features:\n";
        for (const auto& p : codec) {
            std::cout << "  (y=" << p.at("y").get<int>() << ", e=" << p.at("e").get<int>() << ")\n";
        }
    } else if (kind == "binarizer") {
        std::cout << j.at("column_layout").size() << " columns over "
                  << j.at("features").size() << " features\n";
        for (const auto& [name, spec] : j.at("features").items()) {
            std::cout << "  " << name << ": ";
            if (spec.contains("thresholds")) {
                std::cout << spec["thresholds"].size() << " thresholds";
            } else {
                std::cout << spec["categories"].size() << " categories";
            }
            std::cout << "\n";
        }
    } else {
        std::cout << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rulefuse: hybrid rule discovery + expert risk rules + joint label/explanation classifier"};
    app.require_subcommand(1);

    std::string config_path, out_dir, artifact_path;
    std::string csv_path, schema_path, rules_path, precedence;
    std::vector<std::string> subset_args;

    // synth overrides
    std::optional<std::size_t> rows, patterns, disjuncts;
    std::optional<double> churn_rate, coverage, noise;
    std::optional<std::uint64_t> synth_seed;

    // pipeline overrides
    std::optional<double> test_fraction, lambda1, lambda2, min_coverage, max_jaccard, learning_rate, l2;
    std::optional<std::uint64_t> split_seed, ted_seed;
    std::optional<std::size_t> max_pairs, epochs, max_iters;
    std::optional<int> n_quantiles, max_degree;

    auto* synth = app.add_subcommand("synth", "generate a synthetic churn dataset with planted rules");
    synth->add_option("--config", config_path, "pipeline config JSON (synth section)");
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--rows", rows, "row count");
    synth->add_option("--churn-rate", churn_rate, "churn fraction in (0,1)");
    synth->add_option("--patterns", patterns, "number of dense stay patterns");
    synth->add_option("--disjuncts", disjuncts, "number of sparse churn disjuncts");
    synth->add_option("--coverage", coverage, "per-disjunct row coverage");
    synth->add_option("--noise", noise, "label flip rate in [0,0.5)");
    synth->add_option("--seed", synth_seed, "generator seed");

    auto* run = app.add_subcommand("run", "run the full pipeline and write artifacts");
    run->add_option("--config", config_path, "pipeline config JSON");
    run->add_option("--csv", csv_path, "dataset CSV (overrides config)");
    run->add_option("--schema", schema_path, "schema sidecar JSON (overrides config)");
    run->add_option("--rules", rules_path, "expert rules file, or 'none'");
    run->add_option("--out", out_dir, "artifact directory")->required();
    run->add_option("--test-fraction", test_fraction, "held-out fraction");
    run->add_option("--split-seed", split_seed, "split seed");
    run->add_option("--n-quantiles", n_quantiles, "binarizer quantile count");
    run->add_option("--lambda1", lambda1, "L1 penalty (default: data-driven)");
    run->add_option("--lambda2", lambda2, "complexity penalty (default: lambda1/2)");
    run->add_option("--max-iters", max_iters, "LRR sweep limit");
    run->add_option("--max-degree", max_degree, "candidate rule degree (1 or 2)");
    run->add_option("--max-pairs", max_pairs, "degree-2 candidate budget");
    run->add_option("--min-coverage", min_coverage, "pareto coverage floor");
    run->add_option("--max-jaccard", max_jaccard, "pareto overlap ceiling");
    run->add_option("--precedence", precedence, "risk_first|safety_first");
    run->add_option("--learning-rate", learning_rate, "TED learning rate");
    run->add_option("--epochs", epochs, "TED epochs");
    run->add_option("--l2", l2, "TED L2 strength");
    run->add_option("--ted-seed", ted_seed, "TED seed");

    auto* frontier = app.add_subcommand("frontier", "run the pipeline once per rule subset");
    frontier->add_option("--config", config_path, "pipeline config JSON");
    frontier->add_option("--csv", csv_path, "dataset CSV (overrides config)");
    frontier->add_option("--schema", schema_path, "schema sidecar JSON (overrides config)");
    frontier->add_option("--subset", subset_args, "name=rules-path (repeatable; path 'none' disables rules)")
        ->required();
    frontier->add_option("--out", out_dir, "output directory")->required();

    auto* inspect = app.add_subcommand("inspect", "pretty-print a serialized artifact");
    inspect->add_option("--path", artifact_path, "artifact JSON path")->required();

    try {
        app.parse(argc, argv);

        PipelineConfig cfg = load_config_or_default(config_path);
        if (!csv_path.empty()) cfg.csv_path = csv_path;
        if (!schema_path.empty()) cfg.schema_path = schema_path;
        if (!rules_path.empty()) cfg.rules_path = rules_path;
        if (test_fraction) cfg.test_fraction = *test_fraction;
        if (split_seed) cfg.split_seed = *split_seed;
        if (n_quantiles) cfg.n_quantiles = *n_quantiles;
        if (lambda1) cfg.lambda1 = *lambda1;
        if (lambda2) cfg.lambda2 = *lambda2;
        if (max_iters) cfg.lrr_max_iters = *max_iters;
        if (max_degree) cfg.max_degree = *max_degree;
        if (max_pairs) cfg.max_pairs = *max_pairs;
        if (min_coverage) cfg.min_coverage = *min_coverage;
        if (max_jaccard) cfg.max_jaccard = *max_jaccard;
        if (!precedence.empty()) cfg.precedence = precedence_from_string(precedence);
        if (learning_rate) cfg.ted.learning_rate = *learning_rate;
        if (epochs) cfg.ted.epochs = *epochs;
        if (l2) cfg.ted.l2 = *l2;
        if (ted_seed) cfg.ted.seed = *ted_seed;
        if (rows) cfg.synth.n_rows = *rows;
        if (churn_rate) cfg.synth.churn_rate = *churn_rate;
        if (patterns) cfg.synth.n_safety_patterns = *patterns;
        if (disjuncts) cfg.synth.n_risk_disjuncts = *disjuncts;
        if (coverage) cfg.synth.risk_disjunct_coverage = *coverage;
        if (noise) cfg.synth.noise_rate = *noise;
        if (synth_seed) cfg.synth.seed = *synth_seed;

        if (synth->parsed()) return cmd_synth(cfg, out_dir);
        if (run->parsed()) return cmd_run(cfg, out_dir);
        if (frontier->parsed()) return cmd_frontier(cfg, subset_args, out_dir);
        if (inspect->parsed()) return cmd_inspect(artifact_path);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
