#ifndef RULEFUSE_PIPELINE_HPP
#define RULEFUSE_PIPELINE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rulefuse/binarizer.hpp"
#include "rulefuse/dataset.hpp"
#include "rulefuse/explain.hpp"
#include "rulefuse/lrr.hpp"
#include "rulefuse/pareto.hpp"
#include "rulefuse/synth.hpp"
#include "rulefuse/ted.hpp"

namespace rulefuse {

inline constexpr int kArtifactVersion = 1;

struct PipelineConfig {
    // inputs; an empty or "none" rules path runs without expert rules
    std::string csv_path;
    std::string schema_path;
    std::string rules_path;

    double test_fraction = 0.3;
    std::uint64_t split_seed = 7;

    int n_quantiles = 9;

    std::optional<double> lambda1;  // default: data-driven (see default_lambda1)
    std::optional<double> lambda2;  // default: lambda1 / 4
    double lrr_tol = 1e-9;
    std::size_t lrr_max_iters = 1000;
    int max_degree = 2;
    std::size_t max_pairs = 80;

    double min_coverage = 0.01;
    double max_jaccard = 0.5;

    Precedence precedence = Precedence::risk_first;

    TedTrainConfig ted;

    SynthConfig synth;  // used by the synth subcommand only

    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::string& path);
    nlohmann::json to_json() const;
};

struct PipelineResult {
    BinarizerModel binarizer;
    RuleModel rule_model;
    SafetyTiers tiers;
    SelectionReport selection;
    ExplanationVector train_explanations;
    ExplanationVector test_explanations;
    TedModel ted;
    EvalReport train_report;
    EvalReport test_report;

    std::size_t kept_rule_count() const { return selection.kept.size(); }
};

// Full pipeline: load -> split -> binarize -> LRR -> rules -> Pareto ->
// explanation matrix -> TED -> evaluation. Writes
// {binarizer,lrr,selection,ted,report}.json and explanations.csv into
// out_dir (created if missing). Pass an empty out_dir to skip artifacts.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

struct FrontierRow {
    std::string configuration;
    std::size_t rule_count = 0;  // kept expert rules
    double y_accuracy = 0.0;
    double e_accuracy = 0.0;
    double ye_accuracy = 0.0;
};

// One pipeline run per named rule subset on identical splits and seeds.
// subsets entries are (name, rules path); "none" means no expert rules.
// Writes frontier.csv plus per-subset artifact directories under out_dir.
std::vector<FrontierRow> run_frontier(const PipelineConfig& cfg,
                                      const std::vector<std::pair<std::string, std::string>>& subsets,
                                      const std::string& out_dir);

std::string frontier_csv(const std::vector<FrontierRow>& rows);

// SafetyTiers round-trip used by the lrr.json artifact.
nlohmann::json safety_tiers_to_json(const SafetyTiers& tiers, const RuleModel& model);
SafetyTiers safety_tiers_from_json(const nlohmann::json& j);

void write_explanations_csv(const ExplanationVector& train, const ExplanationVector& test,
                            const std::string& path);

}  // namespace rulefuse

#endif
