#include "rulefuse/pareto.hpp"

#include <algorithm>

#include "rulefuse/error.hpp"

namespace rulefuse {

RuleStats rule_coverage(const RiskRule& rule, const Dataset& ds) {
    const std::size_t churn_total = ds.churn_count();
    if (churn_total == 0) throw DataError("coverage undefined: dataset has no churn rows");

    RuleStats stats;
    stats.rule = rule;
    std::size_t churn_matched = 0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        if (!evaluate_rule(rule, ds, r)) continue;
        stats.match_set.push_back(static_cast<std::uint32_t>(r));
        churn_matched += static_cast<std::size_t>(ds.labels()[r]);
    }
    stats.coverage = static_cast<double>(churn_matched) / static_cast<double>(churn_total);
    return stats;
}

double jaccard(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::size_t inter = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

SelectionReport select_rules(const RiskRuleSet& rules, const Dataset& ds, double min_coverage,
                             double max_jaccard) {
    if (min_coverage < 0.0 || min_coverage > 1.0) throw ConfigError("min_coverage must lie in [0,1]");
    if (max_jaccard < 0.0 || max_jaccard > 1.0) throw ConfigError("max_jaccard must lie in [0,1]");

    SelectionReport report;
    std::vector<RuleStats> candidates;
    for (const auto& rule : rules.rules) {
        RuleStats stats = rule_coverage(rule, ds);
        if (stats.coverage < min_coverage) {
            report.dropped.push_back({std::move(stats), DroppedRule::Reason::low_coverage, "", 0.0});
        } else {
            candidates.push_back(std::move(stats));
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const RuleStats& a, const RuleStats& b) {
        if (a.coverage != b.coverage) return a.coverage > b.coverage;
        return a.rule.code < b.rule.code;
    });

    for (auto& cand : candidates) {
        bool redundant = false;
        for (const auto& kept : report.kept) {
            const double j = jaccard(cand.match_set, kept.match_set);
            if (j > max_jaccard) {
                report.dropped.push_back(
                    {std::move(cand), DroppedRule::Reason::redundant, kept.rule.name, j});
                redundant = true;
                break;
            }
        }
        if (!redundant) report.kept.push_back(std::move(cand));
    }

    const std::size_t k = report.kept.size();
    report.pairwise_jaccard.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            report.pairwise_jaccard[i][j] =
                i == j ? (report.kept[i].match_set.empty() ? 0.0 : 1.0)
                       : jaccard(report.kept[i].match_set, report.kept[j].match_set);
        }
    }
    return report;
}

double SelectionReport::mean_offdiagonal() const {
    const std::size_t k = kept.size();
    if (k < 2) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i != j) sum += pairwise_jaccard[i][j];
        }
    }
    return sum / static_cast<double>(k * (k - 1));
}

double SelectionReport::max_offdiagonal() const {
    double best = 0.0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t j = 0; j < kept.size(); ++j) {
            if (i != j) best = std::max(best, pairwise_jaccard[i][j]);
        }
    }
    return best;
}

nlohmann::json SelectionReport::to_json() const {
    nlohmann::json kept_json = nlohmann::json::array();
    for (const auto& s : kept) {
        kept_json.push_back({{"name", s.rule.name},
                             {"code", s.rule.code},
                             {"quadrant", s.rule.quadrant},
                             {"rule", conjunction_repr(s.rule.predicate)},
                             {"coverage", s.coverage},
                             {"match_count", s.match_set.size()}});
    }
    nlohmann::json dropped_json = nlohmann::json::array();
    for (const auto& d : dropped) {
        nlohmann::json item = {{"name", d.stats.rule.name},
                               {"code", d.stats.rule.code},
                               {"coverage", d.stats.coverage},
                               {"match_count", d.stats.match_set.size()}};
        if (d.reason == DroppedRule::Reason::low_coverage) {
            item["reason"] = "low_coverage";
        } else {
            item["reason"] = "redundant";
            item["with"] = d.redundant_with;
            item["jaccard"] = d.jaccard_value;
        }
        dropped_json.push_back(item);
    }
    return {{"kept", kept_json},
            {"dropped", dropped_json},
            {"pairwise_jaccard", pairwise_jaccard},
            {"mean_pairwise_jaccard", mean_offdiagonal()},
            {"max_pairwise_jaccard", max_offdiagonal()}};
}

}  // namespace rulefuse
