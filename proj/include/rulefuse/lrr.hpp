#ifndef RULEFUSE_LRR_HPP
#define RULEFUSE_LRR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rulefuse/binarizer.hpp"

namespace rulefuse {

// A candidate rule: conjunction of one or two binarized columns referencing
// distinct raw features. Complexity is 1 + number of atoms.
struct RuleCandidate {
    std::vector<std::size_t> atoms;  // column indices into the BinarizedMatrix

    int complexity() const { return 1 + static_cast<int>(atoms.size()); }
    bool operator==(const RuleCandidate& other) const = default;
};

// Sparse per-candidate row index lists; column j holds the rows where
// candidate j evaluates true.
struct RuleMatrix {
    std::size_t n_rows = 0;
    std::vector<std::vector<std::uint32_t>> columns;
};

struct RuleModel {
    std::vector<RuleCandidate> candidates;
    std::vector<AtomicPredicate> column_layout;  // resolves atom indices to predicates
    std::vector<double> weights;
    double intercept = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    bool converged = false;
    std::size_t sweeps = 0;
    std::vector<double> sweep_objectives;  // objective value after each sweep

    std::string rule_repr(std::size_t candidate) const;
    std::size_t nonzero_count(double eps = 1e-12) const;

    nlohmann::json to_json() const;
};

// Safety Net rules: the negative-weight candidates, tiered by |w|.
// Tier 1 holds the strongest retention drivers.
struct SafetyTiers {
    std::map<int, std::vector<RuleCandidate>> tiers;  // keys 1..3
    double tier_cutoffs[2] = {0.0, 0.0};              // |w| boundaries (tier1/2 and tier2/3)

    bool empty() const;
    std::size_t rule_count() const;
};

// All atomic columns as degree-1 candidates; with max_degree 2, adds the
// max_pairs cross-feature conjunctions with the highest
// support * |label correlation| score (ties by ascending column pair).
std::vector<RuleCandidate> enumerate_candidates(const BinarizedMatrix& bm,
                                                const std::vector<int>& labels, int max_degree,
                                                std::size_t max_pairs);

RuleMatrix build_rule_matrix(const BinarizedMatrix& bm, const std::vector<RuleCandidate>& candidates);

// 0.5*||y - c - Xw||^2 + lambda1*sum|w| + lambda2*sum C(r_j)*|w_j|.
// The complexity term charges active rules only: a zero weight contributes
// nothing, so lambda2 acts as a per-rule complexity-weighted L1 offset.
double lrr_objective(const std::vector<double>& y, const RuleMatrix& rm, const RuleModel& model);

struct LrrFitOptions {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double tol = 1e-9;
    std::size_t max_iters = 1000;
};

// Proximal coordinate descent with soft-thresholding at the effective
// per-coordinate threshold lambda1 + lambda2*C(r_j). The intercept is
// unpenalized and updated first in every sweep. Deterministic sweep order =
// candidate order. A model that hits max_iters is returned with
// converged=false rather than throwing.
RuleModel fit_lrr(const std::vector<double>& y, const RuleMatrix& rm,
                  const std::vector<RuleCandidate>& candidates,
                  const std::vector<AtomicPredicate>& column_layout, const LrrFitOptions& opt);

// Default lambda1: a fixed fraction of max_j |x_j^T (y - mean(y))|, the
// smallest penalty that zeroes every coordinate. Keeps the default solution
// sparse but non-empty at desk scale.
double default_lambda1(const std::vector<double>& y, const RuleMatrix& rm);

// Tertile split of the negative-weight rules by |w|; fewer than three rules
// all land in tier 1; cutoff ties promote to the stronger tier.
SafetyTiers extract_safety_tiers(const RuleModel& model);

std::vector<double> labels_as_reals(const std::vector<int>& labels);

}  // namespace rulefuse

#endif
