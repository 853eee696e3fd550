#include "rulefuse/lrr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "rulefuse/error.hpp"

namespace rulefuse {

namespace {

double soft_threshold(double rho, double lambda) {
    if (rho > lambda) return rho - lambda;
    if (rho < -lambda) return rho + lambda;
    return 0.0;
}

// Packed column bits for fast pair support counting.
struct PackedColumns {
    std::size_t n_rows = 0;
    std::size_t words = 0;
    std::vector<std::uint64_t> data;  // column-major

    const std::uint64_t* col(std::size_t c) const { return data.data() + c * words; }
};

PackedColumns pack_columns(const BinarizedMatrix& bm) {
    PackedColumns pc;
    pc.n_rows = bm.n_rows;
    pc.words = (bm.n_rows + 63) / 64;
    pc.data.assign(bm.n_cols() * pc.words, 0);
    for (std::size_t r = 0; r < bm.n_rows; ++r) {
        for (std::size_t c = 0; c < bm.n_cols(); ++c) {
            if (bm.bit(r, c)) pc.data[c * pc.words + (r >> 6)] |= std::uint64_t(1) << (r & 63);
        }
    }
    return pc;
}

}  // namespace

std::vector<double> labels_as_reals(const std::vector<int>& labels) {
    return std::vector<double>(labels.begin(), labels.end());
}

std::vector<RuleCandidate> enumerate_candidates(const BinarizedMatrix& bm,
                                                const std::vector<int>& labels, int max_degree,
                                                std::size_t max_pairs) {
    if (max_degree != 1 && max_degree != 2) throw ConfigError("max_degree must be 1 or 2");
    if (labels.size() != bm.n_rows) throw DataError("label count does not match matrix rows");

    std::vector<RuleCandidate> out;
    const std::size_t m = bm.n_cols();
    for (std::size_t c = 0; c < m; ++c) out.push_back({{c}});
    if (max_degree == 1 || max_pairs == 0 || m < 2) return out;

    // feature id per column, to skip same-feature conjunctions
    std::unordered_map<std::string, int> feature_ids;
    std::vector<int> feat(m);
    for (std::size_t c = 0; c < m; ++c) {
        feat[c] = feature_ids.emplace(bm.columns[c].feature, static_cast<int>(feature_ids.size()))
                      .first->second;
    }

    const PackedColumns pc = pack_columns(bm);
    const double n = static_cast<double>(bm.n_rows);
    const double y_mean =
        std::accumulate(labels.begin(), labels.end(), 0.0) / std::max(1.0, n);
    double y_var = 0.0;
    for (int y : labels) y_var += (y - y_mean) * (y - y_mean);
    y_var /= n;

    struct Scored {
        double score;
        std::uint32_t a, b;
    };
    std::vector<Scored> scored;
    scored.reserve(m * (m - 1) / 2);

    std::vector<std::uint64_t> buf(pc.words);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            if (feat[a] == feat[b]) continue;
            const std::uint64_t* wa = pc.col(a);
            const std::uint64_t* wb = pc.col(b);
            std::size_t support = 0;
            double label_sum = 0.0;
            for (std::size_t w = 0; w < pc.words; ++w) {
                std::uint64_t bits = wa[w] & wb[w];
                support += static_cast<std::size_t>(std::popcount(bits));
                while (bits) {
                    const int t = std::countr_zero(bits);
                    label_sum += labels[(w << 6) + static_cast<std::size_t>(t)];
                    bits &= bits - 1;
                }
            }
            double score = 0.0;
            const double frac = static_cast<double>(support) / n;
            const double x_var = frac * (1.0 - frac);
            if (x_var > 0.0 && y_var > 0.0) {
                const double cov = label_sum / n - frac * y_mean;
                const double corr = cov / std::sqrt(x_var * y_var);
                score = frac * std::abs(corr);
            }
            scored.push_back({score, static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
        }
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    const std::size_t take = std::min(max_pairs, scored.size());
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back({{scored[i].a, scored[i].b}});
    }
    return out;
}

RuleMatrix build_rule_matrix(const BinarizedMatrix& bm, const std::vector<RuleCandidate>& candidates) {
    RuleMatrix rm;
    rm.n_rows = bm.n_rows;
    rm.columns.reserve(candidates.size());
    for (const auto& cand : candidates) {
        if (cand.atoms.empty() || cand.atoms.size() > 2) {
            throw ConfigError("rule candidates must hold 1 or 2 atoms");
        }
        std::vector<std::uint32_t> rows;
        for (std::size_t r = 0; r < bm.n_rows; ++r) {
            bool all = true;
            for (std::size_t a : cand.atoms) {
                if (!bm.bit(r, a)) {
                    all = false;
                    break;
                }
            }
            if (all) rows.push_back(static_cast<std::uint32_t>(r));
        }
        rm.columns.push_back(std::move(rows));
    }
    return rm;
}

double lrr_objective(const std::vector<double>& y, const RuleMatrix& rm, const RuleModel& model) {
    if (y.size() != rm.n_rows) throw DataError("label count does not match rule matrix rows");
    if (model.weights.size() != rm.columns.size() || model.weights.size() != model.candidates.size()) {
        throw DataError("model width does not match rule matrix");
    }
    for (double w : model.weights) {
        if (!std::isfinite(w)) throw DataError("non-finite weight in rule model");
    }
    std::vector<double> pred(y.size(), model.intercept);
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        const double w = model.weights[j];
        if (w == 0.0) continue;
        for (std::uint32_t r : rm.columns[j]) pred[r] += w;
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - pred[i];
        sq += d * d;
    }
    double penalty = 0.0;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        const double aw = std::abs(model.weights[j]);
        if (aw == 0.0) continue;
        penalty += model.lambda1 * aw + model.lambda2 * model.candidates[j].complexity() * aw;
    }
    return 0.5 * sq + penalty;
}

namespace {

// One full pass: intercept (exact unpenalized minimizer) first, then every
// coordinate in candidate order. Returns the largest coordinate change.
double cd_sweep(const RuleMatrix& rm, const std::vector<double>& col_size,
                const std::vector<double>& threshold, std::vector<double>& residual,
                double& intercept, std::vector<double>& weights) {
    const double n = static_cast<double>(residual.size());
    double max_change = 0.0;

    double r_sum = std::accumulate(residual.begin(), residual.end(), 0.0);
    const double dc = r_sum / n;
    if (dc != 0.0) {
        intercept += dc;
        for (double& r : residual) r -= dc;
        max_change = std::abs(dc);
    }

    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (col_size[j] == 0.0) continue;
        const double w_old = weights[j];
        double rho = col_size[j] * w_old;
        for (std::uint32_t r : rm.columns[j]) rho += residual[r];
        const double w_new = soft_threshold(rho, threshold[j]) / col_size[j];
        if (w_new != w_old) {
            const double delta = w_new - w_old;
            for (std::uint32_t r : rm.columns[j]) residual[r] -= delta;
            weights[j] = w_new;
            max_change = std::max(max_change, std::abs(delta));
        }
    }
    return max_change;
}

}  // namespace

RuleModel fit_lrr(const std::vector<double>& y, const RuleMatrix& rm,
                  const std::vector<RuleCandidate>& candidates,
                  const std::vector<AtomicPredicate>& column_layout, const LrrFitOptions& opt) {
    if (opt.lambda1 < 0.0 || opt.lambda2 < 0.0) throw ConfigError("lambdas must be >= 0");
    if (!(opt.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (y.size() != rm.n_rows) throw DataError("label count does not match rule matrix rows");
    if (rm.columns.size() != candidates.size()) throw DataError("candidate count mismatch");

    RuleModel model;
    model.candidates = candidates;
    model.column_layout = column_layout;
    model.weights.assign(candidates.size(), 0.0);
    model.lambda1 = opt.lambda1;
    model.lambda2 = opt.lambda2;

    const std::size_t n = y.size();
    const std::size_t p = candidates.size();
    std::vector<double> residual = y;  // y - intercept - Xw
    std::vector<double> col_size(p);
    std::vector<double> threshold(p);
    for (std::size_t j = 0; j < p; ++j) {
        col_size[j] = static_cast<double>(rm.columns[j].size());
        threshold[j] = opt.lambda1 + opt.lambda2 * candidates[j].complexity();
    }

    // Warm-start over a geometric penalty path before solving at the target
    // lambdas. Complementary binarizer columns carry exactly opposite
    // centered correlations, so a cold solve has a sign tie the sweep order
    // would decide; the path lets the strongest rules enter first and the
    // redundant complements never activate.
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double lambda_max = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double rho = 0.0;
        for (std::uint32_t r : rm.columns[j]) rho += y[r] - y_mean;
        lambda_max = std::max(lambda_max, std::abs(rho));
    }
    std::vector<double> path_threshold(p);
    for (double boost = lambda_max * 0.5; boost > lambda_max * 1e-9; boost *= 0.5) {
        bool active = false;
        for (std::size_t j = 0; j < p; ++j) {
            path_threshold[j] = std::max(threshold[j], boost);
            active |= path_threshold[j] > threshold[j];
        }
        if (!active) break;
        const double path_tol = std::max(opt.tol, 1e-8 * std::max(1.0, lambda_max));
        for (std::size_t sweep = 0; sweep < opt.max_iters; ++sweep) {
            if (cd_sweep(rm, col_size, path_threshold, residual, model.intercept, model.weights) <
                path_tol) {
                break;
            }
        }
    }

    for (std::size_t sweep = 0; sweep < opt.max_iters; ++sweep) {
        const double max_change =
            cd_sweep(rm, col_size, threshold, residual, model.intercept, model.weights);
        model.sweeps = sweep + 1;
        model.sweep_objectives.push_back(lrr_objective(y, rm, model));
        if (max_change < opt.tol) {
            model.converged = true;
            break;
        }
    }

    // A complementary atom pair active with opposite signs spans a flat
    // direction of the objective: since x_low + x_high = 1, the pair
    // (a, b, c) predicts identically to (0, b-a, c+a) at equal penalty.
    // Collapse each such pair onto its dominant side so the returned model
    // is the sparse representative of the optimum.
    std::vector<int> partner(p, -1);
    for (std::size_t j1 = 0; j1 < p; ++j1) {
        if (candidates[j1].atoms.size() != 1) continue;
        const auto& p1 = column_layout[candidates[j1].atoms[0]];
        for (std::size_t j2 = j1 + 1; j2 < p; ++j2) {
            if (candidates[j2].atoms.size() != 1) continue;
            const auto& p2 = column_layout[candidates[j2].atoms[0]];
            if (p1.feature != p2.feature) continue;
            const bool numeric_pair = p1.op == Comparator::le && p2.op == Comparator::gt &&
                                      p1.threshold == p2.threshold;
            const bool cat_pair = p1.op == Comparator::eq && p2.op == Comparator::ne &&
                                  p1.category == p2.category;
            if (numeric_pair || cat_pair) {
                partner[j1] = static_cast<int>(j2);
                partner[j2] = static_cast<int>(j1);
            }
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        const int q = partner[j];
        if (q < 0 || static_cast<std::size_t>(q) < j) continue;
        double& a = model.weights[j];
        double& b = model.weights[static_cast<std::size_t>(q)];
        if (a == 0.0 || b == 0.0 || (a > 0) == (b > 0)) continue;
        const bool keep_second = std::abs(b) > std::abs(a) || (std::abs(b) == std::abs(a) && b < 0);
        if (keep_second) {
            model.intercept += a;
            b -= a;
            a = 0.0;
        } else {
            model.intercept += b;
            a -= b;
            b = 0.0;
        }
    }
    return model;
}

double default_lambda1(const std::vector<double>& y, const RuleMatrix& rm) {
    const double n = static_cast<double>(y.size());
    if (n == 0.0) throw DataError("empty label vector");
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double max_corr = 0.0;
    for (const auto& col : rm.columns) {
        double rho = 0.0;
        for (std::uint32_t r : col) rho += y[r] - mean;
        max_corr = std::max(max_corr, std::abs(rho));
    }
    return 0.1 * max_corr;
}

std::string RuleModel::rule_repr(std::size_t candidate) const {
    std::vector<AtomicPredicate> preds;
    for (std::size_t a : candidates[candidate].atoms) preds.push_back(column_layout[a]);
    return conjunction_repr(preds);
}

std::size_t RuleModel::nonzero_count(double eps) const {
    std::size_t c = 0;
    for (double w : weights) c += std::abs(w) > eps ? 1 : 0;
    return c;
}

nlohmann::json RuleModel::to_json() const {
    nlohmann::json cands = nlohmann::json::array();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        cands.push_back({{"rule", rule_repr(j)},
                         {"complexity", candidates[j].complexity()},
                         {"weight", weights[j]}});
    }
    return {{"intercept", intercept},
            {"lambda1", lambda1},
            {"lambda2", lambda2},
            {"converged", converged},
            {"sweeps", sweeps},
            {"candidates", cands}};
}

bool SafetyTiers::empty() const { return rule_count() == 0; }

std::size_t SafetyTiers::rule_count() const {
    std::size_t c = 0;
    for (const auto& [code, rules] : tiers) c += rules.size();
    return c;
}

SafetyTiers extract_safety_tiers(const RuleModel& model) {
    struct Entry {
        double magnitude;
        std::size_t index;
    };
    std::vector<Entry> negatives;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        if (model.weights[j] < 0.0) negatives.push_back({-model.weights[j], j});
    }
    SafetyTiers tiers;
    if (negatives.empty()) return tiers;

    std::sort(negatives.begin(), negatives.end(), [](const Entry& a, const Entry& b) {
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        return a.index < b.index;
    });

    const std::size_t s = negatives.size();
    if (s < 3) {
        for (const auto& e : negatives) tiers.tiers[1].push_back(model.candidates[e.index]);
        tiers.tier_cutoffs[0] = tiers.tier_cutoffs[1] = negatives.back().magnitude;
        return tiers;
    }
    const std::size_t cut1 = (s + 2) / 3;       // ceil(s/3)
    const std::size_t cut2 = (2 * s + 2) / 3;   // ceil(2s/3)
    const double c1 = negatives[cut1 - 1].magnitude;
    const double c2 = negatives[cut2 - 1].magnitude;
    tiers.tier_cutoffs[0] = c1;
    tiers.tier_cutoffs[1] = c2;
    for (const auto& e : negatives) {
        int code = 3;
        if (e.magnitude >= c1) code = 1;        // >= : boundary ties go up
        else if (e.magnitude >= c2) code = 2;
        tiers.tiers[code].push_back(model.candidates[e.index]);
    }
    return tiers;
}

}  // namespace rulefuse
