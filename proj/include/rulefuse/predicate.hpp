#ifndef RULEFUSE_PREDICATE_HPP
#define RULEFUSE_PREDICATE_HPP

#include <string>
#include <vector>

#include "rulefuse/dataset.hpp"

namespace rulefuse {

// Numeric features use {le, gt}; categorical features use {eq, ne}.
enum class Comparator { le, gt, eq, ne };

const char* comparator_token(Comparator op);  // "<=", ">", "==", "!="

struct AtomicPredicate {
    std::string feature;
    Comparator op = Comparator::le;
    double threshold = 0.0;  // le/gt
    std::string category;    // eq/ne

    bool is_numeric_op() const { return op == Comparator::le || op == Comparator::gt; }

    // "tenure > 24" / "contract == \"monthly\"". DSL-compatible.
    std::string repr() const;

    bool operator==(const AtomicPredicate& other) const = default;
};

// Truth value on a raw dataset row. Throws SchemaError when the feature is
// missing or has the wrong kind for the comparator.
bool eval_predicate(const AtomicPredicate& p, const Dataset& ds, std::size_t row);

// Conjunction over raw features.
bool eval_conjunction(const std::vector<AtomicPredicate>& conds, const Dataset& ds, std::size_t row);

// "a > 1 AND b == \"x\""
std::string conjunction_repr(const std::vector<AtomicPredicate>& conds);

}  // namespace rulefuse

#endif
