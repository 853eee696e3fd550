#include "rulefuse/predicate.hpp"

#include "rulefuse/error.hpp"
#include "rulefuse/text.hpp"

namespace rulefuse {

const char* comparator_token(Comparator op) {
    switch (op) {
        case Comparator::le: return "<=";
        case Comparator::gt: return ">";
        case Comparator::eq: return "==";
        case Comparator::ne: return "!=";
    }
    return "?";
}

std::string AtomicPredicate::repr() const {
    std::string out = feature;
    out += ' ';
    out += comparator_token(op);
    out += ' ';
    if (is_numeric_op()) {
        out += format_double(threshold);
    } else {
        out += '"';
        out += category;
        out += '"';
    }
    return out;
}

bool eval_predicate(const AtomicPredicate& p, const Dataset& ds, std::size_t row) {
    const int idx = ds.feature_index(p.feature);
    if (idx < 0) throw SchemaError("unknown feature: " + p.feature);
    const auto fidx = static_cast<std::size_t>(idx);
    const bool numeric = ds.schema().is_numeric(fidx);
    if (numeric != p.is_numeric_op()) {
        throw SchemaError("comparator " + std::string(comparator_token(p.op)) +
                          " does not match kind of feature " + p.feature);
    }
    if (numeric) {
        const double v = ds.numeric_at(row, fidx);
        return p.op == Comparator::le ? v <= p.threshold : v > p.threshold;
    }
    const std::string& v = ds.categorical_at(row, fidx);
    return p.op == Comparator::eq ? v == p.category : v != p.category;
}

bool eval_conjunction(const std::vector<AtomicPredicate>& conds, const Dataset& ds, std::size_t row) {
    for (const auto& c : conds) {
        if (!eval_predicate(c, ds, row)) return false;
    }
    return true;
}

std::string conjunction_repr(const std::vector<AtomicPredicate>& conds) {
    std::string out;
    for (std::size_t i = 0; i < conds.size(); ++i) {
        if (i) out += " AND ";
        out += conds[i].repr();
    }
    return out;
}

}  // namespace rulefuse
