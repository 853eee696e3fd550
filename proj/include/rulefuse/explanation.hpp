#ifndef RULEFUSE_EXPLANATION_HPP
#define RULEFUSE_EXPLANATION_HPP

#include <array>
#include <string>
#include <vector>

namespace rulefuse {

inline constexpr int kDriftCode = 12;
inline constexpr int kMinRiskCode = 4;
inline constexpr int kMaxRiskCode = 11;

// One explanation code per row: 1-3 safety tiers, 4-11 risk rules, 12 drift.
// provenance records what triggered the code ("tier2", a rule name, "drift").
struct ExplanationVector {
    std::vector<int> codes;
    std::vector<std::string> provenance;

    std::size_t size() const { return codes.size(); }

    // counts[c] = rows with code c; index 0 unused.
    std::array<std::size_t, 13> histogram() const {
        std::array<std::size_t, 13> h{};
        for (int c : codes) h[static_cast<std::size_t>(c)]++;
        return h;
    }
};

}  // namespace rulefuse

#endif
