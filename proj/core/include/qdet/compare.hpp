#pragma once

#include <map>
#include <string>
#include <vector>

#include "qdet/analyzer.hpp"

namespace qdet {

enum class Verdict { Less, Equal, Greater };

/// One parameter point present on both sides of a comparison.
struct SharedKey {
    std::map<std::string, int> params;
    int iterations = 0;

    friend auto operator<=>(const SharedKey&, const SharedKey&) = default;
};

/// Signed height/width differences of algorithm A against algorithm B,
/// summed over every shared (parameters, iterations) point.
struct ComparisonReport {
    std::vector<SharedKey> shared; // sorted
    long long delta_d = 0;         // sum of D_A - D_B
    long long delta_p = 0;         // sum of P_A - P_B
    Verdict verdict_d = Verdict::Equal;
    Verdict verdict_p = Verdict::Equal;
};

/// Compare two characteristic sets keyed on the full named parameter map
/// plus the truncation depth. Entries of both sides must carry identical
/// counting flags (sharing/doubling/chain model); a side may not contain two
/// different characteristics for the same key. Throws NoCommonParameters
/// when the key sets do not intersect.
ComparisonReport compare(const std::vector<Characteristics>& a,
                         const std::vector<Characteristics>& b);

const char* to_string(Verdict v);

std::string report_to_json(const ComparisonReport& r);

} // namespace qdet
