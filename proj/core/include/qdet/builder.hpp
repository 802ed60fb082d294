#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdet/flowchart.hpp"
#include "qdet/qterm.hpp"

namespace qdet {

/// How symbolic decision conditions accumulate into emitted guards. The
/// default is LastConditionOnly for charts declaring `iterations` (the guard
/// is the stopping condition of the final check) and FullConjunction
/// otherwise.
enum class GuardMode { FullConjunction, LastConditionOnly };

struct BuildConfig {
    std::map<std::string, int> params;   // dimension parameter values
    std::optional<int> iterations;       // truncation depth, iff declared
    std::optional<GuardMode> guard_mode; // override the default
    std::size_t max_steps = 1'000'000;   // block visits per pass
    std::size_t max_branches = 100'000;  // passes per build
};

/// One recorded symbolic decision of a pass: its occurrence ordinal within
/// the pass and the exit taken (1 = true branch, 0 = false branch).
struct BranchStep {
    std::size_t ordinal = 0;
    int exit = 1;

    friend bool operator==(const BranchStep&, const BranchStep&) = default;
};

using BranchTrace = std::vector<BranchStep>;

/// Successor trace in the branch-exhaustion order: flip a trailing 1 to 0,
/// dropping trailing 0s first; nullopt once every exit sequence is spent.
std::optional<BranchTrace> next_branch(BranchTrace t);

/// Interpret the flowchart symbolically for the given parameter values,
/// enumerating every input-data branch, and emit the resulting Q-determinant.
/// Throws DomainError for invalid charts or mismatched configuration and
/// LimitExceeded when a safety budget is spent.
QDeterminant build_qdet(const Flowchart& fc, const BuildConfig& cfg);

} // namespace qdet
