#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdet/flowchart.hpp"
#include "qdet/qterm.hpp"

namespace qdet {

/// Result of the sequential flowchart interpreter. When a run ends with the
/// internal variable empout set to 0, every output is reported undetermined.
struct FlowRunResult {
    std::vector<std::pair<Var, Outcome>> outputs;
};

/// Ordinary concrete execution of a flowchart: every block runs with real
/// numbers, decisions follow their evaluated conditions, `iterations` (when
/// declared) is bound to the given truncation depth. This is the ground-truth
/// oracle the symbolic paths are checked against.
FlowRunResult run_flowchart(const Flowchart& fc,
                            const std::map<std::string, int>& params,
                            const Interpretation& inputs,
                            std::optional<int> iterations = std::nullopt,
                            std::size_t max_steps = 10'000'000);

/// One cancelled (guard, value) pair of an effective run.
struct PairTermination {
    std::size_t output = 0; // index into q.outputs
    std::size_t pair = 0;   // pair index within the term
    int level = 0;          // schedule level at which it was terminated
    std::string reason;
};

struct RunResult {
    std::vector<std::pair<Var, Outcome>> outputs;
    std::vector<std::uint64_t> executed_per_level;
    std::vector<PairTermination> terminated;
};

/// Level-synchronous execution of the Q-determinant: operations run as soon
/// as their operands are ready, one nesting level per step. A pair whose
/// guard turns out false is cancelled; a pair whose guard holds and whose
/// value completes resolves its output and cancels the sibling pairs; a node
/// that fails (division by zero, unbound variable) kills every pair that
/// contains it. Shared nodes execute once. Failures are never thrown: an
/// unresolved output reports the cause instead.
RunResult run_q_effective(const QDeterminant& q, const Interpretation& in);

} // namespace qdet
