#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdet/expr.hpp"

namespace qdet {

/// One (guard, value) pair of a conditional term. Unconditional terms are a
/// single pair without a guard.
struct GuardedPair {
    std::optional<NodeId> guard;
    NodeId value;
};

enum class TermKind {
    Unconditional,       // single pair, no guard
    Conditional,         // finite list of guarded pairs
    TruncatedInfinite,   // conditional-infinite term truncated at L iterations
};

struct QTerm {
    TermKind kind = TermKind::Unconditional;
    std::vector<GuardedPair> pairs;
};

/// A Q-determinant: one Q-term per output variable, plus the dimension
/// parameters and truncation depth it was built for. Owns its arena.
struct QDeterminant {
    ExprArena arena;
    std::vector<std::string> param_names;        // declaration order
    std::map<std::string, int> params;
    int iterations = 0;                          // truncation depth L (0 = none)
    std::vector<std::pair<Var, QTerm>> outputs;  // declaration order

    int param(const std::string& name) const;
};

/// Indices of outputs by term kind (the U/C/I partition of the outputs).
struct Partition {
    std::vector<std::size_t> unconditional;
    std::vector<std::size_t> conditional;
    std::vector<std::size_t> truncated_infinite;
};

Partition classify(const QDeterminant& q);

/// Deduplicated list of every guard and value expression, in first-appearance
/// order (outputs in declaration order, pairs in emission order, guard before
/// value).
std::vector<NodeId> expression_set(const QDeterminant& q);

/// Result of evaluating one output under an interpretation.
struct Outcome {
    std::optional<Value> value;
    std::string cause;  // set when value is empty (undetermined)

    bool determined() const { return value.has_value(); }
};

/// Evaluate every output: guards in pair order, lowest-index true guard wins.
/// Guards that fail to evaluate are treated as not satisfied and mentioned in
/// the cause when no pair is selected. Evaluation errors propagate only from
/// the selected pair.
std::vector<std::pair<Var, Outcome>> qdet_value(const QDeterminant& q,
                                                const Interpretation& in);

/// Text file format:
///   #param <name>=<int>        (one per dimension parameter)
///   #iterations <int>          (always present; 0 when not truncated)
///   <output> = <guard-json> ; <value-json>
/// Unconditional lines carry a single space in the guard slot. Pairs are
/// grouped output-major in declaration order; parse/serialize round-trips are
/// byte-stable.
std::string serialize_qdet(const QDeterminant& q);
QDeterminant parse_qdet(const std::string& text);

} // namespace qdet
