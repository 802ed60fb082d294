#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>
#include <unordered_map>

#include "qdet/errors.hpp"

namespace qdet {

/// Operation set Q. Arithmetic ops work on numbers, comparisons map numbers to
/// booleans, logic ops work on booleans.
enum class Op : std::uint8_t {
    Add, Sub, Mul, Div, Neg, Abs,
    And, Or, Not,
    Eq, Ne, Lt, Le, Gt, Ge,
};

struct OpInfo {
    const char* name;       // wire name ("add", "le", ...)
    int arity;              // 1 or 2
    bool assoc_comm;        // participates in chain rebalancing
    bool boolean_operands;  // operands must be boolean-kinded
    bool boolean_result;    // node is boolean-kinded
};

const OpInfo& op_info(Op op);
std::optional<Op> op_from_name(std::string_view name);

/// Complement of a comparison (eq<->ne, lt<->ge, le<->gt). Used when a decision
/// exit 0 contributes the negated condition to a guard. Throws DomainError for
/// non-comparisons.
Op comparison_complement(Op op);

/// True for the six comparison operators (numeric operands, boolean result).
bool is_comparison(Op op);

/// A variable: identifier plus optional integer indices, e.g. A(1,2).
struct Var {
    std::string name;
    std::vector<int> indices;

    std::string text() const;
    static Var parse(std::string_view text); // throws ParseError
    auto operator<=>(const Var&) const = default;
};

using Value = std::variant<double, bool>;
using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { Constant, Variable, Unary, Binary };

struct Node {
    NodeKind kind;
    Op op = Op::Add;       // meaningful for Unary/Binary
    NodeId lhs = 0;
    NodeId rhs = 0;
    std::string literal;   // Constant: canonical decimal token
    Var var;               // Variable
    int level = 0;         // nesting level: 0 for leaves, max(children)+1 for ops
    bool boolean = false;  // kind of the value this node produces
};

/// Interpretation binds input variables (by their text form) to numbers.
struct Interpretation {
    std::map<std::string, double> values;

    void bind(const Var& v, double x) { values[v.text()] = x; }
    void bind(const std::string& text, double x) { values[text] = x; }
    double get(const Var& v) const;
};

/// Hash-consed expression arena. Structural sharing is always on: constructing
/// an identical node returns the existing id, so expressions form a dag and
/// equality is id equality. Nesting levels and value kinds are computed at
/// construction; cycles are impossible by construction.
class ExprArena {
public:
    ExprArena();

    NodeId constant(const std::string& canonical_token);
    NodeId constant(double value);
    NodeId variable(const Var& v);
    NodeId variable(std::string name, std::vector<int> indices = {});
    NodeId unary(Op op, NodeId operand);
    NodeId binary(Op op, NodeId lhs, NodeId rhs);

    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }

    /// Nesting level T of the expression rooted at id.
    int nesting_level(NodeId id) const { return node(id).level; }
    bool boolean_kind(NodeId id) const { return node(id).boolean; }

    /// Evaluate under an interpretation. Throws UnboundVariable /
    /// DivisionByZero.
    Value evaluate(NodeId id, const Interpretation& in) const;

    /// Sorted, deduplicated free variables of the expression.
    std::vector<Var> free_vars(NodeId id) const;

    /// Maximal same-operator operand list for an associative-commutative root
    /// (left-to-right); for other binaries, the two immediate operands.
    /// Throws DomainError when id is not a binary node.
    std::pair<Op, std::vector<NodeId>> flatten_chain(NodeId id) const;

    /// Rebalance every maximal associative chain into an ASAP pairing tree:
    /// operands sorted by (already rebalanced) nesting level; at each level all
    /// ready values are paired left-to-right, an odd leftover carries forward.
    /// Never increases the nesting level; adds depth ceil(log2 m) for m
    /// equal-level operands.
    NodeId rebalance_doubling(NodeId id);

    /// JSON wire format: binary {"op","fO","sO"}, unary {"op","od"}, variables
    /// as strings, constants as numbers.
    NodeId parse_expr(const std::string& json_text);
    std::string serialize_expr(NodeId id) const;

    /// Canonical decimal token for a double (integers without decimal point).
    static std::string canonical_number(double value);

private:
    NodeId intern(Node&& n, std::string&& key);

    std::vector<Node> nodes_;
    std::unordered_map<std::string, NodeId> dedup_;
};

enum class Sharing { Dag, Tree };

/// Operation counts per nesting level (index 0 = level 1) over a set of root
/// expressions. Dag mode counts each distinct node once across the whole set;
/// tree mode counts occurrences per listed expression (roots counted
/// independently even when they share subtrees).
std::vector<std::uint64_t> count_ops_per_level(const ExprArena& arena,
                                               std::span<const NodeId> roots,
                                               Sharing sharing);

} // namespace qdet
