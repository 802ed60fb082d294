#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdet/expr.hpp"

namespace qdet {

/// Block types of the flowchart encoding.
enum class BlockType : int {
    Start = 0,
    End = 1,
    Process = 2,
    Decision = 3,
    Input = 4,
    Output = 5,
};

/// Edge types: 0 leaves a decision on "false", 1 on "true", 2 is the normal
/// continuation of every other block.
enum class EdgeType : int {
    False = 0,
    True = 1,
    Normal = 2,
};

/// Integer expression used in index positions and extent declarations:
/// +, -, *, / over integer literals and scalar identifiers. Indexed variables
/// are not allowed inside indices.
struct IndexExpr {
    enum class Kind { Number, Ident, Binary, Negate };
    Kind kind = Kind::Number;
    long long number = 0;
    std::string ident;
    char op = '+';                   // Binary: + - * /
    std::vector<IndexExpr> operands; // 2 for Binary, 1 for Negate

    std::string text() const;
};

IndexExpr parse_index_expr(std::string_view text);

/// Evaluate an index expression; identifiers resolve through `lookup` (which
/// may throw, e.g. UnboundVariable). Division is truncating; division by zero
/// throws EvalError.
long long eval_index(const IndexExpr& e,
                     const std::function<long long(const std::string&)>& lookup);

/// A variable occurrence with index expressions, e.g. newX(i) or A(k,n+1).
struct VarRef {
    std::string name;
    std::vector<IndexExpr> indices;

    std::string text() const;
};

/// Expression tree of a statement. The parser accepts arbitrary nesting; the
/// one-operation-per-assignment limitation is enforced by validate, not here.
struct SExpr {
    enum class Kind { Number, Ref, Unary, Binary };
    Kind kind = Kind::Number;
    std::string number;              // literal token as written
    VarRef ref;
    Op op = Op::Add;                 // Unary / Binary
    std::vector<SExpr> operands;     // 1 for Unary, 2 for Binary

    int op_count() const;
    std::string text() const;
};

/// `target = rhs` of a process block.
struct Assignment {
    VarRef target;
    SExpr rhs;
};

/// Content of a decision block. Admissible shapes (checked by validate): a
/// comparison whose operands contain no operations, or a bare variable
/// reference holding a boolean.
struct Condition {
    SExpr expr;

    bool is_bare() const { return expr.kind == SExpr::Kind::Ref; }
};

/// One entry of an Input/Output declaration list. In Input blocks a bracketed
/// name ([n]) declares a dimension parameter; plain names declare input
/// variables, parenthesized extents spanning indices 1..extent per dimension.
/// Declaring the name `iterations` marks the chart as iteration-bounded.
struct Declaration {
    bool dimension_param = false;
    std::string name;
    std::vector<IndexExpr> extents;
};

Assignment parse_assignment(std::string_view text);
Condition parse_condition(std::string_view text);
std::vector<Declaration> parse_declarations(std::string_view text);

/// Expand a declaration into concrete variables for the given parameter
/// values: extents are evaluated over the parameters and each index runs
/// 1..extent, last index fastest. A scalar declaration yields one variable.
std::vector<Var> expand_declaration(const Declaration& d,
                                    const std::map<std::string, int>& params);

struct Block {
    int id = 0;
    BlockType type = BlockType::Process;
    std::string content;

    // Parsed payload, filled by parse_payloads according to the block type.
    std::vector<Assignment> assignments; // Process
    std::optional<Condition> condition;  // Decision
    std::vector<Declaration> decls;      // Input / Output
};

struct FlowEdge {
    int from = 0;
    int to = 0;
    EdgeType type = EdgeType::Normal;
};

struct Flowchart {
    std::vector<Block> blocks;
    std::vector<FlowEdge> edges;

    const Block* find(int id) const;
    const Block& at(int id) const; // throws DomainError when missing
    int start_id() const;          // throws DomainError when absent
    std::optional<int> next(int from, EdgeType type) const;

    std::vector<Declaration> input_decls() const;
    std::vector<Declaration> output_decls() const;
    bool declares_iterations() const;
};

/// Parse every block's content into its payload (statements, condition, or
/// declarations). Called by parse_flowchart; exposed for charts constructed
/// programmatically. Throws ParseError on malformed statement text.
void parse_payloads(Flowchart& fc);

/// JSON wire format: top-level "Vertices" (objects with "Id","Type","Content")
/// and "Edges" (objects with "From","To","Type"). Unknown block/edge types and
/// edges to missing blocks are rejected here.
Flowchart parse_flowchart(const std::string& json_text);
std::string serialize_flowchart(const Flowchart& fc);

struct Violation {
    int block_id = -1; // -1 for chart-level findings
    std::string message;
};

/// Structural checks; an empty result means the chart is well-formed: exactly
/// one Start (out-degree 1, in-degree 0) and one End (in-degree >= 1,
/// out-degree 0); decisions carry exactly one false and one true exit; every
/// other non-terminal block one normal exit; process blocks hold a single
/// assignment with at most one operation on the right-hand side; decision
/// operands contain no operations; all blocks reachable from Start.
std::vector<Violation> validate(const Flowchart& fc);

} // namespace qdet
