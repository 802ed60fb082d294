#include "qdet/builder.hpp"

#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace qdet {

std::optional<BranchTrace> next_branch(BranchTrace t) {
    while (!t.empty() && t.back().exit == 0) t.pop_back();
    if (t.empty()) return std::nullopt;
    t.back().exit = 0;
    return t;
}

namespace {

// A value flowing through the symbolic interpretation: a concrete number, a
// concrete boolean, or an expression over the input variables.
struct Cell {
    enum class Kind { Number, Boolean, Symbolic };
    Kind kind = Kind::Number;
    double num = 0.0;
    bool flag = false;
    NodeId node = 0;

    static Cell number(double v) { return {Kind::Number, v, false, 0}; }
    static Cell boolean(bool v) { return {Kind::Boolean, 0.0, v, 0}; }
    static Cell symbolic(NodeId id) { return {Kind::Symbolic, 0.0, false, id}; }
    bool concrete() const { return kind != Kind::Symbolic; }
};

struct Emission {
    std::optional<NodeId> guard;
    std::vector<NodeId> values; // aligned with the output declaration order
};

// Revisiting one decision block symbolically this many times within a single
// pass means an input-data condition is steering a loop, which can never
// exhaust: every fresh occurrence takes the true exit again.
constexpr std::size_t kLoopControlThreshold = 65536;

class Builder {
public:
    Builder(const Flowchart& fc, const BuildConfig& cfg) : fc_(fc), cfg_(cfg) {}

    QDeterminant build() {
        require_valid();
        expand_declarations();
        guard_mode_ = cfg_.guard_mode.value_or(
            iterations_declared_ ? GuardMode::LastConditionOnly
                                 : GuardMode::FullConjunction);

        std::size_t passes = 0;
        BranchTrace trace;
        for (;;) {
            if (++passes > cfg_.max_branches)
                throw LimitExceeded("branch budget exceeded after " +
                                    std::to_string(cfg_.max_branches) +
                                    " passes");
            trace = run_pass(trace);
            auto nb = next_branch(trace);
            if (!nb) break;
            trace = std::move(*nb);
        }
        assemble();
        return std::move(q_);
    }

private:
    ExprArena& arena() { return q_.arena; }

    void require_valid() {
        auto violations = validate(fc_);
        if (violations.empty()) return;
        std::string msg = "flowchart invalid:";
        std::size_t shown = 0;
        for (const Violation& v : violations) {
            if (shown++ == 3) {
                msg += " ...";
                break;
            }
            msg += " [block " + std::to_string(v.block_id) + "] " + v.message + ";";
        }
        throw DomainError(msg);
    }

    void expand_declarations() {
        for (const Declaration& d : fc_.input_decls()) {
            if (d.dimension_param) {
                auto it = cfg_.params.find(d.name);
                if (it == cfg_.params.end())
                    throw DomainError("missing value for dimension parameter '" +
                                      d.name + "'");
                if (q_.params.count(d.name))
                    throw DomainError("dimension parameter '" + d.name +
                                      "' declared twice");
                q_.param_names.push_back(d.name);
                q_.params[d.name] = it->second;
            } else if (d.name == "iterations") {
                iterations_declared_ = true;
            } else {
                for (const Var& v : expand_declaration(d, q_.params))
                    input_vars_.insert(v.text());
            }
        }
        for (const auto& [name, value] : cfg_.params)
            if (!q_.params.count(name))
                throw DomainError("value given for undeclared dimension "
                                  "parameter '" + name + "'");
        if (iterations_declared_ && !cfg_.iterations)
            throw DomainError(
                "chart declares iterations; a truncation depth is required");
        if (!iterations_declared_ && cfg_.iterations)
            throw DomainError("chart does not declare iterations");
        if (iterations_declared_ && *cfg_.iterations < 1)
            throw DomainError("iterations must be >= 1");
        q_.iterations = iterations_declared_ ? *cfg_.iterations : 0;

        for (const Declaration& d : fc_.output_decls()) {
            if (d.dimension_param)
                throw DomainError("output block cannot declare dimension "
                                  "parameters");
            for (const Var& v : expand_declaration(d, q_.params)) {
                if (input_vars_.count(v.text()) || q_.params.count(v.name))
                    throw DomainError("output '" + v.text() +
                                      "' collides with an input");
                output_order_.push_back(v);
            }
        }
    }

    // ---- per-pass machinery ----

    Cell read_ref(const VarRef& ref) {
        if (ref.indices.empty()) {
            if (ref.name == "iterations" && iterations_declared_)
                return Cell::number(static_cast<double>(*cfg_.iterations));
            auto it = q_.params.find(ref.name);
            if (it != q_.params.end())
                return Cell::number(static_cast<double>(it->second));
        }
        Var v = expand_ref(ref);
        const std::string key = v.text();
        if (input_vars_.count(key))
            return Cell::symbolic(arena().variable(v));
        if (auto it = output_cells_.find(key); it != output_cells_.end())
            return it->second;
        if (auto it = internals_.find(key); it != internals_.end())
            return it->second;
        throw UnboundVariable(key);
    }

    Var expand_ref(const VarRef& ref) {
        Var v;
        v.name = ref.name;
        for (const IndexExpr& e : ref.indices) {
            long long x = eval_index(e, [&](const std::string& ident) -> long long {
                if (auto it = q_.params.find(ident); it != q_.params.end())
                    return it->second;
                if (ident == "iterations" && iterations_declared_)
                    return *cfg_.iterations;
                if (auto it = internals_.find(ident); it != internals_.end()) {
                    const Cell& c = it->second;
                    if (c.kind == Cell::Kind::Number &&
                        std::nearbyint(c.num) == c.num)
                        return static_cast<long long>(c.num);
                    throw DomainError("index of '" + ref.name +
                                      "' depends on input data via '" + ident +
                                      "'");
                }
                if (input_vars_.count(ident))
                    throw DomainError("index of '" + ref.name +
                                      "' depends on input data via '" + ident +
                                      "'");
                throw UnboundVariable(ident);
            });
            v.indices.push_back(static_cast<int>(x));
        }
        return v;
    }

    NodeId to_node(const Cell& c) {
        switch (c.kind) {
            case Cell::Kind::Symbolic: return c.node;
            case Cell::Kind::Number: return arena().constant(c.num);
            case Cell::Kind::Boolean:
                throw DomainError(
                    "boolean constant cannot enter a symbolic expression");
        }
        throw DomainError("corrupt cell");
    }

    Cell apply_unary(Op op, const Cell& a) {
        if (a.concrete()) {
            switch (op) {
                case Op::Neg:
                    require_number(a, "neg");
                    return Cell::number(-a.num);
                case Op::Abs:
                    require_number(a, "abs");
                    return Cell::number(std::fabs(a.num));
                case Op::Not:
                    require_boolean(a, "not");
                    return Cell::boolean(!a.flag);
                default:
                    throw DomainError("operator is not unary");
            }
        }
        return Cell::symbolic(arena().unary(op, a.node));
    }

    Cell apply_binary(Op op, const Cell& a, const Cell& b) {
        const OpInfo& info = op_info(op);
        if (a.concrete() && b.concrete()) {
            if (info.boolean_operands) {
                require_boolean(a, info.name);
                require_boolean(b, info.name);
                return Cell::boolean(op == Op::And ? (a.flag && b.flag)
                                                   : (a.flag || b.flag));
            }
            require_number(a, info.name);
            require_number(b, info.name);
            switch (op) {
                case Op::Add: return Cell::number(a.num + b.num);
                case Op::Sub: return Cell::number(a.num - b.num);
                case Op::Mul: return Cell::number(a.num * b.num);
                case Op::Div:
                    if (b.num == 0.0)
                        throw DivisionByZero("a concrete division of the pass");
                    return Cell::number(a.num / b.num);
                case Op::Eq: return Cell::boolean(a.num == b.num);
                case Op::Ne: return Cell::boolean(a.num != b.num);
                case Op::Lt: return Cell::boolean(a.num < b.num);
                case Op::Le: return Cell::boolean(a.num <= b.num);
                case Op::Gt: return Cell::boolean(a.num > b.num);
                case Op::Ge: return Cell::boolean(a.num >= b.num);
                default: throw DomainError("operator is not binary");
            }
        }
        // Fold logic operations with one concrete boolean side so that no
        // boolean constant needs to exist as an expression node.
        if (op == Op::And) {
            if (a.kind == Cell::Kind::Boolean) return a.flag ? b : a;
            if (b.kind == Cell::Kind::Boolean) return b.flag ? a : b;
        }
        if (op == Op::Or) {
            if (a.kind == Cell::Kind::Boolean) return a.flag ? a : b;
            if (b.kind == Cell::Kind::Boolean) return b.flag ? b : a;
        }
        return Cell::symbolic(arena().binary(op, to_node(a), to_node(b)));
    }

    void require_number(const Cell& c, const std::string& where) {
        if (c.kind != Cell::Kind::Number)
            throw DomainError("'" + where + "' needs a numeric operand");
    }
    void require_boolean(const Cell& c, const std::string& where) {
        if (c.kind != Cell::Kind::Boolean)
            throw DomainError("'" + where + "' needs a boolean operand");
    }

    Cell eval_sexpr(const SExpr& e) {
        switch (e.kind) {
            case SExpr::Kind::Number:
                return Cell::number(std::strtod(e.number.c_str(), nullptr));
            case SExpr::Kind::Ref:
                return read_ref(e.ref);
            case SExpr::Kind::Unary:
                return apply_unary(e.op, eval_sexpr(e.operands[0]));
            case SExpr::Kind::Binary: {
                Cell a = eval_sexpr(e.operands[0]);
                Cell b = eval_sexpr(e.operands[1]);
                return apply_binary(e.op, a, b);
            }
        }
        throw DomainError("corrupt statement expression");
    }

    void exec_assignment(const Assignment& a) {
        Cell v = eval_sexpr(a.rhs);
        Var target = expand_ref(a.target);
        const std::string key = target.text();
        if (q_.params.count(target.name) ||
            (iterations_declared_ && target.name == "iterations"))
            throw DomainError("assignment to dimension parameter or "
                              "iterations: '" + key + "'");
        if (input_vars_.count(key))
            throw DomainError("assignment to input variable '" + key + "'");
        if (auto it = output_cells_.find(key); it != output_cells_.end()) {
            it->second = v;
            return;
        }
        internals_[key] = v;
    }

    NodeId negate(NodeId cond) {
        const Node& n = arena().node(cond);
        if (n.kind == NodeKind::Binary && is_comparison(n.op))
            return arena().binary(comparison_complement(n.op), n.lhs, n.rhs);
        return arena().unary(Op::Not, cond);
    }

    int follow(int from, EdgeType type) {
        auto to = fc_.next(from, type);
        if (!to)
            throw DomainError("block " + std::to_string(from) +
                              " has no outgoing edge of the required type");
        return *to;
    }

    // Runs one Start-to-End pass guided by `given`; returns the full trace.
    BranchTrace run_pass(const BranchTrace& given) {
        internals_.clear();
        output_cells_.clear();
        for (const Var& v : output_order_)
            output_cells_[v.text()] = Cell::number(0.0);
        std::vector<NodeId> guard_terms;
        std::optional<NodeId> last_term;
        BranchTrace trace;
        std::unordered_map<int, std::size_t> symbolic_visits;
        std::size_t steps = 0;

        int cur = follow(fc_.start_id(), EdgeType::Normal);
        for (;;) {
            if (++steps > cfg_.max_steps)
                throw LimitExceeded("step budget exceeded within one pass (" +
                                    std::to_string(cfg_.max_steps) + " blocks)");
            const Block& b = fc_.at(cur);
            if (b.type == BlockType::End) break;
            switch (b.type) {
                case BlockType::Input:
                case BlockType::Output:
                    cur = follow(b.id, EdgeType::Normal);
                    break;
                case BlockType::Process:
                    exec_assignment(b.assignments.front());
                    cur = follow(b.id, EdgeType::Normal);
                    break;
                case BlockType::Decision: {
                    Cell c = eval_sexpr(b.condition->expr);
                    if (c.kind == Cell::Kind::Number)
                        throw DomainError("decision at block " +
                                          std::to_string(b.id) +
                                          " yields a number, not a condition");
                    if (c.kind == Cell::Kind::Boolean) {
                        cur = follow(b.id, c.flag ? EdgeType::True
                                                  : EdgeType::False);
                        break;
                    }
                    if (++symbolic_visits[b.id] > kLoopControlThreshold)
                        throw DomainError(
                            "loop control at block " + std::to_string(b.id) +
                            " depends on input data; bound the loop with "
                            "'iterations'");
                    const std::size_t ordinal = trace.size();
                    int exit = ordinal < given.size() ? given[ordinal].exit : 1;
                    trace.push_back({ordinal, exit});
                    NodeId term = exit ? c.node : negate(c.node);
                    if (guard_mode_ == GuardMode::FullConjunction)
                        guard_terms.push_back(term);
                    else
                        last_term = term;
                    cur = follow(b.id, exit ? EdgeType::True : EdgeType::False);
                    break;
                }
                case BlockType::Start:
                    throw DomainError("start block re-entered");
                case BlockType::End:
                    break;
            }
        }

        if (pass_emits()) {
            Emission em;
            if (guard_mode_ == GuardMode::FullConjunction) {
                if (!guard_terms.empty()) {
                    NodeId g = guard_terms.front();
                    for (std::size_t i = 1; i < guard_terms.size(); ++i)
                        g = arena().binary(Op::And, g, guard_terms[i]);
                    em.guard = g;
                }
            } else {
                em.guard = last_term;
            }
            em.values.reserve(output_order_.size());
            for (const Var& v : output_order_) {
                const Cell& c = output_cells_.at(v.text());
                if (c.kind == Cell::Kind::Boolean)
                    throw DomainError("output '" + v.text() +
                                      "' holds a boolean value");
                em.values.push_back(to_node(c));
            }
            emissions_.push_back(std::move(em));
        }
        return trace;
    }

    bool pass_emits() const {
        auto it = internals_.find("empout");
        if (it == internals_.end()) return true;
        const Cell& c = it->second;
        switch (c.kind) {
            case Cell::Kind::Number: return c.num != 0.0;
            case Cell::Kind::Boolean: return c.flag;
            case Cell::Kind::Symbolic:
                throw DomainError("empout must hold a concrete value");
        }
        return true;
    }

    void assemble() {
        for (std::size_t i = 0; i < output_order_.size(); ++i) {
            QTerm term;
            for (const Emission& em : emissions_)
                term.pairs.push_back(GuardedPair{em.guard, em.values[i]});
            if (iterations_declared_)
                term.kind = TermKind::TruncatedInfinite;
            else if (term.pairs.size() == 1 && !term.pairs[0].guard)
                term.kind = TermKind::Unconditional;
            else
                term.kind = TermKind::Conditional;
            q_.outputs.emplace_back(output_order_[i], std::move(term));
        }
    }

    const Flowchart& fc_;
    const BuildConfig& cfg_;
    QDeterminant q_;
    GuardMode guard_mode_ = GuardMode::FullConjunction;
    bool iterations_declared_ = false;
    std::set<std::string> input_vars_;
    std::vector<Var> output_order_;
    std::map<std::string, Cell> output_cells_;
    std::map<std::string, Cell> internals_;
    std::vector<Emission> emissions_;
};

} // namespace

QDeterminant build_qdet(const Flowchart& fc, const BuildConfig& cfg) {
    return Builder(fc, cfg).build();
}

} // namespace qdet
