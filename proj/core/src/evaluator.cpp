#include "qdet/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qdet/analyzer.hpp"

namespace qdet {

namespace {

double as_number(const Value& v, const char* where) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw DomainError(std::string("'") + where + "' needs a numeric operand");
}

bool as_boolean(const Value& v, const char* where) {
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw DomainError(std::string("'") + where + "' needs a boolean operand");
}

Value apply_concrete_unary(Op op, const Value& a) {
    switch (op) {
        case Op::Neg: return -as_number(a, "neg");
        case Op::Abs: return std::fabs(as_number(a, "abs"));
        case Op::Not: return !as_boolean(a, "not");
        default: throw DomainError("operator is not unary");
    }
}

Value apply_concrete_binary(Op op, const Value& a, const Value& b,
                            const std::string& where) {
    const char* name = op_info(op).name;
    switch (op) {
        case Op::Add: return as_number(a, name) + as_number(b, name);
        case Op::Sub: return as_number(a, name) - as_number(b, name);
        case Op::Mul: return as_number(a, name) * as_number(b, name);
        case Op::Div: {
            double d = as_number(b, name);
            if (d == 0.0) throw DivisionByZero(where);
            return as_number(a, name) / d;
        }
        case Op::And: return as_boolean(a, name) && as_boolean(b, name);
        case Op::Or: return as_boolean(a, name) || as_boolean(b, name);
        case Op::Eq: return as_number(a, name) == as_number(b, name);
        case Op::Ne: return as_number(a, name) != as_number(b, name);
        case Op::Lt: return as_number(a, name) < as_number(b, name);
        case Op::Le: return as_number(a, name) <= as_number(b, name);
        case Op::Gt: return as_number(a, name) > as_number(b, name);
        case Op::Ge: return as_number(a, name) >= as_number(b, name);
        default: throw DomainError("operator is not binary");
    }
}

class ConcreteRunner {
public:
    ConcreteRunner(const Flowchart& fc, const std::map<std::string, int>& params,
                   const Interpretation& inputs, std::optional<int> iterations,
                   std::size_t max_steps)
        : fc_(fc), inputs_(inputs), iterations_(iterations),
          max_steps_(max_steps) {
        auto violations = validate(fc_);
        if (!violations.empty())
            throw DomainError("flowchart invalid: " + violations[0].message);
        for (const Declaration& d : fc_.input_decls()) {
            if (d.dimension_param) {
                auto it = params.find(d.name);
                if (it == params.end())
                    throw DomainError("missing value for dimension parameter '" +
                                      d.name + "'");
                params_[d.name] = it->second;
            } else if (d.name == "iterations") {
                iterations_declared_ = true;
            } else {
                for (const Var& v : expand_declaration(d, params_))
                    input_vars_.insert(v.text());
            }
        }
        if (iterations_declared_ && !iterations_)
            throw DomainError(
                "chart declares iterations; a truncation depth is required");
        if (!iterations_declared_ && iterations_)
            throw DomainError("chart does not declare iterations");
        for (const Declaration& d : fc_.output_decls())
            for (const Var& v : expand_declaration(d, params_)) {
                output_order_.push_back(v);
                outputs_[v.text()] = Value{0.0};
            }
    }

    FlowRunResult run() {
        std::size_t steps = 0;
        int cur = follow(fc_.start_id(), EdgeType::Normal);
        for (;;) {
            if (++steps > max_steps_)
                throw LimitExceeded("step budget exceeded (" +
                                    std::to_string(max_steps_) + " blocks)");
            const Block& b = fc_.at(cur);
            if (b.type == BlockType::End) break;
            switch (b.type) {
                case BlockType::Input:
                case BlockType::Output:
                    cur = follow(b.id, EdgeType::Normal);
                    break;
                case BlockType::Process: {
                    const Assignment& a = b.assignments.front();
                    Value v = eval_sexpr(a.rhs);
                    write(expand_ref(a.target), v);
                    cur = follow(b.id, EdgeType::Normal);
                    break;
                }
                case BlockType::Decision: {
                    Value c = eval_sexpr(b.condition->expr);
                    bool taken = as_boolean(c, "decision");
                    cur = follow(b.id, taken ? EdgeType::True : EdgeType::False);
                    break;
                }
                default:
                    throw DomainError("start block re-entered");
            }
        }

        FlowRunResult rr;
        bool emitted = pass_emits();
        for (const Var& v : output_order_) {
            Outcome oc;
            if (emitted) {
                const Value& val = outputs_.at(v.text());
                if (!std::holds_alternative<double>(val))
                    throw DomainError("output '" + v.text() +
                                      "' holds a boolean value");
                oc.value = val;
            } else {
                oc.cause = "output cancelled (empout = 0)";
            }
            rr.outputs.emplace_back(v, oc);
        }
        return rr;
    }

private:
    int follow(int from, EdgeType type) {
        auto to = fc_.next(from, type);
        if (!to)
            throw DomainError("block " + std::to_string(from) +
                              " has no outgoing edge of the required type");
        return *to;
    }

    bool pass_emits() const {
        auto it = internals_.find("empout");
        if (it == internals_.end()) return true;
        if (const double* d = std::get_if<double>(&it->second)) return *d != 0.0;
        return std::get<bool>(it->second);
    }

    Var expand_ref(const VarRef& ref) {
        Var v;
        v.name = ref.name;
        for (const IndexExpr& e : ref.indices) {
            long long x = eval_index(e, [&](const std::string& ident) -> long long {
                if (auto it = params_.find(ident); it != params_.end())
                    return it->second;
                if (ident == "iterations" && iterations_declared_)
                    return *iterations_;
                if (auto it = internals_.find(ident); it != internals_.end()) {
                    double d = as_number(it->second, "index");
                    if (std::nearbyint(d) != d)
                        throw DomainError("index of '" + ref.name +
                                          "' is not an integer");
                    return static_cast<long long>(d);
                }
                throw UnboundVariable(ident);
            });
            v.indices.push_back(static_cast<int>(x));
        }
        return v;
    }

    Value read_ref(const VarRef& ref) {
        if (ref.indices.empty()) {
            if (ref.name == "iterations" && iterations_declared_)
                return Value{static_cast<double>(*iterations_)};
            if (auto it = params_.find(ref.name); it != params_.end())
                return Value{static_cast<double>(it->second)};
        }
        Var v = expand_ref(ref);
        const std::string key = v.text();
        if (input_vars_.count(key)) return Value{inputs_.get(v)};
        if (auto it = outputs_.find(key); it != outputs_.end())
            return it->second;
        if (auto it = internals_.find(key); it != internals_.end())
            return it->second;
        throw UnboundVariable(key);
    }

    void write(const Var& target, const Value& v) {
        const std::string key = target.text();
        if (params_.count(target.name) ||
            (iterations_declared_ && target.name == "iterations"))
            throw DomainError("assignment to dimension parameter or "
                              "iterations: '" + key + "'");
        if (input_vars_.count(key))
            throw DomainError("assignment to input variable '" + key + "'");
        if (auto it = outputs_.find(key); it != outputs_.end()) {
            it->second = v;
            return;
        }
        internals_[key] = v;
    }

    Value eval_sexpr(const SExpr& e) {
        switch (e.kind) {
            case SExpr::Kind::Number:
                return Value{std::strtod(e.number.c_str(), nullptr)};
            case SExpr::Kind::Ref:
                return read_ref(e.ref);
            case SExpr::Kind::Unary:
                return apply_concrete_unary(e.op, eval_sexpr(e.operands[0]));
            case SExpr::Kind::Binary: {
                Value a = eval_sexpr(e.operands[0]);
                Value b = eval_sexpr(e.operands[1]);
                return apply_concrete_binary(e.op, a, b, e.text());
            }
        }
        throw DomainError("corrupt statement expression");
    }

    const Flowchart& fc_;
    const Interpretation& inputs_;
    std::optional<int> iterations_;
    std::size_t max_steps_;
    bool iterations_declared_ = false;
    std::map<std::string, int> params_;
    std::set<std::string> input_vars_;
    std::vector<Var> output_order_;
    std::map<std::string, Value> outputs_;
    std::map<std::string, Value> internals_;
};

} // namespace

FlowRunResult run_flowchart(const Flowchart& fc,
                            const std::map<std::string, int>& params,
                            const Interpretation& inputs,
                            std::optional<int> iterations,
                            std::size_t max_steps) {
    return ConcreteRunner(fc, params, inputs, iterations, max_steps).run();
}

RunResult run_q_effective(const QDeterminant& q, const Interpretation& in) {
    const ExprArena& arena = q.arena;

    struct PairRef {
        std::size_t out;
        std::size_t idx;
        std::optional<NodeId> guard;
        NodeId value;
    };
    std::vector<PairRef> pairs;
    for (std::size_t i = 0; i < q.outputs.size(); ++i) {
        const QTerm& term = q.outputs[i].second;
        for (std::size_t j = 0; j < term.pairs.size(); ++j)
            pairs.push_back(
                {i, j, term.pairs[j].guard, term.pairs[j].value});
    }

    // Which pairs need each node: a node stops executing only once every pair
    // that contains it is dead.
    std::unordered_map<NodeId, std::vector<std::uint32_t>> node_pairs;
    std::vector<NodeId> all_roots;
    for (std::uint32_t k = 0; k < pairs.size(); ++k) {
        std::vector<NodeId> roots;
        if (pairs[k].guard) roots.push_back(*pairs[k].guard);
        roots.push_back(pairs[k].value);
        std::unordered_set<NodeId> seen;
        std::vector<NodeId> stack(roots.begin(), roots.end());
        while (!stack.empty()) {
            NodeId cur = stack.back();
            stack.pop_back();
            if (!seen.insert(cur).second) continue;
            node_pairs[cur].push_back(k);
            const Node& n = arena.node(cur);
            if (n.kind == NodeKind::Unary) stack.push_back(n.lhs);
            if (n.kind == NodeKind::Binary) {
                stack.push_back(n.lhs);
                stack.push_back(n.rhs);
            }
        }
        all_roots.insert(all_roots.end(), roots.begin(), roots.end());
    }

    Schedule sched = make_schedule(arena, all_roots, Sharing::Dag);

    enum class NState : std::uint8_t { Done, Failed, Skipped };
    std::unordered_map<NodeId, NState> state;
    std::unordered_map<NodeId, Value> values;
    std::unordered_map<NodeId, std::string> errors;

    auto leaf_eval = [&](NodeId id) {
        if (state.count(id)) return;
        const Node& n = arena.node(id);
        try {
            if (n.kind == NodeKind::Constant)
                values[id] = Value{std::strtod(n.literal.c_str(), nullptr)};
            else
                values[id] = Value{in.get(n.var)};
            state[id] = NState::Done;
        } catch (const EvalError& e) {
            state[id] = NState::Failed;
            errors[id] = e.what();
        }
    };

    enum class PState : std::uint8_t { Live, Dead, Won };
    std::vector<PState> pstate(pairs.size(), PState::Live);
    std::vector<std::optional<Value>> resolved(q.outputs.size());

    RunResult rr;
    rr.executed_per_level.assign(sched.levels.size(), 0);

    auto kill = [&](std::uint32_t k, int level, std::string reason) {
        if (pstate[k] != PState::Live) return;
        pstate[k] = PState::Dead;
        rr.terminated.push_back(
            {pairs[k].out, pairs[k].idx, level, std::move(reason)});
    };

    auto check_completions = [&](int level) {
        for (std::uint32_t k = 0; k < pairs.size(); ++k) {
            if (pstate[k] != PState::Live) continue;
            const PairRef& pr = pairs[k];
            if (resolved[pr.out]) {
                kill(k, level, "sibling pair completed");
                continue;
            }
            if (pr.guard) {
                auto it = state.find(*pr.guard);
                if (it == state.end()) continue; // guard still pending
                if (it->second == NState::Failed) {
                    kill(k, level, "guard failed: " + errors[*pr.guard]);
                    continue;
                }
                if (!std::get<bool>(values[*pr.guard])) {
                    kill(k, level, "guard false");
                    continue;
                }
            }
            if (arena.node(pr.value).level == 0) leaf_eval(pr.value);
            auto it = state.find(pr.value);
            if (it == state.end()) continue; // value still pending
            if (it->second == NState::Failed) {
                kill(k, level, "value failed: " + errors[pr.value]);
                continue;
            }
            pstate[k] = PState::Won;
            resolved[pr.out] = values[pr.value];
            for (std::uint32_t k2 = 0; k2 < pairs.size(); ++k2)
                if (k2 != k && pairs[k2].out == pr.out)
                    kill(k2, level, "sibling pair completed");
        }
    };

    check_completions(0);
    for (std::size_t r = 0; r < sched.levels.size(); ++r) {
        for (const ScheduleEntry& entry : sched.levels[r]) {
            NodeId id = entry.node;
            if (state.count(id)) continue;
            bool needed = false;
            for (std::uint32_t k : node_pairs[id])
                if (pstate[k] == PState::Live) {
                    needed = true;
                    break;
                }
            if (!needed) {
                state[id] = NState::Skipped;
                continue;
            }
            const Node& n = arena.node(id);
            auto operand = [&](NodeId o) -> std::optional<Value> {
                if (arena.node(o).level == 0) leaf_eval(o);
                auto it = state.find(o);
                if (it == state.end() || it->second != NState::Done)
                    return std::nullopt;
                return values[o];
            };
            std::optional<Value> a = operand(n.lhs);
            std::optional<Value> b =
                n.kind == NodeKind::Binary ? operand(n.rhs) : Value{0.0};
            std::string err;
            if (!a || !b) {
                err = "operand unavailable";
            } else {
                try {
                    values[id] = n.kind == NodeKind::Unary
                                     ? apply_concrete_unary(n.op, *a)
                                     : apply_concrete_binary(
                                           n.op, *a, *b,
                                           arena.serialize_expr(id));
                } catch (const EvalError& e) {
                    err = e.what();
                }
            }
            if (err.empty()) {
                state[id] = NState::Done;
                ++rr.executed_per_level[r];
            } else {
                state[id] = NState::Failed;
                errors[id] = err;
                for (std::uint32_t k : node_pairs[id])
                    kill(k, static_cast<int>(r) + 1,
                         "evaluation error: " + err);
            }
        }
        check_completions(static_cast<int>(r) + 1);
    }

    for (std::size_t i = 0; i < q.outputs.size(); ++i) {
        Outcome oc;
        if (resolved[i]) {
            oc.value = *resolved[i];
        } else {
            oc.cause = "no guard satisfied";
            if (q.outputs[i].second.kind == TermKind::TruncatedInfinite)
                oc.cause +=
                    " within " + std::to_string(q.iterations) + " iterations";
        }
        rr.outputs.emplace_back(q.outputs[i].first, oc);
    }
    return rr;
}

} // namespace qdet
