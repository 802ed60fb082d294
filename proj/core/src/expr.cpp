#include "qdet/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qdet {

namespace {

const OpInfo kOps[] = {
    // name  arity ac     bool-in bool-out
    {"+", 2, true,  false, false},
    {"-", 2, false, false, false},
    {"*", 2, true,  false, false},
    {"/", 2, false, false, false},
    {"neg", 1, false, false, false},
    {"abs", 1, false, false, false},
    {"and", 2, true,  true,  true},
    {"or",  2, true,  true,  true},
    {"not", 1, false, true,  true},
    {"eq",  2, false, false, true},
    {"ne",  2, false, false, true},
    {"lt",  2, false, false, true},
    {"le",  2, false, false, true},
    {"gt",  2, false, false, true},
    {"ge",  2, false, false, true},
};

} // namespace

const OpInfo& op_info(Op op) { return kOps[static_cast<int>(op)]; }

std::optional<Op> op_from_name(std::string_view name) {
    for (int i = 0; i < static_cast<int>(std::size(kOps)); ++i)
        if (name == kOps[i].name) return static_cast<Op>(i);
    // Word aliases for the arithmetic symbols, accepted on input.
    if (name == "add") return Op::Add;
    if (name == "sub") return Op::Sub;
    if (name == "mul") return Op::Mul;
    if (name == "div") return Op::Div;
    return std::nullopt;
}

bool is_comparison(Op op) {
    const OpInfo& info = op_info(op);
    return info.boolean_result && !info.boolean_operands;
}

Op comparison_complement(Op op) {
    switch (op) {
    case Op::Eq: return Op::Ne;
    case Op::Ne: return Op::Eq;
    case Op::Lt: return Op::Ge;
    case Op::Ge: return Op::Lt;
    case Op::Le: return Op::Gt;
    case Op::Gt: return Op::Le;
    default:
        throw DomainError(std::string("operator '") + op_info(op).name +
                          "' has no comparison complement");
    }
}

std::string Var::text() const {
    if (indices.empty()) return name;
    std::ostringstream os;
    os << name << '(';
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) os << ',';
        os << indices[i];
    }
    os << ')';
    return os.str();
}

Var Var::parse(std::string_view text) {
    Var v;
    auto paren = text.find('(');
    if (paren == std::string_view::npos) {
        v.name = std::string(text);
    } else {
        if (text.empty() || text.back() != ')')
            throw ParseError("malformed variable '" + std::string(text) + "'");
        v.name = std::string(text.substr(0, paren));
        std::string inner(text.substr(paren + 1, text.size() - paren - 2));
        std::istringstream is(inner);
        std::string part;
        while (std::getline(is, part, ',')) {
            std::size_t pos = 0;
            int idx = 0;
            try {
                idx = std::stoi(part, &pos);
            } catch (const std::exception&) {
                throw ParseError("non-integer index in variable '" +
                                 std::string(text) + "'");
            }
            if (pos != part.size())
                throw ParseError("non-integer index in variable '" +
                                 std::string(text) + "'");
            v.indices.push_back(idx);
        }
        if (v.indices.empty())
            throw ParseError("empty index list in variable '" +
                             std::string(text) + "'");
    }
    if (v.name.empty())
        throw ParseError("empty variable name in '" + std::string(text) + "'");
    return v;
}

double Interpretation::get(const Var& v) const {
    auto it = values.find(v.text());
    if (it == values.end()) throw UnboundVariable(v.text());
    return it->second;
}

ExprArena::ExprArena() {
    nodes_.reserve(64);
    // Slot 0 stays a real node (the constant 0) so NodeId 0 is always valid.
    constant(std::string("0"));
}

NodeId ExprArena::intern(Node&& n, std::string&& key) {
    auto it = dedup_.find(key);
    if (it != dedup_.end()) return it->second;
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(n));
    dedup_.emplace(std::move(key), id);
    return id;
}

NodeId ExprArena::constant(const std::string& token) {
    Node n;
    n.kind = NodeKind::Constant;
    n.literal = token;
    return intern(std::move(n), "c:" + token);
}

NodeId ExprArena::constant(double value) {
    return constant(canonical_number(value));
}

NodeId ExprArena::variable(const Var& v) {
    Node n;
    n.kind = NodeKind::Variable;
    n.var = v;
    return intern(std::move(n), "v:" + v.text());
}

NodeId ExprArena::variable(std::string name, std::vector<int> indices) {
    return variable(Var{std::move(name), std::move(indices)});
}

NodeId ExprArena::unary(Op op, NodeId operand) {
    const OpInfo& info = op_info(op);
    if (info.arity != 1)
        throw DomainError(std::string("operator '") + info.name + "' is not unary");
    if (boolean_kind(operand) != info.boolean_operands)
        throw DomainError(std::string("kind mismatch: '") + info.name +
                          "' applied to a " +
                          (boolean_kind(operand) ? "boolean" : "numeric") +
                          " operand");
    Node n;
    n.kind = NodeKind::Unary;
    n.op = op;
    n.lhs = operand;
    n.level = node(operand).level + 1;
    n.boolean = info.boolean_result;
    return intern(std::move(n),
                  "u:" + std::to_string(static_cast<int>(op)) + ":" +
                      std::to_string(operand));
}

NodeId ExprArena::binary(Op op, NodeId lhs, NodeId rhs) {
    const OpInfo& info = op_info(op);
    if (info.arity != 2)
        throw DomainError(std::string("operator '") + info.name + "' is not binary");
    if (boolean_kind(lhs) != info.boolean_operands ||
        boolean_kind(rhs) != info.boolean_operands)
        throw DomainError(std::string("kind mismatch in '") + info.name + "'");
    Node n;
    n.kind = NodeKind::Binary;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    n.level = std::max(node(lhs).level, node(rhs).level) + 1;
    n.boolean = info.boolean_result;
    return intern(std::move(n),
                  "b:" + std::to_string(static_cast<int>(op)) + ":" +
                      std::to_string(lhs) + ":" + std::to_string(rhs));
}

Value ExprArena::evaluate(NodeId id, const Interpretation& in) const {
    // Iterative post-order with memoization; shared nodes evaluate once.
    std::unordered_map<NodeId, Value> memo;
    std::vector<std::pair<NodeId, bool>> stack{{id, false}};
    while (!stack.empty()) {
        auto [cur, expanded] = stack.back();
        stack.pop_back();
        if (memo.count(cur)) continue;
        const Node& n = node(cur);
        if (!expanded) {
            stack.push_back({cur, true});
            if (n.kind == NodeKind::Unary) stack.push_back({n.lhs, false});
            if (n.kind == NodeKind::Binary) {
                stack.push_back({n.lhs, false});
                stack.push_back({n.rhs, false});
            }
            continue;
        }
        Value out;
        switch (n.kind) {
        case NodeKind::Constant:
            out = std::strtod(n.literal.c_str(), nullptr);
            break;
        case NodeKind::Variable:
            out = in.get(n.var);
            break;
        case NodeKind::Unary: {
            Value a = memo.at(n.lhs);
            switch (n.op) {
            case Op::Neg: out = -std::get<double>(a); break;
            case Op::Abs: out = std::fabs(std::get<double>(a)); break;
            case Op::Not: out = !std::get<bool>(a); break;
            default: throw DomainError("corrupt unary node");
            }
            break;
        }
        case NodeKind::Binary: {
            Value a = memo.at(n.lhs);
            Value b = memo.at(n.rhs);
            switch (n.op) {
            case Op::Add: out = std::get<double>(a) + std::get<double>(b); break;
            case Op::Sub: out = std::get<double>(a) - std::get<double>(b); break;
            case Op::Mul: out = std::get<double>(a) * std::get<double>(b); break;
            case Op::Div: {
                double d = std::get<double>(b);
                if (d == 0.0) throw DivisionByZero(serialize_expr(cur));
                out = std::get<double>(a) / d;
                break;
            }
            case Op::And: out = std::get<bool>(a) && std::get<bool>(b); break;
            case Op::Or: out = std::get<bool>(a) || std::get<bool>(b); break;
            case Op::Eq: out = std::get<double>(a) == std::get<double>(b); break;
            case Op::Ne: out = std::get<double>(a) != std::get<double>(b); break;
            case Op::Lt: out = std::get<double>(a) < std::get<double>(b); break;
            case Op::Le: out = std::get<double>(a) <= std::get<double>(b); break;
            case Op::Gt: out = std::get<double>(a) > std::get<double>(b); break;
            case Op::Ge: out = std::get<double>(a) >= std::get<double>(b); break;
            default: throw DomainError("corrupt binary node");
            }
            break;
        }
        }
        memo.emplace(cur, out);
    }
    return memo.at(id);
}

std::vector<Var> ExprArena::free_vars(NodeId id) const {
    std::set<Var> found;
    std::vector<NodeId> stack{id};
    std::vector<bool> seen(nodes_.size(), false);
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        if (seen[cur]) continue;
        seen[cur] = true;
        const Node& n = node(cur);
        switch (n.kind) {
        case NodeKind::Variable: found.insert(n.var); break;
        case NodeKind::Unary: stack.push_back(n.lhs); break;
        case NodeKind::Binary:
            stack.push_back(n.lhs);
            stack.push_back(n.rhs);
            break;
        default: break;
        }
    }
    return {found.begin(), found.end()};
}

std::pair<Op, std::vector<NodeId>> ExprArena::flatten_chain(NodeId id) const {
    const Node& root = node(id);
    if (root.kind != NodeKind::Binary)
        throw DomainError("flatten_chain requires a binary node");
    Op op = root.op;
    std::vector<NodeId> out;
    if (!op_info(op).assoc_comm) {
        out = {root.lhs, root.rhs};
        return {op, out};
    }
    // Left-to-right DFS through same-operator descendants.
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        const Node& n = node(cur);
        if (n.kind == NodeKind::Binary && n.op == op && cur != id) {
            stack.push_back(n.rhs);
            stack.push_back(n.lhs);
        } else if (cur == id) {
            stack.push_back(n.rhs);
            stack.push_back(n.lhs);
        } else {
            out.push_back(cur);
        }
    }
    return {op, out};
}

NodeId ExprArena::rebalance_doubling(NodeId id) {
    std::unordered_map<NodeId, NodeId> memo;

    struct Item {
        int level;
        std::uint64_t seq;
        NodeId id;
    };

    auto rebalance = [&](auto&& self, NodeId cur) -> NodeId {
        auto it = memo.find(cur);
        if (it != memo.end()) return it->second;
        const Node n = node(cur); // copy: arena may grow below
        NodeId result = cur;
        switch (n.kind) {
        case NodeKind::Constant:
        case NodeKind::Variable:
            result = cur;
            break;
        case NodeKind::Unary:
            result = unary(n.op, self(self, n.lhs));
            break;
        case NodeKind::Binary: {
            if (!op_info(n.op).assoc_comm) {
                result = binary(n.op, self(self, n.lhs), self(self, n.rhs));
                break;
            }
            auto [op, operands] = flatten_chain(cur);
            std::vector<Item> items;
            items.reserve(operands.size());
            std::uint64_t seq = 0;
            for (NodeId o : operands) {
                NodeId r = self(self, o);
                items.push_back({nesting_level(r), seq++, r});
            }
            std::stable_sort(items.begin(), items.end(),
                             [](const Item& a, const Item& b) {
                                 return a.level < b.level;
                             });
            // ASAP pairing: combine everything ready at the current level
            // left-to-right; an odd leftover carries into the next round.
            while (items.size() > 1) {
                int ready_level = std::max(items[0].level, items[1].level);
                std::size_t ready = 0;
                while (ready < items.size() && items[ready].level <= ready_level)
                    ++ready;
                std::vector<Item> next;
                next.reserve(items.size());
                std::size_t i = 0;
                for (; i + 1 < ready; i += 2) {
                    NodeId combined = binary(op, items[i].id, items[i + 1].id);
                    next.push_back({nesting_level(combined), seq++, combined});
                }
                if (i < ready) next.push_back(items[i]); // leftover
                for (std::size_t k = ready; k < items.size(); ++k)
                    next.push_back(items[k]);
                std::stable_sort(next.begin(), next.end(),
                                 [](const Item& a, const Item& b) {
                                     return a.level < b.level ||
                                            (a.level == b.level && a.seq < b.seq);
                                 });
                items = std::move(next);
            }
            result = items.front().id;
            break;
        }
        }
        memo.emplace(cur, result);
        return result;
    };
    return rebalance(rebalance, id);
}

std::string ExprArena::canonical_number(double value) {
    if (std::isfinite(value) && value == std::floor(value) &&
        std::fabs(value) <= 9007199254740992.0) {
        return nlohmann::json(static_cast<std::int64_t>(value)).dump();
    }
    return nlohmann::json(value).dump();
}

namespace {

NodeId build_from_json(ExprArena& arena, const nlohmann::json& j) {
    if (j.is_string()) return arena.variable(Var::parse(j.get<std::string>()));
    if (j.is_number_integer() || j.is_number_unsigned())
        return arena.constant(j.dump());
    if (j.is_number_float())
        return arena.constant(ExprArena::canonical_number(j.get<double>()));
    if (!j.is_object())
        throw ParseError("expression node must be an object, string or number, got " +
                         j.dump());
    auto op_it = j.find("op");
    if (op_it == j.end() || !op_it->is_string())
        throw ParseError("expression node missing string \"op\": " + j.dump());
    auto op = op_from_name(op_it->get<std::string>());
    if (!op)
        throw ParseError("unknown operator '" + op_it->get<std::string>() + "'");
    if (op_info(*op).arity == 1) {
        auto od = j.find("od");
        if (od == j.end())
            throw ParseError("unary node missing \"od\": " + j.dump());
        return arena.unary(*op, build_from_json(arena, *od));
    }
    auto fo = j.find("fO");
    auto so = j.find("sO");
    if (fo == j.end() || so == j.end())
        throw ParseError("binary node missing \"fO\"/\"sO\": " + j.dump());
    NodeId lhs = build_from_json(arena, *fo);
    NodeId rhs = build_from_json(arena, *so);
    return arena.binary(*op, lhs, rhs);
}

} // namespace

NodeId ExprArena::parse_expr(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad expression JSON: ") + e.what());
    }
    return build_from_json(*this, j);
}

std::string ExprArena::serialize_expr(NodeId id) const {
    // Build nlohmann values bottom-up; memo keeps shared subtrees cheap.
    std::unordered_map<NodeId, nlohmann::json> memo;
    auto emit = [&](auto&& self, NodeId cur) -> const nlohmann::json& {
        auto it = memo.find(cur);
        if (it != memo.end()) return it->second;
        const Node& n = node(cur);
        nlohmann::json j;
        switch (n.kind) {
        case NodeKind::Constant:
            j = nlohmann::json::parse(n.literal);
            break;
        case NodeKind::Variable:
            j = n.var.text();
            break;
        case NodeKind::Unary:
            j = nlohmann::json{{"op", op_info(n.op).name},
                               {"od", self(self, n.lhs)}};
            break;
        case NodeKind::Binary:
            j = nlohmann::json{{"op", op_info(n.op).name},
                               {"fO", self(self, n.lhs)},
                               {"sO", self(self, n.rhs)}};
            break;
        }
        return memo.emplace(cur, std::move(j)).first->second;
    };
    return emit(emit, id).dump();
}

std::vector<std::uint64_t> count_ops_per_level(const ExprArena& arena,
                                               std::span<const NodeId> roots,
                                               Sharing sharing) {
    std::vector<std::uint64_t> counts;
    auto bump = [&](int level, std::uint64_t by) {
        if (level <= 0) return;
        if (counts.size() < static_cast<std::size_t>(level))
            counts.resize(level, 0);
        counts[level - 1] += by;
    };

    if (sharing == Sharing::Dag) {
        std::set<NodeId> visited;
        std::vector<NodeId> stack(roots.begin(), roots.end());
        while (!stack.empty()) {
            NodeId cur = stack.back();
            stack.pop_back();
            if (!visited.insert(cur).second) continue;
            const Node& n = arena.node(cur);
            if (n.kind == NodeKind::Unary) {
                bump(n.level, 1);
                stack.push_back(n.lhs);
            } else if (n.kind == NodeKind::Binary) {
                bump(n.level, 1);
                stack.push_back(n.lhs);
                stack.push_back(n.rhs);
            }
        }
        return counts;
    }

    // Tree mode: per root, propagate occurrence multiplicities downwards.
    // A parent always has a strictly higher level than its children, so
    // processing nodes in descending level order is a valid topological order.
    for (NodeId root : roots) {
        std::set<NodeId> visited;
        std::vector<NodeId> stack{root};
        std::vector<NodeId> subgraph;
        while (!stack.empty()) {
            NodeId cur = stack.back();
            stack.pop_back();
            if (!visited.insert(cur).second) continue;
            subgraph.push_back(cur);
            const Node& n = arena.node(cur);
            if (n.kind == NodeKind::Unary) stack.push_back(n.lhs);
            if (n.kind == NodeKind::Binary) {
                stack.push_back(n.lhs);
                stack.push_back(n.rhs);
            }
        }
        std::sort(subgraph.begin(), subgraph.end(),
                  [&](NodeId a, NodeId b) {
                      return arena.node(a).level > arena.node(b).level;
                  });
        std::unordered_map<NodeId, std::uint64_t> occ;
        occ[root] = 1;
        for (NodeId cur : subgraph) {
            const Node& n = arena.node(cur);
            std::uint64_t k = occ[cur];
            if (n.kind == NodeKind::Unary) {
                occ[n.lhs] += k;
            } else if (n.kind == NodeKind::Binary) {
                occ[n.lhs] += k;
                occ[n.rhs] += k;
            }
            if (n.kind == NodeKind::Unary || n.kind == NodeKind::Binary)
                bump(n.level, k);
        }
    }
    return counts;
}

} // namespace qdet
