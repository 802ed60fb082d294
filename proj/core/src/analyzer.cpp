#include "qdet/analyzer.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace qdet {

namespace {

int ceil_log2_ll(std::uint64_t m) {
    int r = 0;
    std::uint64_t v = 1;
    while (v < m) {
        v <<= 1;
        ++r;
    }
    return r;
}

bool is_op_node(const Node& n) {
    return n.kind == NodeKind::Unary || n.kind == NodeKind::Binary;
}

std::vector<NodeId> reachable_nodes(const ExprArena& arena,
                                    std::span<const NodeId> roots) {
    std::vector<NodeId> out;
    std::unordered_set<NodeId> seen;
    std::vector<NodeId> stack(roots.begin(), roots.end());
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        out.push_back(cur);
        const Node& n = arena.node(cur);
        if (n.kind == NodeKind::Unary) stack.push_back(n.lhs);
        if (n.kind == NodeKind::Binary) {
            stack.push_back(n.lhs);
            stack.push_back(n.rhs);
        }
    }
    return out;
}

/// Nodes that hang below a same-operator associative parent; they belong to
/// that parent's maximal chain rather than starting one of their own.
std::unordered_set<NodeId> chain_internal_nodes(const ExprArena& arena,
                                                const std::vector<NodeId>& nodes) {
    std::unordered_set<NodeId> internal;
    for (NodeId id : nodes) {
        const Node& n = arena.node(id);
        if (n.kind != NodeKind::Binary || !op_info(n.op).assoc_comm) continue;
        for (NodeId child : {n.lhs, n.rhs}) {
            const Node& c = arena.node(child);
            if (c.kind == NodeKind::Binary && c.op == n.op)
                internal.insert(child);
        }
    }
    return internal;
}

/// Per-root occurrence multiplicities under tree counting. Parents always
/// have strictly higher levels than children, so descending level order is a
/// topological order.
std::unordered_map<NodeId, std::uint64_t> occurrences(const ExprArena& arena,
                                                      NodeId root) {
    std::vector<NodeId> sub = reachable_nodes(arena, std::span(&root, 1));
    std::sort(sub.begin(), sub.end(), [&](NodeId a, NodeId b) {
        return arena.node(a).level > arena.node(b).level;
    });
    std::unordered_map<NodeId, std::uint64_t> occ;
    occ[root] = 1;
    for (NodeId cur : sub) {
        const Node& n = arena.node(cur);
        std::uint64_t k = occ[cur];
        if (n.kind == NodeKind::Unary) occ[n.lhs] += k;
        if (n.kind == NodeKind::Binary) {
            occ[n.lhs] += k;
            occ[n.rhs] += k;
        }
    }
    return occ;
}

void add_counts(const ExprArena& arena, NodeId id, std::uint64_t mult,
                ChainCount model, const std::unordered_set<NodeId>& internal,
                std::vector<std::uint64_t>& counts) {
    const Node& n = arena.node(id);
    if (!is_op_node(n)) return;
    auto bump = [&](int level, std::uint64_t by) {
        if (level <= 0) return;
        if (counts.size() < static_cast<std::size_t>(level))
            counts.resize(level, 0);
        counts[level - 1] += by;
    };
    if (model == ChainCount::Exact) {
        bump(n.level, mult);
        return;
    }
    // Floor model: chain-internal operations are replaced by their chain
    // root's idealized per-depth contributions.
    if (internal.count(id)) return;
    if (n.kind == NodeKind::Binary && op_info(n.op).assoc_comm) {
        auto [op, operands] = arena.flatten_chain(id);
        (void)op;
        std::uint64_t m = operands.size();
        int base = 0;
        for (NodeId o : operands)
            base = std::max(base, arena.node(o).level);
        int depth = ceil_log2_ll(m);
        for (int j = 1; j <= depth; ++j)
            bump(base + j, mult * (m >> j));
        return;
    }
    bump(n.level, mult);
}

} // namespace

std::vector<std::uint64_t> Schedule::sizes() const {
    std::vector<std::uint64_t> out;
    out.reserve(levels.size());
    for (const auto& level : levels) {
        std::uint64_t total = 0;
        for (const ScheduleEntry& e : level) total += e.count;
        out.push_back(total);
    }
    return out;
}

std::uint64_t Schedule::width() const {
    std::uint64_t best = 0;
    for (std::uint64_t s : sizes()) best = std::max(best, s);
    return best;
}

Schedule make_schedule(const ExprArena& arena, std::span<const NodeId> roots,
                       Sharing sharing) {
    Schedule s;
    auto slot = [&](int level) -> std::vector<ScheduleEntry>& {
        if (s.levels.size() < static_cast<std::size_t>(level))
            s.levels.resize(level);
        return s.levels[level - 1];
    };
    // Leaves-only sets still report their height (0): size the level array to
    // the maximum nesting level even when no operations exist.
    int max_level = 0;
    for (NodeId r : roots)
        max_level = std::max(max_level, arena.node(r).level);
    if (max_level > 0) s.levels.resize(max_level);

    if (sharing == Sharing::Dag) {
        for (NodeId id : reachable_nodes(arena, roots)) {
            const Node& n = arena.node(id);
            if (is_op_node(n)) slot(n.level).push_back({id, 0, 1});
        }
        for (auto& level : s.levels)
            std::sort(level.begin(), level.end(),
                      [](const ScheduleEntry& a, const ScheduleEntry& b) {
                          return a.node < b.node;
                      });
        return s;
    }

    for (std::size_t r = 0; r < roots.size(); ++r) {
        auto occ = occurrences(arena, roots[r]);
        for (const auto& [id, mult] : occ) {
            const Node& n = arena.node(id);
            if (is_op_node(n)) slot(n.level).push_back({id, r, mult});
        }
    }
    for (auto& level : s.levels)
        std::sort(level.begin(), level.end(),
                  [](const ScheduleEntry& a, const ScheduleEntry& b) {
                      return a.expr != b.expr ? a.expr < b.expr
                                              : a.node < b.node;
                  });
    return s;
}

int height(const ExprArena& arena, std::span<const NodeId> roots) {
    int d = 0;
    for (NodeId r : roots) d = std::max(d, arena.node(r).level);
    return d;
}

std::uint64_t width(const ExprArena& arena, std::span<const NodeId> roots,
                    Sharing sharing, ChainCount model) {
    std::vector<std::uint64_t> counts;
    std::vector<NodeId> all = reachable_nodes(arena, roots);
    std::unordered_set<NodeId> internal;
    if (model == ChainCount::Floor)
        internal = chain_internal_nodes(arena, all);

    if (sharing == Sharing::Dag) {
        for (NodeId id : all)
            add_counts(arena, id, 1, model, internal, counts);
    } else {
        for (NodeId root : roots) {
            auto occ = occurrences(arena, root);
            for (const auto& [id, mult] : occ)
                add_counts(arena, id, mult, model, internal, counts);
        }
    }
    std::uint64_t best = 0;
    for (std::uint64_t c : counts) best = std::max(best, c);
    return best;
}

std::vector<NodeId> analysis_roots(QDeterminant& q, bool doubling) {
    std::vector<NodeId> roots = expression_set(q);
    if (!doubling) return roots;
    std::vector<NodeId> out;
    std::set<NodeId> seen;
    for (NodeId r : roots) {
        NodeId b = q.arena.rebalance_doubling(r);
        if (seen.insert(b).second) out.push_back(b);
    }
    return out;
}

Characteristics analyze(QDeterminant& q, const AnalyzeConfig& cfg) {
    std::vector<NodeId> roots = analysis_roots(q, cfg.doubling);
    Characteristics c;
    c.D = height(q.arena, roots);
    c.P = width(q.arena, roots, cfg.sharing, cfg.chain_count);
    c.params = q.params;
    c.iterations = q.iterations;
    c.sharing = cfg.sharing;
    c.doubling = cfg.doubling;
    c.chain_count = cfg.chain_count;
    return c;
}

Realizability realizability(bool has_infinite_terms, bool truncated) {
    if (!has_infinite_terms) return Realizability::Realizable;
    return truncated ? Realizability::RealizableByTruncation
                     : Realizability::Unknown;
}

Realizability realizability(const QDeterminant& q) {
    Partition p = classify(q);
    return realizability(!p.truncated_infinite.empty(), q.iterations > 0);
}

std::string serialize_schedule(const ExprArena& arena, const Schedule& s) {
    using nlohmann::ordered_json;
    auto arg = [&](NodeId id) {
        const Node& n = arena.node(id);
        ordered_json a;
        switch (n.kind) {
            case NodeKind::Constant: a["num"] = n.literal; break;
            case NodeKind::Variable: a["var"] = n.var.text(); break;
            default: a["node"] = id; break;
        }
        return a;
    };
    ordered_json root = ordered_json::array();
    for (const auto& level : s.levels) {
        ordered_json jl = ordered_json::array();
        for (const ScheduleEntry& e : level) {
            const Node& n = arena.node(e.node);
            ordered_json je;
            je["id"] = e.node;
            je["op"] = op_info(n.op).name;
            ordered_json args = ordered_json::array();
            args.push_back(arg(n.lhs));
            if (n.kind == NodeKind::Binary) args.push_back(arg(n.rhs));
            je["args"] = std::move(args);
            if (e.count != 1 || e.expr != 0) {
                je["expr"] = e.expr;
                je["count"] = e.count;
            }
            jl.push_back(std::move(je));
        }
        root.push_back(std::move(jl));
    }
    return root.dump() + "\n";
}

const char* to_string(Sharing s) {
    return s == Sharing::Dag ? "dag" : "tree";
}

const char* to_string(ChainCount c) {
    return c == ChainCount::Exact ? "exact" : "floor";
}

const char* to_string(Realizability r) {
    switch (r) {
        case Realizability::Realizable: return "realizable";
        case Realizability::RealizableByTruncation:
            return "realizable-by-truncation";
        case Realizability::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Sharing> sharing_from_string(std::string_view s) {
    if (s == "dag") return Sharing::Dag;
    if (s == "tree") return Sharing::Tree;
    return std::nullopt;
}

std::optional<ChainCount> chain_count_from_string(std::string_view s) {
    if (s == "exact") return ChainCount::Exact;
    if (s == "floor") return ChainCount::Floor;
    return std::nullopt;
}

std::string characteristics_to_json(const Characteristics& c) {
    nlohmann::ordered_json j;
    j["D"] = c.D;
    j["P"] = c.P;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [name, value] : c.params) params[name] = value;
    j["params"] = std::move(params);
    j["iterations"] = c.iterations;
    j["sharing"] = to_string(c.sharing);
    j["doubling"] = c.doubling;
    j["chainCount"] = to_string(c.chain_count);
    return j.dump();
}

Characteristics characteristics_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("characteristics JSON: ") + e.what());
    }
    Characteristics c;
    try {
        c.D = j.at("D").get<int>();
        c.P = j.at("P").get<std::uint64_t>();
        for (const auto& [name, value] : j.at("params").items())
            c.params[name] = value.get<int>();
        c.iterations = j.at("iterations").get<int>();
        auto sharing = sharing_from_string(j.at("sharing").get<std::string>());
        auto chain =
            chain_count_from_string(j.at("chainCount").get<std::string>());
        if (!sharing || !chain)
            throw ParseError("characteristics JSON: bad sharing/chainCount");
        c.sharing = *sharing;
        c.chain_count = *chain;
        c.doubling = j.at("doubling").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("characteristics JSON: ") + e.what());
    }
    return c;
}

} // namespace qdet
