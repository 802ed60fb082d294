#include "qdet/qterm.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace qdet {

int QDeterminant::param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end())
        throw DomainError("unknown dimension parameter '" + name + "'");
    return it->second;
}

Partition classify(const QDeterminant& q) {
    Partition p;
    for (std::size_t i = 0; i < q.outputs.size(); ++i) {
        switch (q.outputs[i].second.kind) {
        case TermKind::Unconditional: p.unconditional.push_back(i); break;
        case TermKind::Conditional: p.conditional.push_back(i); break;
        case TermKind::TruncatedInfinite: p.truncated_infinite.push_back(i); break;
        }
    }
    return p;
}

std::vector<NodeId> expression_set(const QDeterminant& q) {
    std::vector<NodeId> out;
    std::set<NodeId> seen;
    auto add = [&](NodeId id) {
        if (seen.insert(id).second) out.push_back(id);
    };
    for (const auto& [var, term] : q.outputs) {
        for (const GuardedPair& p : term.pairs) {
            if (p.guard) add(*p.guard);
            add(p.value);
        }
    }
    return out;
}

std::vector<std::pair<Var, Outcome>> qdet_value(const QDeterminant& q,
                                                const Interpretation& in) {
    std::vector<std::pair<Var, Outcome>> results;
    results.reserve(q.outputs.size());
    for (const auto& [var, term] : q.outputs) {
        Outcome oc;
        std::vector<std::string> guard_errors;
        bool selected = false;
        for (std::size_t i = 0; i < term.pairs.size() && !selected; ++i) {
            const GuardedPair& p = term.pairs[i];
            bool take = false;
            if (!p.guard) {
                take = true;
            } else {
                try {
                    Value g = q.arena.evaluate(*p.guard, in);
                    take = std::get<bool>(g);
                } catch (const EvalError& e) {
                    guard_errors.push_back("pair " + std::to_string(i) + ": " +
                                           e.what());
                }
            }
            if (take) {
                selected = true;
                oc.value = q.arena.evaluate(p.value, in); // may throw: selected pair
            }
        }
        if (!selected) {
            std::string cause = term.pairs.empty()
                                    ? "empty term"
                                    : "no guard satisfied";
            if (term.kind == TermKind::TruncatedInfinite)
                cause += " within " + std::to_string(q.iterations) + " iterations";
            for (const std::string& e : guard_errors) cause += "; " + e;
            oc.cause = cause;
        }
        results.emplace_back(var, oc);
    }
    return results;
}

std::string serialize_qdet(const QDeterminant& q) {
    std::ostringstream os;
    for (const std::string& name : q.param_names)
        os << "#param " << name << "=" << q.params.at(name) << "\n";
    os << "#iterations " << q.iterations << "\n";
    for (const auto& [var, term] : q.outputs) {
        for (const GuardedPair& p : term.pairs) {
            os << var.text() << " = ";
            if (p.guard)
                os << q.arena.serialize_expr(*p.guard);
            else
                os << ' ';
            os << " ; " << q.arena.serialize_expr(p.value) << "\n";
        }
    }
    return os.str();
}

QDeterminant parse_qdet(const std::string& text) {
    QDeterminant q;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    // Output order and per-output pair order follow line order.
    std::vector<std::pair<Var, QTerm>>& outputs = q.outputs;
    auto find_output = [&](const Var& v) -> QTerm& {
        for (auto& [var, term] : outputs)
            if (var == v) return term;
        outputs.emplace_back(v, QTerm{});
        return outputs.back().second;
    };
    bool saw_iterations = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.rfind("#param ", 0) == 0) {
            std::string rest = line.substr(7);
            auto eq = rest.find('=');
            if (eq == std::string::npos)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": malformed #param");
            std::string name = rest.substr(0, eq);
            int value = 0;
            try {
                value = std::stoi(rest.substr(eq + 1));
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(lineno) +
                                 ": non-integer #param value");
            }
            if (!q.params.emplace(name, value).second)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": duplicate #param " + name);
            q.param_names.push_back(name);
            continue;
        }
        if (line.rfind("#iterations ", 0) == 0) {
            try {
                q.iterations = std::stoi(line.substr(12));
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(lineno) +
                                 ": non-integer #iterations");
            }
            saw_iterations = true;
            continue;
        }
        auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) +
                             ": expected '<output> = <guard> ; <value>'");
        Var out = Var::parse(line.substr(0, eq));
        std::string rest = line.substr(eq + 3);
        auto semi = rest.find(" ; ");
        if (semi == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) +
                             ": missing ' ; ' separator");
        std::string guard_text = rest.substr(0, semi);
        std::string value_text = rest.substr(semi + 3);
        GuardedPair p;
        if (guard_text != " " && !guard_text.empty())
            p.guard = q.arena.parse_expr(guard_text);
        p.value = q.arena.parse_expr(value_text);
        if (p.guard && !q.arena.boolean_kind(*p.guard))
            throw ParseError("line " + std::to_string(lineno) +
                             ": guard is not boolean-kinded");
        find_output(out).pairs.push_back(p);
    }
    if (!saw_iterations)
        throw ParseError("missing #iterations header");
    for (auto& [var, term] : q.outputs) {
        if (q.iterations > 0)
            term.kind = TermKind::TruncatedInfinite;
        else if (term.pairs.size() == 1 && !term.pairs[0].guard)
            term.kind = TermKind::Unconditional;
        else
            term.kind = TermKind::Conditional;
    }
    return q;
}

} // namespace qdet
