#include "qdet/flowchart.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace qdet {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const char* op_symbol(Op op) {
    switch (op) {
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "/";
        case Op::Neg: return "-";
        case Op::Abs: return "abs";
        case Op::And: return "&&";
        case Op::Or: return "||";
        case Op::Not: return "!";
        case Op::Eq: return "==";
        case Op::Ne: return "!=";
        case Op::Lt: return "<";
        case Op::Le: return "<=";
        case Op::Gt: return ">";
        case Op::Ge: return ">=";
    }
    throw DomainError("unknown operation");
}

enum class Tok {
    End, Ident, Number,
    Plus, Minus, Star, Slash,
    LParen, RParen, LBracket, RBracket, Comma,
    Assign, EqEq, NotEq, Lt, Le, Gt, Ge,
    AndAnd, OrOr, Not,
};

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;
    Tok tok = Tok::End;
    std::string text; // payload for Ident / Number

    explicit Lexer(std::string_view s) : src(s) { advance(); }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("statement '" + std::string(src) + "': " + msg);
    }

    char peek() const { return pos < src.size() ? src[pos] : '\0'; }

    void advance() {
        while (pos < src.size() &&
               std::isspace(static_cast<unsigned char>(src[pos])))
            ++pos;
        text.clear();
        if (pos >= src.size()) {
            tok = Tok::End;
            return;
        }
        char c = src[pos];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = pos;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                    src[pos] == '_'))
                ++pos;
            text = std::string(src.substr(b, pos - b));
            tok = Tok::Ident;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t b = pos;
            auto digits = [&] {
                while (pos < src.size() &&
                       std::isdigit(static_cast<unsigned char>(src[pos])))
                    ++pos;
            };
            digits();
            if (peek() == '.') {
                ++pos;
                digits();
            }
            if (peek() == 'e' || peek() == 'E') {
                ++pos;
                if (peek() == '+' || peek() == '-') ++pos;
                digits();
            }
            text = std::string(src.substr(b, pos - b));
            tok = Tok::Number;
            return;
        }
        ++pos;
        switch (c) {
            case '+': tok = Tok::Plus; return;
            case '-': tok = Tok::Minus; return;
            case '*': tok = Tok::Star; return;
            case '/': tok = Tok::Slash; return;
            case '(': tok = Tok::LParen; return;
            case ')': tok = Tok::RParen; return;
            case '[': tok = Tok::LBracket; return;
            case ']': tok = Tok::RBracket; return;
            case ',': tok = Tok::Comma; return;
            case '=':
                if (peek() == '=') { ++pos; tok = Tok::EqEq; }
                else tok = Tok::Assign;
                return;
            case '!':
                if (peek() == '=') { ++pos; tok = Tok::NotEq; }
                else tok = Tok::Not;
                return;
            case '<':
                if (peek() == '=') { ++pos; tok = Tok::Le; }
                else tok = Tok::Lt;
                return;
            case '>':
                if (peek() == '=') { ++pos; tok = Tok::Ge; }
                else tok = Tok::Gt;
                return;
            case '&':
                if (peek() == '&') { ++pos; tok = Tok::AndAnd; return; }
                fail("unexpected '&'");
            case '|':
                if (peek() == '|') { ++pos; tok = Tok::OrOr; return; }
                fail("unexpected '|'");
            default:
                fail(std::string("unexpected character '") + c + "'");
        }
    }

    void expect(Tok t, const char* what) {
        if (tok != t) fail(std::string("expected ") + what);
        advance();
    }
};

// ---- index-expression grammar --------------------------------------------

IndexExpr parse_idx_add(Lexer& lx);

IndexExpr parse_idx_primary(Lexer& lx) {
    if (lx.tok == Tok::Number) {
        if (lx.text.find_first_of(".eE") != std::string::npos)
            lx.fail("index expressions take integer literals");
        IndexExpr e;
        e.kind = IndexExpr::Kind::Number;
        e.number = std::stoll(lx.text);
        lx.advance();
        return e;
    }
    if (lx.tok == Tok::Ident) {
        IndexExpr e;
        e.kind = IndexExpr::Kind::Ident;
        e.ident = lx.text;
        lx.advance();
        if (lx.tok == Tok::LParen)
            lx.fail("index expressions cannot contain indexed variables");
        return e;
    }
    if (lx.tok == Tok::LParen) {
        lx.advance();
        IndexExpr e = parse_idx_add(lx);
        lx.expect(Tok::RParen, "')'");
        return e;
    }
    lx.fail("expected index operand");
}

IndexExpr parse_idx_unary(Lexer& lx) {
    if (lx.tok == Tok::Minus) {
        lx.advance();
        IndexExpr e;
        e.kind = IndexExpr::Kind::Negate;
        e.operands.push_back(parse_idx_unary(lx));
        return e;
    }
    return parse_idx_primary(lx);
}

IndexExpr idx_bin(char op, IndexExpr l, IndexExpr r) {
    IndexExpr e;
    e.kind = IndexExpr::Kind::Binary;
    e.op = op;
    e.operands.push_back(std::move(l));
    e.operands.push_back(std::move(r));
    return e;
}

IndexExpr parse_idx_mul(Lexer& lx) {
    IndexExpr e = parse_idx_unary(lx);
    while (lx.tok == Tok::Star || lx.tok == Tok::Slash) {
        char op = lx.tok == Tok::Star ? '*' : '/';
        lx.advance();
        e = idx_bin(op, std::move(e), parse_idx_unary(lx));
    }
    return e;
}

IndexExpr parse_idx_add(Lexer& lx) {
    IndexExpr e = parse_idx_mul(lx);
    while (lx.tok == Tok::Plus || lx.tok == Tok::Minus) {
        char op = lx.tok == Tok::Plus ? '+' : '-';
        lx.advance();
        e = idx_bin(op, std::move(e), parse_idx_mul(lx));
    }
    return e;
}

std::vector<IndexExpr> parse_index_list(Lexer& lx) {
    std::vector<IndexExpr> out;
    lx.expect(Tok::LParen, "'('");
    out.push_back(parse_idx_add(lx));
    while (lx.tok == Tok::Comma) {
        lx.advance();
        out.push_back(parse_idx_add(lx));
    }
    lx.expect(Tok::RParen, "')'");
    return out;
}

// ---- statement-expression grammar ----------------------------------------

SExpr parse_sx_or(Lexer& lx);

SExpr sx_unary(Op op, SExpr inner) {
    SExpr e;
    e.kind = SExpr::Kind::Unary;
    e.op = op;
    e.operands.push_back(std::move(inner));
    return e;
}

SExpr sx_bin(Op op, SExpr l, SExpr r) {
    SExpr e;
    e.kind = SExpr::Kind::Binary;
    e.op = op;
    e.operands.push_back(std::move(l));
    e.operands.push_back(std::move(r));
    return e;
}

SExpr parse_sx_primary(Lexer& lx) {
    if (lx.tok == Tok::Number) {
        SExpr e;
        e.kind = SExpr::Kind::Number;
        e.number = lx.text;
        lx.advance();
        return e;
    }
    if (lx.tok == Tok::Ident) {
        std::string name = lx.text;
        lx.advance();
        if (name == "abs") {
            lx.expect(Tok::LParen, "'(' after abs");
            SExpr inner = parse_sx_or(lx);
            lx.expect(Tok::RParen, "')'");
            return sx_unary(Op::Abs, std::move(inner));
        }
        SExpr e;
        e.kind = SExpr::Kind::Ref;
        e.ref.name = std::move(name);
        if (lx.tok == Tok::LParen) e.ref.indices = parse_index_list(lx);
        return e;
    }
    if (lx.tok == Tok::LParen) {
        lx.advance();
        SExpr e = parse_sx_or(lx);
        lx.expect(Tok::RParen, "')'");
        return e;
    }
    lx.fail("expected operand");
}

SExpr parse_sx_unary(Lexer& lx) {
    if (lx.tok == Tok::Minus) {
        lx.advance();
        return sx_unary(Op::Neg, parse_sx_unary(lx));
    }
    if (lx.tok == Tok::Not) {
        lx.advance();
        return sx_unary(Op::Not, parse_sx_unary(lx));
    }
    return parse_sx_primary(lx);
}

SExpr parse_sx_mul(Lexer& lx) {
    SExpr e = parse_sx_unary(lx);
    while (lx.tok == Tok::Star || lx.tok == Tok::Slash) {
        Op op = lx.tok == Tok::Star ? Op::Mul : Op::Div;
        lx.advance();
        e = sx_bin(op, std::move(e), parse_sx_unary(lx));
    }
    return e;
}

SExpr parse_sx_add(Lexer& lx) {
    SExpr e = parse_sx_mul(lx);
    while (lx.tok == Tok::Plus || lx.tok == Tok::Minus) {
        Op op = lx.tok == Tok::Plus ? Op::Add : Op::Sub;
        lx.advance();
        e = sx_bin(op, std::move(e), parse_sx_mul(lx));
    }
    return e;
}

SExpr parse_sx_cmp(Lexer& lx) {
    SExpr e = parse_sx_add(lx);
    Op op;
    switch (lx.tok) {
        case Tok::EqEq: op = Op::Eq; break;
        case Tok::NotEq: op = Op::Ne; break;
        case Tok::Lt: op = Op::Lt; break;
        case Tok::Le: op = Op::Le; break;
        case Tok::Gt: op = Op::Gt; break;
        case Tok::Ge: op = Op::Ge; break;
        default: return e;
    }
    lx.advance();
    return sx_bin(op, std::move(e), parse_sx_add(lx));
}

SExpr parse_sx_and(Lexer& lx) {
    SExpr e = parse_sx_cmp(lx);
    while (lx.tok == Tok::AndAnd) {
        lx.advance();
        e = sx_bin(Op::And, std::move(e), parse_sx_cmp(lx));
    }
    return e;
}

SExpr parse_sx_or(Lexer& lx) {
    SExpr e = parse_sx_and(lx);
    while (lx.tok == Tok::OrOr) {
        lx.advance();
        e = sx_bin(Op::Or, std::move(e), parse_sx_and(lx));
    }
    return e;
}

int sx_prec(const SExpr& e) {
    if (e.kind == SExpr::Kind::Number || e.kind == SExpr::Kind::Ref) return 100;
    if (e.kind == SExpr::Kind::Unary) return 6;
    switch (e.op) {
        case Op::Or: return 1;
        case Op::And: return 2;
        case Op::Eq: case Op::Ne: case Op::Lt:
        case Op::Le: case Op::Gt: case Op::Ge: return 3;
        case Op::Add: case Op::Sub: return 4;
        default: return 5;
    }
}

} // namespace

// ---- texts ----------------------------------------------------------------

std::string IndexExpr::text() const {
    auto wrap = [](const IndexExpr& c, bool need) {
        std::string t = c.text();
        return need ? "(" + t + ")" : t;
    };
    switch (kind) {
        case Kind::Number: return std::to_string(number);
        case Kind::Ident: return ident;
        case Kind::Negate:
            return "-" + wrap(operands[0],
                              operands[0].kind == Kind::Binary);
        case Kind::Binary: {
            int mine = (op == '*' || op == '/') ? 2 : 1;
            auto prec = [](const IndexExpr& c) {
                if (c.kind != Kind::Binary) return 3;
                return (c.op == '*' || c.op == '/') ? 2 : 1;
            };
            bool wl = prec(operands[0]) < mine;
            bool wr = prec(operands[1]) < mine ||
                      (prec(operands[1]) == mine && (op == '-' || op == '/'));
            return wrap(operands[0], wl) + op + wrap(operands[1], wr);
        }
    }
    throw DomainError("unknown index expression kind");
}

IndexExpr parse_index_expr(std::string_view text) {
    Lexer lx(text);
    IndexExpr e = parse_idx_add(lx);
    if (lx.tok != Tok::End) lx.fail("trailing input after index expression");
    return e;
}

long long eval_index(const IndexExpr& e,
                     const std::function<long long(const std::string&)>& lookup) {
    switch (e.kind) {
        case IndexExpr::Kind::Number: return e.number;
        case IndexExpr::Kind::Ident: return lookup(e.ident);
        case IndexExpr::Kind::Negate: return -eval_index(e.operands[0], lookup);
        case IndexExpr::Kind::Binary: {
            long long l = eval_index(e.operands[0], lookup);
            long long r = eval_index(e.operands[1], lookup);
            switch (e.op) {
                case '+': return l + r;
                case '-': return l - r;
                case '*': return l * r;
                case '/':
                    if (r == 0)
                        throw EvalError("division by zero in index expression");
                    return l / r;
            }
            throw DomainError("unknown index operator");
        }
    }
    throw DomainError("unknown index expression kind");
}

std::string VarRef::text() const {
    if (indices.empty()) return name;
    std::string out = name + "(";
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += ",";
        out += indices[i].text();
    }
    out += ")";
    return out;
}

int SExpr::op_count() const {
    if (kind == Kind::Number || kind == Kind::Ref) return 0;
    int n = 1;
    for (const SExpr& c : operands) n += c.op_count();
    return n;
}

std::string SExpr::text() const {
    switch (kind) {
        case Kind::Number: return number;
        case Kind::Ref: return ref.text();
        case Kind::Unary: {
            std::string inner = operands[0].text();
            if (op == Op::Abs) return "abs(" + inner + ")";
            if (sx_prec(operands[0]) < sx_prec(*this))
                inner = "(" + inner + ")";
            return std::string(op_symbol(op)) + inner;
        }
        case Kind::Binary: {
            auto side = [&](const SExpr& c, bool right) {
                std::string t = c.text();
                int pc = sx_prec(c);
                int pm = sx_prec(*this);
                if (pc < pm || (right && pc == pm)) return "(" + t + ")";
                return t;
            };
            return side(operands[0], false) + " " + op_symbol(op) + " " +
                   side(operands[1], true);
        }
    }
    throw DomainError("unknown statement expression kind");
}

// ---- statement parsers -----------------------------------------------------

Assignment parse_assignment(std::string_view text) {
    Lexer lx(text);
    if (lx.tok != Tok::Ident) lx.fail("expected assignment target");
    Assignment a;
    a.target.name = lx.text;
    lx.advance();
    if (lx.tok == Tok::LParen) a.target.indices = parse_index_list(lx);
    lx.expect(Tok::Assign, "'='");
    a.rhs = parse_sx_or(lx);
    if (lx.tok != Tok::End) lx.fail("trailing input after assignment");
    return a;
}

Condition parse_condition(std::string_view text) {
    Lexer lx(text);
    Condition c{parse_sx_or(lx)};
    if (lx.tok != Tok::End) lx.fail("trailing input after condition");
    return c;
}

std::vector<Declaration> parse_declarations(std::string_view text) {
    Lexer lx(text);
    std::vector<Declaration> out;
    if (lx.tok == Tok::End) return out;
    for (;;) {
        Declaration d;
        if (lx.tok == Tok::LBracket) {
            lx.advance();
            if (lx.tok != Tok::Ident) lx.fail("expected parameter name");
            d.dimension_param = true;
            d.name = lx.text;
            lx.advance();
            lx.expect(Tok::RBracket, "']'");
        } else {
            if (lx.tok != Tok::Ident) lx.fail("expected declaration name");
            d.name = lx.text;
            lx.advance();
            if (lx.tok == Tok::LParen) d.extents = parse_index_list(lx);
        }
        out.push_back(std::move(d));
        if (lx.tok != Tok::Comma) break;
        lx.advance();
    }
    if (lx.tok != Tok::End) lx.fail("trailing input after declarations");
    return out;
}

std::vector<Var> expand_declaration(const Declaration& d,
                                    const std::map<std::string, int>& params) {
    std::vector<long long> ext;
    for (const IndexExpr& e : d.extents) {
        long long x = eval_index(e, [&](const std::string& ident) -> long long {
            auto it = params.find(ident);
            if (it == params.end())
                throw DomainError("extent of '" + d.name +
                                  "' uses unknown name '" + ident + "'");
            return it->second;
        });
        if (x < 0) throw DomainError("negative extent for '" + d.name + "'");
        ext.push_back(x);
    }
    std::vector<Var> out;
    if (ext.empty()) {
        out.push_back(Var{d.name, {}});
        return out;
    }
    for (long long x : ext)
        if (x == 0) return out;
    std::vector<int> idx(ext.size(), 1);
    for (;;) {
        out.push_back(Var{d.name, idx});
        int k = static_cast<int>(ext.size()) - 1;
        while (k >= 0) {
            if (++idx[k] <= ext[k]) break;
            idx[k] = 1;
            --k;
        }
        if (k < 0) break;
    }
    return out;
}

// ---- flowchart structure ---------------------------------------------------

const Block* Flowchart::find(int id) const {
    for (const Block& b : blocks)
        if (b.id == id) return &b;
    return nullptr;
}

const Block& Flowchart::at(int id) const {
    const Block* b = find(id);
    if (!b) throw DomainError("no block with id " + std::to_string(id));
    return *b;
}

int Flowchart::start_id() const {
    for (const Block& b : blocks)
        if (b.type == BlockType::Start) return b.id;
    throw DomainError("flowchart has no start block");
}

std::optional<int> Flowchart::next(int from, EdgeType type) const {
    for (const FlowEdge& e : edges)
        if (e.from == from && e.type == type) return e.to;
    return std::nullopt;
}

std::vector<Declaration> Flowchart::input_decls() const {
    std::vector<Declaration> out;
    for (const Block& b : blocks)
        if (b.type == BlockType::Input)
            out.insert(out.end(), b.decls.begin(), b.decls.end());
    return out;
}

std::vector<Declaration> Flowchart::output_decls() const {
    std::vector<Declaration> out;
    for (const Block& b : blocks)
        if (b.type == BlockType::Output)
            out.insert(out.end(), b.decls.begin(), b.decls.end());
    return out;
}

bool Flowchart::declares_iterations() const {
    for (const Declaration& d : input_decls())
        if (!d.dimension_param && d.name == "iterations") return true;
    return false;
}

void parse_payloads(Flowchart& fc) {
    for (Block& b : fc.blocks) {
        b.assignments.clear();
        b.condition.reset();
        b.decls.clear();
        switch (b.type) {
            case BlockType::Process: {
                std::string stmt;
                auto flush = [&] {
                    std::size_t a = stmt.find_first_not_of(" \t\r\n");
                    if (a == std::string::npos) {
                        stmt.clear();
                        return;
                    }
                    std::size_t z = stmt.find_last_not_of(" \t\r\n");
                    b.assignments.push_back(
                        parse_assignment(stmt.substr(a, z - a + 1)));
                    stmt.clear();
                };
                for (char c : b.content) {
                    if (c == ';' || c == '\n') flush();
                    else stmt += c;
                }
                flush();
                if (b.assignments.empty())
                    throw ParseError("process block " + std::to_string(b.id) +
                                     " has no assignment");
                break;
            }
            case BlockType::Decision:
                b.condition = parse_condition(b.content);
                break;
            case BlockType::Input:
            case BlockType::Output:
                b.decls = parse_declarations(b.content);
                break;
            case BlockType::Start:
            case BlockType::End:
                break;
        }
    }
}

Flowchart parse_flowchart(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("flowchart JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("Vertices") || !j.contains("Edges") ||
        !j["Vertices"].is_array() || !j["Edges"].is_array())
        throw ParseError(
            "flowchart JSON must hold Vertices and Edges arrays");

    Flowchart fc;
    std::set<int> ids;
    for (const json& v : j["Vertices"]) {
        if (!v.is_object() || !v.contains("Id") || !v.contains("Type") ||
            !v["Id"].is_number_integer() || !v["Type"].is_number_integer())
            throw ParseError("vertex needs integer Id and Type");
        Block b;
        b.id = v["Id"].get<int>();
        int type = v["Type"].get<int>();
        if (type < 0 || type > 5)
            throw ParseError("unknown block type " + std::to_string(type) +
                             " at vertex " + std::to_string(b.id));
        b.type = static_cast<BlockType>(type);
        if (v.contains("Content")) {
            if (!v["Content"].is_string())
                throw ParseError("vertex Content must be a string");
            b.content = v["Content"].get<std::string>();
        }
        if (!ids.insert(b.id).second)
            throw ParseError("duplicate block id " + std::to_string(b.id));
        fc.blocks.push_back(std::move(b));
    }
    for (const json& e : j["Edges"]) {
        if (!e.is_object() || !e.contains("From") || !e.contains("To") ||
            !e.contains("Type") || !e["From"].is_number_integer() ||
            !e["To"].is_number_integer() || !e["Type"].is_number_integer())
            throw ParseError("edge needs integer From, To and Type");
        FlowEdge fe;
        fe.from = e["From"].get<int>();
        fe.to = e["To"].get<int>();
        int type = e["Type"].get<int>();
        if (type < 0 || type > 2)
            throw ParseError("unknown edge type " + std::to_string(type));
        fe.type = static_cast<EdgeType>(type);
        if (!ids.count(fe.from) || !ids.count(fe.to))
            throw ParseError("dangling edge " + std::to_string(fe.from) +
                             " -> " + std::to_string(fe.to));
        fc.edges.push_back(fe);
    }
    parse_payloads(fc);
    return fc;
}

std::string serialize_flowchart(const Flowchart& fc) {
    ordered_json root;
    root["Vertices"] = ordered_json::array();
    for (const Block& b : fc.blocks) {
        ordered_json v;
        v["Id"] = b.id;
        v["Type"] = static_cast<int>(b.type);
        v["Content"] = b.content;
        root["Vertices"].push_back(std::move(v));
    }
    root["Edges"] = ordered_json::array();
    for (const FlowEdge& e : fc.edges) {
        ordered_json v;
        v["From"] = e.from;
        v["To"] = e.to;
        v["Type"] = static_cast<int>(e.type);
        root["Edges"].push_back(std::move(v));
    }
    return root.dump(2) + "\n";
}

std::vector<Violation> validate(const Flowchart& fc) {
    std::vector<Violation> out;
    auto flag = [&](int id, std::string msg) {
        out.push_back({id, std::move(msg)});
    };

    std::set<int> ids;
    for (const Block& b : fc.blocks)
        if (!ids.insert(b.id).second)
            flag(b.id, "duplicate block id");

    int starts = 0;
    int ends = 0;
    for (const Block& b : fc.blocks) {
        if (b.type == BlockType::Start) ++starts;
        if (b.type == BlockType::End) ++ends;
    }
    if (starts != 1) flag(-1, "flowchart needs exactly one start block");
    if (ends != 1) flag(-1, "flowchart needs exactly one end block");

    std::unordered_map<int, std::vector<const FlowEdge*>> outgoing;
    std::unordered_map<int, int> indegree;
    for (const FlowEdge& e : fc.edges) {
        if (!ids.count(e.from) || !ids.count(e.to)) {
            flag(-1, "edge references missing block " +
                         std::to_string(!ids.count(e.from) ? e.from : e.to));
            continue;
        }
        outgoing[e.from].push_back(&e);
        ++indegree[e.to];
    }

    for (const Block& b : fc.blocks) {
        const auto& outs = outgoing[b.id];
        switch (b.type) {
            case BlockType::Start:
                if (outs.size() != 1 || outs[0]->type != EdgeType::Normal)
                    flag(b.id, "start block needs one normal outgoing edge");
                if (indegree[b.id] != 0)
                    flag(b.id, "start block cannot have incoming edges");
                break;
            case BlockType::End:
                if (!outs.empty())
                    flag(b.id, "end block cannot have outgoing edges");
                if (indegree[b.id] == 0)
                    flag(b.id, "end block needs an incoming edge");
                break;
            case BlockType::Decision: {
                int t = 0;
                int f = 0;
                for (const FlowEdge* e : outs) {
                    if (e->type == EdgeType::True) ++t;
                    else if (e->type == EdgeType::False) ++f;
                }
                if (outs.size() != 2 || t != 1 || f != 1)
                    flag(b.id,
                         "decision branch arity: needs exactly one true and "
                         "one false exit");
                if (!b.condition) {
                    flag(b.id, "decision has no parsed condition");
                } else if (b.condition->is_bare()) {
                    // bare boolean flag: admissible
                } else if (b.condition->expr.kind == SExpr::Kind::Binary &&
                           is_comparison(b.condition->expr.op)) {
                    for (const SExpr& side : b.condition->expr.operands)
                        if (side.op_count() != 0)
                            flag(b.id,
                                 "comparison operand contains an operation");
                } else {
                    flag(b.id,
                         "decision must be a comparison or a boolean flag");
                }
                break;
            }
            case BlockType::Process:
                if (outs.size() != 1 || outs[0]->type != EdgeType::Normal)
                    flag(b.id, "process block needs one normal outgoing edge");
                if (b.assignments.size() != 1)
                    flag(b.id, "process block needs exactly one assignment");
                for (const Assignment& a : b.assignments)
                    if (a.rhs.op_count() > 1)
                        flag(b.id,
                             "more than one operation on the right-hand side");
                break;
            case BlockType::Input:
            case BlockType::Output:
                if (outs.size() != 1 || outs[0]->type != EdgeType::Normal)
                    flag(b.id, "data block needs one normal outgoing edge");
                if (b.type == BlockType::Output)
                    for (const Declaration& d : b.decls)
                        if (d.dimension_param)
                            flag(b.id,
                                 "output block cannot declare dimension "
                                 "parameters");
                break;
        }
    }

    if (starts == 1) {
        std::unordered_set<int> seen;
        std::vector<int> stack{fc.start_id()};
        while (!stack.empty()) {
            int id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            for (const FlowEdge* e : outgoing[id]) stack.push_back(e->to);
        }
        for (const Block& b : fc.blocks)
            if (!seen.count(b.id)) flag(b.id, "block unreachable from start");
    }

    return out;
}

} // namespace qdet
