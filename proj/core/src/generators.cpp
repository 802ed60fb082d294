#include "qdet/generators.hpp"

#include <string>
#include <vector>

namespace qdet::gen {

namespace {

/// Assembles a flowchart block-by-block; payloads are parsed through the
/// same grammar as charts loaded from files.
class ChartBuilder {
public:
    int add(BlockType type, std::string content = "") {
        Block b;
        b.id = next_++;
        b.type = type;
        b.content = std::move(content);
        fc_.blocks.push_back(std::move(b));
        return fc_.blocks.back().id;
    }

    void edge(int from, int to, EdgeType type = EdgeType::Normal) {
        fc_.edges.push_back({from, to, type});
    }

    /// Normal edge chaining consecutive process blocks.
    int then(int from, BlockType type, std::string content = "") {
        int id = add(type, std::move(content));
        edge(from, id);
        return id;
    }

    Flowchart finish() {
        parse_payloads(fc_);
        return std::move(fc_);
    }

private:
    Flowchart fc_;
    int next_ = 0;
};

NodeId var2(ExprArena& a, const char* name, int i, int j) {
    return a.variable(Var{name, {i, j}});
}

} // namespace

Flowchart scalar_product(bool doubling) {
    ChartBuilder cb;
    int start = cb.add(BlockType::Start);
    int input = cb.then(start, BlockType::Input, "[n], a1(n), a2(n)");
    if (!doubling) {
        int b2 = cb.then(input, BlockType::Process, "t = a1(1) * a2(1)");
        int b3 = cb.then(b2, BlockType::Process, "s = t");
        int b4 = cb.then(b3, BlockType::Process, "i = 2");
        int loop = cb.then(b4, BlockType::Decision, "i <= n");
        int body = cb.add(BlockType::Process, "t = a1(i) * a2(i)");
        cb.edge(loop, body, EdgeType::True);
        int b6 = cb.then(body, BlockType::Process, "s = s + t");
        int b7 = cb.then(b6, BlockType::Process, "i = i + 1");
        cb.edge(b7, loop);
        int out = cb.add(BlockType::Output, "s");
        cb.edge(loop, out, EdgeType::False);
        cb.then(out, BlockType::End);
        return cb.finish();
    }
    // Pairwise reduction with stride doubling: after the product loop,
    // round st merges t(i) and t(i+st) for i = 1, 1+2st, 1+4st, ...
    int b2 = cb.then(input, BlockType::Process, "i = 1");
    int prod = cb.then(b2, BlockType::Process, "t(i) = a1(i) * a2(i)");
    int b4 = cb.then(prod, BlockType::Process, "i = i + 1");
    int ploop = cb.then(b4, BlockType::Decision, "i <= n");
    cb.edge(ploop, prod, EdgeType::True);
    int st0 = cb.add(BlockType::Process, "st = 1");
    cb.edge(ploop, st0, EdgeType::False);
    int outer = cb.then(st0, BlockType::Decision, "st < n");
    int w = cb.add(BlockType::Process, "w = st + st");
    cb.edge(outer, w, EdgeType::True);
    int i1 = cb.then(w, BlockType::Process, "i = 1");
    int u = cb.then(i1, BlockType::Process, "u = i + st");
    int inner = cb.then(u, BlockType::Decision, "u <= n");
    int pair = cb.add(BlockType::Process, "t(i) = t(i) + t(i + st)");
    cb.edge(inner, pair, EdgeType::True);
    int adv = cb.then(pair, BlockType::Process, "i = i + w");
    cb.edge(adv, u);
    int stw = cb.add(BlockType::Process, "st = w");
    cb.edge(inner, stw, EdgeType::False);
    cb.edge(stw, outer);
    int fin = cb.add(BlockType::Process, "s = t(1)");
    cb.edge(outer, fin, EdgeType::False);
    int out = cb.then(fin, BlockType::Output, "s");
    cb.then(out, BlockType::End);
    return cb.finish();
}

QDeterminant matmul(int n, int k, int m, bool doubling) {
    if (n < 1 || k < 1 || m < 1)
        throw DomainError("matmul dimensions must be positive");
    QDeterminant q;
    q.param_names = {"n", "k", "m"};
    q.params = {{"n", n}, {"k", k}, {"m", m}};
    ExprArena& a = q.arena;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= m; ++j) {
            NodeId sum = 0;
            for (int s = 1; s <= k; ++s) {
                NodeId p = a.binary(Op::Mul, var2(a, "a", i, s),
                                    var2(a, "b", s, j));
                sum = s == 1 ? p : a.binary(Op::Add, sum, p);
            }
            if (doubling) sum = a.rebalance_doubling(sum);
            QTerm t;
            t.kind = TermKind::Unconditional;
            t.pairs.push_back({std::nullopt, sum});
            q.outputs.emplace_back(Var{"c", {i, j}}, std::move(t));
        }
    return q;
}

Flowchart gauss_jordan() {
    ChartBuilder cb;
    int start = cb.add(BlockType::Start);
    int input = cb.then(start, BlockType::Input, "[n], A(n,n), b(n)");

    // Working copies M, y (inputs are read-only) and used-column flags.
    int i0 = cb.then(input, BlockType::Process, "i = 1");
    int cp0 = cb.then(i0, BlockType::Process, "y(i) = b(i)");
    int cp1 = cb.then(cp0, BlockType::Process, "used(i) = 0");
    int j0 = cb.then(cp1, BlockType::Process, "j = 1");
    int cp2 = cb.then(j0, BlockType::Process, "M(i,j) = A(i,j)");
    int j1 = cb.then(cp2, BlockType::Process, "j = j + 1");
    int jl = cb.then(j1, BlockType::Decision, "j <= n");
    cb.edge(jl, cp2, EdgeType::True);
    int i1 = cb.add(BlockType::Process, "i = i + 1");
    cb.edge(jl, i1, EdgeType::False);
    int il = cb.then(i1, BlockType::Decision, "i <= n");
    cb.edge(il, cp0, EdgeType::True);

    // Elimination steps k = 1..n.
    int k0 = cb.add(BlockType::Process, "k = 1");
    cb.edge(il, k0, EdgeType::False);

    // Pivot scan: first unused column c of row k with M(k,c) != 0.
    int c0 = cb.then(k0, BlockType::Process, "c = 1");
    int scan = cb.then(c0, BlockType::Decision, "c <= n");
    int usedq = cb.add(BlockType::Decision, "used(c) == 0");
    cb.edge(scan, usedq, EdgeType::True);
    int nz = cb.add(BlockType::Decision, "M(k,c) != 0");
    cb.edge(usedq, nz, EdgeType::True);
    int cnext = cb.add(BlockType::Process, "c = c + 1");
    cb.edge(usedq, cnext, EdgeType::False);
    cb.edge(nz, cnext, EdgeType::False);
    cb.edge(cnext, scan);
    int dead = cb.add(BlockType::Process, "empout = 0");
    cb.edge(scan, dead, EdgeType::False); // row k has no usable pivot

    // Pivot found in column c.
    int sv = cb.add(BlockType::Process, "p = M(k,c)");
    cb.edge(nz, sv, EdgeType::True);
    int mk = cb.then(sv, BlockType::Process, "used(c) = 1");
    int pc = cb.then(mk, BlockType::Process, "pivcol(k) = c");

    // Divide row k (remaining columns and the right-hand side) by the pivot.
    int d0 = cb.then(pc, BlockType::Process, "c2 = 1");
    int dl = cb.then(d0, BlockType::Decision, "c2 <= n");
    int du = cb.add(BlockType::Decision, "used(c2) == 0");
    cb.edge(dl, du, EdgeType::True);
    int dv = cb.add(BlockType::Process, "M(k,c2) = M(k,c2) / p");
    cb.edge(du, dv, EdgeType::True);
    int dn = cb.add(BlockType::Process, "c2 = c2 + 1");
    cb.edge(dv, dn);
    cb.edge(du, dn, EdgeType::False);
    cb.edge(dn, dl);
    int dy = cb.add(BlockType::Process, "y(k) = y(k) / p");
    cb.edge(dl, dy, EdgeType::False);

    // Eliminate the pivot column from every other row.
    int r0 = cb.then(dy, BlockType::Process, "r = 1");
    int rl = cb.then(r0, BlockType::Decision, "r <= n");
    int rself = cb.add(BlockType::Decision, "r == k");
    cb.edge(rl, rself, EdgeType::True);
    int rn = cb.add(BlockType::Process, "r = r + 1");
    cb.edge(rself, rn, EdgeType::True);
    int fset = cb.add(BlockType::Process, "f = M(r,c)");
    cb.edge(rself, fset, EdgeType::False);
    int e0 = cb.then(fset, BlockType::Process, "c3 = 1");
    int el = cb.then(e0, BlockType::Decision, "c3 <= n");
    int eu = cb.add(BlockType::Decision, "used(c3) == 0");
    cb.edge(el, eu, EdgeType::True);
    int em = cb.add(BlockType::Process, "t = f * M(k,c3)");
    cb.edge(eu, em, EdgeType::True);
    int es = cb.then(em, BlockType::Process, "M(r,c3) = M(r,c3) - t");
    int en = cb.add(BlockType::Process, "c3 = c3 + 1");
    cb.edge(es, en);
    cb.edge(eu, en, EdgeType::False);
    cb.edge(en, el);
    int ey = cb.add(BlockType::Process, "t2 = f * y(k)");
    cb.edge(el, ey, EdgeType::False);
    int ez = cb.then(ey, BlockType::Process, "y(r) = y(r) - t2");
    cb.edge(ez, rn);
    cb.edge(rn, rl);
    int kn = cb.add(BlockType::Process, "k = k + 1");
    cb.edge(rl, kn, EdgeType::False);
    int ksteps = cb.then(kn, BlockType::Decision, "k <= n");
    cb.edge(ksteps, c0, EdgeType::True);

    // Solution: the pivot column of step o received the value y(o).
    int o0 = cb.add(BlockType::Process, "o = 1");
    cb.edge(ksteps, o0, EdgeType::False);
    int gpc = cb.then(o0, BlockType::Process, "pc = pivcol(o)");
    int gx = cb.then(gpc, BlockType::Process, "x(pc) = y(o)");
    int on = cb.then(gx, BlockType::Process, "o = o + 1");
    int ol = cb.then(on, BlockType::Decision, "o <= n");
    cb.edge(ol, gpc, EdgeType::True);
    int out = cb.add(BlockType::Output, "x(n)");
    cb.edge(ol, out, EdgeType::False);
    int end = cb.then(out, BlockType::End);
    cb.edge(dead, end);
    return cb.finish();
}

namespace {

/// Shared skeleton of the two iterative linear solvers: they differ only in
/// whether the sweep updates x in place.
Flowchart iterative_solver(bool in_place) {
    ChartBuilder cb;
    int start = cb.add(BlockType::Start);
    int input = cb.then(start, BlockType::Input,
                        "[n], A(n,n), b(n), x0(n), eps, iterations");
    int i0 = cb.then(input, BlockType::Process, "i = 1");
    int init = cb.then(i0, BlockType::Process, "X(i) = x0(i)");
    int i1 = cb.then(init, BlockType::Process, "i = i + 1");
    int il = cb.then(i1, BlockType::Decision, "i <= n");
    cb.edge(il, init, EdgeType::True);
    int k0 = cb.add(BlockType::Process, "k = 1");
    cb.edge(il, k0, EdgeType::False);

    int body;
    int iter_start; // first block of one iteration, target of the loop-back
    if (in_place) {
        // Keep the previous iterate for the stopping test.
        int s0 = cb.then(k0, BlockType::Process, "i = 1");
        iter_start = s0;
        int sv = cb.then(s0, BlockType::Process, "oldX(i) = X(i)");
        int s1 = cb.then(sv, BlockType::Process, "i = i + 1");
        int sl = cb.then(s1, BlockType::Decision, "i <= n");
        cb.edge(sl, sv, EdgeType::True);
        body = cb.add(BlockType::Process, "i = 1");
        cb.edge(sl, body, EdgeType::False);
    } else {
        body = cb.then(k0, BlockType::Process, "i = 1");
        iter_start = body;
    }
    int q0 = cb.then(body, BlockType::Process, "q = b(i) / A(i,i)");
    int j0 = cb.then(q0, BlockType::Process, "j = 1");
    int jd = cb.then(j0, BlockType::Decision, "j == i");
    int rr = cb.add(BlockType::Process, "r = A(i,j) / A(i,i)");
    cb.edge(jd, rr, EdgeType::False);
    int tt = cb.then(rr, BlockType::Process, "t = r * X(j)");
    int qq = cb.then(tt, BlockType::Process, "q = q - t");
    int j1 = cb.add(BlockType::Process, "j = j + 1");
    cb.edge(jd, j1, EdgeType::True);
    cb.edge(qq, j1);
    int jl = cb.then(j1, BlockType::Decision, "j <= n");
    cb.edge(jl, jd, EdgeType::True);
    int wr = cb.add(BlockType::Process,
                    in_place ? "X(i) = q" : "newX(i) = q");
    cb.edge(jl, wr, EdgeType::False);
    int i2 = cb.then(wr, BlockType::Process, "i = i + 1");
    int bl = cb.then(i2, BlockType::Decision, "i <= n");
    cb.edge(bl, q0, EdgeType::True);

    // Componentwise stopping test |x_new - x_old| < eps, conjoined.
    int cv0 = cb.add(BlockType::Process, "i = 1");
    cb.edge(bl, cv0, EdgeType::False);
    int dd = cb.then(cv0, BlockType::Process,
                     in_place ? "d = X(i) - oldX(i)" : "d = newX(i) - X(i)");
    int ad = cb.then(dd, BlockType::Process, "ad = abs(d)");
    int cf = cb.then(ad, BlockType::Process, "cf = ad < eps");
    int first = cb.then(cf, BlockType::Decision, "i == 1");
    int cset = cb.add(BlockType::Process, "conv = cf");
    cb.edge(first, cset, EdgeType::True);
    int cand = cb.add(BlockType::Process, "conv = conv && cf");
    cb.edge(first, cand, EdgeType::False);
    int after = in_place ? cb.add(BlockType::Process, "i = i + 1")
                         : cb.add(BlockType::Process, "X(i) = newX(i)");
    cb.edge(cset, after);
    cb.edge(cand, after);
    int i3 = after;
    if (!in_place) i3 = cb.then(after, BlockType::Process, "i = i + 1");
    int cl = cb.then(i3, BlockType::Decision, "i <= n");
    cb.edge(cl, dd, EdgeType::True);
    int stop = cb.add(BlockType::Decision, "conv");
    cb.edge(cl, stop, EdgeType::False);

    int k1 = cb.add(BlockType::Process, "k = k + 1");
    cb.edge(stop, k1, EdgeType::False);
    int more = cb.then(k1, BlockType::Decision, "k <= iterations");
    cb.edge(more, iter_start, EdgeType::True);
    int dead = cb.add(BlockType::Process, "empout = 0");
    cb.edge(more, dead, EdgeType::False);

    int g0 = cb.add(BlockType::Process, "i = 1");
    cb.edge(stop, g0, EdgeType::True);
    int gx = cb.then(g0, BlockType::Process, "x(i) = X(i)");
    int g1 = cb.then(gx, BlockType::Process, "i = i + 1");
    int gl = cb.then(g1, BlockType::Decision, "i <= n");
    cb.edge(gl, gx, EdgeType::True);
    int out = cb.add(BlockType::Output, "x(n)");
    cb.edge(gl, out, EdgeType::False);
    int end = cb.then(out, BlockType::End);
    cb.edge(dead, end);
    return cb.finish();
}

} // namespace

Flowchart jacobi_linear() { return iterative_solver(false); }

Flowchart gauss_seidel() { return iterative_solver(true); }

QDeterminant grid_jacobi(int K, int J, int L) {
    if (K < 1 || J < 1 || L < 1)
        throw DomainError("grid dimensions and depth must be positive");
    QDeterminant q;
    q.param_names = {"K", "J"};
    q.params = {{"K", K}, {"J", J}};
    q.iterations = L;
    ExprArena& a = q.arena;
    NodeId eps = a.variable(Var{"eps", {}});

    // u[n][k][j]: iterate n of the grid value at (k,j); n = 0 are inputs.
    std::vector<std::vector<std::vector<NodeId>>> u(
        static_cast<std::size_t>(L) + 1,
        std::vector<std::vector<NodeId>>(K + 1, std::vector<NodeId>(J + 1)));
    std::vector<NodeId> v(static_cast<std::size_t>(L) + 1);
    for (int k = 1; k <= K; ++k)
        for (int j = 1; j <= J; ++j) u[0][k][j] = var2(a, "u0", k, j);
    for (int n = 1; n <= L; ++n) {
        for (int k = 1; k <= K; ++k)
            for (int j = 1; j <= J; ++j) {
                int km1 = k == 1 ? K : k - 1, kp1 = k == K ? 1 : k + 1;
                int jm1 = j == 1 ? J : j - 1, jp1 = j == J ? 1 : j + 1;
                NodeId s = var2(a, "f", k, j);
                s = a.binary(Op::Add, s,
                             a.binary(Op::Mul, var2(a, "a", k, j),
                                      u[n - 1][km1][j]));
                s = a.binary(Op::Add, s,
                             a.binary(Op::Mul, var2(a, "b", k, j),
                                      u[n - 1][k][jm1]));
                s = a.binary(Op::Add, s,
                             a.binary(Op::Mul, var2(a, "c", k, j),
                                      u[n - 1][kp1][j]));
                s = a.binary(Op::Add, s,
                             a.binary(Op::Mul, var2(a, "d", k, j),
                                      u[n - 1][k][jp1]));
                u[n][k][j] = a.binary(Op::Div, s, var2(a, "e", k, j));
            }
        NodeId conj = 0;
        bool first = true;
        for (int k = 1; k <= K; ++k)
            for (int j = 1; j <= J; ++j) {
                NodeId cmp = a.binary(
                    Op::Lt,
                    a.unary(Op::Abs,
                            a.binary(Op::Sub, u[n][k][j], u[n - 1][k][j])),
                    eps);
                conj = first ? cmp : a.binary(Op::And, conj, cmp);
                first = false;
            }
        v[n] = conj;
    }
    for (int k = 1; k <= K; ++k)
        for (int j = 1; j <= J; ++j) {
            QTerm t;
            t.kind = TermKind::TruncatedInfinite;
            for (int n = 1; n <= L; ++n)
                t.pairs.push_back({v[n], u[n][k][j]});
            q.outputs.emplace_back(Var{"u", {k, j}}, std::move(t));
        }
    return q;
}

} // namespace qdet::gen
