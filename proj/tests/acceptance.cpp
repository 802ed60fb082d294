// Integration acceptance checks. Each criterion prints a single
// "criterion N: PASS|FAIL" line followed by indented sub-check details.
// Run without arguments for all eight, or pass criterion numbers to select.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qdet/analyzer.hpp"
#include "qdet/builder.hpp"
#include "qdet/catalog.hpp"
#include "qdet/compare.hpp"
#include "qdet/errors.hpp"
#include "qdet/evaluator.hpp"
#include "qdet/expr.hpp"
#include "qdet/flowchart.hpp"
#include "qdet/formulas.hpp"
#include "qdet/generators.hpp"
#include "qdet/qterm.hpp"

#include "helpers.hpp"

using namespace qdet;

namespace {

template <class T>
std::string str(const T& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct Criterion {
    int failures = 0;
    std::vector<std::string> lines;

    void check(bool ok, const std::string& label) {
        if (!ok) ++failures;
        lines.push_back(std::string(ok ? "    [ ok ] " : "    [FAIL] ") + label);
    }

    template <class A, class B>
    void check_eq(const A& actual, const B& expected, const std::string& label) {
        bool ok = actual == expected;
        std::string msg = label;
        if (!ok) msg += " (got " + str(actual) + ", want " + str(expected) + ")";
        check(ok, msg);
    }
};

/// Accumulates a swept check so a loop reports one line, not thousands.
struct Sweep {
    int fails = 0;
    std::string first;

    void note(bool ok, const std::string& detail) {
        if (!ok && fails++ == 0) first = detail;
    }
    void report(Criterion& c, const std::string& label) const {
        std::string msg = label;
        if (fails > 0)
            msg += " (" + std::to_string(fails) + " failures, first: " + first + ")";
        c.check(fails == 0, msg);
    }
};

int ceil_log2(std::int64_t n) {
    int s = 0;
    while ((std::int64_t{1} << s) < n) ++s;
    return s;
}

std::int64_t factorial(int n) {
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// ---------------------------------------------------------------------------
// 1. The three reference expressions: heights and values.

void criterion1(Criterion& c) {
    ExprArena a;
    auto b = [&](int i) { return a.variable("b" + std::to_string(i)); };

    NodeId w1 = a.binary(Op::Div,
                         a.binary(Op::Mul, b(1), a.binary(Op::Add, b(2), b(3))),
                         b(4));
    NodeId w2 = a.binary(
        Op::Or,
        a.binary(Op::Le, a.binary(Op::Add, b(1), b(2)),
                 a.binary(Op::Mul, b(3), b(4))),
        a.unary(Op::Not, a.binary(Op::Le, b(5), b(6))));
    NodeId w3 = a.binary(
        Op::And,
        a.binary(Op::And, a.binary(Op::Ge, b(1), b(3)),
                 a.binary(Op::Ne, a.binary(Op::Sub, b(2), b(4)), a.constant(0.0))),
        a.binary(Op::Eq, b(5), a.constant(0.0)));

    c.check_eq(a.nesting_level(w1), 3, "height of w1 = b1*(b2+b3)/b4");
    c.check_eq(a.nesting_level(w2), 3, "height of w2 = (b1+b2<=b3*b4) or not(b5<=b6)");
    c.check_eq(a.nesting_level(w3), 4, "height of w3 = ((b1>=b3) and (b2-b4 != 0)) and (b5=0)");

    Interpretation in;
    for (int i = 1; i <= 6; ++i) in.bind("b" + std::to_string(i), double(i));

    Value v1 = a.evaluate(w1, in);
    c.check(std::holds_alternative<double>(v1) && std::get<double>(v1) == 1.25,
            "w1 evaluates to exactly 5/4 under b_i = i");
    Value v2 = a.evaluate(w2, in);
    c.check(std::holds_alternative<bool>(v2) && std::get<bool>(v2) == true,
            "w2 evaluates to true under b_i = i");
    Value v3 = a.evaluate(w3, in);
    c.check(std::holds_alternative<bool>(v3) && std::get<bool>(v3) == false,
            "w3 evaluates to false under b_i = i");
}

// ---------------------------------------------------------------------------
// 2. Scalar product: D = ceil(log2 n) + 1 and P = n with pairwise doubling;
//    D = n without it.

void criterion2(Criterion& c) {
    Flowchart fc = gen::scalar_product(true);
    for (int n : {1, 2, 4, 7, 16, 100, 1000}) {
        BuildConfig bc;
        bc.params["n"] = n;
        QDeterminant q = build_qdet(fc, bc);
        Characteristics ch = analyze(q);
        c.check_eq(ch.D, ceil_log2(n) + 1, "doubling height at n=" + std::to_string(n));
        c.check_eq(ch.P, std::uint64_t(n), "doubling width at n=" + std::to_string(n));
    }

    Flowchart seq = gen::scalar_product(false);
    AnalyzeConfig off;
    off.doubling = false;
    Sweep sw;
    for (int n = 2; n <= 64; ++n) {
        BuildConfig bc;
        bc.params["n"] = n;
        QDeterminant q = build_qdet(seq, bc);
        Characteristics ch = analyze(q, off);
        sw.note(ch.D == n, "n=" + std::to_string(n) + " gave D=" + std::to_string(ch.D));
    }
    sw.report(c, "sequential height D = n for every n in 2..64");
}

// ---------------------------------------------------------------------------
// 3. Gauss-Jordan elimination at n = 2, 3 (and an n = 4 smoke run).

void criterion3(Criterion& c) {
    Flowchart fc = gen::gauss_jordan();
    for (int n : {2, 3}) {
        std::string at = " at n=" + std::to_string(n);
        BuildConfig bc;
        bc.params["n"] = n;
        QDeterminant q = build_qdet(fc, bc);

        bool lengths = q.outputs.size() == std::size_t(n);
        for (const auto& [var, term] : q.outputs)
            lengths = lengths && term.pairs.size() == std::size_t(factorial(n));
        c.check(lengths, "every output term lists n! = " +
                             std::to_string(factorial(n)) + " guarded pairs" + at);

        Characteristics dag = analyze(q);
        c.check_eq(dag.D, 3 * n, "height D = 3n" + at);

        std::vector<NodeId> roots = analysis_roots(q, true);
        std::vector<std::uint64_t> tree_counts =
            count_ops_per_level(q.arena, roots, Sharing::Tree);
        std::uint64_t bound =
            formulas::gauss_jordan_width_lower_bound(n).convert_to<std::uint64_t>();
        c.check_eq(tree_counts.empty() ? 0 : tree_counts[0], bound,
                   "tree-mode level-1 operation total equals (3/2)(n+1)!" + at);
        std::uint64_t p_tree =
            width(q.arena, roots, Sharing::Tree, ChainCount::Exact);
        c.check(p_tree >= bound,
                "tree-mode width " + str(p_tree) + " >= (3/2)(n+1)! = " +
                    str(bound) + at);

        int guard_max = 0;
        for (const auto& [var, term] : q.outputs)
            for (const GuardedPair& p : term.pairs)
                if (p.guard)
                    guard_max = std::max(guard_max, q.arena.nesting_level(*p.guard));
        c.check_eq(guard_max, 3 * n - 1, "maximum guard nesting is 3n-1" + at);
    }

    auto t0 = std::chrono::steady_clock::now();
    BuildConfig bc4;
    bc4.params["n"] = 4;
    QDeterminant q4 = build_qdet(fc, bc4);
    Characteristics ch4 = analyze(q4);
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0).count();
    bool smoke = q4.outputs.size() == 4;
    for (const auto& [var, term] : q4.outputs)
        smoke = smoke && term.pairs.size() == 24;
    c.check(smoke, "n=4 smoke run emits 24 guarded pairs per output");
    c.check_eq(ch4.D, 12, "n=4 smoke run height D = 12");
    c.check(secs < 10.0,
            "n=4 build and analysis complete in " + str(secs) + "s (< 10s)");
}

// ---------------------------------------------------------------------------
// 4. Grid Jacobi relaxation at KJ = 2^s, s = 3..10: the published widths and
//    D = 5L + 3 + s, analyzed in-process (the text format expands shared
//    stages into trees, which is too large to write out at this scale).

void criterion4(Criterion& c) {
    struct Case {
        int k, j, s;
        std::int64_t p;
    };
    const Case cases[] = {
        {2, 4, 3, 41},     {4, 4, 4, 82},    {4, 8, 5, 164},   {8, 8, 6, 328},
        {8, 16, 7, 656},   {16, 16, 8, 1313}, {16, 32, 9, 2626}, {32, 32, 10, 5252},
    };
    for (const Case& cs : cases) {
        int L = 2 + (cs.s + 4) / 5 + 1;
        std::string at = " at KJ=2^" + std::to_string(cs.s) + " (K=" +
                         std::to_string(cs.k) + ", J=" + std::to_string(cs.j) +
                         ", L=" + std::to_string(L) + ")";
        QDeterminant q = gen::grid_jacobi(cs.k, cs.j, L);
        Characteristics ch = analyze(q);
        c.check_eq(ch.P, std::uint64_t(cs.p), "width P" + at);
        c.check_eq(ch.D, 5 * L + 3 + cs.s, "height D = 5L + 3 + s" + at);
    }
}

// ---------------------------------------------------------------------------
// 5. The grid Jacobi width formulas against the summation oracle, exactly.

void criterion5(Criterion& c) {
    using namespace formulas;

    Sweep piecewise;
    for (std::int64_t kj = 1; kj <= 255; ++kj) {
        std::int64_t want = kj < 8 ? 5 * kj : 5 * kj + kj / 8;
        piecewise.note(grid_jacobi_width(kj) == want, "KJ=" + std::to_string(kj));
    }
    piecewise.report(c, "piecewise rule: P = 5KJ (KJ<8), 5KJ + floor(KJ/8) (8..255)");

    const std::int64_t table[] = {5,    10,   20,   41,   82,    164,  328,
                                  656,  1313, 2626, 5252, 10504, 21008};
    Sweep pow2;
    for (int s = 0; s <= 12; ++s) {
        pow2.note(grid_jacobi_width_pow2(s) == table[s] &&
                      grid_jacobi_width(std::int64_t{1} << s) == table[s],
                  "s=" + std::to_string(s));
    }
    pow2.report(c, "powers of two match the closed form through s = 12");

    Sweep inc;
    for (std::int64_t kj = 256; kj < 20000; ++kj) {
        inc.note(grid_jacobi_width(kj + 1) - grid_jacobi_width(kj) ==
                     grid_jacobi_width_increment(kj),
                 "KJ=" + std::to_string(kj));
    }
    inc.report(c, "increment rule P(KJ+1) - P(KJ) holds for KJ = 256..20000");

    Sweep mono;
    for (std::int64_t kj = 1; kj < 20000; ++kj)
        mono.note(grid_jacobi_width(kj + 1) > grid_jacobi_width(kj),
                  "KJ=" + std::to_string(kj));
    mono.report(c, "strict monotonicity over KJ = 1..20000");

    Sweep scale;
    for (int q = 1; q <= 4; ++q) {
        int s0 = 5 * q - 2;
        std::int64_t base = grid_jacobi_width_pow2(s0);
        std::int64_t closed = 5 * (std::int64_t{1} << s0) +
                              ((std::int64_t{1} << (5 * q)) - 1) / 31;
        scale.note(base == closed, "base q=" + std::to_string(q));
        for (int t = 0; t <= 4; ++t)
            scale.note(grid_jacobi_width_pow2(s0 + t) == (std::int64_t{1} << t) * base,
                       "q=" + std::to_string(q) + " t=" + std::to_string(t));
    }
    scale.report(c, "five-step doubling from KJ = 2^(5q-2), q = 1..4");

    Sweep bounds;
    for (int s = 8; s <= 20; ++s) {
        std::int64_t p = grid_jacobi_width_pow2(s);
        bounds.note(41 * (std::int64_t{1} << (s - 3)) < p &&
                        p < 6 * (std::int64_t{1} << s),
                    "s=" + std::to_string(s));
    }
    bounds.report(c, "41*2^(s-3) < P(2^s) < 6*2^s for s = 8..20");
}

// ---------------------------------------------------------------------------
// 6. Three-way agreement of the evaluation paths on random data.

struct Draw {
    bool agree = true;
    std::string where;
};

bool same_outcome(const Outcome& x, const Outcome& y) {
    if (x.determined() != y.determined()) return false;
    if (!x.determined()) return true;
    if (x.value->index() != y.value->index()) return false;
    if (std::holds_alternative<bool>(*x.value))
        return std::get<bool>(*x.value) == std::get<bool>(*y.value);
    return testutil::close(std::get<double>(*x.value), std::get<double>(*y.value));
}

std::map<std::string, Outcome> as_map(const std::vector<std::pair<Var, Outcome>>& v) {
    std::map<std::string, Outcome> m;
    for (const auto& [var, out] : v) m[var.text()] = out;
    return m;
}

/// Check that every leg agrees with the first, output by output.
void note_agreement(Sweep& sw, const std::string& tag,
                    const std::vector<std::map<std::string, Outcome>>& legs) {
    for (std::size_t i = 1; i < legs.size(); ++i) {
        bool ok = legs[i].size() == legs[0].size();
        std::string detail = tag + ": output count mismatch";
        if (ok) {
            for (const auto& [name, ref] : legs[0]) {
                auto it = legs[i].find(name);
                if (it == legs[i].end() || !same_outcome(ref, it->second)) {
                    ok = false;
                    detail = tag + ": leg " + std::to_string(i) +
                             " disagrees on " + name;
                    break;
                }
            }
        }
        sw.note(ok, detail);
    }
}

std::map<std::string, Outcome> reference_outcomes(
    const std::map<std::string, std::optional<double>>& ref) {
    std::map<std::string, Outcome> m;
    for (const auto& [name, v] : ref) {
        Outcome o;
        if (v) o.value = Value{*v};
        else o.cause = "reference undetermined";
        m[name] = o;
    }
    return m;
}

void criterion6(Criterion& c) {
    std::mt19937 rng(20260825);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    const int kDraws = 100;

    // Build cache so 100 draws do not rebuild the same determinant.
    std::map<std::string, QDeterminant> cache;
    auto cached = [&](const std::string& key, auto make) -> const QDeterminant& {
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, make()).first;
        return it->second;
    };

    { // scalar product, n <= 16
        Flowchart fc = gen::scalar_product(true);
        Sweep sw;
        for (int d = 0; d < kDraws; ++d) {
            int n = pick(1, 16);
            const QDeterminant& q =
                cached("sp" + std::to_string(n), [&] {
                    BuildConfig bc;
                    bc.params["n"] = n;
                    return build_qdet(fc, bc);
                });
            Interpretation in;
            for (int i = 1; i <= n; ++i) {
                in.bind("a1(" + std::to_string(i) + ")", uni(-2, 2));
                in.bind("a2(" + std::to_string(i) + ")", uni(-2, 2));
            }
            note_agreement(sw, "draw " + std::to_string(d) + " n=" + std::to_string(n),
                           {as_map(run_flowchart(fc, {{"n", n}}, in).outputs),
                            as_map(qdet_value(q, in)),
                            as_map(run_q_effective(q, in).outputs)});
        }
        sw.report(c, "scalar product: chart run = determinant value = effective run");
    }

    { // matrix product, dims <= 4, first leg is a direct numeric reference
        Sweep sw;
        for (int d = 0; d < kDraws; ++d) {
            int n = pick(1, 4), k = pick(1, 4), m = pick(1, 4);
            std::string key = "mm" + std::to_string(n) + "." + std::to_string(k) +
                              "." + std::to_string(m);
            const QDeterminant& q =
                cached(key, [&] { return gen::matmul(n, k, m, true); });
            Interpretation in;
            std::vector<std::vector<double>> A(n + 1, std::vector<double>(k + 1));
            std::vector<std::vector<double>> B(k + 1, std::vector<double>(m + 1));
            for (int i = 1; i <= n; ++i)
                for (int s = 1; s <= k; ++s) {
                    A[i][s] = uni(-2, 2);
                    in.bind("a(" + std::to_string(i) + "," + std::to_string(s) + ")",
                            A[i][s]);
                }
            for (int s = 1; s <= k; ++s)
                for (int j = 1; j <= m; ++j) {
                    B[s][j] = uni(-2, 2);
                    in.bind("b(" + std::to_string(s) + "," + std::to_string(j) + ")",
                            B[s][j]);
                }
            std::map<std::string, std::optional<double>> ref;
            for (int i = 1; i <= n; ++i)
                for (int j = 1; j <= m; ++j) {
                    double sum = 0;
                    for (int s = 1; s <= k; ++s) sum += A[i][s] * B[s][j];
                    ref["c(" + std::to_string(i) + "," + std::to_string(j) + ")"] = sum;
                }
            note_agreement(sw, "draw " + std::to_string(d) + " " + key,
                           {reference_outcomes(ref),
                            as_map(qdet_value(q, in)),
                            as_map(run_q_effective(q, in).outputs)});
        }
        sw.report(c, "matrix product: numeric reference = determinant value = effective run");
    }

    { // Gauss-Jordan, n <= 3, nonsingular systems with occasional zero entries
        Flowchart fc = gen::gauss_jordan();
        Sweep sw;
        for (int d = 0; d < kDraws; ++d) {
            int n = pick(2, 3);
            std::vector<std::vector<double>> A;
            std::vector<double> b(n), x;
            do {
                A.assign(n, std::vector<double>(n));
                for (auto& row : A)
                    for (double& v : row)
                        v = pick(0, 9) < 3 ? 0.0 : uni(-2, 2);
            } while (!testutil::solve_linear(A, b, x)); // keep only nonsingular A
            for (double& v : b) v = uni(-2, 2);
            Interpretation in;
            for (int i = 1; i <= n; ++i) {
                in.bind("b(" + std::to_string(i) + ")", b[i - 1]);
                for (int j = 1; j <= n; ++j)
                    in.bind("A(" + std::to_string(i) + "," + std::to_string(j) + ")",
                            A[i - 1][j - 1]);
            }
            const QDeterminant& q =
                cached("gj" + std::to_string(n), [&] {
                    BuildConfig bc;
                    bc.params["n"] = n;
                    return build_qdet(fc, bc);
                });
            note_agreement(sw, "draw " + std::to_string(d) + " n=" + std::to_string(n),
                           {as_map(run_flowchart(fc, {{"n", n}}, in).outputs),
                            as_map(qdet_value(q, in)),
                            as_map(run_q_effective(q, in).outputs)});
        }
        sw.report(c, "Gauss-Jordan: chart run = determinant value = effective run");
    }

    // Jacobi and Gauss-Seidel, n <= 4, diagonally dominant, truncated at L
    for (bool seidel : {false, true}) {
        Flowchart fc = seidel ? gen::gauss_seidel() : gen::jacobi_linear();
        std::string name = seidel ? "Gauss-Seidel" : "Jacobi";
        Sweep sw;
        for (int d = 0; d < kDraws; ++d) {
            int n = pick(1, 4);
            int L = pick(1, 4);
            double eps = std::array{1e-8, 1e-3, 0.5}[pick(0, 2)];
            Interpretation in;
            for (int i = 1; i <= n; ++i) {
                double off = 0;
                for (int j = 1; j <= n; ++j)
                    if (j != i) {
                        double v = uni(-1, 1);
                        off += std::abs(v);
                        in.bind("A(" + std::to_string(i) + "," + std::to_string(j) + ")", v);
                    }
                in.bind("A(" + std::to_string(i) + "," + std::to_string(i) + ")",
                        off + uni(1, 2));
                in.bind("b(" + std::to_string(i) + ")", uni(-2, 2));
                in.bind("x0(" + std::to_string(i) + ")", uni(-1, 1));
            }
            in.bind("eps", eps);
            std::string key = (seidel ? "gs" : "ja") + std::to_string(n) + "." +
                              std::to_string(L);
            const QDeterminant& q = cached(key, [&] {
                BuildConfig bc;
                bc.params["n"] = n;
                bc.iterations = L;
                return build_qdet(fc, bc);
            });
            note_agreement(sw,
                           "draw " + std::to_string(d) + " n=" + std::to_string(n) +
                               " L=" + std::to_string(L),
                           {as_map(run_flowchart(fc, {{"n", n}}, in, L).outputs),
                            as_map(qdet_value(q, in)),
                            as_map(run_q_effective(q, in).outputs)});
        }
        sw.report(c, name + ": chart run = determinant value = effective run");
    }

    { // grid Jacobi, K, J <= 3, first leg is a direct numeric reference
        Sweep sw;
        for (int d = 0; d < kDraws; ++d) {
            int K = pick(1, 3), J = pick(1, 3), L = pick(1, 3);
            double eps = std::array{1e-8, 1e-2, 10.0}[pick(0, 2)];
            std::string key = "gr" + std::to_string(K) + "." + std::to_string(J) +
                              "." + std::to_string(L);
            const QDeterminant& q =
                cached(key, [&] { return gen::grid_jacobi(K, J, L); });
            auto grid = [&](auto fill) {
                std::vector<std::vector<double>> g(K + 1, std::vector<double>(J + 1));
                for (int k = 1; k <= K; ++k)
                    for (int j = 1; j <= J; ++j) g[k][j] = fill();
                return g;
            };
            auto u0 = grid([&] { return uni(-1, 1); });
            auto f = grid([&] { return uni(-1, 1); });
            auto a = grid([&] { return uni(-1, 1); });
            auto b = grid([&] { return uni(-1, 1); });
            auto cc = grid([&] { return uni(-1, 1); });
            auto dd = grid([&] { return uni(-1, 1); });
            auto e = grid([&] { return uni(0.5, 2.0); });
            Interpretation in;
            in.bind("eps", eps);
            for (int k = 1; k <= K; ++k)
                for (int j = 1; j <= J; ++j) {
                    std::string kj = "(" + std::to_string(k) + "," +
                                     std::to_string(j) + ")";
                    in.bind("u0" + kj, u0[k][j]);
                    in.bind("f" + kj, f[k][j]);
                    in.bind("a" + kj, a[k][j]);
                    in.bind("b" + kj, b[k][j]);
                    in.bind("c" + kj, cc[k][j]);
                    in.bind("d" + kj, dd[k][j]);
                    in.bind("e" + kj, e[k][j]);
                }

            // Direct sweep with torus wrap, stopping at the first level whose
            // whole grid moved less than eps.
            std::map<std::string, std::optional<double>> ref;
            {
                auto prev = u0;
                std::optional<std::vector<std::vector<double>>> settled;
                for (int l = 1; l <= L && !settled; ++l) {
                    auto next = prev;
                    bool conv = true;
                    for (int k = 1; k <= K; ++k)
                        for (int j = 1; j <= J; ++j) {
                            int km1 = k == 1 ? K : k - 1, kp1 = k == K ? 1 : k + 1;
                            int jm1 = j == 1 ? J : j - 1, jp1 = j == J ? 1 : j + 1;
                            next[k][j] = (f[k][j] + a[k][j] * prev[km1][j] +
                                          b[k][j] * prev[k][jm1] +
                                          cc[k][j] * prev[kp1][j] +
                                          dd[k][j] * prev[k][jp1]) /
                                         e[k][j];
                            conv = conv && std::abs(next[k][j] - prev[k][j]) < eps;
                        }
                    if (conv) settled = next;
                    prev = next;
                }
                for (int k = 1; k <= K; ++k)
                    for (int j = 1; j <= J; ++j) {
                        std::string name = "u(" + std::to_string(k) + "," +
                                           std::to_string(j) + ")";
                        if (settled) ref[name] = (*settled)[k][j];
                        else ref[name] = std::nullopt;
                    }
            }
            note_agreement(sw, "draw " + std::to_string(d) + " " + key,
                           {reference_outcomes(ref),
                            as_map(qdet_value(q, in)),
                            as_map(run_q_effective(q, in).outputs)});
        }
        sw.report(c, "grid Jacobi: numeric reference = determinant value = effective run");
    }
}

// ---------------------------------------------------------------------------
// 7. Comparing the two matrix-product chain shapes, and the no-overlap exit.

void criterion7(Criterion& c) {
    AnalyzeConfig keep;
    keep.doubling = false; // preserve the generated chain shapes
    std::vector<Characteristics> balanced, chained;
    for (int n : {2, 4, 8}) {
        QDeterminant qb = gen::matmul(n, n, n, true);
        QDeterminant qc = gen::matmul(n, n, n, false);
        balanced.push_back(analyze(qb, keep));
        chained.push_back(analyze(qc, keep));
    }
    ComparisonReport r = compare(balanced, chained);
    c.check_eq(r.shared.size(), std::size_t(3), "three shared parameter points");
    c.check_eq(r.delta_p, 0ll, "width difference is zero at every point");
    c.check(r.verdict_p == Verdict::Equal, "width verdict is 'equal'");
    c.check(r.delta_d < 0,
            "summed height difference " + str(r.delta_d) + " favors the balanced shape");
    c.check(r.verdict_d == Verdict::Less, "height verdict is 'less'");

    ComparisonReport rev = compare(chained, balanced);
    c.check(rev.delta_d == -r.delta_d && rev.delta_p == -r.delta_p &&
                rev.verdict_d == Verdict::Greater && rev.shared == r.shared,
            "reversing the sides negates the differences");

    // Disjoint parameter points through the command-line interface: exit 2.
    testutil::TempDir dir;
    auto d2 = dir.path() / "m2.qd";
    auto d4 = dir.path() / "m4.qd";
    {
        QDeterminant q2 = gen::matmul(2, 2, 2, true);
        QDeterminant q4 = gen::matmul(4, 4, 4, true);
        testutil::write_file(d2, serialize_qdet(q2));
        testutil::write_file(d4, serialize_qdet(q4));
    }
    std::string store = " --store '" + (dir.path() / "store").string() + "'";
    std::string bin = QDET_BIN;
    testutil::run_command(bin + " catalog algorithm add MA --name balanced" + store);
    testutil::run_command(bin + " catalog algorithm add MB --name chained" + store);
    testutil::run_command(bin + " catalog determinant add dA --algorithm MA --file '" +
                          d2.string() + "'" + store);
    testutil::run_command(bin + " catalog determinant add dB --algorithm MB --file '" +
                          d4.string() + "'" + store);
    testutil::CommandResult cmp = testutil::run_command(bin + " compare MA MB" + store);
    c.check_eq(cmp.exit_code, 2,
               "command-line compare with no shared parameter points exits with 2");
}

// ---------------------------------------------------------------------------
// 8. Builder mechanics: branch enumeration, file round trips, the catalog.

void criterion8(Criterion& c) {
    using Trace = BranchTrace;
    Trace t{{1, 1}, {2, 1}};
    std::optional<Trace> s1 = next_branch(t);
    c.check(s1 && *s1 == Trace{{1, 1}, {2, 0}},
            "successor of [(1,1),(2,1)] is [(1,1),(2,0)]");
    std::optional<Trace> s2 = next_branch(*s1);
    c.check(s2 && *s2 == Trace{{1, 0}}, "successor of [(1,1),(2,0)] is [(1,0)]");
    std::optional<Trace> s3 = next_branch(*s2);
    c.check(!s3, "successor of [(1,0)] is exhaustion");

    { // determinant files are byte-stable under parse/serialize
        Flowchart fc = gen::gauss_seidel();
        BuildConfig bc;
        bc.params["n"] = 2;
        bc.iterations = 2;
        QDeterminant q = build_qdet(fc, bc);
        std::string text = serialize_qdet(q);
        QDeterminant back = parse_qdet(text);
        std::string again = serialize_qdet(back);
        c.check(text == again, "serialize(parse(text)) reproduces the file byte for byte");
    }

    { // catalog round trip with cascade delete and recomputation agreement
        testutil::TempDir dir;
        Catalog cat(dir.path() / "store");
        cat.algorithm_add("sp", "scalar product", "pairwise summation");

        Flowchart fc = gen::scalar_product(true);
        for (int n : {2, 4, 8}) {
            BuildConfig bc;
            bc.params["n"] = n;
            QDeterminant q = build_qdet(fc, bc);
            cat.determinant_add("sp" + std::to_string(n), "sp", serialize_qdet(q));
        }
        std::vector<DeterminantRecord> recs = cat.determinant_list("sp");
        bool agree = recs.size() == 3;
        for (const DeterminantRecord& r : recs) {
            QDeterminant q = parse_qdet(cat.determinant_download(r.id));
            Characteristics ch = analyze(q);
            agree = agree && ch.D == r.D && ch.P == r.P;
        }
        c.check(agree, "stored characteristics match recomputation from the stored text");

        cat.algorithm_remove("sp");
        bool gone = true;
        for (const DeterminantRecord& r : cat.determinant_list())
            gone = gone && r.algorithm_id != "sp";
        try {
            cat.determinant_download("sp2");
            gone = false;
        } catch (const NotFound&) {
        }
        c.check(gone, "removing an algorithm cascades to its determinants");
    }
}

// ---------------------------------------------------------------------------

bool run_criterion(int n) {
    Criterion c;
    try {
        switch (n) {
            case 1: criterion1(c); break;
            case 2: criterion2(c); break;
            case 3: criterion3(c); break;
            case 4: criterion4(c); break;
            case 5: criterion5(c); break;
            case 6: criterion6(c); break;
            case 7: criterion7(c); break;
            case 8: criterion8(c); break;
            default:
                std::cerr << "unknown criterion " << n << "\n";
                return false;
        }
    } catch (const std::exception& e) {
        c.check(false, std::string("unexpected exception: ") + e.what());
    }
    std::cout << "criterion " << n << ": " << (c.failures == 0 ? "PASS" : "FAIL")
              << "\n";
    for (const std::string& line : c.lines) std::cout << line << "\n";
    std::cout.flush();
    return c.failures == 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};
    int failed = 0;
    for (int n : which)
        if (!run_criterion(n)) ++failed;
    return failed == 0 ? 0 : 1;
}
