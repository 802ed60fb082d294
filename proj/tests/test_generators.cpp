#include "doctest.h"

#include "helpers.hpp"
#include "qdet/analyzer.hpp"
#include "qdet/builder.hpp"
#include "qdet/generators.hpp"
#include "qdet/qterm.hpp"

using namespace qdet;

TEST_SUITE("generators") {

TEST_CASE("every chart generator emits a well-formed chart") {
    for (const Flowchart& fc :
         {gen::scalar_product(true), gen::scalar_product(false),
          gen::gauss_jordan(), gen::jacobi_linear(), gen::gauss_seidel()}) {
        CHECK(validate(fc).empty());
        CHECK(fc.start_id() >= 0);
    }
}

TEST_CASE("scalar chart is parametric over its dimension") {
    Flowchart fc = gen::scalar_product(true);
    for (int n : {1, 3, 7}) {
        BuildConfig cfg;
        cfg.params["n"] = n;
        QDeterminant q = build_qdet(fc, cfg);
        auto c = analyze(q);
        CHECK(c.P == static_cast<std::uint64_t>(n));
    }
}

TEST_CASE("matrix product determinant") {
    QDeterminant q = gen::matmul(2, 2, 2);
    REQUIRE(q.outputs.size() == 4);
    CHECK(q.outputs[0].first == Var{"c", {1, 1}});
    CHECK(q.outputs[3].first == Var{"c", {2, 2}});
    for (const auto& [var, term] : q.outputs)
        CHECK(term.kind == TermKind::Unconditional);

    Interpretation in;
    const double A[2][2] = {{1, 2}, {3, 4}};
    const double B[2][2] = {{5, 6}, {7, 8}};
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            in.bind(Var{"a", {i, j}}, A[i - 1][j - 1]);
            in.bind(Var{"b", {i, j}}, B[i - 1][j - 1]);
        }
    auto res = qdet_value(q, in);
    const double expected[4] = {19, 22, 43, 50};
    for (int k = 0; k < 4; ++k)
        CHECK(std::get<double>(*res[k].second.value) == expected[k]);

    // rectangular shapes: n*m outputs over k-long chains
    QDeterminant rect = gen::matmul(2, 3, 4);
    CHECK(rect.outputs.size() == 8);
    CHECK(rect.param("n") == 2);
    CHECK(rect.param("k") == 3);
    CHECK(rect.param("m") == 4);

    // the doubling flag bakes the chain shape into the expressions
    QDeterminant balanced = gen::matmul(4, 4, 4, true);
    QDeterminant chained = gen::matmul(4, 4, 4, false);
    AnalyzeConfig off;
    off.doubling = false;
    CHECK(analyze(balanced, off).D == 3);
    CHECK(analyze(chained, off).D == 4);
    CHECK(analyze(balanced, off).P == analyze(chained, off).P);

    CHECK_THROWS_AS(gen::matmul(0, 2, 2), DomainError);
}

TEST_CASE("elimination chart builds factorial enumerations") {
    BuildConfig cfg;
    cfg.params["n"] = 3;
    QDeterminant q = build_qdet(gen::gauss_jordan(), cfg);
    REQUIRE(q.outputs.size() == 3);
    for (const auto& [var, term] : q.outputs) CHECK(term.pairs.size() == 6);
    CHECK(analyze(q).D == 9);
}

TEST_CASE("iterative charts declare the truncation variable") {
    CHECK(gen::jacobi_linear().declares_iterations());
    CHECK(gen::gauss_seidel().declares_iterations());

    BuildConfig cfg;
    cfg.params["n"] = 2;
    cfg.iterations = 3;
    QDeterminant ja = build_qdet(gen::jacobi_linear(), cfg);
    REQUIRE(ja.outputs.size() == 2);
    for (const auto& [var, term] : ja.outputs) {
        CHECK(term.kind == TermKind::TruncatedInfinite);
        CHECK(term.pairs.size() == 3);
    }
    CHECK(ja.iterations == 3);
}

TEST_CASE("grid determinant structure") {
    QDeterminant q = gen::grid_jacobi(2, 3, 2);
    REQUIRE(q.outputs.size() == 6);
    CHECK(q.param("K") == 2);
    CHECK(q.param("J") == 3);
    CHECK(q.iterations == 2);
    for (const auto& [var, term] : q.outputs) {
        CHECK(var.name == "u");
        CHECK(term.kind == TermKind::TruncatedInfinite);
        REQUIRE(term.pairs.size() == 2);
        // all pairs of one stage share the stage's stopping guard
        CHECK(*term.pairs[0].guard == *q.outputs[0].second.pairs[0].guard);
        CHECK(*term.pairs[1].guard == *q.outputs[0].second.pairs[1].guard);
    }
    CHECK(analyze(q).D == 5 * 2 + 3 + 3); // ceil(log 6) = 3

    CHECK_THROWS_AS(gen::grid_jacobi(0, 2, 2), DomainError);
    CHECK_THROWS_AS(gen::grid_jacobi(2, 2, 0), DomainError);
}

TEST_CASE("grid stencil wraps around the boundary") {
    // K=1: the vertical neighbors of the single row are the point itself
    QDeterminant q = gen::grid_jacobi(1, 2, 1);
    Interpretation in;
    for (int j = 1; j <= 2; ++j) {
        in.bind(Var{"u0", {1, j}}, j);        // u0 = (1, 2)
        in.bind(Var{"f", {1, j}}, 0.0);
        in.bind(Var{"a", {1, j}}, 1.0);       // up neighbor: wraps to itself
        in.bind(Var{"b", {1, j}}, 0.0);
        in.bind(Var{"c", {1, j}}, 0.0);
        in.bind(Var{"d", {1, j}}, 1.0);       // right neighbor: the other column
        in.bind(Var{"e", {1, j}}, 1.0);
    }
    in.bind("eps", 1e6);
    auto res = qdet_value(q, in);
    // u1(1,1) = u0(1,1) + u0(1,2) = 3; u1(1,2) = u0(1,2) + u0(1,1) = 3
    CHECK(std::get<double>(*res[0].second.value) == 3.0);
    CHECK(std::get<double>(*res[1].second.value) == 3.0);
}

} // TEST_SUITE
