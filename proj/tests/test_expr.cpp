#include "doctest.h"

#include "qdet/expr.hpp"

using namespace qdet;

namespace {

// b1 * (b2 + b3) / b4
NodeId make_w1(ExprArena& a) {
    NodeId b1 = a.variable("b1"), b2 = a.variable("b2");
    NodeId b3 = a.variable("b3"), b4 = a.variable("b4");
    return a.binary(Op::Div, a.binary(Op::Mul, b1, a.binary(Op::Add, b2, b3)),
                    b4);
}

// ((b1 + b2) <= (b3 * b4)) or not (b5 <= b6)
NodeId make_w2(ExprArena& a) {
    NodeId le = a.binary(Op::Le, a.binary(Op::Add, a.variable("b1"), a.variable("b2")),
                         a.binary(Op::Mul, a.variable("b3"), a.variable("b4")));
    NodeId rhs = a.unary(Op::Not,
                         a.binary(Op::Le, a.variable("b5"), a.variable("b6")));
    return a.binary(Op::Or, le, rhs);
}

// ((b1 >= b3) and ((b2 - b4) != 0)) and (b5 = 0)
NodeId make_w3(ExprArena& a) {
    NodeId ge = a.binary(Op::Ge, a.variable("b1"), a.variable("b3"));
    NodeId ne = a.binary(Op::Ne, a.binary(Op::Sub, a.variable("b2"), a.variable("b4")),
                         a.constant(0.0));
    NodeId eq = a.binary(Op::Eq, a.variable("b5"), a.constant(0.0));
    return a.binary(Op::And, a.binary(Op::And, ge, ne), eq);
}

Interpretation b_i_equals_i() {
    Interpretation in;
    for (int i = 1; i <= 6; ++i) in.bind("b" + std::to_string(i), i);
    return in;
}

} // namespace

TEST_SUITE("expr") {

TEST_CASE("operation table") {
    CHECK(op_info(Op::Add).arity == 2);
    CHECK(op_info(Op::Neg).arity == 1);
    CHECK(op_info(Op::Add).assoc_comm);
    CHECK(op_info(Op::Mul).assoc_comm);
    CHECK(op_info(Op::And).assoc_comm);
    CHECK(op_info(Op::Or).assoc_comm);
    CHECK_FALSE(op_info(Op::Sub).assoc_comm);
    CHECK_FALSE(op_info(Op::Div).assoc_comm);
    CHECK(op_info(Op::Le).boolean_result);
    CHECK_FALSE(op_info(Op::Le).boolean_operands);
    CHECK(op_info(Op::Not).boolean_operands);

    CHECK(op_from_name("+") == Op::Add);
    CHECK(op_from_name("*") == Op::Mul);
    CHECK(op_from_name("le") == Op::Le);
    CHECK(op_from_name("neg") == Op::Neg);
    // word aliases for the arithmetic symbols
    CHECK(op_from_name("add") == Op::Add);
    CHECK(op_from_name("div") == Op::Div);
    CHECK_FALSE(op_from_name("frobnicate").has_value());

    CHECK(is_comparison(Op::Eq));
    CHECK(is_comparison(Op::Ge));
    CHECK_FALSE(is_comparison(Op::And));
    CHECK_FALSE(is_comparison(Op::Add));

    CHECK(comparison_complement(Op::Eq) == Op::Ne);
    CHECK(comparison_complement(Op::Ne) == Op::Eq);
    CHECK(comparison_complement(Op::Lt) == Op::Ge);
    CHECK(comparison_complement(Op::Ge) == Op::Lt);
    CHECK(comparison_complement(Op::Le) == Op::Gt);
    CHECK(comparison_complement(Op::Gt) == Op::Le);
    CHECK_THROWS_AS(comparison_complement(Op::Add), DomainError);
}

TEST_CASE("variable text round trip") {
    Var plain{"b1", {}};
    CHECK(plain.text() == "b1");
    CHECK(Var::parse("b1") == plain);

    Var indexed{"A", {1, 2}};
    CHECK(indexed.text() == "A(1,2)");
    CHECK(Var::parse("A(1,2)") == indexed);
    CHECK(Var::parse("newX(7)") == Var{"newX", {7}});

    CHECK_THROWS_AS(Var::parse("A(1,"), ParseError);
    CHECK_THROWS_AS(Var::parse(""), ParseError);
    CHECK_THROWS_AS(Var::parse("A(x)"), ParseError);
}

TEST_CASE("hash consing shares structurally equal nodes") {
    ExprArena a;
    NodeId c1 = a.constant(3.0);
    NodeId c2 = a.constant(3.0);
    CHECK(c1 == c2);

    NodeId v1 = a.variable("x");
    NodeId v2 = a.variable(Var{"x", {}});
    CHECK(v1 == v2);

    NodeId s1 = a.binary(Op::Add, v1, c1);
    std::size_t before = a.size();
    NodeId s2 = a.binary(Op::Add, v2, c2);
    CHECK(s1 == s2);
    CHECK(a.size() == before);

    // different operand order is a different node
    NodeId s3 = a.binary(Op::Add, c1, v1);
    CHECK(s3 != s1);
}

TEST_CASE("kind discipline at construction") {
    ExprArena a;
    NodeId num = a.variable("x");
    NodeId boolean = a.binary(Op::Lt, num, a.constant(0.0));
    CHECK_FALSE(a.boolean_kind(num));
    CHECK(a.boolean_kind(boolean));

    CHECK_THROWS_AS(a.binary(Op::And, num, num), DomainError);
    CHECK_THROWS_AS(a.binary(Op::Add, boolean, num), DomainError);
    CHECK_THROWS_AS(a.binary(Op::Lt, boolean, num), DomainError);
    CHECK_THROWS_AS(a.unary(Op::Not, num), DomainError);
    CHECK_THROWS_AS(a.unary(Op::Neg, boolean), DomainError);
}

TEST_CASE("nesting levels of the three reference expressions") {
    ExprArena a;
    CHECK(a.nesting_level(a.variable("b1")) == 0);
    CHECK(a.nesting_level(a.constant(5.0)) == 0);
    CHECK(a.nesting_level(make_w1(a)) == 3);
    CHECK(a.nesting_level(make_w2(a)) == 3);
    CHECK(a.nesting_level(make_w3(a)) == 4);
}

TEST_CASE("evaluation under an interpretation") {
    ExprArena a;
    Interpretation in = b_i_equals_i();
    CHECK(std::get<double>(a.evaluate(make_w1(a), in)) == doctest::Approx(1.25));
    CHECK(std::get<bool>(a.evaluate(make_w2(a), in)) == true);
    CHECK(std::get<bool>(a.evaluate(make_w3(a), in)) == false);

    NodeId div = a.binary(Op::Div, a.variable("b1"), a.variable("b7"));
    CHECK_THROWS_AS(a.evaluate(div, in), UnboundVariable);
    in.bind("b7", 0.0);
    CHECK_THROWS_AS(a.evaluate(div, in), DivisionByZero);

    NodeId absneg = a.unary(Op::Abs, a.unary(Op::Neg, a.variable("b2")));
    CHECK(std::get<double>(a.evaluate(absneg, in)) == 2.0);
}

TEST_CASE("free variables") {
    ExprArena a;
    auto vars = a.free_vars(make_w1(a));
    REQUIRE(vars.size() == 4);
    CHECK(vars[0] == Var{"b1", {}});
    CHECK(vars[3] == Var{"b4", {}});
}

TEST_CASE("maximal chains") {
    ExprArena a;
    NodeId b1 = a.variable("b1"), b2 = a.variable("b2");
    NodeId b3 = a.variable("b3"), b4 = a.variable("b4"), b7 = a.variable("b7");

    NodeId sum = a.binary(Op::Add, a.binary(Op::Add, a.binary(Op::Add, b1, b2), b3), b4);
    auto [op1, ops1] = a.flatten_chain(sum);
    CHECK(op1 == Op::Add);
    REQUIRE(ops1.size() == 4);
    CHECK(ops1 == std::vector<NodeId>{b1, b2, b3, b4});

    NodeId prod = a.binary(Op::Mul,
                           a.binary(Op::Mul, a.binary(Op::Add, b1, b2),
                                    a.binary(Op::Sub, b4, b7)),
                           a.binary(Op::Add, b2, b4));
    auto [op2, ops2] = a.flatten_chain(prod);
    CHECK(op2 == Op::Mul);
    CHECK(ops2.size() == 3);

    NodeId quot = a.binary(Op::Div, b1, b2);
    auto [op3, ops3] = a.flatten_chain(quot);
    CHECK(op3 == Op::Div);
    CHECK(ops3.size() == 2);

    CHECK_THROWS_AS(a.flatten_chain(b1), DomainError);
}

TEST_CASE("doubling rebalance") {
    ExprArena a;
    // left-nested sum of eight leaves: depth 7 -> depth 3
    NodeId sum = a.variable("x1");
    for (int i = 2; i <= 8; ++i)
        sum = a.binary(Op::Add, sum, a.variable("x" + std::to_string(i)));
    CHECK(a.nesting_level(sum) == 7);
    NodeId balanced = a.rebalance_doubling(sum);
    CHECK(a.nesting_level(balanced) == 3);

    // single binary node is already balanced
    NodeId pair = a.binary(Op::Add, a.variable("x1"), a.variable("x2"));
    CHECK(a.rebalance_doubling(pair) == pair);

    // never increases the level; here equal-level products pair to +ceil(log2 5)
    NodeId mixed = a.binary(Op::Mul, a.variable("y1"), a.variable("y2"));
    NodeId acc = mixed;
    for (int i = 2; i <= 5; ++i)
        acc = a.binary(Op::Add, acc,
                       a.binary(Op::Mul, a.variable("y" + std::to_string(2 * i - 1)),
                                a.variable("y" + std::to_string(2 * i))));
    CHECK(a.nesting_level(acc) == 5);
    NodeId acc_bal = a.rebalance_doubling(acc);
    CHECK(a.nesting_level(acc_bal) == 1 + 3); // products at 1, three pairing rounds

    // re-application may reassociate equal-level operands but never changes
    // the measured shape
    NodeId again = a.rebalance_doubling(acc_bal);
    CHECK(a.nesting_level(again) == a.nesting_level(acc_bal));
    std::vector<NodeId> rb{acc_bal}, rb2{again};
    CHECK(count_ops_per_level(a, rb, Sharing::Tree) ==
          count_ops_per_level(a, rb2, Sharing::Tree));

    // rebalance result evaluates to the same value
    Interpretation in;
    for (int i = 1; i <= 10; ++i) in.bind("y" + std::to_string(i), 0.5 * i + 1);
    CHECK(std::get<double>(a.evaluate(acc, in)) ==
          doctest::Approx(std::get<double>(a.evaluate(acc_bal, in))));
}

TEST_CASE("json wire format") {
    ExprArena a;
    NodeId sum = a.binary(Op::Add, a.variable("b1"), a.variable("b2"));
    CHECK(a.serialize_expr(sum) == R"({"fO":"b1","op":"+","sO":"b2"})");

    NodeId neg = a.unary(Op::Neg, a.variable("b1"));
    CHECK(a.serialize_expr(neg) == R"({"od":"b1","op":"neg"})");

    CHECK(a.parse_expr(R"({"op":"+","fO":"b1","sO":"b2"})") == sum);
    CHECK(a.parse_expr(R"({"op":"add","fO":"b1","sO":"b2"})") == sum);

    NodeId w1 = make_w1(a);
    CHECK(a.parse_expr(a.serialize_expr(w1)) == w1);
    NodeId w3 = make_w3(a);
    CHECK(a.parse_expr(a.serialize_expr(w3)) == w3);

    // constants serialize as numbers, variables as strings
    NodeId scaled = a.binary(Op::Mul, a.constant(2.0), a.variable("A", {1, 2}));
    CHECK(a.serialize_expr(scaled) == R"x({"fO":2,"op":"*","sO":"A(1,2)"})x");
    CHECK(a.parse_expr(R"x({"fO":2,"op":"*","sO":"A(1,2)"})x") == scaled);

    CHECK_THROWS_AS(a.parse_expr(R"({"op":"?!","fO":1,"sO":2})"), ParseError);
    CHECK_THROWS_AS(a.parse_expr(R"({"fO":1,"sO":2})"), ParseError);
    CHECK_THROWS_AS(a.parse_expr(R"({"op":"+","fO":1})"), ParseError);
    CHECK_THROWS_AS(a.parse_expr("[1,2]"), ParseError);
}

TEST_CASE("canonical number tokens") {
    CHECK(ExprArena::canonical_number(5.0) == "5");
    CHECK(ExprArena::canonical_number(-3.0) == "-3");
    CHECK(ExprArena::canonical_number(1.25) == "1.25");
    ExprArena a;
    CHECK(a.constant(5.0) == a.constant("5"));
}

TEST_CASE("per-level operation counts, dag vs tree") {
    ExprArena a;
    NodeId x = a.variable("x"), y = a.variable("y");
    NodeId sum = a.binary(Op::Add, x, y);
    std::vector<NodeId> single{sum};
    CHECK(count_ops_per_level(a, single, Sharing::Dag) ==
          std::vector<std::uint64_t>{1});

    // diamond: second root reuses the first's sum twice
    NodeId sq = a.binary(Op::Mul, sum, sum);
    std::vector<NodeId> roots{sum, sq};
    CHECK(count_ops_per_level(a, roots, Sharing::Dag) ==
          std::vector<std::uint64_t>{1, 1});
    CHECK(count_ops_per_level(a, roots, Sharing::Tree) ==
          std::vector<std::uint64_t>{3, 1});
}

} // TEST_SUITE
