#include "doctest.h"

#include "qdet/formulas.hpp"

using namespace qdet::formulas;

TEST_SUITE("formulas") {

TEST_CASE("scalar product characteristics") {
    CHECK(scalar_product_height(1) == 1);
    CHECK(scalar_product_height(2) == 2);
    CHECK(scalar_product_height(7) == 4);
    CHECK(scalar_product_height(8) == 4);
    CHECK(scalar_product_height(1000) == 11);
    CHECK(scalar_product_width(16) == 16);
    CHECK(scalar_product_width(1000) == 1000);
    CHECK_THROWS_AS(scalar_product_height(0), qdet::DomainError);
}

TEST_CASE("elimination characteristics") {
    CHECK(gauss_jordan_height(2) == 6);
    CHECK(gauss_jordan_height(3) == 9);
    CHECK(gauss_jordan_guard_height(2) == 5);
    CHECK(gauss_jordan_guard_height(3) == 8);
    CHECK(gauss_jordan_width_lower_bound(2) == 9);
    CHECK(gauss_jordan_width_lower_bound(3) == 36);

    // (3/2)(n+1)! at n=20 needs big integers: 3*21!/2
    BigInt fact = 1;
    for (int i = 2; i <= 21; ++i) fact *= i;
    CHECK(gauss_jordan_width_lower_bound(20) == 3 * fact / 2);
}

TEST_CASE("grid height") {
    CHECK(grid_jacobi_height(16, 3) == 22);
    CHECK(grid_jacobi_height(8, 4) == 26);
    CHECK(grid_jacobi_height(1, 2) == 13); // ceil(log 1) = 0
    CHECK_THROWS_AS(grid_jacobi_height(0, 1), qdet::DomainError);
}

TEST_CASE("grid width piecewise rules") {
    // 5KJ below 8
    for (std::int64_t kj = 1; kj <= 7; ++kj)
        CHECK(grid_jacobi_width(kj) == 5 * kj);
    // one extra chain term of floor(KJ/8) up to 255
    for (std::int64_t kj = 8; kj <= 255; ++kj)
        CHECK(grid_jacobi_width(kj) == 5 * kj + kj / 8);
    CHECK(grid_jacobi_width(7) == 35);
    CHECK(grid_jacobi_width(12) == 61);
    CHECK(grid_jacobi_width(256) == 1313);
}

TEST_CASE("grid width at powers of two") {
    const std::int64_t expected[] = {5,    10,   20,   41,   82,   164,  328,
                                     656,  1313, 2626, 5252, 10504, 21008};
    for (int s = 0; s <= 12; ++s) {
        CHECK(grid_jacobi_width_pow2(s) == expected[s]);
        CHECK(grid_jacobi_width(std::int64_t{1} << s) == expected[s]);
    }
}

TEST_CASE("digit decomposition") {
    auto d7 = WidthDecomposition::decompose(7);
    CHECK(d7.a == 7);
    CHECK(d7.b.empty());
    CHECK(d7.stopping_stage == 2);
    CHECK(d7.width() == 35);

    auto d12 = WidthDecomposition::decompose(12);
    CHECK(d12.a == 4);
    CHECK(d12.b == std::vector<int>{1});
    CHECK(d12.c == std::vector<std::int64_t>{1});
    CHECK(d12.stopping_stage == 3);
    CHECK(d12.width() == 61);

    auto d256 = WidthDecomposition::decompose(256);
    CHECK(d256.a == 0);
    CHECK(d256.b == std::vector<int>{0, 1});
    CHECK(d256.c == std::vector<std::int64_t>{32, 1});
    CHECK(d256.stopping_stage == 4);
    CHECK(d256.width() == 1313);

    // digits reassemble the number; width agrees everywhere
    for (std::int64_t kj : {1, 9, 255, 256, 1000, 8191, 8192, 20000}) {
        auto d = WidthDecomposition::decompose(kj);
        std::int64_t assembled = d.a;
        std::int64_t base = 8;
        for (int digit : d.b) {
            assembled += base * digit;
            base *= 32;
        }
        CHECK(assembled == kj);
        CHECK(d.width() == grid_jacobi_width(kj));
    }
}

TEST_CASE("width increments follow the digit rules") {
    // a <= 6: the new point lands in the same chain bucket
    CHECK(grid_jacobi_width_increment(12) == 5);
    CHECK(grid_jacobi_width_increment(256) == 5);
    // a = 7 with a non-saturated low digit
    CHECK(grid_jacobi_width_increment(15) == 6);
    // all digits saturated: a jump of stopping_stage + 4
    CHECK(grid_jacobi_width_increment(7) == 6);    // p = 2
    CHECK(grid_jacobi_width_increment(255) == 7);  // p = 3
    CHECK(grid_jacobi_width_increment(8191) == 8); // p = 4

    for (std::int64_t kj = 1; kj < 5000; ++kj)
        CHECK(grid_jacobi_width(kj + 1) ==
              grid_jacobi_width(kj) + grid_jacobi_width_increment(kj));
}

TEST_CASE("five-step doubling of the width") {
    // for KJ = 2^(5q-2), the next four doublings double the width exactly
    for (int q = 1; q <= 4; ++q) {
        int s0 = 5 * q - 2;
        std::int64_t base = grid_jacobi_width_pow2(s0);
        CHECK(base == 5 * (std::int64_t{1} << s0) +
                          ((std::int64_t{1} << (5 * q)) - 1) / 31);
        for (int t = 0; t <= 4; ++t)
            CHECK(grid_jacobi_width_pow2(s0 + t) == (std::int64_t{1} << t) * base);
    }
}

TEST_CASE("width bounds and growth") {
    for (int s = 8; s <= 20; ++s) {
        std::int64_t p = grid_jacobi_width_pow2(s);
        CHECK(41 * (std::int64_t{1} << (s - 3)) < p);
        CHECK(p < 6 * (std::int64_t{1} << s));
    }
    // strict monotonicity
    for (std::int64_t kj = 1; kj < 20000; ++kj)
        CHECK(grid_jacobi_width(kj) < grid_jacobi_width(kj + 1));
}

} // TEST_SUITE
