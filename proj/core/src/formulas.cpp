#include "qdet/formulas.hpp"

namespace qdet::formulas {

namespace {

int ceil_log2(std::int64_t n) {
    int r = 0;
    std::int64_t v = 1;
    while (v < n) {
        v <<= 1;
        ++r;
    }
    return r;
}

void require_positive(std::int64_t v, const char* what) {
    if (v < 1) throw DomainError(std::string(what) + " must be >= 1");
}

} // namespace

int scalar_product_height(std::int64_t n) {
    require_positive(n, "n");
    return ceil_log2(n) + 1;
}

std::int64_t scalar_product_width(std::int64_t n) {
    require_positive(n, "n");
    return n;
}

int gauss_jordan_height(std::int64_t n) {
    require_positive(n, "n");
    return static_cast<int>(3 * n);
}

int gauss_jordan_guard_height(std::int64_t n) {
    require_positive(n, "n");
    return static_cast<int>(3 * n - 1);
}

BigInt gauss_jordan_width_lower_bound(std::int64_t n) {
    require_positive(n, "n");
    BigInt f = 1;
    for (std::int64_t k = 2; k <= n + 1; ++k) f *= k;
    return 3 * f / 2;
}

int grid_jacobi_height(std::int64_t kj, std::int64_t n0) {
    require_positive(kj, "KJ");
    require_positive(n0, "n0");
    return static_cast<int>(5 * n0 + 3 + ceil_log2(kj));
}

std::int64_t grid_jacobi_width(std::int64_t kj) {
    require_positive(kj, "KJ");
    std::int64_t p = 5 * kj;
    for (std::int64_t div = 8; div <= kj; div *= 32) p += kj / div;
    return p;
}

std::int64_t grid_jacobi_width_pow2(int s) {
    if (s < 0) throw DomainError("s must be >= 0");
    int r = s % 5;
    if (r > 2) r -= 5; // map into -2..2, so s - r is a multiple of 5
    std::int64_t pow_s = std::int64_t{1} << s;
    std::int64_t head = std::int64_t{1} << (s - r);
    std::int64_t tail = ((head - 1) / 31) << (2 + r);
    return 5 * pow_s + tail;
}

int grid_jacobi_width_increment(std::int64_t kj) {
    auto d = WidthDecomposition::decompose(kj);
    if (d.a <= 6) return 5;
    std::size_t l = 0;
    while (l < d.b.size() && d.b[l] == 31) ++l;
    if (l < d.b.size()) return static_cast<int>(l) + 6;
    return d.stopping_stage + 4; // every digit maxed out
}

WidthDecomposition WidthDecomposition::decompose(std::int64_t kj) {
    require_positive(kj, "KJ");
    WidthDecomposition d;
    d.kj = kj;
    d.a = static_cast<int>(kj % 8);
    std::int64_t rest = kj / 8;
    while (rest > 0) {
        d.b.push_back(static_cast<int>(rest % 32));
        rest /= 32;
    }
    d.stopping_stage = d.b.empty() ? 2 : static_cast<int>(d.b.size()) + 2;
    d.c.assign(d.b.size(), 0);
    for (std::size_t i = d.b.size(); i-- > 0;) {
        d.c[i] = d.b[i] + (i + 1 < d.c.size() ? 32 * d.c[i + 1] : 0);
    }
    return d;
}

std::int64_t WidthDecomposition::width() const {
    std::int64_t sum = 0;
    for (std::int64_t ci : c) sum += ci;
    return 5 * kj + sum;
}

} // namespace qdet::formulas
