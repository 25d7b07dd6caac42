#include "bott/bott.hpp"
#include "cech/cech.hpp"
#include "doctest.h"

using namespace bott;

namespace {

long poly_binom(int n, int k)
{
    // C(n+k, n) as a polynomial in k
    long num = 1, den = 1;
    for (int i = 1; i <= n; ++i) {
        num *= (k + i);
        den *= i;
    }
    return num / den;
}

}  // namespace

TEST_CASE("line bundle examples")
{
    CHECK(h_line(1, -3, 1) == 2);
    CHECK(h_line(3, 0, 0) == 1);
    CHECK(h_line(3, -2, 2) == 0);
    CHECK(h_line(0, -5, 0) == 1);
    CHECK(h_line(0, 3, 0) == 1);
}

TEST_CASE("Serre duality and Euler characteristic")
{
    for (int n = 0; n <= 4; ++n)
        for (int k = -8; k <= 8; ++k) {
            long chi = 0;
            for (int q = 0; q <= n; ++q) {
                if (n > 0) CHECK(h_line(n, k, q) == h_line(n, -k - n - 1, n - q));
                chi += (q % 2 ? -1 : 1) * h_line(n, k, q);
            }
            if (n > 0) CHECK(chi == poly_binom(n, k));
        }
}

TEST_CASE("tangent bundle examples")
{
    CHECK(h_tangent(3, -4, 2) == 1);
    CHECK(h_tangent(3, 2, 0) == 70);
    for (int k = -6; k <= 6; ++k) CHECK(h_tangent(1, k, 1) == h_line(1, k + 2, 1));
    for (int k = -6; k <= 6; ++k) CHECK(h_tangent(1, k, 0) == h_line(1, k + 2, 0));
}

TEST_CASE("tangent cohomology vanishes in the middle except at twist -n-1")
{
    for (int n = 2; n <= 4; ++n)
        for (int k = -7; k <= 5; ++k)
            for (int q = 1; q < n; ++q) CHECK(h_tangent(n, k, q) == ((q == n - 1 && k == -n - 1) ? 1 : 0));
}

TEST_CASE("Kunneth")
{
    CohomologyTable a{BundleSpec::line({1}, {2}), {3, 0}};
    CohomologyTable z{BundleSpec::line({2}, {0}), {0, 0, 0}};
    CHECK(kunneth(a, z, 1) == 0);
    CohomologyTable b{BundleSpec::line({2}, {-4}), {0, 0, 3}};
    for (int q = 0; q <= 3; ++q) CHECK(kunneth(a, b, q) == kunneth(b, a, q));
    CHECK(h(BundleSpec::full_tangent({1, 3}, {4, -4}), 2) == 5);
    for (int k = -6; k <= 6; ++k) CHECK(h(BundleSpec::tangent_of({1, 3}, {k, -k}, 0), 2) == 0);
}

TEST_CASE("product tangent")
{
    CHECK(h_product_tangent(1, 3, {-2, 2}, 1) == 70);
    CHECK(h_product_tangent(1, 0, {-3, 3}, 1) == 0);
    for (int m = 0; m <= 3; ++m)
        for (int l = 0; l <= 3; ++l) CHECK(h_product_tangent(m, l, {0, 0}, 0) == m * m + 2 * m + l * l + 2 * l);
}

TEST_CASE("closed forms agree with the Cech oracle on single factors")
{
    for (int n = 0; n <= 4; ++n)
        for (int k = -6; k <= 6; ++k) {
            auto l = BundleSpec::line({n}, {k});
            for (int q = 0; q <= n; ++q) CHECK(h(l, q) == cech::cech_dim(l, q));
            if (n == 0) continue;
            auto t = BundleSpec::tangent_of({n}, {k}, 0);
            for (int q = 0; q <= n; ++q) CHECK(h(t, q) == cech::cech_dim(t, q));
        }
}

TEST_CASE("closed forms agree with the Cech oracle on products")
{
    for (int m = 0; m <= 3; ++m)
        for (int l = 0; l <= 3; ++l) {
            if (m + l > 5) continue;
            for (int a : {-5, -2, 0, 3})
                for (int b : {-4, -1, 2}) {
                    std::vector<BundleSpec> specs{BundleSpec::line({m, l}, {a, b}),
                                                  BundleSpec::full_tangent({m, l}, {a, b})};
                    if (m >= 1) specs.push_back(BundleSpec::tangent_of({m, l}, {a, b}, 0));
                    for (const auto& s : specs)
                        for (int q = 0; q <= m + l; ++q) CHECK(h(s, q) == cech::cech_dim(s, q));
                }
        }
}

TEST_CASE("Cech dimensions are stable past the box bound")
{
    for (const auto& s : {BundleSpec::line({4}, {-6}), BundleSpec::tangent_of({3}, {-4}, 0),
                          BundleSpec::tangent_of({2}, {5}, 0), BundleSpec::full_tangent({1, 3}, {4, -4}),
                          BundleSpec::line({2, 2}, {-3, 2})}) {
        int box = cech::min_box(s);
        for (int q = 0; q <= s.total_dim(); ++q) CHECK(cech::cech_dim(s, q, box) == cech::cech_dim(s, q, box + 1));
    }
}
