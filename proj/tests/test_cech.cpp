#include "bott/bott.hpp"
#include "cech/cech.hpp"
#include "doctest.h"

using namespace cech;
using bott::BundleSpec;

TEST_CASE("line bundles on P1")
{
    auto o3 = BundleSpec::line({1}, {-3});
    CHECK(cech_dim(o3, 1) == 2);
    CHECK(cech_dim(o3, 0) == 0);
    auto blocks = contributing_blocks(o3, 1, min_box(o3));
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].multidegree == std::vector<int>{-2, -1});
    CHECK(blocks[1].multidegree == std::vector<int>{-1, -2});
    CHECK(blocks[0].cochain_dims.at(0) == 0);
    CHECK(blocks[0].cochain_dims.at(1) == 1);
    CHECK(cech_dim(BundleSpec::line({1}, {2}), 0) == 3);
}

TEST_CASE("box below the bound is rejected")
{
    auto b = BundleSpec::line({2}, {-4});
    CHECK_THROWS_AS(cech_dim(b, 2, min_box(b) - 1), std::invalid_argument);
}

TEST_CASE("intermediate cohomology of line bundles vanishes")
{
    for (int n = 2; n <= 4; ++n)
        for (int k = -6; k <= 6; ++k)
            for (int q = 1; q < n; ++q) CHECK(cech_dim(BundleSpec::line({n}, {k}), q) == 0);
}

TEST_CASE("tangent of P3 twisted by -4")
{
    auto t = BundleSpec::tangent_of({3}, {-4}, 0);
    CHECK(cech_dim(t, 2) == 1);
    for (int q : {0, 1, 3}) CHECK(cech_dim(t, q) == 0);
    auto basis = cech_basis(t, 2);
    REQUIRE(basis.size() == 1);
    CHECK(is_cocycle(basis[0]));
    CHECK_FALSE(is_zero_class(basis[0]));
}

TEST_CASE("explicit bases")
{
    auto o0 = BundleSpec::line({1}, {0});
    auto c = cech_basis(o0, 0);
    REQUIRE(c.size() == 1);
    for (const auto& [cell, v] : c[0].cochain) {
        CHECK(cell.exps == std::vector<int>{0, 0});
        CHECK(v == 1);
    }
    CHECK(c[0].cochain.size() == 2);

    auto m2 = cech_basis(BundleSpec::line({1}, {-2}), 1);
    REQUIRE(m2.size() == 1);
    REQUIRE(m2[0].cochain.size() == 1);
    CHECK(m2[0].cochain.begin()->first.exps == std::vector<int>{-1, -1});
}

TEST_CASE("multiplication by coordinates")
{
    auto o0 = BundleSpec::line({1}, {0});
    auto z0 = multiply(o0, 0, cech_basis(o0, 0)[0]);
    CHECK(z0.bundle == BundleSpec::line({1}, {1}));
    for (const auto& [cell, v] : z0.cochain) CHECK(cell.exps == std::vector<int>{1, 0});
    CHECK(is_cocycle(z0));

    auto m2 = BundleSpec::line({1}, {-2});
    std::vector<CechClass> imgs;
    for (int x = 0; x < 2; ++x) {
        auto img = multiply(m2, x, cech_basis(m2, 1)[0]);
        CHECK(is_cocycle(img));
        CHECK(is_zero_class(img));
        imgs.push_back(img);
    }
    CHECK(induced_rank(imgs, BundleSpec::line({1}, {-1}), 1) == 0);

    for (int n = 1; n <= 3; ++n)
        for (int k = -6; k <= 3; ++k)
            for (int q : {0, n}) {
                auto b = BundleSpec::line({n}, {k});
                for (const auto& c : cech_basis(b, q))
                    for (int x = 0; x <= n; ++x) CHECK(is_cocycle(multiply(b, x, c)));
            }
}

TEST_CASE("Euler multiplication ranks")
{
    // injective on H^0, surjective on H^n
    CHECK(euler_multiplication_rank(3, 2, 0) == 10);
    CHECK(euler_multiplication_rank(3, -6, 3) == 10);
    CHECK(euler_multiplication_rank(2, -4, 2) == 3);
    CHECK(euler_multiplication_rank(3, -4, 3) == 0);
}

TEST_CASE("contraction with F")
{
    auto t = BundleSpec::tangent_of({3}, {-4}, 0);
    CechClass zero{t, 2, {}};
    CHECK(contract_with_F(zero).cochain.empty());

    auto c = cech_basis(t, 2)[0];
    auto img = contract_with_F(c);
    CHECK(img.bundle == BundleSpec::line({3}, {-4}));
    CHECK(img.degree == 3);
    CHECK(is_cocycle(img));
    CHECK_FALSE(is_zero_class(img));
    CHECK(cech_dim(BundleSpec::line({3}, {-4}), 3) == 1);
    CHECK(contraction_rank(t, 2) == 1);

    auto p = BundleSpec::full_tangent({1, 3}, {4, -4});
    CHECK(cech_dim(p, 2) == 5);
    CHECK(contraction_rank(p, 2) == 5);
    for (const auto& b : cech_basis(p, 2)) CHECK(is_cocycle(contract_with_F(b)));
}

TEST_CASE("contraction is a chain map on random tangent cocycles")
{
    for (auto b : {BundleSpec::tangent_of({2}, {-3}, 0), BundleSpec::full_tangent({1, 2}, {-2, 1}),
                   BundleSpec::full_tangent({1, 3}, {2, -2})})
        for (int q = 0; q < b.total_dim(); ++q)
            for (const auto& c : cech_basis(b, q)) CHECK(is_cocycle(contract_with_F(c)));
}

TEST_CASE("complexes square to zero")
{
    for (auto b : {BundleSpec::line({3}, {-5}), BundleSpec::tangent_of({2}, {-3}, 0),
                   BundleSpec::full_tangent({1, 2}, {2, -2}), BundleSpec::line({2, 2}, {-3, 1})})
        for (int q = 0; q <= b.total_dim(); ++q)
            for (const auto& c : cech_basis(b, q)) CHECK(is_cocycle(c));
    FiniteComplex a{{2, 2}, {SparseMatrix::from_entries(2, 2, {{0, 0, 1}, {1, 0, 1}})}};
    CHECK(tensor(a, a).squares_to_zero());
    CHECK(tensor(a, a).cohomology() == std::vector<long>{1, 2, 1});
}
