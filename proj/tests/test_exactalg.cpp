#include "doctest.h"
#include "exactalg/exactalg.hpp"

#include <random>

using namespace exactalg;

namespace {

Scalar frac(long a, long b)
{
    Scalar s(a, b);
    s.canonicalize();
    return s;
}

SparseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density, int range)
{
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> v(-range, range);
    std::vector<Entry> e;
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r)
            if (u(rng) < density) e.push_back({r, c, frac(v(rng), 1 + (v(rng) + range) % 3)});
    return SparseMatrix::from_entries(rows, cols, e);
}

// rank deficient product of two thin random matrices
SparseMatrix low_rank(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::size_t r)
{
    return random_matrix(rng, rows, r, 0.6, 3).multiply(random_matrix(rng, r, cols, 0.6, 3));
}

}  // namespace

TEST_CASE("rank of trivial matrices")
{
    CHECK(rank(SparseMatrix::identity(2)) == 2);
    CHECK(rank(SparseMatrix(3, 5)) == 0);
    CHECK(kernel(SparseMatrix::identity(4)).dim() == 0);
    CHECK(kernel(SparseMatrix(3, 6)).dim() == 6);
}

TEST_CASE("solve on trivial matrices")
{
    Vector b{Scalar(3), Scalar(-1, 2), Scalar(0)};
    auto x = solve(SparseMatrix::identity(3), b);
    REQUIRE(x);
    CHECK(*x == b);
    CHECK_FALSE(solve(SparseMatrix(2, 2), Vector{Scalar(1), Scalar(0)}));
}

TEST_CASE("from_entries rejects duplicates and drops zeros")
{
    CHECK_THROWS(SparseMatrix::from_entries(2, 2, {{0, 0, 1}, {0, 0, 2}}));
    CHECK_THROWS(SparseMatrix::from_entries(2, 2, {{2, 0, 1}}));
    auto m = SparseMatrix::from_entries(2, 2, {{0, 0, 0}, {1, 1, 5}});
    CHECK(m.nnz() == 1);
}

TEST_CASE("rank plus nullity equals columns")
{
    std::mt19937_64 rng(7);
    for (int t = 0; t < 40; ++t) {
        std::size_t rows = 1 + rng() % 25, cols = 1 + rng() % 25;
        SparseMatrix m = (t % 2) ? random_matrix(rng, rows, cols, 0.3, 4)
                                 : low_rank(rng, rows, cols, 1 + rng() % 6);
        std::size_t r = rank(m);
        Subspace k = kernel(m);
        CHECK(r + k.dim() == cols);
        for (const auto& v : k.basis) CHECK(m.apply(v).empty());
        CHECK(rank_of(k.basis, cols) == k.dim());
        CHECK(image(m).dim() == r);
        CHECK(rank(m.transpose()) == r);
    }
}

TEST_CASE("solve recovers images of random vectors")
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 40; ++t) {
        std::size_t rows = 2 + rng() % 20, cols = 2 + rng() % 20;
        SparseMatrix m = low_rank(rng, rows, cols, 1 + rng() % 5);
        Vector x0(cols);
        for (auto& c : x0)
            if (rng() % 3 == 0) c = frac(static_cast<long>(rng() % 11) - 5, 1 + static_cast<long>(rng() % 4));
        Vector b = m.apply(x0);
        auto x = solve(m, b);
        REQUIRE(x);
        CHECK(m.apply(*x) == b);
        ImageSolver s(m);
        auto xs = s.solve(to_sparse(b));
        REQUIRE(xs);
        CHECK(to_dense(*xs, cols) == *x);
    }
}

TEST_CASE("solve reports vectors outside the image")
{
    auto m = SparseMatrix::from_entries(3, 2, {{0, 0, 1}, {1, 0, 1}, {2, 1, 1}});
    CHECK_FALSE(solve(m, Vector{Scalar(1), Scalar(0), Scalar(0)}));
    CHECK_FALSE(ImageSolver(m).solve(SparseVector{{0, Scalar(1)}}));
}

TEST_CASE("solve uses the leftmost independent columns")
{
    // columns 0 and 1 equal, column 2 independent
    auto m = SparseMatrix::from_entries(2, 3, {{0, 0, 1}, {0, 1, 1}, {1, 2, 2}});
    auto x = solve(m, Vector{Scalar(3), Scalar(4)});
    REQUIRE(x);
    CHECK(*x == Vector{Scalar(3), Scalar(0), Scalar(2)});
}

TEST_CASE("complement")
{
    Subspace full = Subspace::full(4);
    CHECK(complement(Subspace::zero(4), full).dim() == 4);
    CHECK(complement(full, full).dim() == 0);
    Subspace s{4, {{{0, Scalar(1)}, {1, Scalar(1)}}}};
    Subspace c = complement(s, full);
    CHECK(c.dim() == 3);
    auto all = s.basis;
    all.insert(all.end(), c.basis.begin(), c.basis.end());
    CHECK(rank_of(all, 4) == 4);
    Subspace inside{4, {{{0, Scalar(1)}}, {{2, Scalar(1)}}}};
    CHECK_THROWS(complement(s, inside));
}

TEST_CASE("complement spans with the sub basis on random data")
{
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        std::size_t n = 4 + rng() % 12;
        SparseMatrix a = low_rank(rng, n, 2 + rng() % 8, 1 + rng() % 5);
        Subspace inside = image(a);
        std::vector<SparseVector> sv;
        for (std::size_t i = 0; i + 1 < inside.dim(); i += 2) sv.push_back(add(inside.basis[i], inside.basis[i + 1], 2));
        Subspace sub = span(sv, n);
        Subspace c = complement(sub, inside);
        CHECK(c.dim() + sub.dim() == inside.dim());
        auto all = sub.basis;
        all.insert(all.end(), c.basis.begin(), c.basis.end());
        CHECK(rank_of(all, n) == inside.dim());
    }
}

TEST_CASE("deterministic outputs")
{
    std::mt19937_64 r1(5), r2(5);
    SparseMatrix a = low_rank(r1, 12, 15, 4), b = low_rank(r2, 12, 15, 4);
    auto ka = kernel(a), kb = kernel(b);
    CHECK(ka.basis == kb.basis);
    Vector rhs = a.apply(Vector(15, Scalar(1)));
    CHECK(*solve(a, rhs) == *solve(b, rhs));
}
