#include "bott/bott.hpp"
#include "cech/cech.hpp"
#include "crx/crx.hpp"
#include "crx/tensor.hpp"
#include "doctest.h"

#include <random>

using namespace crx;
using exactalg::SparseMatrix;
using exactalg::SparseVector;

namespace {

bool is_zero(const SparseMatrix& m) { return m.nnz() == 0; }

SparseMatrix diff(const SparseMatrix& a, const SparseMatrix& b)
{
    std::vector<SparseVector> cols;
    for (std::size_t c = 0; c < a.cols(); ++c) cols.push_back(exactalg::add(a.column(c), b.column(c), -1));
    return SparseMatrix::from_columns(a.rows(), cols);
}

SparseVector random_combination(const std::vector<SparseVector>& basis, std::mt19937& rng, int terms = 3)
{
    SparseVector v;
    if (basis.empty()) return v;
    std::uniform_int_distribution<std::size_t> pick(0, basis.size() - 1);
    std::uniform_int_distribution<int> coef(-3, 3);
    for (int t = 0; t < terms; ++t) v = exactalg::add(v, basis[pick(rng)], Scalar(coef(rng)));
    return v;
}

// Random element of ker flat in degree 1 of the given block.
Cochain random_c1(const GlobalBlock& b, std::mt19937& rng)
{
    auto ker = b.top() > 1 ? exactalg::kernel(b.flat(1)) : exactalg::Subspace::full(b.A(1).dim);
    return b.expand(true, 1, random_combination(ker.basis, rng));
}

}  // namespace

TEST_CASE("factor cohomology matches bott and the Čech contraction")
{
    for (int m = 0; m <= 4; ++m)
        for (int d = -6; d <= 6; ++d) {
            if (m == 4 && (d < -5 || d > 3)) continue;
            auto fd = stable_factor_data(m, d, start_level(m, d));
            REQUIRE(fd);
            for (int q = 0; q <= m; ++q) {
                CHECK_MESSAGE(fd->h_line[q] == bott::h_line(m, d, q), "m=" << m << " d=" << d << " q=" << q);
                if (m >= 1)
                    CHECK_MESSAGE(fd->h_tangent[q] == bott::h_tangent(m, d, q), "T m=" << m << " d=" << d << " q=" << q);
            }
            for (int q = 0; q + 1 <= m; ++q)
                CHECK_MESSAGE(fd->flat_rank[q] == cech::contraction_rank(bott::BundleSpec::full_tangent({m}, {d}), q),
                              "flat m=" << m << " d=" << d << " q=" << q);
        }
}

TEST_CASE("factor homotopy: dh + hd = 1 - pi")
{
    for (auto [m, d, level] : std::vector<std::array<int, 3>>{{1, -3, 2}, {2, -3, 1}, {2, 1, 1}, {3, -4, 1}})
        for (Kind kind : {Kind::Line, Kind::Tangent})
            for (const auto& w : factor_data(m, d, level).support) {
                const auto& b = factor_block(m, level, kind, w);
                const auto& h = factor_homotopy(m, level, kind, w);
                for (int p = 0; p <= m; ++p)
                    for (std::size_t i = 0; i < b.space(p).dim(); ++i) {
                        SparseVector e{{i, Scalar(1)}};
                        SparseVector lhs = h.pi(p, e);
                        if (p > 0) lhs = exactalg::add(lhs, b.d[p - 1].apply(h.h(p, e)));
                        if (p < m) lhs = exactalg::add(lhs, h.h(p + 1, b.d[p].apply(e)));
                        CHECK(lhs == e);
                    }
            }
}

TEST_CASE("block identities: d^2 = 0, flat intertwines d, flat sharp = 1")
{
    for (int n = 2; n <= 5; ++n)
        for (int k = -4; k <= 4; ++k) {
            auto wc = build_weight_complex(n, k);
            REQUIRE(wc.diagnostics.stable);
            for (const auto& cb : wc.candidate_blocks()) {
                auto b = wc.block(cb.w);
                for (int q = 0; q + 1 < b->top(); ++q) {
                    CHECK(is_zero(b->dA(q + 1).multiply(b->dA(q))));
                    CHECK(is_zero(b->dB(q + 1).multiply(b->dB(q))));
                    CHECK(is_zero(diff(b->flat(q + 1).multiply(b->dA(q)), b->dB(q + 1).multiply(b->flat(q)))));
                }
                CHECK(b->flat(0).multiply(b->sharp()) == SparseMatrix::identity(b->B(1).dim));
                CHECK(b->sharp().multiply(b->flat(0)) == SparseMatrix::identity(b->A(0).dim));
                if (b->top() > 1) {
                    CHECK(is_zero(b->dA(1).multiply(b->contact())));
                    CHECK(is_zero(b->flat(1).multiply(b->contact())));
                }
            }
        }
}

TEST_CASE("termwise operators agree with block matrices")
{
    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, -3}, {3, -2}, {4, -3}, {5, -2}, {4, 3}}) {
        auto wc = build_weight_complex(n, k);
        for (const auto& cb : wc.candidate_blocks()) {
            auto b = wc.block(cb.w);
            for (int q = 0; q < b->top(); ++q)
                for (std::size_t i = 0; i < b->A(q).dim; ++i) {
                    Cochain x = b->expand(true, q, {{i, Scalar(1)}});
                    CHECK(b->coords(true, q + 1, dbar(x)) == std::optional(b->dA(q).column(i)));
                    CHECK(b->coords(false, q + 1, flat(x)) == std::optional(b->flat(q).column(i)));
                }
            for (std::size_t i = 0; i < b->B(1).dim; ++i) {
                Cochain x = b->expand(false, 1, {{i, Scalar(1)}});
                CHECK(b->coords(true, 0, sharp(x)) == std::optional(b->sharp().column(i)));
            }
            for (std::size_t i = 0; i < b->B(0).dim; ++i) {
                Cochain f = b->expand(false, 0, {{i, Scalar(1)}});
                CHECK(b->coords(true, 1, contact_action(f)) == std::optional(b->contact().column(i)));
                CHECK(embedding_action(f) == contact_action(f));
            }
        }
    }
}

TEST_CASE("LES numbers: factorized, direct and closed forms agree")
{
    for (int n = 2; n <= 5; ++n)
        for (int k = -5; k <= 5; ++k) {
            auto wc = build_weight_complex(n, k);
            auto d = direct_numbers(wc);
            CHECK_MESSAGE(d.w == wc.numbers.w, "n=" << n << " k=" << k);
            CHECK_MESSAGE(d.h1_ext == wc.numbers.h1_ext, "n=" << n << " k=" << k);
            CHECK_MESSAGE(d.h2 == wc.numbers.h2, "n=" << n << " k=" << k);
            for (int q = 0; q <= n - 1; ++q) {
                CHECK(d.hA[q] == wc.numbers.hA[q]);
                CHECK(d.hB[q] == wc.numbers.hB[q]);
                CHECK(wc.numbers.hA[q] == bott::h_product_tangent(1, n - 2, {k, -k}, q));
                CHECK(wc.numbers.hB[q] == bott::h(bott::BundleSpec::line({1, n - 2}, {k, -k}), q));
            }
        }
}

TEST_CASE("built complex examples")
{
    CHECK(build_weight_complex(3, 0).numbers.h2 == 0);
    auto wc = build_weight_complex(5, 4);
    CHECK(wc.numbers.hA[2] == 5);
    CHECK(wc.numbers.h2 == 0);
    // n = 2: the second factor is a point and carries no tangent directions
    auto w2 = build_weight_complex(2, -4);
    CHECK(w2.l == 0);
    for (const auto& cb : w2.candidate_blocks())
        for (const auto& p : w2.block(cb.w)->A(1).pieces)
            if (p.ky == Kind::Tangent) CHECK(p.dim() == 0);
}

TEST_CASE("dbar, flat, sharp examples")
{
    CHECK(dbar(Cochain{}).empty());
    Key one{FKey{1}, FKey{3}};  // constant function on P^1 x P^3
    CHECK(dbar(Cochain{{one, Scalar(1)}}).empty());
    CHECK(contact_action(Cochain{{one, Scalar(1)}}).empty());
    std::mt19937 rng(7);
    auto wc = build_weight_complex(5, -2);
    for (const auto& cb : wc.candidate_blocks()) {
        auto b = wc.block(cb.w);
        Cochain x = random_c1(*b, rng);
        CHECK(flat(x).empty());
        CHECK(flat(dbar(x)) == dbar(flat(x)));
        CHECK(dbar(dbar(x)).empty());
    }
}

TEST_CASE("cutoff stabilization is checked")
{
    auto good = build_weight_complex(5, -3);
    CHECK(good.diagnostics.stable);
    auto again = build_weight_complex(5, -3, std::max(good.levels.z, good.levels.y));
    CHECK(again.diagnostics.stable);
    CHECK(again.numbers.w == good.numbers.w);
    auto low = build_weight_complex(5, -4, 0);
    CHECK_FALSE(low.diagnostics.stable);
    CHECK_FALSE(low.diagnostics.messages.empty());
    CHECK_THROWS(build_weight_complex(1, 0));
}

TEST_CASE("bracket: antisymmetry, flat-kernel, Leibniz, descent")
{
    std::mt19937 rng(11);
    for (auto [n, k1, k2] : std::vector<std::array<int, 3>>{{3, -2, -3}, {3, 1, 2}, {4, -2, -2}, {5, -2, -3}, {5, 0, 1}, {2, -3, -4}}) {
        auto w1 = build_weight_complex(n, k1), w2 = build_weight_complex(n, k2);
        auto c1 = w1.candidate_blocks(), c2 = w2.candidate_blocks();
        for (int trial = 0; trial < 6; ++trial) {
            auto o1 = w1.orbit(c1[trial % c1.size()].w);
            auto b1 = w1.block(o1[trial % o1.size()]);
            auto b2 = w2.block(w2.orbit(c2[(trial / 2) % c2.size()].w).back());
            Cochain x = random_c1(*b1, rng), y = random_c1(*b2, rng);
            Cochain xy = bracket(x, 1, y, 1), yx = bracket(y, 1, x, 1);
            CHECK(add(xy, yx, Scalar(-1)).empty());
            CHECK(flat(xy).empty());
            Cochain lhs = dbar(xy);
            Cochain rhs = add(bracket(dbar(x), 2, y, 1), bracket(x, 1, dbar(y), 2), Scalar(-1));
            CHECK(add(lhs, rhs, Scalar(-1)).empty());
            if (!xy.empty()) {
                auto parts = split_by_weight(xy);
                for (const auto& [w, part] : parts) {
                    Levels L = levels_of(part);
                    auto blk = global_block(n - 2, w, L);
                    CHECK(blk->coords(true, 2, part).has_value());
                }
            }
        }
    }
    CHECK(bracket(Cochain{}, 1, Cochain{}, 1).empty());
}

TEST_CASE("bracket rejects inputs outside ker flat")
{
    auto wc = build_weight_complex(3, -2);
    auto b = wc.block(wc.candidate_blocks().front().w);
    Cochain x;
    for (std::size_t i = 0; i < b->A(1).dim && x.empty(); ++i) {
        Cochain e = b->expand(true, 1, {{i, Scalar(1)}});
        if (!flat(e).empty()) x = e;
    }
    REQUIRE_FALSE(x.empty());
    CHECK_THROWS_AS(bracket(x, 1, x, 1), std::invalid_argument);
}

TEST_CASE("conjugation pairs weights k and -k")
{
    auto wc = build_weight_complex(4, -2);
    for (const auto& cb : wc.candidate_blocks()) {
        auto b = wc.block(cb.w);
        for (std::size_t i = 0; i < b->B(0).dim; ++i) {
            Cochain f = b->expand(false, 0, {{i, Scalar(1)}});
            Cochain g = conjugate(f);
            for (const auto& [k, c] : g) CHECK(weight_of_key(k) == 2);
            CHECK(conjugate(g) == f);
        }
    }
}

TEST_CASE("deformation tensor JSON")
{
    std::mt19937 rng(3);
    auto wc = build_weight_complex(5, -3);
    auto b = wc.block(wc.candidate_blocks().front().w);
    Cochain x = random_c1(*b, rng);
    x[x.begin()->first] = Scalar(7, 3);
    auto t = DeformationTensor::from_cochain(5, x);
    auto j = to_json(t);
    auto t2 = tensor_from_json(j);
    CHECK(t2.n == 5);
    CHECK(t2.coeffs == t.coeffs);
    CHECK(to_json(t2) == j);
    CHECK(parse_tensor(j.dump()).coeffs == t.coeffs);

    CHECK_THROWS_AS(parse_tensor("{\"n\": 5,"), FormatError);
    CHECK_THROWS_AS(parse_tensor(R"({"schema_version":1,"n":5,"entries":[{"weight":-3}]})"), FormatError);
    CHECK_THROWS_AS(parse_tensor(R"({"schema_version":2,"n":5,"entries":[]})"), FormatError);
    auto bad = j;
    bad["entries"][0]["den"] = 0;
    CHECK_THROWS_AS(tensor_from_json(bad), FormatError);
    bad = j;
    bad["entries"][0]["weight"] = 4;
    CHECK_THROWS_AS(tensor_from_json(bad), FormatError);
    try {
        bad = j;
        bad["entries"][0]["basis"] = "z[a=1,1;b=1,0;J=0;v=-]y[a=0,0,0,0;b=0,0,0,0;J=;v=0]";
        tensor_from_json(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("/entries/0/basis") != std::string::npos);
    }
}
