#include "obstruction/obstruction.hpp"

#include "bott/bott.hpp"
#include "cech/cech.hpp"

#include <doctest.h>

using namespace obstruction;

TEST_CASE("w_dim_closed examples")
{
    for (int n = 2; n <= 6; ++n) {
        CHECK(w_dim_closed(n, 0) == 0);
        CHECK(w_dim_closed(n, -1) == 0);
    }
    CHECK(w_dim_closed(5, -2) == 70);
    CHECK(w_dim_closed(5, -3) == 280);
    CHECK(w_dim_closed(2, -4) == 4);
    CHECK(w_dim_closed(2, -2) == 0);
    CHECK_THROWS(w_dim_closed(5, 1));
}

TEST_CASE("complement dimension equals the closed form")
{
    for (int n = 2; n <= 5; ++n)
        for (int k = -6; k <= 0; ++k) {
            auto ws = w_space(crx::build_weight_complex(n, k));
            CHECK_MESSAGE(ws.dim == w_dim_closed(n, k), "n=" << n << " k=" << k);
        }
    auto ws = w_space(crx::build_weight_complex(6, -3));
    CHECK(ws.dim == w_dim_closed(6, -3));
}

TEST_CASE("W vanishes on nonnegative weights for n > 3")
{
    for (int n = 4; n <= 5; ++n)
        for (int k = 0; k <= 6; ++k) CHECK(w_dim_positive(n, k) == 0);
    CHECK(w_dim_positive(6, 0) == 0);
    CHECK(w_dim_positive(6, 2) == 0);
    // not asserted zero below n = 4
    CHECK(w_dim_positive(3, 2) == 5);
}

TEST_CASE("w_space vectors are cocycles outside the contact image")
{
    const auto wc = crx::build_weight_complex(5, -3);
    auto ws = w_space(wc);
    REQUIRE(!ws.blocks.empty());
    std::size_t seen = 0;
    for (std::size_t b = 0; b < ws.blocks.size() && seen < 6; ++b)
        for (std::size_t i = 0; i < ws.blocks[b].split->complement.dim() && seen < 6; ++i, ++seen) {
            auto v = ws.vector(b, i);
            CHECK(!v.empty());
            CHECK(crx::dbar(v).empty());
            CHECK(crx::flat(v).empty());
        }
    CHECK(seen > 0);
}

TEST_CASE("sheaf numbers against the built model")
{
    for (int n = 2; n <= 5; ++n)
        for (int k = -5; k <= 5; ++k) {
            auto s = sheaf_numbers(n, k);
            auto wc = crx::build_weight_complex(n, k);
            CHECK(s.w == wc.numbers.w);
            CHECK(s.h1_ext == wc.numbers.h1_ext);
            CHECK(s.h2 == wc.numbers.h2);
            CHECK(s.rank_f == wc.numbers.rank_f);
        }
}

TEST_CASE("h1_extended")
{
    CHECK(h1_extended(5, -2) == 70);
    CHECK(h1_extended(5, 0) == bott::h_product_tangent(1, 3, {0, 0}, 1));
    // nonzero Künneth summand, killed by the contraction with F
    CHECK(bott::h_product_tangent(1, 2, {3, -3}, 1) == 4);
    CHECK(h1_extended(4, 3) == 0);
    for (int k = -6; k <= 0; ++k) CHECK(h1_extended(3, k) == bott::h_product_tangent(1, 1, {k, -k}, 1));
}

TEST_CASE("h2_check")
{
    for (int k = -6; k <= 6; ++k) CHECK(h2_check(3, k).h2 == 0);
    auto h = h2_check(5, 4);
    CHECK(h.h2 == 0);
    CHECK(h.ambient_h2 == 5);
    CHECK(h.contraction_rank == 5);
    // the single-factor map behind it
    const auto p3 = bott::BundleSpec::full_tangent({3}, {-4});
    CHECK(cech::cech_dim(p3, 2) == 1);
    CHECK(cech::cech_dim(bott::BundleSpec::line({3}, {-4}), 3) == 1);
    CHECK(cech::contraction_rank(p3, 2) == 1);
    // n = 4: concentrated on k > 0
    for (int k = -6; k <= 0; ++k) CHECK(h2_check(4, k).h2 == 0);
    long positive = 0;
    for (int k = 1; k <= 6; ++k) positive += h2_check(4, k).h2;
    CHECK(positive > 0);
    CHECK(h2_check(4, 3).h2 == 6);
}

TEST_CASE("dimension 7 analysis")
{
    auto r = dim7_analysis(-4, 6, 7, 8);
    CHECK(r.ok);
    CHECK(r.ambient_h1_k3 == 4);
    CHECK(r.h1_ext.size() == 7);
    CHECK(r.h2.size() == 5);
    REQUIRE(r.brackets.size() == 8);
    bool nonzero = false;
    for (const auto& b : r.brackets) {
        CHECK(b.exact);
        CHECK(b.k1 < 0);
        CHECK(b.k2 < 0);
        nonzero = nonzero || !b.zero_bracket;
    }
    CHECK(nonzero);
}

namespace {

crx::DeformationTensor tensor_of(int n, const Cochain& x) { return crx::DeformationTensor::from_cochain(n, x); }

Cochain contact_of_random(int n, int k, std::mt19937_64& rng)
{
    const auto wc = crx::build_weight_complex(n, k);
    for (int attempt = 0; attempt < 20; ++attempt) {
        auto f = crx::random_function(n - 2, k, {wc.levels.z + 2, wc.levels.y + 2}, rng, 3);
        auto c = crx::contact_action(f);
        if (!c.empty()) return c;
    }
    return {};
}

}  // namespace

TEST_CASE("classify: zero, W vector, contact image")
{
    crx::DeformationTensor zero;
    zero.n = 5;
    auto v0 = classify(zero);
    CHECK(v0.fillable_N);
    CHECK(v0.fillable_M);
    CHECK(v0.stable);
    CHECK(v0.residuals.empty());

    auto ws = w_space(crx::build_weight_complex(5, -3));
    const Cochain w = ws.vector(0, 0);
    auto vw = classify(tensor_of(5, w));
    CHECK_FALSE(vw.fillable_N);
    CHECK(vw.fillable_M);
    CHECK_FALSE(vw.stable);
    REQUIRE(vw.residuals.size() == 1);
    CHECK(vw.residuals[0].k == -3);
    CHECK(vw.residuals[0].vector == w);

    std::mt19937_64 rng(11);
    for (int k : {-2, -3, -4}) {
        auto c = contact_of_random(5, k, rng);
        REQUIRE(!c.empty());
        auto vc = classify(tensor_of(5, c));
        CHECK(vc.fillable_N);
        CHECK(vc.stable);
        CHECK(vc.residuals.empty());
    }
}

TEST_CASE("classify is gauge invariant")
{
    std::mt19937_64 rng(5);
    for (int n : {3, 4, 5}) {
        for (int trial = 0; trial < 4; ++trial) {
            const int k = -2 - static_cast<int>(rng() % 3);
            auto ws = w_space(crx::build_weight_complex(n, k));
            const auto& e = ws.blocks[rng() % ws.blocks.size()];
            Cochain w;
            if (e.split->complement.dim() > 0)
                w = ws.vector(static_cast<std::size_t>(&e - ws.blocks.data()), rng() % e.split->complement.dim());
            auto base = classify(tensor_of(n, w));
            auto moved = classify(tensor_of(n, crx::add(w, contact_of_random(n, k, rng))));
            CHECK(base.fillable_N == moved.fillable_N);
            CHECK(base.stable == moved.stable);
            REQUIRE(base.residuals.size() == moved.residuals.size());
            for (std::size_t i = 0; i < base.residuals.size(); ++i) {
                CHECK(base.residuals[i].vector == moved.residuals[i].vector);
                CHECK(base.residuals[i].blocks == moved.residuals[i].blocks);
            }
        }
    }
}

TEST_CASE("classify: positive weights and scope errors")
{
    // n = 3 has W on positive weights; the M side is criterion-level there
    auto ws = w_space(crx::build_weight_complex(3, 2));
    REQUIRE(ws.dim == 5);
    auto v = classify(tensor_of(3, ws.vector(0, 0)));
    CHECK(v.fillable_N);
    CHECK_FALSE(v.fillable_M);
    CHECK_FALSE(v.m_theorem_backed);

    auto w = w_space(crx::build_weight_complex(5, -3)).vector(0, 0);
    CHECK_THROWS_AS(classify(tensor_of(5, w), {-2, 6, std::nullopt}), ScopeError);

    // not closed: a bare ambient term
    crx::Cochain bad;
    for (const auto& [key, c] : w) {
        bad.emplace(key, c);
        break;
    }
    if (!crx::dbar(bad).empty() || !crx::flat(bad).empty()) CHECK_THROWS_AS(classify(tensor_of(5, bad)), ScopeError);
}

TEST_CASE("report")
{
    auto r = obstruction_report(5, -3, 1);
    CHECK(r.all_match());
    CHECK(r.all_stable());
    REQUIRE(r.rows.size() == 5);
    CHECK(r.rows[0].w_closed == 280);
    CHECK(r.rows[0].w_linear == 280);
    CHECK(r.rows[1].w_linear == 70);
    auto j = to_json(r);
    CHECK(j["schema_version"] == crx::kSchemaVersion);
    CHECK(j["weights"].size() == 5);
    CHECK(j["weights"][1]["w_closed"] == 70);
    CHECK(j["weights"][1]["match"] == true);
    CHECK(nlohmann::json::parse(j.dump()) == j);

    auto bad = obstruction_report(5, -4, -4, 0);
    CHECK_FALSE(bad.all_stable());
}
