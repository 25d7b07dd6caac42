#include "kuranishi/kuranishi.hpp"

#include <doctest.h>

using namespace kuranishi;
using crx::Scalar;

namespace {

bool all_zero(const std::vector<OrderResidual>& rs)
{
    for (const auto& r : rs)
        if (!r.zero()) return false;
    return true;
}

// A random element of C^1 (ker flat) in one candidate block.
Cochain random_c1(int n, int k, std::mt19937_64& rng)
{
    const auto wc = crx::build_weight_complex(n, k);
    const auto blocks = wc.candidate_blocks();
    if (blocks.empty()) return {};
    const auto b = wc.block(blocks[rng() % blocks.size()].w);
    const auto ker = exactalg::kernel(b->flat(1));
    exactalg::SparseVector v;
    for (int t = 0; t < 3 && ker.dim() > 0; ++t) v = exactalg::add(v, ker.basis[rng() % ker.dim()], Scalar(t + 1));
    return b->expand(true, 1, v);
}

}  // namespace

TEST_CASE("P is a right inverse of dbar on exact elements")
{
    CHECK(right_inverse_P(5, {}).empty());
    std::mt19937_64 rng(3);
    for (int n : {3, 4, 5})
        for (int k : {-3, -1, 0, 2}) {
            const Cochain x = random_c1(n, k, rng);
            const Cochain r = crx::dbar(x);
            const Cochain p = right_inverse_P(n, r);
            CHECK(crx::dbar(p) == r);
            CHECK(crx::flat(p).empty());
        }
}

TEST_CASE("P reports an H^2 class at n = 4, positive weight")
{
    const auto wc = crx::build_weight_complex(4, 3);
    bool found = false;
    for (const auto& cb : wc.candidate_blocks()) {
        const auto b = wc.block(cb.w);
        const auto z2 = exactalg::kernel(b->dA(2).vstack(b->flat(2)));
        const auto c1 = exactalg::kernel(b->flat(1));
        std::vector<exactalg::SparseVector> exact;
        for (const auto& v : c1.basis)
            if (auto d = b->dA(1).apply(v); !d.empty()) exact.push_back(std::move(d));
        const auto im = exactalg::span(exact, b->A(2).dim);
        if (z2.dim() == im.dim()) continue;
        const auto cls = exactalg::complement(im, z2);
        const Cochain r = b->expand(true, 2, cls.basis[0]);
        CHECK_THROWS_AS(right_inverse_P(4, r), NoSolution);
        found = true;
        break;
    }
    CHECK(found);
}

TEST_CASE("chart: zero and abelian seeds")
{
    DeformationTensor zero;
    zero.n = 5;
    auto s = chart_phi(zero, 4);
    REQUIRE(s.truncation_order() == 4);
    for (int i = 1; i <= 4; ++i) CHECK(s.term(i).empty());

    // on P^1 x P^0 there are no 2-forms, so every bracket vanishes
    std::mt19937_64 rng(1);
    auto seed = random_seed(2, {-3, -2}, rng, true);
    REQUIRE(!seed.empty());
    ChartOptions wide;
    wide.kmin = -12;
    auto a = chart_phi(seed, 4, wide);
    CHECK(a.term(1).total() == seed.total());
    for (int i = 2; i <= 4; ++i) CHECK(a.term(i).empty());
    CHECK(inverse_chart(seed).total() == seed.total());
}

TEST_CASE("chart: residual, positivity and round trip")
{
    std::mt19937_64 rng(17);
    ChartOptions opt;
    opt.kmin = -8;
    opt.kmax = 8;
    for (int n : {3, 5})
        for (int trial = 0; trial < 3; ++trial) {
            const bool positive = trial % 2 == 0;
            const auto weights = positive ? std::vector<int>{0, 1} : std::vector<int>{-2, 1};
            auto seed = random_seed(n, weights, rng, !positive);
            REQUIRE(!seed.empty());
            auto s = chart_phi(seed, 4, opt);
            CHECK(all_zero(integrability_residual(s, 4)));
            if (positive) {
                CHECK(nonnegative_weights(seed));
                CHECK(nonnegative_weights(s));
                CHECK(nonnegative_weights(inverse_chart(s)));
            }
            auto back = inverse_chart(s.truncated(3));
            CHECK(back.term(1).total() == seed.total());
            CHECK(back.term(2).empty());
            CHECK(back.term(3).empty());
            // all of the order-4 series maps back as well
            auto back4 = inverse_chart(s);
            CHECK(back4.term(4).empty());
        }
}

TEST_CASE("chart: weights follow the sumset of the seed")
{
    std::mt19937_64 rng(23);
    auto seed = random_seed(5, {1}, rng, false);
    auto s = chart_phi(seed, 3);
    for (int i = 1; i <= 3; ++i)
        for (const auto& [k, c] : s.term(i).coeffs) CHECK(k == i);
}

TEST_CASE("residual detects a perturbation")
{
    std::mt19937_64 rng(29);
    auto seed = random_seed(3, {0, 1}, rng, false, 2);
    auto s = chart_phi(seed, 3);
    REQUIRE(!s.term(2).empty());
    auto noisy = s;
    Cochain t2 = noisy.terms[1].total();
    t2.begin()->second += 1;
    noisy.terms[1] = DeformationTensor::from_cochain(3, t2);
    auto rs = integrability_residual(noisy, 3);
    CHECK(rs[0].zero());
    CHECK_FALSE(rs[1].zero());
}

TEST_CASE("chart: errors")
{
    std::mt19937_64 rng(31);
    auto seed = random_seed(5, {-2}, rng, true);
    ChartOptions narrow;
    narrow.kmin = -6;
    CHECK_THROWS_AS(chart_phi(seed, 4, narrow), RangeError);

    Cochain bad = random_c1(5, -2, rng);
    if (!crx::dbar(bad).empty())
        CHECK_THROWS_AS(chart_phi(DeformationTensor::from_cochain(5, bad), 2), std::invalid_argument);
}

TEST_CASE("n = 4: negative representative route")
{
    std::mt19937_64 rng(37);
    auto seed = random_seed(4, {-2, 0, 1}, rng, true);
    auto rep = negative_representative(seed);
    for (const auto& [k, c] : rep.seed.coeffs) CHECK(k < 0);
    CHECK(crx::add(rep.seed.total(), crx::dbar(rep.upsilon)) == seed.total());
    ChartOptions opt;
    opt.kmin = -8;
    auto s = chart_phi(rep.seed, 4, opt);
    CHECK(all_zero(integrability_residual(s, 4)));
    for (const auto& t : s.terms)
        for (const auto& [k, c] : t.coeffs) CHECK(k < 0);
}

TEST_CASE("series JSON round trip")
{
    std::mt19937_64 rng(41);
    auto s = chart_phi(random_seed(3, {1}, rng, false), 3);
    auto j = to_json(s);
    CHECK(j["kind"] == "formal_series");
    auto back = series_from_json(j);
    REQUIRE(back.truncation_order() == 3);
    for (int i = 1; i <= 3; ++i) CHECK(back.term(i).total() == s.term(i).total());
    CHECK(to_json(back) == j);
    CHECK_THROWS_AS(series_from_json(nlohmann::json::parse(R"({"kind":"formal_series","n":3})")), crx::FormatError);
}
