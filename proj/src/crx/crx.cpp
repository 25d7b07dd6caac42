#include "crx/crx.hpp"

#include <sstream>
#include <stdexcept>

namespace crx {

namespace {

long at(const std::vector<long>& v, int i) { return i >= 0 && i < static_cast<int>(v.size()) ? v[i] : 0; }

}  // namespace

LesNumbers les_numbers(int l, const FactorData& z, const FactorData& y)
{
    LesNumbers n;
    const int top = l + 1;
    for (int q = 0; q <= top; ++q) {
        long a = 0, b = 0, r = 0;
        for (int s = 0; s <= 1; ++s) {
            const int t = q - s;
            if (t < 0 || t > l) continue;
            a += at(z.h_tangent, s) * at(y.h_line, t) + at(z.h_line, s) * at(y.h_tangent, t);
            b += at(z.h_line, s) * at(y.h_line, t);
        }
        // image of H^q(A) in H^{q+1}(B), summand (s, t) with s + t = q + 1
        for (int s = 0; s <= 1; ++s) {
            const int t = q + 1 - s;
            if (t < 0 || t > l) continue;
            const long u = at(z.flat_rank, s - 1), v = at(y.flat_rank, t - 1);
            r += u * at(y.h_line, t) + at(z.h_line, s) * v - u * v;
        }
        n.hA.push_back(a);
        n.hB.push_back(b);
        n.rank_f.push_back(r);
    }
    n.h1_ext = at(n.hA, 1) - at(n.rank_f, 1);
    n.w = (at(n.hB, 1) - at(n.rank_f, 0)) + n.h1_ext;
    n.h2 = (at(n.hB, 2) - at(n.rank_f, 1)) + (at(n.hA, 2) - at(n.rank_f, 2));
    return n;
}

namespace {

FactorData choose(int m, int d, std::optional<int> cutoff, Diagnostics& diag, const char* name)
{
    if (cutoff) {
        FactorData a = factor_data(m, d, *cutoff);
        if (!a.same_numbers(factor_data(m, d, *cutoff + 1))) {
            diag.stable = false;
            std::ostringstream os;
            os << name << " factor (P" << m << ", twist " << d << "): cohomology changes between level " << *cutoff
               << " and " << *cutoff + 1;
            diag.messages.push_back(os.str());
        }
        return a;
    }
    const int start = start_level(m, d);
    constexpr int steps = 8;
    if (auto s = stable_factor_data(m, d, start, steps)) return *s;
    diag.stable = false;
    std::ostringstream os;
    os << name << " factor (P" << m << ", twist " << d << "): no stable level in [" << start << ", " << start + steps << "]";
    diag.messages.push_back(os.str());
    return factor_data(m, d, start + steps);
}

}  // namespace

WeightComplex build_weight_complex(int n, int k, std::optional<int> cutoff)
{
    if (n < 2 || n - 2 >= kMaxCoords) throw std::invalid_argument("n must lie in [2, " + std::to_string(kMaxCoords + 1) + "]");
    if (cutoff && *cutoff < 0) throw std::invalid_argument("cutoff must be >= 0");
    WeightComplex wc;
    wc.n = n;
    wc.k = k;
    wc.l = n - 2;
    wc.zdata = choose(1, k, cutoff, wc.diagnostics, "z");
    wc.ydata = choose(wc.l, -k, cutoff, wc.diagnostics, "y");
    wc.levels = {wc.zdata.level, wc.ydata.level};
    wc.numbers = les_numbers(wc.l, wc.zdata, wc.ydata);
    return wc;
}

std::vector<WeightedBlock> WeightComplex::candidate_blocks() const
{
    std::vector<WeightedBlock> out;
    for (const auto& z : zdata.support)
        for (const auto& y : ydata.support) out.push_back({{z, y}, orbit_size(z, 1) * orbit_size(y, l)});
    return out;
}

std::vector<BlockWeight> WeightComplex::orbit(const BlockWeight& rep) const
{
    std::vector<BlockWeight> out;
    for (const auto& z : weight_orbit(rep.z, 1))
        for (const auto& y : weight_orbit(rep.y, l)) out.push_back({z, y});
    return out;
}

DirectNumbers direct_numbers(const WeightComplex& wc)
{
    DirectNumbers d;
    d.hA.assign(wc.l + 2, 0);
    d.hB.assign(wc.l + 2, 0);
    for (const auto& cb : wc.candidate_blocks()) {
        BlockNumbers b = block_numbers(*wc.block(cb.w));
        d.w += cb.orbit * b.w;
        d.h1_ext += cb.orbit * b.h1_ext;
        d.h2 += cb.orbit * b.h2;
        for (std::size_t q = 0; q < b.hA.size(); ++q) {
            d.hA[q] += cb.orbit * b.hA[q];
            d.hB[q] += cb.orbit * b.hB[q];
        }
    }
    return d;
}

}  // namespace crx
