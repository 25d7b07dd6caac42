#include "obstruction/obstruction.hpp"

#include "bott/bott.hpp"
#include "cech/cech.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

namespace obstruction {

using crx::GlobalBlock;
using exactalg::SparseMatrix;
using exactalg::SparseVector;
using nlohmann::json;

namespace {

long at(const std::vector<long>& v, int i) { return i >= 0 && i < static_cast<int>(v.size()) ? v[i] : 0; }

void check_n(int n)
{
    if (n < 2 || n > 6) throw std::invalid_argument("n must lie in [2, 6]");
}

crx::WeightComplex build(int n, int k, std::optional<int> cutoff)
{
    check_n(n);
    auto wc = crx::build_weight_complex(n, k, cutoff);
    if (!wc.diagnostics.stable) {
        std::string msg = "cutoff does not stabilize at n=" + std::to_string(n) + ", k=" + std::to_string(k);
        for (const auto& m : wc.diagnostics.messages) msg += "; " + m;
        throw crx::Unstable(msg);
    }
    return wc;
}

std::string where(int n, int k) { return "(n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")"; }

}  // namespace

// ---------------------------------------------------------------- dimensions

long w_dim_closed(int n, int k)
{
    check_n(n);
    if (k > 0) throw std::invalid_argument("w_dim_closed needs k <= 0");
    const int l = n - 2;
    const long h1_line = bott::h_line(1, k, 1);
    const long tangent_y = l == 0 ? 0 : bott::h_tangent(l, -k, 0);
    const long dbar_sharp = k < -2 ? h1_line : 0;
    return h1_line * tangent_y + (bott::h_tangent(1, k, 1) + dbar_sharp) * bott::h_line(l, -k, 0);
}

long w_dim_positive(int n, int k, std::optional<int> cutoff)
{
    if (k < 0) throw std::invalid_argument("w_dim_positive needs k >= 0");
    return w_space(build(n, k, cutoff)).dim;
}

SheafNumbers sheaf_numbers(int n, int k)
{
    check_n(n);
    const int l = n - 2;
    const int top = l + 1;
    const auto line = bott::BundleSpec::line({1, l}, {k, -k});
    const auto tangent = bott::BundleSpec::full_tangent({1, l}, {k, -k});
    SheafNumbers s;
    for (int q = 0; q <= top; ++q) {
        s.hA.push_back(bott::h_product_tangent(1, l, {k, -k}, q));
        s.hB.push_back(bott::h(line, q));
    }
    for (int q = 0; q <= top; ++q) {
        const bool both = s.hA[q] > 0 && at(s.hB, q + 1) > 0;
        s.rank_f.push_back(both ? cech::contraction_rank(tangent, q) : 0);
    }
    s.h1_ext = at(s.hA, 1) - at(s.rank_f, 1);
    s.w = (at(s.hB, 1) - at(s.rank_f, 0)) + s.h1_ext;
    s.h2 = (at(s.hB, 2) - at(s.rank_f, 1)) + (at(s.hA, 2) - at(s.rank_f, 2));
    return s;
}

// ---------------------------------------------------------------- W

std::shared_ptr<const BlockSplit> block_split(const std::shared_ptr<const GlobalBlock>& block)
{
    static std::mutex mu;
    static std::map<std::tuple<int, BlockWeight, crx::Levels>, std::shared_ptr<const BlockSplit>> cache;
    const auto key = std::make_tuple(block->l(), block->weight(), block->levels());
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto s = std::make_shared<BlockSplit>();
    s->block = block;
    const std::size_t dim1 = block->A(1).dim;
    if (block->top() > 1) s->cocycles = exactalg::kernel(block->dA(1).vstack(block->flat(1)));
    else s->cocycles = Subspace::full(dim1);
    s->image = exactalg::image(block->contact());
    s->complement = exactalg::complement(s->image, s->cocycles);
    std::lock_guard lock(mu);
    return cache.emplace(key, std::move(s)).first->second;
}

Cochain WSpace::vector(std::size_t b, std::size_t i) const
{
    const auto& sp = *blocks.at(b).split;
    return sp.block->expand(true, 1, sp.complement.basis.at(i));
}

namespace {

WSpace w_space_unchecked(const crx::WeightComplex& wc)
{
    WSpace ws;
    ws.n = wc.n;
    ws.k = wc.k;
    for (const auto& cb : wc.candidate_blocks()) {
        auto sp = block_split(wc.block(cb.w));
        ws.dim += cb.orbit * static_cast<long>(sp->complement.dim());
        ws.blocks.push_back({cb, std::move(sp)});
    }
    return ws;
}

}  // namespace

WSpace w_space(const crx::WeightComplex& wc)
{
    WSpace ws = w_space_unchecked(wc);
    const long expected = wc.k <= 0 ? w_dim_closed(wc.n, wc.k) : sheaf_numbers(wc.n, wc.k).w;
    if (ws.dim != expected) {
        std::ostringstream os;
        os << "W at " << where(wc.n, wc.k) << ": complement has dimension " << ws.dim << ", expected " << expected;
        throw Discrepancy(os.str());
    }
    return ws;
}

long h1_extended(int n, int k, std::optional<int> cutoff)
{
    const auto wc = build(n, k, cutoff);
    const long direct = crx::direct_numbers(wc).h1_ext;
    const long sheaf = sheaf_numbers(n, k).h1_ext;
    if (direct != wc.numbers.h1_ext || direct != sheaf)
        throw Discrepancy("H^1 of the extended complex at " + where(n, k) + ": direct " + std::to_string(direct) +
                          ", factorized " + std::to_string(wc.numbers.h1_ext) + ", sheaf " + std::to_string(sheaf));
    if (k <= 0) {
        const long kun = bott::h_product_tangent(1, n - 2, {k, -k}, 1);
        if (kun != direct)
            throw Discrepancy("H^1 of the extended complex at " + where(n, k) + " is " + std::to_string(direct) +
                              ", Künneth gives " + std::to_string(kun));
    }
    return direct;
}

H2Check h2_check(int n, int k, std::optional<int> cutoff)
{
    const auto wc = build(n, k, cutoff);
    const auto s = sheaf_numbers(n, k);
    H2Check h;
    h.h2 = crx::direct_numbers(wc).h2;
    h.ambient_h2 = at(s.hA, 2);
    h.contraction_rank = at(s.rank_f, 2);
    h.scalar_part = at(s.hB, 2) - at(s.rank_f, 1);
    if (h.h2 != wc.numbers.h2 || h.h2 != s.h2)
        throw Discrepancy("H^2(C) at " + where(n, k) + ": direct " + std::to_string(h.h2) + ", factorized " +
                          std::to_string(wc.numbers.h2) + ", sheaf " + std::to_string(s.h2));
    return h;
}

// ---------------------------------------------------------------- dimension 7

namespace {

// Representatives of H^1 of the extended complex in one block: a complement of
// dbar(C~^0) inside Z^1(C).
Subspace extended_reps(const BlockSplit& sp)
{
    const auto& b = *sp.block;
    Subspace c0 = b.top() > 1 ? exactalg::kernel(b.flat(1).multiply(b.dA(0))) : Subspace::full(b.A(0).dim);
    std::vector<SparseVector> img;
    for (const auto& v : c0.basis)
        if (auto d = b.dA(0).apply(v); !d.empty()) img.push_back(std::move(d));
    return exactalg::complement(exactalg::span(img, b.A(1).dim), sp.cocycles);
}

struct RepPool {
    int k = 0;
    std::vector<std::pair<std::shared_ptr<const BlockSplit>, Subspace>> blocks;
};

Cochain random_rep(const RepPool& pool, std::mt19937_64& rng)
{
    const auto& [sp, reps] = pool.blocks[rng() % pool.blocks.size()];
    SparseVector v;
    const int terms = 1 + static_cast<int>(rng() % 2);
    for (int t = 0; t < terms; ++t) {
        const long c = static_cast<long>(rng() % 4) + 1;
        const long sign = rng() % 2 ? 1 : -1;
        const auto& b = reps.basis[rng() % reps.dim()];
        v = exactalg::add(v, b, Scalar(sign * c));
    }
    return sp->block->expand(true, 1, v);
}

}  // namespace

Dim7Report dim7_analysis(int kmin, int kmax, std::uint64_t seed, int samples)
{
    if (kmin > kmax) throw std::invalid_argument("kmin > kmax");
    constexpr int n = 4;
    Dim7Report r;
    r.kmin = kmin;
    r.kmax = kmax;
    for (int k = std::max(0, kmin); k <= kmax; ++k) {
        const long h = h1_extended(n, k);
        r.h1_ext.emplace_back(k, h);
        r.ok = r.ok && h == 0;
        if (k == 3) r.ambient_h1_k3 = at(sheaf_numbers(n, k).hA, 1);
    }
    // C~ and C differ only in degree 0, so H^2 agrees.
    for (int k = kmin; k <= std::min(0, kmax); ++k) {
        const long h = h2_check(n, k).h2;
        r.h2.emplace_back(k, h);
        r.ok = r.ok && h == 0;
    }

    std::vector<RepPool> pools;
    for (int k = kmin; k <= std::min(-1, kmax); ++k) {
        const auto wc = build(n, k, std::nullopt);
        RepPool pool{k, {}};
        for (const auto& cb : wc.candidate_blocks()) {
            auto sp = block_split(wc.block(cb.w));
            Subspace reps = extended_reps(*sp);
            if (reps.dim() > 0) pool.blocks.emplace_back(sp, std::move(reps));
        }
        if (!pool.blocks.empty()) pools.push_back(std::move(pool));
    }
    if (pools.empty()) return r;
    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        const auto& p1 = pools[rng() % pools.size()];
        const auto& p2 = pools[rng() % pools.size()];
        const Cochain x = random_rep(p1, rng);
        const Cochain y = random_rep(p2, rng);
        BracketSample bs{p1.k, p2.k, false, false};
        const Cochain br = crx::bracket(x, 1, y, 1);
        if (br.empty()) {
            bs.exact = bs.zero_bracket = true;
        } else {
            auto sol = crx::solve_in_C(n - 2, br);
            if (!sol.x)
                throw Discrepancy("bracket of H^1 classes at weights " + std::to_string(p1.k) + ", " +
                                  std::to_string(p2.k) + " is not exact");
            if (crx::dbar(*sol.x) != br || !crx::flat(*sol.x).empty())
                throw Discrepancy("solution of dbar x = [a, b] failed verification");
            bs.exact = true;
        }
        r.brackets.push_back(bs);
    }
    return r;
}

// ---------------------------------------------------------------- classification

namespace {

constexpr int kMaxRaise = 6;

// The block at raised levels, with columns [contact image | W basis of the base block].
// Keeping W from the stable level makes residuals independent of the input's levels.
struct EmbeddedSplit {
    std::shared_ptr<const GlobalBlock> block;
    SparseMatrix columns;
    std::size_t image_dim = 0;
    std::size_t w_dim = 0;
};

std::shared_ptr<const EmbeddedSplit> embedded_split(const std::shared_ptr<const GlobalBlock>& base, crx::Levels L)
{
    static std::mutex mu;
    static std::map<std::tuple<int, BlockWeight, crx::Levels, crx::Levels>, std::shared_ptr<const EmbeddedSplit>> cache;
    const auto key = std::make_tuple(base->l(), base->weight(), base->levels(), L);
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const auto sp0 = block_split(base);
    auto es = std::make_shared<EmbeddedSplit>();
    es->block = L == base->levels() ? base : crx::global_block(base->l(), base->weight(), L);
    std::vector<SparseVector> cols =
        L == base->levels() ? sp0->image.basis : exactalg::image(es->block->contact()).basis;
    es->image_dim = cols.size();
    for (const auto& v : sp0->complement.basis) {
        auto c = es->block->coords(true, 1, base->expand(true, 1, v));
        if (!c) throw Discrepancy("W basis vector does not embed into the raised block");
        cols.push_back(std::move(*c));
    }
    es->w_dim = sp0->complement.dim();
    const std::size_t dim1 = es->block->A(1).dim;
    if (exactalg::rank_of(cols, dim1) != cols.size())
        throw Discrepancy("W basis meets the contact image after raising the level");
    es->columns = SparseMatrix::from_columns(dim1, std::move(cols));
    std::lock_guard lock(mu);
    return cache.emplace(key, std::move(es)).first->second;
}

}  // namespace

FillabilityVerdict classify(const crx::DeformationTensor& dt, const ClassifyOptions& opt)
{
    check_n(dt.n);
    if (opt.kmin > opt.kmax) throw std::invalid_argument("kmin > kmax");
    FillabilityVerdict v;
    v.m_theorem_backed = dt.n > 3;
    for (const auto& [k, c] : dt.coeffs) {
        if (c.empty()) continue;
        if (k < opt.kmin || k > opt.kmax) {
            throw ScopeError("weight " + std::to_string(k) + " outside the built range [" + std::to_string(opt.kmin) +
                             ", " + std::to_string(opt.kmax) + "]");
        }
        const auto wc = build(dt.n, k, opt.cutoff);
        if (crx::degree_of(c) != 1) throw ScopeError("weight " + std::to_string(k) + ": expected 1-forms");
        if (!crx::flat(c).empty()) throw ScopeError("weight " + std::to_string(k) + ": flat of the tensor is not zero");
        if (!crx::dbar(c).empty())
            throw ScopeError("weight " + std::to_string(k) + ": not linearized-integrable (dbar is not zero)");
        Residual res;
        res.k = k;
        for (const auto& [w, part] : crx::split_by_weight(c)) {
            const auto lv = crx::levels_of(part);
            const crx::Levels L{std::max(lv.z, wc.levels.z), std::max(lv.y, wc.levels.y)};
            if (L.z > wc.levels.z + kMaxRaise || L.y > wc.levels.y + kMaxRaise) {
                std::ostringstream os;
                os << "weight " << k << ": term level (" << lv.z << ", " << lv.y << ") exceeds the model level ("
                   << wc.levels.z << ", " << wc.levels.y << ") by more than " << kMaxRaise;
                throw ScopeError(os.str());
            }
            const auto es = embedded_split(wc.block(w), L);
            const auto x = es->block->coords(true, 1, part);
            if (!x) throw ScopeError("weight " + std::to_string(k) + ": tensor does not descend to the quotient");
            const auto sol = exactalg::solve(es->columns, *x);
            if (!sol) throw Discrepancy("cocycle outside contact image + W at weight " + std::to_string(k));
            SparseVector wpart;
            std::vector<Scalar> coeffs(es->w_dim);
            for (const auto& [i, a] : *sol)
                if (i >= es->image_dim) {
                    coeffs[i - es->image_dim] = a;
                    wpart = exactalg::add(wpart, es->columns.column(i), a);
                }
            if (!wpart.empty()) res.blocks.push_back({w, std::move(coeffs)});
            res.vector = crx::add(res.vector, es->block->expand(true, 1, wpart));
        }
        if (res.vector.empty()) continue;
        if (k < 0) v.fillable_N = false;
        if (k > 0) v.fillable_M = false;
        (k == 0 ? v.informational : v.residuals).push_back(std::move(res));
    }
    v.stable = v.fillable_N && v.fillable_M;
    return v;
}

ObstructionReport obstruction_report(int n, int kmin, int kmax, std::optional<int> cutoff)
{
    check_n(n);
    if (kmin > kmax) throw std::invalid_argument("kmin > kmax");
    ObstructionReport rep;
    rep.n = n;
    rep.kmin = kmin;
    rep.kmax = kmax;
    for (int k = kmin; k <= kmax; ++k) {
        const auto wc = crx::build_weight_complex(n, k, cutoff);
        WeightRow row;
        row.k = k;
        row.stable = wc.diagnostics.stable;
        for (const auto& m : wc.diagnostics.messages) rep.diagnostics.push_back("k=" + std::to_string(k) + ": " + m);
        const auto direct = crx::direct_numbers(wc);
        const auto sheaf = sheaf_numbers(n, k);
        row.h1_ext = direct.h1_ext;
        row.h2 = direct.h2;
        row.w_closed = k <= 0 ? w_dim_closed(n, k) : sheaf.w;
        row.w_linear = w_space_unchecked(wc).dim;
        row.match = row.w_closed == row.w_linear && row.w_linear == direct.w && direct.w == wc.numbers.w &&
                    direct.h1_ext == wc.numbers.h1_ext && direct.h1_ext == sheaf.h1_ext &&
                    direct.h2 == wc.numbers.h2 && direct.h2 == sheaf.h2;
        if (!row.match) rep.diagnostics.push_back("k=" + std::to_string(k) + ": routes disagree");
        rep.rows.push_back(row);
    }
    return rep;
}

bool ObstructionReport::all_match() const
{
    return std::all_of(rows.begin(), rows.end(), [](const WeightRow& r) { return r.match; });
}

bool ObstructionReport::all_stable() const
{
    return std::all_of(rows.begin(), rows.end(), [](const WeightRow& r) { return r.stable; });
}

// ---------------------------------------------------------------- JSON

namespace {

json residual_json(const Residual& r)
{
    json blocks = json::array();
    for (const auto& b : r.blocks) {
        json coeffs = json::array();
        for (const auto& c : b.coefficients) coeffs.push_back(exactalg::to_string(c));
        blocks.push_back({{"z_weight", std::vector<int>(b.w.z.begin(), b.w.z.begin() + 2)},
                          {"y_weight", b.w.y},
                          {"coefficients", coeffs}});
    }
    return {{"k", r.k},
            {"blocks", blocks},
            {"entries", crx::to_json(crx::DeformationTensor::from_cochain(0, r.vector))["entries"]}};
}

}  // namespace

json to_json(const WeightRow& r)
{
    return {{"k", r.k},           {"h1_ext", r.h1_ext}, {"h2", r.h2},       {"w_closed", r.w_closed},
            {"w_linear", r.w_linear}, {"match", r.match},   {"stable", r.stable}};
}

json to_json(const FillabilityVerdict& v)
{
    json res = json::array(), info = json::array();
    for (const auto& r : v.residuals) res.push_back(residual_json(r));
    for (const auto& r : v.informational) info.push_back(residual_json(r));
    return {{"fillable_N", v.fillable_N},
            {"fillable_M", v.fillable_M},
            {"fillable_M_basis", v.m_theorem_backed ? "theorem" : "criterion-level"},
            {"stable", v.stable},
            {"residuals", res},
            {"weight0_informational", info}};
}

json to_json(const ObstructionReport& r)
{
    json rows = json::array();
    for (const auto& w : r.rows) rows.push_back(to_json(w));
    json j = {{"schema_version", crx::kSchemaVersion},
              {"kind", "obstruction_report"},
              {"n", r.n},
              {"kmin", r.kmin},
              {"kmax", r.kmax},
              {"weights", rows},
              {"diagnostics", r.diagnostics}};
    if (r.verdict) j["verdict"] = to_json(*r.verdict);
    return j;
}

json to_json(const Dim7Report& r)
{
    json h1 = json::array(), h2 = json::array(), br = json::array();
    for (const auto& [k, h] : r.h1_ext) h1.push_back({{"k", k}, {"h1_ext", h}});
    for (const auto& [k, h] : r.h2) h2.push_back({{"k", k}, {"h2", h}});
    for (const auto& b : r.brackets)
        br.push_back({{"k1", b.k1}, {"k2", b.k2}, {"exact", b.exact}, {"zero_bracket", b.zero_bracket}});
    return {{"kmin", r.kmin},   {"kmax", r.kmax}, {"h1_ext_nonnegative", h1}, {"h2_nonpositive", h2},
            {"ambient_h1_k3", r.ambient_h1_k3}, {"brackets", br},        {"ok", r.ok}};
}

}  // namespace obstruction
