#include "suites/suites.hpp"

#include "bott/bott.hpp"
#include "cech/cech.hpp"
#include "crx/crx.hpp"
#include "exactalg/exactalg.hpp"
#include "kuranishi/kuranishi.hpp"
#include "obstruction/obstruction.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <sys/wait.h>

namespace suites {

using crx::Cochain;
using exactalg::Scalar;
using exactalg::SparseMatrix;
using exactalg::SparseVector;

namespace {

void expect(Check& c, bool ok, const std::string& what)
{
    ++c.cases;
    if (ok) return;
    if (c.pass) c.detail = what;
    c.pass = false;
}

template <class F>
Check run_group(const std::string& name, F&& body)
{
    Check c;
    c.group = name;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        if (c.detail.empty()) c.detail = std::string("exception: ") + e.what();
    }
    return c;
}

std::string at(int n, int k)
{
    return "n=" + std::to_string(n) + " k=" + std::to_string(k);
}

Scalar frac(long a, long b)
{
    Scalar s(a, b);
    s.canonicalize();
    return s;
}

bool is_zero(const SparseMatrix& m) { return m.nnz() == 0; }

bool same(const SparseMatrix& a, const SparseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t c = 0; c < a.cols(); ++c)
        if (a.column(c) != b.column(c)) return false;
    return true;
}

SparseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols)
{
    std::vector<exactalg::Entry> e;
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r)
            if (rng() % 2) e.push_back({r, c, frac(static_cast<long>(rng() % 7) - 3, static_cast<long>(rng() % 3) + 1)});
    return SparseMatrix::from_entries(rows, cols, e);
}

// Random element of ker flat in degree 1 of a block.
Cochain random_c1(const crx::GlobalBlock& b, std::mt19937_64& rng)
{
    const auto ker = b.top() > 1 ? exactalg::kernel(b.flat(1)) : exactalg::Subspace::full(b.A(1).dim);
    SparseVector v;
    for (int t = 0; t < 3 && ker.dim() > 0; ++t) {
        const auto& e = ker.basis[rng() % ker.dim()];
        v = exactalg::add(v, e, Scalar(static_cast<long>(rng() % 5) - 2));
    }
    return b.expand(true, 1, v);
}

Cochain random_contact(int n, int k, std::mt19937_64& rng)
{
    const auto wc = crx::build_weight_complex(n, k);
    const crx::Levels lv{wc.levels.z + 1, wc.levels.y + 1};
    for (int attempt = 0; attempt < 16; ++attempt) {
        const Cochain c = crx::contact_action(crx::random_function(n - 2, k, lv, rng, 2));
        if (!c.empty()) return c;
    }
    return {};
}

bool same_verdict(const obstruction::FillabilityVerdict& a, const obstruction::FillabilityVerdict& b)
{
    if (a.fillable_N != b.fillable_N || a.fillable_M != b.fillable_M || a.stable != b.stable) return false;
    if (a.residuals.size() != b.residuals.size()) return false;
    for (std::size_t i = 0; i < a.residuals.size(); ++i)
        if (a.residuals[i].k != b.residuals[i].k || a.residuals[i].vector != b.residuals[i].vector ||
            a.residuals[i].blocks != b.residuals[i].blocks)
            return false;
    return true;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string secs(double s)
{
    std::ostringstream os;
    os.precision(1);
    os << std::fixed << s << "s";
    return os.str();
}

// ---- groups -------------------------------------------------------------------

Check group_exactalg(std::uint64_t seed)
{
    return run_group("exactalg", [&](Check& c) {
        std::mt19937_64 rng(seed);
        for (int t = 0; t < 12; ++t) {
            const std::size_t rows = 3 + rng() % 6, cols = 3 + rng() % 6, r = 1 + rng() % 3;
            const SparseMatrix m = random_matrix(rng, rows, r).multiply(random_matrix(rng, r, cols));
            const auto rk = exactalg::rank(m);
            const auto ker = exactalg::kernel(m);
            expect(c, rk + ker.dim() == cols, "rank + nullity != columns");
            expect(c, is_zero(m.multiply(ker.as_columns())), "kernel vector not annihilated");
            SparseVector x;
            for (std::size_t i = 0; i < cols; ++i)
                if (rng() % 2) x.emplace_back(i, Scalar(static_cast<long>(rng() % 5) + 1));
            const SparseVector b = m.apply(x);
            const auto y = exactalg::solve(m, b);
            expect(c, y && m.apply(*y) == b, "solve failed on an image vector");
            const auto im = exactalg::image(m);
            const auto comp = exactalg::complement(im, exactalg::Subspace::full(rows));
            auto all = im.basis;
            all.insert(all.end(), comp.basis.begin(), comp.basis.end());
            expect(c, exactalg::rank_of(all, rows) == rows && comp.dim() + im.dim() == rows, "complement does not span");
        }
    });
}

Check group_serre_euler(int kmin, int kmax)
{
    return run_group("serre_euler", [&](Check& c) {
        for (int m = 1; m <= 4; ++m)
            for (int k = kmin; k <= kmax; ++k) {
                long chi = 0;
                for (int q = 0; q <= m; ++q) {
                    expect(c, bott::h_line(m, k, q) == bott::h_line(m, -k - m - 1, m - q), "Serre duality " + at(m, k));
                    chi += (q % 2 ? -1 : 1) * bott::h_line(m, k, q);
                }
                // chi(O(k)) = C(m + k, m) as a polynomial in k
                Scalar p = 1;
                for (int i = 1; i <= m; ++i) p *= frac(k + i, i);
                expect(c, Scalar(chi) == p, "Euler characteristic " + at(m, k));
            }
    });
}

Check group_bott_vs_cech(int n, int kmin, int kmax)
{
    return run_group("bott_vs_cech", [&](Check& c) {
        for (const auto& r : cohomology_grid(std::min(n, 4), kmin, kmax, n, true))
            expect(c, r.match(), r.bundle + " q=" + std::to_string(r.q));
    });
}

Check group_crx_identities(int n, int kmin, int kmax)
{
    return run_group("crx_identities", [&](Check& c) {
        for (int k = kmin; k <= kmax; ++k) {
            const auto wc = crx::build_weight_complex(n, k);
            for (const auto& cb : wc.candidate_blocks()) {
                const auto b = wc.block(cb.w);
                for (int q = 0; q + 1 < b->top(); ++q) {
                    expect(c, is_zero(b->dA(q + 1).multiply(b->dA(q))), "dA^2 != 0 " + at(n, k));
                    expect(c, is_zero(b->dB(q + 1).multiply(b->dB(q))), "dB^2 != 0 " + at(n, k));
                    expect(c, same(b->flat(q + 1).multiply(b->dA(q)), b->dB(q + 1).multiply(b->flat(q))),
                           "flat does not intertwine d " + at(n, k));
                }
                expect(c, b->flat(0).multiply(b->sharp()) == SparseMatrix::identity(b->B(1).dim),
                       "flat sharp != 1 " + at(n, k));
                expect(c, b->sharp().multiply(b->flat(0)) == SparseMatrix::identity(b->A(0).dim),
                       "sharp flat != 1 " + at(n, k));
                if (b->top() > 1) {
                    expect(c, is_zero(b->dA(1).multiply(b->contact())), "contact image not closed " + at(n, k));
                    expect(c, is_zero(b->flat(1).multiply(b->contact())), "contact image not in ker flat " + at(n, k));
                }
            }
        }
    });
}

std::vector<std::array<int, 2>> bracket_pairs(int kmin, int kmax)
{
    std::vector<std::array<int, 2>> out;
    for (auto p : std::vector<std::array<int, 2>>{{-2, -3}, {-2, -2}, {0, 1}, {-1, 2}, {1, 2}, {-3, 1}, {0, 0}})
        if (p[0] >= kmin && p[1] >= kmin && p[0] <= kmax && p[1] <= kmax && p[0] + p[1] >= kmin && p[0] + p[1] <= kmax)
            out.push_back(p);
    return out;
}

std::vector<Check> group_bracket(int n, int kmin, int kmax, std::uint64_t seed)
{
    Check anti, kernel, leibniz;
    anti.group = "bracket_antisymmetry";
    kernel.group = "bracket_flat_kernel";
    leibniz.group = "leibniz";
    std::mt19937_64 rng(seed);
    try {
        for (const auto& [k1, k2] : bracket_pairs(kmin, kmax)) {
            const auto w1 = crx::build_weight_complex(n, k1), w2 = crx::build_weight_complex(n, k2);
            const auto c1 = w1.candidate_blocks(), c2 = w2.candidate_blocks();
            if (c1.empty() || c2.empty()) continue;
            for (int trial = 0; trial < 4; ++trial) {
                const auto o1 = w1.orbit(c1[rng() % c1.size()].w);
                const auto o2 = w2.orbit(c2[rng() % c2.size()].w);
                const auto b1 = w1.block(o1[rng() % o1.size()]);
                const auto b2 = w2.block(o2[rng() % o2.size()]);
                const Cochain x = random_c1(*b1, rng);
                const Cochain y = random_c1(*b2, rng);
                const Cochain xy = crx::bracket(x, 1, y, 1), yx = crx::bracket(y, 1, x, 1);
                const std::string where = "n=" + std::to_string(n) + " weights " + std::to_string(k1) + "," + std::to_string(k2);
                expect(anti, crx::add(xy, yx, Scalar(-1)).empty(), "[x,y] != [y,x] on 1-forms, " + where);
                expect(kernel, crx::flat(xy).empty(), "flat [x,y] != 0, " + where);
                const Cochain lhs = crx::dbar(xy);
                const Cochain rhs = crx::add(crx::bracket(crx::dbar(x), 2, y, 1), crx::bracket(x, 1, crx::dbar(y), 2), Scalar(-1));
                expect(leibniz, crx::add(lhs, rhs, Scalar(-1)).empty(), "dbar [x,y] != [dbar x,y] - [x,dbar y], " + where);
            }
        }
    } catch (const std::exception& e) {
        for (Check* c : {&anti, &kernel, &leibniz}) {
            c->pass = false;
            if (c->detail.empty()) c->detail = std::string("exception: ") + e.what();
        }
    }
    return {anti, kernel, leibniz};
}

Check group_cohomology_numbers(int n, int kmin, int kmax)
{
    return run_group("cohomology_numbers", [&](Check& c) {
        for (int k = kmin; k <= kmax; ++k) {
            const auto wc = crx::build_weight_complex(n, k);
            expect(c, wc.diagnostics.stable, "cutoff did not stabilize " + at(n, k));
            const auto d = crx::direct_numbers(wc);
            const auto s = obstruction::sheaf_numbers(n, k);
            const auto& l = wc.numbers;
            expect(c, d.w == l.w && d.h1_ext == l.h1_ext && d.h2 == l.h2, "direct vs exact sequence " + at(n, k));
            expect(c, s.w == l.w && s.h1_ext == l.h1_ext && s.h2 == l.h2, "sheaf vs model " + at(n, k));
            expect(c, d.hA == l.hA && d.hB == l.hB && s.hA == l.hA && s.hB == l.hB, "ambient numbers " + at(n, k));
            for (int q = 0; q < static_cast<int>(l.hA.size()); ++q)
                expect(c, l.hA[q] == bott::h_product_tangent(1, n - 2, {k, -k}, q), "ambient vs bott " + at(n, k));
        }
    });
}

Check group_h2(int n, int kmin, int kmax)
{
    return run_group("h2", [&](Check& c) {
        for (int k = kmin; k <= kmax; ++k) {
            const auto h = obstruction::h2_check(n, k);
            if (n != 4 || k <= 0) expect(c, h.h2 == 0, "H^2 != 0 " + at(n, k));
        }
    });
}

Check group_obstruction_w(int n, int kmin, int kmax)
{
    return run_group("obstruction_w", [&](Check& c) {
        for (int k = kmin; k <= kmax; ++k) {
            const auto ws = obstruction::w_space(crx::build_weight_complex(n, k));
            if (k <= 0) expect(c, ws.dim == obstruction::w_dim_closed(n, k), "complement vs closed form " + at(n, k));
            if (k == 0 || k == -1) expect(c, ws.dim == 0, "W != 0 " + at(n, k));
            if (k >= 0 && n >= 4) expect(c, ws.dim == 0, "W != 0 " + at(n, k));
            for (std::size_t b = 0; b < ws.blocks.size(); ++b) {
                if (ws.blocks[b].split->complement.dim() == 0) continue;
                const Cochain v = ws.vector(b, 0);
                expect(c, !v.empty() && crx::dbar(v).empty() && crx::flat(v).empty(), "W vector not a cocycle " + at(n, k));
            }
        }
    });
}

Check group_classify_gauge(int n, int kmin, int kmax, std::uint64_t seed)
{
    return run_group("classify_gauge", [&](Check& c) {
        std::mt19937_64 rng(seed);
        obstruction::ClassifyOptions opt{kmin, kmax, std::nullopt};
        crx::DeformationTensor zero{n, {}};
        expect(c, obstruction::classify(zero, opt).fillable_N, "zero tensor not fillable");
        for (int k = std::max(kmin, -4); k <= std::min(kmax, 2); ++k) {
            const auto ws = obstruction::w_space(crx::build_weight_complex(n, k));
            Cochain w;
            for (std::size_t b = 0; b < ws.blocks.size() && w.empty(); ++b)
                if (ws.blocks[b].split->complement.dim() > 0) w = ws.vector(b, rng() % ws.blocks[b].split->complement.dim());
            const auto base = obstruction::classify(crx::DeformationTensor::from_cochain(n, w), opt);
            if (k <= -2 && !w.empty()) expect(c, !base.fillable_N, "W vector classified fillable " + at(n, k));
            const Cochain g = random_contact(n, k, rng);
            const auto moved = obstruction::classify(crx::DeformationTensor::from_cochain(n, crx::add(w, g)), opt);
            expect(c, same_verdict(base, moved), "verdict changed under a contact term " + at(n, k));
            const auto pure = obstruction::classify(crx::DeformationTensor::from_cochain(n, g), opt);
            expect(c, pure.fillable_N && pure.residuals.empty(), "contact image not fillable " + at(n, k));
        }
    });
}

// Seed weight sets whose order-fold sumsets stay inside [kmin, kmax].
std::vector<std::vector<int>> seed_weights(int kmin, int kmax, int order)
{
    std::vector<std::vector<int>> out;
    for (auto ws : std::vector<std::vector<int>>{{0, 1}, {-1, 1}, {-1, 0}, {1}, {0}})
        if (order * *std::min_element(ws.begin(), ws.end()) >= std::min(kmin, 0) &&
            order * *std::max_element(ws.begin(), ws.end()) <= std::max(kmax, 0) &&
            *std::min_element(ws.begin(), ws.end()) >= kmin && *std::max_element(ws.begin(), ws.end()) <= kmax)
            out.push_back(ws);
    return out;
}

Check group_kuranishi(const VerifyConfig& cfg)
{
    return run_group("kuranishi", [&](Check& c) {
        std::mt19937_64 rng(cfg.seed);
        const auto sets = seed_weights(cfg.kmin, cfg.kmax, cfg.order);
        kuranishi::ChartOptions opt;
        opt.kmin = cfg.kmin;
        opt.kmax = cfg.kmax;
        for (int t = 0; t < cfg.kuranishi_seeds && !sets.empty(); ++t) {
            const auto& ws = sets[t % sets.size()];
            auto seed = kuranishi::random_seed(cfg.n, ws, rng, false);
            if (cfg.n == 4) seed = kuranishi::negative_representative(seed).seed;
            const auto s = kuranishi::chart_phi(seed, cfg.order, opt);
            const std::string where = "seed " + std::to_string(t);
            for (const auto& r : kuranishi::integrability_residual(s, cfg.order))
                expect(c, r.zero(), "nonzero residual at order " + std::to_string(r.order) + ", " + where);
            if (kuranishi::nonnegative_weights(seed))
                expect(c, kuranishi::nonnegative_weights(s) && kuranishi::nonnegative_weights(kuranishi::inverse_chart(s)),
                       "negative weight from a nonnegative seed, " + where);
            const int m = std::min(3, cfg.order);
            const auto back = kuranishi::inverse_chart(s.truncated(m));
            bool round = back.term(1).total() == seed.total();
            for (int i = 2; i <= m; ++i) round = round && back.term(i).empty();
            expect(c, round, "round trip failed, " + where);
        }
    });
}

Check group_dimension7(int kmin, int kmax, std::uint64_t seed)
{
    return run_group("dimension7", [&](Check& c) {
        const auto r = obstruction::dim7_analysis(kmin, kmax, seed);
        for (const auto& [k, h] : r.h1_ext) expect(c, h == 0, "H^1 of the extended complex != 0 at k=" + std::to_string(k));
        for (const auto& [k, h] : r.h2) expect(c, h == 0, "H^2 != 0 at k=" + std::to_string(k));
        for (const auto& b : r.brackets)
            expect(c, b.exact, "bracket not exact at " + std::to_string(b.k1) + "," + std::to_string(b.k2));
        expect(c, r.ok, "report not ok");
    });
}

}  // namespace

std::vector<CohomologyRow> cohomology_grid(int max_dim, int kmin, int kmax, int n, bool products)
{
    std::vector<CohomologyRow> rows;
    auto add = [&](const bott::BundleSpec& s) {
        for (int q = 0; q <= s.total_dim(); ++q) rows.push_back({s.describe(), q, bott::h(s, q), cech::cech_dim(s, q)});
    };
    for (int m = 0; m <= max_dim; ++m)
        for (int k = kmin; k <= kmax; ++k) {
            add(bott::BundleSpec::line({m}, {k}));
            if (m > 0) add(bott::BundleSpec::tangent_of({m}, {k}, 0));
        }
    if (products && n >= 2)
        for (int k = kmin; k <= kmax; ++k) {
            add(bott::BundleSpec::line({1, n - 2}, {k, -k}));
            add(bott::BundleSpec::full_tangent({1, n - 2}, {k, -k}));
        }
    return rows;
}

std::vector<Check> verify(const VerifyConfig& cfg)
{
    std::vector<Check> out;
    out.push_back(group_exactalg(cfg.seed));
    out.push_back(group_serre_euler(cfg.kmin, cfg.kmax));
    out.push_back(group_bott_vs_cech(cfg.n, cfg.kmin, cfg.kmax));
    out.push_back(group_crx_identities(cfg.n, cfg.kmin, cfg.kmax));
    for (auto& c : group_bracket(cfg.n, cfg.kmin, cfg.kmax, cfg.seed)) out.push_back(std::move(c));
    out.push_back(group_cohomology_numbers(cfg.n, cfg.kmin, cfg.kmax));
    out.push_back(group_h2(cfg.n, cfg.kmin, cfg.kmax));
    out.push_back(group_obstruction_w(cfg.n, cfg.kmin, cfg.kmax));
    out.push_back(group_classify_gauge(cfg.n, cfg.kmin, cfg.kmax, cfg.seed));
    out.push_back(group_kuranishi(cfg));
    if (cfg.n == 4) out.push_back(group_dimension7(cfg.kmin, cfg.kmax, cfg.seed));
    return out;
}

// ---- acceptance -------------------------------------------------------------------

namespace {

struct Failures {
    long count = 0;
    std::string first;
    void add(bool ok, const std::string& what)
    {
        if (ok) return;
        if (count++ == 0) first = what;
    }
    Outcome outcome(const std::string& summary) const
    {
        if (count == 0) return {true, summary};
        return {false, std::to_string(count) + " failure(s), first: " + first};
    }
};

}  // namespace

Outcome criterion_cohomology()
{
    const auto t0 = std::chrono::steady_clock::now();
    Failures f;
    const auto rows = cohomology_grid(4, -6, 6);
    for (const auto& r : rows)
        f.add(r.match(), r.bundle + " q=" + std::to_string(r.q) + ": " + std::to_string(r.closed) + " vs " +
                             std::to_string(r.oracle));
    for (int n = 2; n <= 4; ++n) {
        const auto t = bott::BundleSpec::tangent_of({n}, {-n - 1}, 0);
        f.add(bott::h(t, n - 1) == 1 && cech::cech_dim(t, n - 1) == 1,
              "h^{n-1}(T(-n-1)) != 1 at n=" + std::to_string(n));
    }
    const double s = seconds_since(t0);
    f.add(s < 120, "runtime " + secs(s) + " over 2 minutes");
    return f.outcome(std::to_string(rows.size()) + " rows agree, exceptional classes = 1 for n=2,3,4, " + secs(s));
}

Outcome criterion_h2()
{
    Failures f;
    for (int n : {3, 5, 6})
        for (int k = -6; k <= 6; ++k) f.add(obstruction::h2_check(n, k).h2 == 0, "H^2 != 0 at " + at(n, k));
    const auto h = obstruction::h2_check(5, 4);
    f.add(h.ambient_h2 == 5, "ambient H^2 at n=5 k=4 is " + std::to_string(h.ambient_h2));
    const auto p3 = bott::BundleSpec::full_tangent({3}, {-4});
    const auto target = bott::BundleSpec::line({3}, {-4});
    f.add(cech::cech_dim(p3, 2) == 1 && cech::cech_dim(target, 3) == 1 && cech::contraction_rank(p3, 2) == 1,
          "contraction H^2(P^3, T(-4)) -> H^3 is not a bijection of lines");
    return f.outcome("H^2 = 0 for n=3,5,6 and |k|<=6; ambient dim 5 at n=5 k=4; contraction rank 1 on 1-dim spaces");
}

Outcome criterion_obstruction_table()
{
    Failures f;
    std::ostringstream table;
    for (int n = 2; n <= 6; ++n) {
        for (int k = -6; k <= 6; ++k) {
            if (n <= 3 && k > 0) continue;
            const long w = obstruction::w_space(crx::build_weight_complex(n, k)).dim;
            if (k <= 0) f.add(w == obstruction::w_dim_closed(n, k), "linear vs closed form at " + at(n, k));
            if (k == 0 || k == -1) f.add(w == 0, "W != 0 at " + at(n, k));
            if (k < -1) f.add(w != 0, "W = 0 at " + at(n, k));
            if (k >= 0) f.add(w == 0, "W != 0 at " + at(n, k));
            if (n == 5 && k == -2) f.add(w == 70, "W_{-2} = " + std::to_string(w) + " at n=5");
            if (n == 5 && k == -3) f.add(w == 280, "W_{-3} = " + std::to_string(w) + " at n=5");
        }
    }
    return f.outcome("W_0 = W_-1 = 0, W_-2 = 70, W_-3 = 280 (n=5), W != 0 for k<-1, W = 0 for k>=0 and n>=4");
}

Outcome criterion_dimension7()
{
    Failures f;
    const auto r = obstruction::dim7_analysis(-6, 6, 1, 8);
    for (const auto& [k, h] : r.h1_ext)
        if (k >= 0) f.add(h == 0, "H^1 of the extended complex = " + std::to_string(h) + " at k=" + std::to_string(k));
    for (const auto& [k, h] : r.h2)
        if (k <= 0) f.add(h == 0, "H^2 = " + std::to_string(h) + " at k=" + std::to_string(k));
    f.add(r.h1_ext.size() == 7 && r.h2.size() == 7, "weight range incomplete");
    f.add(!r.brackets.empty(), "no bracket samples");
    for (const auto& b : r.brackets)
        f.add(b.exact, "bracket of weights " + std::to_string(b.k1) + "," + std::to_string(b.k2) + " not exact");
    return f.outcome("H^1 = 0 on k in [0,6], H^2 = 0 on k in [-6,0], " + std::to_string(r.brackets.size()) +
                     " brackets exact");
}

Outcome criterion_kuranishi(std::uint64_t seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    Failures f;
    kuranishi::ChartOptions opt;
    opt.kmin = -8;
    opt.kmax = 8;
    std::mt19937_64 rng(seed);
    int positive = 0;
    for (int n : {3, 5})
        for (int t = 0; t < 20; ++t) {
            const bool nonneg = t % 2 == 0;
            const auto weights = nonneg ? std::vector<int>{0, 1} : std::vector<int>{-2, 1};
            const auto s0 = kuranishi::random_seed(n, weights, rng, !nonneg);
            const std::string where = "n=" + std::to_string(n) + " seed " + std::to_string(t);
            f.add(!s0.empty(), "empty seed, " + where);
            try {
                const auto s = kuranishi::chart_phi(s0, 4, opt);
                for (const auto& r : kuranishi::integrability_residual(s, 4))
                    f.add(r.zero(), "nonzero residual at order " + std::to_string(r.order) + ", " + where);
                const auto inv = kuranishi::inverse_chart(s);
                if (nonneg) {
                    ++positive;
                    f.add(kuranishi::nonnegative_weights(s), "chart left nonnegative weights, " + where);
                    f.add(kuranishi::nonnegative_weights(inv), "inverse chart left nonnegative weights, " + where);
                } else {
                    // a negative coefficient survives in both directions
                    f.add(!kuranishi::nonnegative_weights(s) && !kuranishi::nonnegative_weights(inv),
                          "negative weight lost, " + where);
                }
                const auto back = kuranishi::inverse_chart(s.truncated(3));
                f.add(back.term(1).total() == s0.total() && back.term(2).empty() && back.term(3).empty(),
                      "order-3 round trip, " + where);
            } catch (const std::exception& e) {
                f.add(false, std::string(e.what()) + ", " + where);
            }
        }
    const double s = seconds_since(t0);
    f.add(s < 300, "runtime " + secs(s) + " over 5 minutes");
    return f.outcome("40 seeds (" + std::to_string(positive) + " nonnegative), residual 0 through order 4, round trip at order 3, " +
                     secs(s));
}

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run_cli(const std::string& cmd)
{
    Run r;
    FILE* p = popen((cmd + " 2>&1").c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

}  // namespace

Outcome criterion_classifier(const std::string& cli, const std::string& data)
{
    Failures f;
    struct Case {
        const char* file;
        int exit;
        bool fillable;
    };
    for (const Case& cs : {Case{"w3_obstructed.json", 1, false}, Case{"gauge_trivial.json", 0, true},
                           Case{"zero_tensor.json", 0, true}}) {
        const auto r = run_cli("\"" + cli + "\" classify --format json --input \"" + data + "/" + cs.file + "\"");
        f.add(r.status == cs.exit, std::string(cs.file) + " exit " + std::to_string(r.status));
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(r.out);
        } catch (const std::exception&) {
            f.add(false, std::string(cs.file) + ": output is not JSON");
            continue;
        }
        const auto& v = j["verdict"];
        f.add(v.value("fillable_N", !cs.fillable) == cs.fillable, std::string(cs.file) + ": wrong verdict");
        if (!cs.fillable) {
            bool k3 = false;
            for (const auto& res : v["residuals"]) k3 = k3 || res.value("k", 0) == -3;
            f.add(k3, std::string(cs.file) + ": no weight -3 residual");
        } else {
            f.add(v["residuals"].empty(), std::string(cs.file) + ": unexpected residual");
        }
        if (std::string(cs.file) == "zero_tensor.json") f.add(v.value("stable", false), "zero tensor not stable");
    }

    std::mt19937_64 rng(7);
    int trials = 0;
    for (int n : {3, 4, 5})
        for (int k : {-2, -3, -4}) {
            const auto ws = obstruction::w_space(crx::build_weight_complex(n, k));
            Cochain w;
            for (std::size_t b = 0; b < ws.blocks.size(); ++b)
                for (std::size_t i = 0; i < ws.blocks[b].split->complement.dim(); ++i)
                    if (rng() % 3 == 0) w = crx::add(w, ws.vector(b, i), Scalar(static_cast<long>(rng() % 5) + 1));
            const auto base = obstruction::classify(crx::DeformationTensor::from_cochain(n, w));
            const auto moved =
                obstruction::classify(crx::DeformationTensor::from_cochain(n, crx::add(w, random_contact(n, k, rng))));
            f.add(same_verdict(base, moved), "verdict changed under a contact term at " + at(n, k));
            ++trials;
        }
    return f.outcome("bundled files give exits 1/0/0, " + std::to_string(trials) + " gauge-invariance trials");
}

Outcome criterion_growth()
{
    Failures f;
    for (int n = 2; n <= 6; ++n) {
        long prev = 0;
        long sum = 0;
        for (int K = -2; K >= -6; --K) {
            sum += obstruction::w_space(crx::build_weight_complex(n, K)).dim;
            if (K < -2)
                f.add(sum > prev, "sum over [" + std::to_string(K) + ", -2] = " + std::to_string(sum) + " not above " +
                                  std::to_string(prev) + " at n=" + std::to_string(n));
            prev = sum;
        }
    }
    return f.outcome("partial sums strictly increase for n=2..6");
}

}  // namespace suites
