#include "crx/factor.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace crx {

using exactalg::Entry;

namespace {

void for_each_composition(int parts, int total, const std::function<void(const std::vector<int>&)>& f)
{
    std::vector<int> c(parts, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == parts - 1) {
            c[i] = left;
            f(c);
            return;
        }
        for (int x = left; x >= 0; --x) {
            c[i] = x;
            rec(i + 1, left - x);
        }
    };
    if (parts > 0) rec(0, total);
}

SparseVector sorted(SparseVector v)
{
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return v;
}

}  // namespace

std::vector<FKey> block_keys(int m, int q, int level, Kind kind, const Weight& w)
{
    std::vector<FKey> keys;
    if (kind == Kind::Tangent && m == 0) return keys;
    std::vector<unsigned> sets;
    for (unsigned J = 0; J < (1u << (m + 1)); ++J)
        if (std::popcount(J) == q) sets.push_back(J);
    for (int s = 0; s <= level; ++s)
        for_each_composition(m + 1, s, [&](const std::vector<int>& beta) {
            for (unsigned J : sets) {
                const int vmax = kind == Kind::Tangent ? m : -1;
                for (int v = (kind == Kind::Tangent ? 0 : -1); v <= vmax; ++v) {
                    FKey k;
                    k.m = static_cast<std::int8_t>(m);
                    bool ok = true;
                    for (int t = 0; t <= m; ++t) {
                        int a = w[t] + beta[t] + ((J >> t) & 1) + (v == t ? 1 : 0);
                        if (a < 0) {
                            ok = false;
                            break;
                        }
                        k.a[t] = static_cast<std::int16_t>(a);
                        k.b[t] = static_cast<std::int16_t>(beta[t]);
                    }
                    if (!ok) continue;
                    k.J = static_cast<std::uint8_t>(J);
                    k.v = static_cast<std::int8_t>(v);
                    if (k.is_normal()) keys.push_back(k);
                }
            }
        });
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::optional<SparseVector> FactorSpace::coords(const FVec& x) const
{
    SparseVector amb;
    for (const auto& [k, c] : x) {
        auto it = index.find(k);
        if (it == index.end()) return std::nullopt;
        amb.emplace_back(it->second, c);
    }
    amb = sorted(std::move(amb));
    SparseVector out;
    std::size_t p = 0;
    for (std::size_t i = 0; i < free_cols.size(); ++i) {
        while (p < amb.size() && amb[p].first < free_cols[i]) ++p;
        if (p < amb.size() && amb[p].first == free_cols[i]) out.emplace_back(i, amb[p].second);
    }
    // membership: the expansion must reproduce x
    SparseVector back;
    for (const auto& [i, c] : out) back = exactalg::add(back, basis[i], c);
    if (back != amb) return std::nullopt;
    return out;
}

FVec FactorSpace::expand(const SparseVector& c) const
{
    FVec out;
    for (const auto& [i, v] : c)
        for (const auto& [col, x] : basis.at(i)) accumulate(out, keys[col], v * x);
    return out;
}

std::vector<long> FactorBlock::cohomology() const
{
    std::vector<long> r(spaces.size(), 0), h(spaces.size(), 0);
    for (std::size_t q = 0; q < d.size(); ++q) r[q] = static_cast<long>(exactalg::rank(d[q]));
    for (std::size_t q = 0; q < spaces.size(); ++q)
        h[q] = static_cast<long>(spaces[q]->dim()) - r[q] - (q > 0 ? r[q - 1] : 0);
    return h;
}

namespace {

std::shared_ptr<FactorSpace> build_space(int m, int q, int level, Kind kind, const Weight& w)
{
    auto s = std::make_shared<FactorSpace>();
    s->m = m;
    s->q = q;
    s->level = level;
    s->kind = kind;
    s->w = w;
    s->keys = block_keys(m, q, level, kind, w);
    for (std::size_t i = 0; i < s->keys.size(); ++i) s->index[s->keys[i]] = i;
    // constraint rows
    std::map<FKey, std::size_t> rows;
    std::vector<Entry> e;
    for (std::size_t c = 0; c < s->keys.size(); ++c)
        for (const auto& [rk, v] : constraint_factor(s->keys[c])) {
            auto [it, fresh] = rows.try_emplace(rk, rows.size());
            e.push_back({it->second, c, v});
        }
    auto cm = SparseMatrix::from_entries(rows.size(), s->keys.size(), e);
    s->basis = exactalg::kernel(cm).basis;
    // reduced echelon form: each kernel vector ends at its free column with entry 1
    for (const auto& v : s->basis) s->free_cols.push_back(v.back().first);
    return s;
}

using BlockId = std::tuple<int, int, int, Weight>;

struct Cache {
    std::recursive_mutex mu;
    std::map<std::tuple<int, int, int, int, Weight>, std::shared_ptr<FactorSpace>> spaces;
    std::map<BlockId, std::unique_ptr<FactorBlock>> blocks;
    std::map<BlockId, std::unique_ptr<Homotopy>> homotopies;
    std::map<std::tuple<int, int, Weight, int>, std::unique_ptr<SparseMatrix>> flats;
    std::map<std::tuple<int, int, Weight>, std::unique_ptr<SparseMatrix>> sharps;
    std::map<std::tuple<int, int, int>, FactorData> data;
};

Cache& cache()
{
    static Cache c;
    return c;
}

std::shared_ptr<FactorSpace> cached_space(int m, int q, int level, Kind kind, const Weight& w)
{
    auto& c = cache();
    std::lock_guard lock(c.mu);
    auto key = std::make_tuple(m, q, level, static_cast<int>(kind), w);
    auto it = c.spaces.find(key);
    if (it != c.spaces.end()) return it->second;
    return c.spaces[key] = build_space(m, q, level, kind, w);
}

// Matrix of a termwise operator between two factor spaces, in kernel coordinates.
SparseMatrix operator_matrix(const FactorSpace& src, const FactorSpace& dst, const std::function<FVec(const FKey&)>& op)
{
    std::vector<SparseVector> cols;
    for (const auto& v : src.basis) {
        FVec img;
        for (const auto& [col, x] : v)
            for (const auto& [k, c] : op(src.keys[col])) accumulate(img, k, x * c);
        auto co = dst.coords(img);
        if (!co) throw std::logic_error("factor operator leaves the target space");
        cols.push_back(*co);
    }
    return SparseMatrix::from_columns(dst.dim(), cols);
}

}  // namespace

const FactorBlock& factor_block(int m, int level, Kind kind, const Weight& w)
{
    auto& c = cache();
    std::lock_guard lock(c.mu);
    BlockId id{m, level, static_cast<int>(kind), w};
    auto it = c.blocks.find(id);
    if (it != c.blocks.end()) return *it->second;
    auto b = std::make_unique<FactorBlock>();
    b->m = m;
    b->level = level;
    b->kind = kind;
    b->w = w;
    for (int q = 0; q <= m; ++q) b->spaces.push_back(cached_space(m, q, level, kind, w));
    for (int q = 0; q < m; ++q) b->d.push_back(operator_matrix(*b->spaces[q], *b->spaces[q + 1], dbar_factor));
    return *(c.blocks[id] = std::move(b));
}

const Homotopy& factor_homotopy(int m, int level, Kind kind, const Weight& w)
{
    auto& c = cache();
    std::lock_guard lock(c.mu);
    BlockId id{m, level, static_cast<int>(kind), w};
    auto it = c.homotopies.find(id);
    if (it != c.homotopies.end()) return *it->second;
    const FactorBlock& b = factor_block(m, level, kind, w);
    return *(c.homotopies[id] = std::make_unique<Homotopy>(b));
}

const SparseMatrix& factor_flat(int m, int level, const Weight& w, int q)
{
    auto& c = cache();
    std::lock_guard lock(c.mu);
    auto key = std::make_tuple(m, level, w, q);
    auto it = c.flats.find(key);
    if (it != c.flats.end()) return *it->second;
    const auto& src = factor_block(m, level, Kind::Tangent, w).space(q);
    const auto& dst = factor_block(m, level, Kind::Line, w).space(q + 1);
    return *(c.flats[key] = std::make_unique<SparseMatrix>(operator_matrix(src, dst, flat_factor)));
}

const SparseMatrix& factor_sharp(int m, int level, const Weight& w)
{
    auto& c = cache();
    std::lock_guard lock(c.mu);
    auto key = std::make_tuple(m, level, w);
    auto it = c.sharps.find(key);
    if (it != c.sharps.end()) return *it->second;
    const auto& src = factor_block(m, level, Kind::Line, w).space(1);
    const auto& dst = factor_block(m, level, Kind::Tangent, w).space(0);
    return *(c.sharps[key] = std::make_unique<SparseMatrix>(operator_matrix(src, dst, sharp_factor)));
}

// ---------------------------------------------------------------- Homotopy

Homotopy::Homotopy(const FactorBlock& block) : block_(&block)
{
    const int top = block.m;
    pivots_.resize(top + 1);
    harmonic_.resize(top + 1);
    d_solver_.resize(top + 1);
    cycle_solver_.resize(top + 1);
    for (int q = 0; q < top; ++q) pivots_[q] = exactalg::pivot_columns(block.d[q]);
    for (int p = 0; p <= top; ++p) {
        const std::size_t n = block.space(p).dim();
        Subspace cycles = p < top ? exactalg::kernel(block.d[p]) : Subspace::full(n);
        Subspace bounds{n, {}};
        if (p > 0)
            for (auto s : pivots_[p - 1]) bounds.basis.push_back(block.d[p - 1].column(s));
        harmonic_[p] = exactalg::complement(bounds, cycles);
        if (p < top) d_solver_[p].emplace(block.d[p]);
        std::vector<SparseVector> cols = bounds.basis;
        cols.insert(cols.end(), harmonic_[p].basis.begin(), harmonic_[p].basis.end());
        cycle_solver_[p].emplace(SparseMatrix::from_columns(n, cols));
    }
    for (int p = 0; p <= top; ++p) {
        const std::size_t n = block.space(p).dim();
        const std::size_t below = p > 0 ? block.space(p - 1).dim() : 0;
        std::vector<SparseVector> hc, pc, pv;
        for (std::size_t i = 0; i < n; ++i) {
            SparseVector e{{i, Scalar(1)}};
            Parts parts = split(p, e);
            hc.push_back(p > 0 ? parts.boundary_source : SparseVector{});
            SparseVector full;
            for (const auto& [j, v] : parts.harmonic) full = exactalg::add(full, harmonic_[p].basis[j], v);
            pc.push_back(std::move(parts.harmonic));
            pv.push_back(std::move(full));
        }
        h_mat_.push_back(SparseMatrix::from_columns(below, hc));
        pic_mat_.push_back(SparseMatrix::from_columns(harmonic_[p].dim(), pc));
        pi_mat_.push_back(SparseMatrix::from_columns(n, pv));
    }
}

Homotopy::Parts Homotopy::split(int p, const SparseVector& y) const
{
    const int top = block_->m;
    SparseVector z = y;
    if (p < top) {
        SparseVector dy = block_->d[p].apply(y);
        if (!dy.empty()) {
            auto l = d_solver_[p]->solve(dy);
            if (!l) throw std::logic_error("homotopy: image solve failed");
            z = exactalg::add(z, *l, Scalar(-1));
        }
    }
    Parts parts;
    if (z.empty()) return parts;
    auto c = cycle_solver_[p]->solve(z);
    if (!c) throw std::logic_error("homotopy: cycle decomposition failed");
    const std::size_t nb = p > 0 ? pivots_[p - 1].size() : 0;
    for (const auto& [i, v] : *c) {
        if (i < nb) parts.boundary_source.emplace_back(pivots_[p - 1][i], v);
        else parts.harmonic.emplace_back(i - nb, v);
    }
    parts.boundary_source = sorted(std::move(parts.boundary_source));
    return parts;
}

SparseVector Homotopy::h(int p, const SparseVector& y) const
{
    if (p == 0) return {};
    return split(p, y).boundary_source;
}

SparseVector Homotopy::pi_coords(int p, const SparseVector& y) const { return split(p, y).harmonic; }

SparseVector Homotopy::pi(int p, const SparseVector& y) const
{
    SparseVector out;
    for (const auto& [i, v] : pi_coords(p, y)) out = exactalg::add(out, harmonic_[p].basis[i], v);
    return out;
}

// ---------------------------------------------------------------- factor data

long orbit_size(const Weight& w, int m)
{
    long n = 1;
    for (int i = 2; i <= m + 1; ++i) n *= i;
    int run = 1;
    for (int t = 1; t <= m + 1; ++t) {
        if (t <= m && w[t] == w[t - 1]) {
            ++run;
            continue;
        }
        for (int i = 2; i <= run; ++i) n /= i;
        run = 1;
    }
    return n;
}

Weight sorted_weight(const Weight& w, int m)
{
    Weight s = w;
    std::sort(s.begin(), s.begin() + m + 1, std::greater<int>());
    return s;
}

std::vector<Weight> weight_orbit(const Weight& w, int m)
{
    Weight s = w;
    std::sort(s.begin(), s.begin() + m + 1);
    std::vector<Weight> out;
    do {
        out.push_back(s);
    } while (std::next_permutation(s.begin(), s.begin() + m + 1));
    std::sort(out.begin(), out.end());
    return out;
}

int start_level(int m, int d)
{
    if (m == 0) return std::max(0, -d);
    return std::max(1, -d - m);
}

namespace {

// Sorted (non-increasing) weights with the given sum inside [lo, hi].
void for_each_sorted_weight(int m, int sum, int lo, int hi, const std::function<void(const Weight&)>& f)
{
    Weight w{};
    std::function<void(int, int, int)> rec = [&](int t, int left, int cap) {
        if (t == m) {
            if (left >= lo && left <= cap) {
                w[t] = left;
                f(w);
            }
            return;
        }
        const int rest = m - t;
        for (int x = cap; x >= lo; --x) {
            // remaining entries lie in [lo, x]
            if (left - x < rest * lo || left - x > rest * x) continue;
            w[t] = x;
            rec(t + 1, left - x, x);
        }
    };
    rec(0, sum, hi);
}

long induced_flat_rank(const FactorBlock& tb, const FactorBlock& lb, int q, const SparseMatrix& flat)
{
    // rank of H^q(T) -> H^{q+1}(O)
    const auto& tsp = tb.space(q);
    Subspace cycles = q < tb.m ? exactalg::kernel(tb.d[q]) : Subspace::full(tsp.dim());
    std::vector<SparseVector> bounds = exactalg::image(lb.d[q]).basis;
    std::vector<SparseVector> all = bounds;
    for (const auto& z : cycles.basis) all.push_back(flat.apply(z));
    const std::size_t n = lb.space(q + 1).dim();
    return static_cast<long>(exactalg::rank_of(all, n)) - static_cast<long>(exactalg::rank_of(bounds, n));
}

}  // namespace

FactorData factor_data(int m, int d, int level)
{
    {
        auto& c = cache();
        std::lock_guard lock(c.mu);
        auto it = c.data.find({m, d, level});
        if (it != c.data.end()) return it->second;
    }
    FactorData fd;
    fd.m = m;
    fd.d = d;
    fd.level = level;
    fd.h_line.assign(m + 1, 0);
    fd.h_tangent.assign(m + 1, 0);
    fd.flat_rank.assign(m + 1, 0);
    const int lo = -(level + 2), hi = d + level + m + 2;
    for_each_sorted_weight(m, d, lo, hi, [&](const Weight& w) {
        const auto& lb = factor_block(m, level, Kind::Line, w);
        bool carries = false;
        const long mult = orbit_size(w, m);
        auto hl = lb.cohomology();
        for (int q = 0; q <= m; ++q) {
            fd.h_line[q] += mult * hl[q];
            carries = carries || hl[q] != 0;
        }
        if (m >= 1) {
            const auto& tb = factor_block(m, level, Kind::Tangent, w);
            auto ht = tb.cohomology();
            for (int q = 0; q <= m; ++q) {
                fd.h_tangent[q] += mult * ht[q];
                carries = carries || ht[q] != 0;
            }
            for (int q = 0; q < m; ++q)
                if (ht[q] != 0 && hl[q + 1] != 0)
                    fd.flat_rank[q] += mult * induced_flat_rank(tb, lb, q, factor_flat(m, level, w, q));
        }
        if (carries) fd.support.push_back(w);
    });
    auto& c = cache();
    std::lock_guard lock(c.mu);
    return c.data[{m, d, level}] = fd;
}

std::optional<FactorData> stable_factor_data(int m, int d, int start, int max_steps)
{
    FactorData prev = factor_data(m, d, start);
    for (int s = 1; s <= max_steps; ++s) {
        FactorData next = factor_data(m, d, start + s);
        if (next.same_numbers(prev)) return prev;
        prev = std::move(next);
    }
    return std::nullopt;
}

}  // namespace crx
