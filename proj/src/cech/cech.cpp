#include "cech/cech.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <mutex>
#include <stdexcept>

namespace cech {

using exactalg::Echelon;
using exactalg::Entry;
using exactalg::ImageSolver;
using exactalg::SparseVector;
using exactalg::Subspace;

// ---------------------------------------------------------------- FiniteComplex

std::vector<long> FiniteComplex::ranks() const
{
    std::vector<long> r(dims.size(), 0);
    for (std::size_t q = 0; q < d.size(); ++q) r[q] = static_cast<long>(exactalg::rank(d[q]));
    return r;
}

std::vector<long> FiniteComplex::cohomology() const
{
    auto r = ranks();
    std::vector<long> h(dims.size());
    for (std::size_t q = 0; q < dims.size(); ++q)
        h[q] = static_cast<long>(dims[q]) - r[q] - (q > 0 ? r[q - 1] : 0);
    return h;
}

bool FiniteComplex::squares_to_zero() const
{
    for (std::size_t q = 0; q + 1 < d.size(); ++q)
        if (d[q + 1].multiply(d[q]).nnz() != 0) return false;
    return true;
}

std::size_t tensor_offset(const FiniteComplex& a, const FiniteComplex& b, int p, int r)
{
    std::size_t off = 0;
    for (int pp = 0; pp < p; ++pp) {
        int rr = p + r - pp;
        if (rr >= 0 && rr <= b.top()) off += a.dims[pp] * b.dims[rr];
    }
    return off;
}

FiniteComplex tensor(const FiniteComplex& a, const FiniteComplex& b)
{
    FiniteComplex t;
    const int top = a.top() + b.top();
    t.dims.assign(top + 1, 0);
    for (int p = 0; p <= a.top(); ++p)
        for (int r = 0; r <= b.top(); ++r) t.dims[p + r] += a.dims[p] * b.dims[r];
    for (int n = 0; n < top; ++n) {
        std::vector<Entry> e;
        for (int p = 0; p <= a.top(); ++p) {
            int r = n - p;
            if (r < 0 || r > b.top()) continue;
            std::size_t src = tensor_offset(a, b, p, r);
            for (std::size_t i = 0; i < a.dims[p]; ++i)
                for (std::size_t j = 0; j < b.dims[r]; ++j) {
                    std::size_t col = src + i * b.dims[r] + j;
                    if (p < a.top()) {
                        std::size_t dst = tensor_offset(a, b, p + 1, r);
                        for (const auto& [i2, v] : a.d[p].column(i)) e.push_back({dst + i2 * b.dims[r] + j, col, v});
                    }
                    if (r < b.top()) {
                        std::size_t dst = tensor_offset(a, b, p, r + 1);
                        Scalar s = (p % 2) ? Scalar(-1) : Scalar(1);
                        for (const auto& [j2, v] : b.d[r].column(j))
                            e.push_back({dst + i * b.dims[r + 1] + j2, col, s * v});
                    }
                }
        }
        t.d.push_back(SparseMatrix::from_entries(t.dims[n + 1], t.dims[n], e));
    }
    return t;
}

// ---------------------------------------------------------------- factor blocks

namespace {

using Mask = std::uint32_t;

// subsets of {0..m} of size s, lexicographic as sorted tuples
std::vector<Mask> subsets_lex(int m, int s)
{
    std::vector<Mask> out;
    std::function<void(int, int, Mask)> rec = [&](int start, int left, Mask cur) {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i <= m; ++i) rec(i + 1, left - 1, cur | (Mask(1) << i));
    };
    rec(0, s, 0);
    return out;
}

Mask negative_mask(const std::vector<int>& a)
{
    Mask m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] < 0) m |= Mask(1) << i;
    return m;
}

int sign_of_insertion(Mask set, int j)
{
    // position of j inside set ∪ {j}
    int pos = std::popcount(set & ((Mask(1) << j) - 1));
    return (pos % 2) ? -1 : 1;
}

struct LineShape {
    FiniteComplex cx;
    std::vector<std::vector<Mask>> cells;  // per degree
    std::vector<std::map<Mask, std::size_t>> index;
};

LineShape line_shape(int m, Mask neg)
{
    LineShape s;
    s.cells.resize(m + 1);
    s.index.resize(m + 1);
    for (int q = 0; q <= m; ++q) {
        for (Mask c : subsets_lex(m, q + 1))
            if ((c & neg) == neg) {
                s.index[q][c] = s.cells[q].size();
                s.cells[q].push_back(c);
            }
        s.cx.dims.push_back(s.cells[q].size());
    }
    for (int q = 0; q < m; ++q) {
        std::vector<Entry> e;
        for (std::size_t col = 0; col < s.cells[q].size(); ++col) {
            Mask c = s.cells[q][col];
            for (int j = 0; j <= m; ++j) {
                if (c & (Mask(1) << j)) continue;
                Mask c2 = c | (Mask(1) << j);
                e.push_back({s.index[q + 1].at(c2), col, Scalar(sign_of_insertion(c, j))});
            }
        }
        s.cx.d.push_back(SparseMatrix::from_entries(s.cx.dims[q + 1], s.cx.dims[q], e));
    }
    return s;
}

// Quotient of O(k+1)^{m+1} by the Euler image of O(k) at weight w.
struct TangentShape {
    FiniteComplex cx;
    std::vector<std::vector<std::pair<int, Mask>>> cells;  // kept unit vectors (component t, cell)
    // per degree: ambient A^q layout and a solver for [kept units | Euler image]
    std::vector<std::vector<std::pair<int, Mask>>> ambient;
    std::vector<std::map<std::pair<int, Mask>, std::size_t>> ambient_index;
    std::vector<ImageSolver> reducer;
    std::vector<std::size_t> kept_count;
    int m = 0;
};

TangentShape tangent_shape(int m, const std::vector<Mask>& comp_neg, Mask base_neg)
{
    TangentShape s;
    s.m = m;
    std::vector<LineShape> comps;
    for (int t = 0; t <= m; ++t) comps.push_back(line_shape(m, comp_neg[t]));
    LineShape base = line_shape(m, base_neg);
    s.cells.resize(m + 1);
    s.ambient.resize(m + 1);
    s.ambient_index.resize(m + 1);
    std::vector<SparseMatrix> iota(m + 1);
    for (int q = 0; q <= m; ++q) {
        for (int t = 0; t <= m; ++t)
            for (Mask c : comps[t].cells[q]) {
                s.ambient_index[q][{t, c}] = s.ambient[q].size();
                s.ambient[q].push_back({t, c});
            }
        std::vector<Entry> e;
        for (std::size_t col = 0; col < base.cells[q].size(); ++col)
            for (int t = 0; t <= m; ++t)
                e.push_back({s.ambient_index[q].at({t, base.cells[q][col]}), col, Scalar(1)});
        iota[q] = SparseMatrix::from_entries(s.ambient[q].size(), base.cells[q].size(), e);
        // greedy unit vectors completing the Euler image
        Echelon ech(s.ambient[q].size());
        for (const auto& c : iota[q].columns()) ech.insert(c);
        std::vector<SparseVector> cols;
        for (std::size_t i = 0; i < s.ambient[q].size(); ++i) {
            SparseVector u{{i, Scalar(1)}};
            if (ech.insert(u)) {
                s.cells[q].push_back(s.ambient[q][i]);
                cols.push_back(u);
            }
        }
        s.kept_count.push_back(cols.size());
        for (const auto& c : iota[q].columns()) cols.push_back(c);
        s.reducer.emplace_back(SparseMatrix::from_columns(s.ambient[q].size(), cols));
        s.cx.dims.push_back(s.cells[q].size());
    }
    for (int q = 0; q < m; ++q) {
        std::vector<SparseVector> cols;
        for (const auto& [t, c] : s.cells[q]) {
            std::size_t col = comps[t].index[q].at(c);
            SparseVector img;
            for (const auto& [r, v] : comps[t].cx.d[q].column(col))
                img.emplace_back(s.ambient_index[q + 1].at({t, comps[t].cells[q + 1][r]}), v);
            std::sort(img.begin(), img.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            auto coords = s.reducer[q + 1].solve(img);
            if (!coords) throw std::logic_error("tangent_shape: reduction failed");
            SparseVector kept;
            for (const auto& [i, v] : *coords)
                if (i < s.kept_count[q + 1]) kept.emplace_back(i, v);
            cols.push_back(kept);
        }
        s.cx.d.push_back(SparseMatrix::from_columns(s.cx.dims[q + 1], cols));
    }
    return s;
}

void enumerate_exponents(int m, int sum, int box, const std::function<void(const std::vector<int>&)>& f)
{
    std::vector<int> a(m + 1);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == m) {
            if (left >= -box && left <= box) {
                a[m] = left;
                f(a);
            }
            return;
        }
        for (int v = -box; v <= box; ++v) {
            a[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, sum);
}

// Factor part of a bundle: line or tangent on P^m with twist d.
struct FactorKind {
    int m;
    int d;
    bool tangent;
};

// Cached per-factor block shapes keyed by the regularity pattern.
class ShapeCache {
public:
    // pattern key of a block (weight w): negative masks of all involved monomials
    std::vector<Mask> key(const FactorKind& f, const std::vector<int>& w) const
    {
        if (!f.tangent) return {negative_mask(w)};
        std::vector<Mask> k;
        for (int t = 0; t <= f.m; ++t) {
            auto a = w;
            a[t] += 1;
            k.push_back(negative_mask(a));
        }
        k.push_back(negative_mask(w));
        return k;
    }

    const FiniteComplex& complex(const FactorKind& f, const std::vector<Mask>& k)
    {
        auto full = k;
        full.push_back(static_cast<Mask>(f.m));
        full.push_back(f.tangent ? 1u : 0u);
        auto it = complexes_.find(full);
        if (it != complexes_.end()) return it->second;
        FiniteComplex cx;
        if (f.tangent) {
            std::vector<Mask> comp(k.begin(), k.end() - 1);
            auto& ts = tangents_[full] = tangent_shape(f.m, comp, k.back());
            cx = ts.cx;
        } else {
            auto& ls = lines_[full] = line_shape(f.m, k[0]);
            cx = ls.cx;
        }
        return complexes_[full] = cx;
    }

    const LineShape& line(int m, Mask neg)
    {
        std::vector<Mask> full{neg, static_cast<Mask>(m), 0u};
        auto it = lines_.find(full);
        if (it == lines_.end()) {
            complex({m, 0, false}, {neg});
            it = lines_.find(full);
        }
        return it->second;
    }

    const TangentShape& tangent(const FactorKind& f, const std::vector<Mask>& k)
    {
        auto full = k;
        full.push_back(static_cast<Mask>(f.m));
        full.push_back(1u);
        auto it = tangents_.find(full);
        if (it == tangents_.end()) {
            complex(f, k);
            it = tangents_.find(full);
        }
        return it->second;
    }

    const FiniteComplex& tensor_complex(const FiniteComplex& a, const FiniteComplex& b,
                                        const std::vector<Mask>& ka, const std::vector<Mask>& kb)
    {
        auto key = tensor_key(a, b, ka, kb);
        auto it = tensors_.find(key);
        if (it != tensors_.end()) return it->second;
        return tensors_[key] = tensor(a, b);
    }

    const std::vector<long>& tensor_cohomology(const FiniteComplex& a, const FiniteComplex& b,
                                               const std::vector<Mask>& ka, const std::vector<Mask>& kb)
    {
        auto key = tensor_key(a, b, ka, kb);
        auto it = tensor_h_.find(key);
        if (it != tensor_h_.end()) return it->second;
        return tensor_h_[key] = tensor_complex(a, b, ka, kb).cohomology();
    }

    const std::vector<long>& cohomology(const FactorKind& f, const std::vector<Mask>& k)
    {
        auto full = k;
        full.push_back(static_cast<Mask>(f.m));
        full.push_back(f.tangent ? 1u : 0u);
        auto it = h_.find(full);
        if (it != h_.end()) return it->second;
        return h_[full] = complex(f, k).cohomology();
    }

private:
    static std::pair<std::vector<Mask>, std::vector<Mask>> tensor_key(const FiniteComplex& a, const FiniteComplex& b,
                                                                      std::vector<Mask> ka, std::vector<Mask> kb)
    {
        // line keys have length 1, tangent keys m+2, so the dimension completes the key
        ka.push_back(static_cast<Mask>(a.top()));
        kb.push_back(static_cast<Mask>(b.top()));
        return {std::move(ka), std::move(kb)};
    }

    std::map<std::vector<Mask>, std::vector<long>> h_;
    std::map<std::pair<std::vector<Mask>, std::vector<Mask>>, std::vector<long>> tensor_h_;
    std::map<std::vector<Mask>, FiniteComplex> complexes_;
    std::map<std::vector<Mask>, LineShape> lines_;
    std::map<std::vector<Mask>, TangentShape> tangents_;
    std::map<std::pair<std::vector<Mask>, std::vector<Mask>>, FiniteComplex> tensors_;
};

// Shapes depend only on regularity patterns, so they are shared across calls.
std::recursive_mutex& cache_mutex()
{
    static std::recursive_mutex m;
    return m;
}

ShapeCache& shared_cache()
{
    static ShapeCache c;
    return c;
}

// A bundle is a direct sum of "parts", each a tensor product of factor kinds.
using Part = std::vector<FactorKind>;

std::vector<Part> parts_of(const bott::BundleSpec& b)
{
    b.validate();
    std::vector<Part> parts;
    auto make = [&](int tangent_factor) {
        Part p;
        for (std::size_t i = 0; i < b.factors.size(); ++i)
            p.push_back({b.factors[i], b.twist[i], static_cast<int>(i) == tangent_factor});
        return p;
    };
    switch (b.structure) {
    case bott::Structure::Line: parts.push_back(make(-1)); break;
    case bott::Structure::TangentOfFactor: parts.push_back(make(b.tangent_factor)); break;
    case bott::Structure::FullTangent:
        for (std::size_t i = 0; i < b.factors.size(); ++i)
            if (b.factors[i] >= 1) parts.push_back(make(static_cast<int>(i)));
        break;
    }
    return parts;
}

struct FactorBlocks {
    // pattern key -> list of weights
    std::map<std::vector<Mask>, std::vector<std::vector<int>>> by_key;
};

FactorBlocks factor_blocks(ShapeCache& cache, const FactorKind& f, int box)
{
    FactorBlocks fb;
    enumerate_exponents(f.m, f.d, box, [&](const std::vector<int>& w) { fb.by_key[cache.key(f, w)].push_back(w); });
    return fb;
}

// Complex of one block of a part (tensor over factors).
const FiniteComplex& part_complex(ShapeCache& cache, const Part& part, const std::vector<std::vector<Mask>>& keys,
                                  std::vector<FiniteComplex>& scratch)
{
    if (part.size() == 1) return cache.complex(part[0], keys[0]);
    const FiniteComplex& a = cache.complex(part[0], keys[0]);
    const FiniteComplex& b = cache.complex(part[1], keys[1]);
    (void)scratch;
    return cache.tensor_complex(a, b, keys[0], keys[1]);
}

int coordinate_offset(const bott::BundleSpec& b, int factor)
{
    int off = 0;
    for (int i = 0; i < factor; ++i) off += b.factors[i] + 1;
    return off;
}

// Cells of one factor basis element of degree p.
struct FactorCell {
    Mask set;
    std::vector<int> exps;
    int gen;  // local generator, -1 for line
};

std::vector<FactorCell> factor_cells(ShapeCache& cache, const FactorKind& f, const std::vector<Mask>& key,
                                     const std::vector<int>& w, int p)
{
    std::vector<FactorCell> out;
    if (f.tangent) {
        const auto& ts = cache.tangent(f, key);
        for (const auto& [t, c] : ts.cells[p]) {
            auto a = w;
            a[t] += 1;
            out.push_back({c, a, t});
        }
    } else {
        const auto& ls = cache.line(f.m, key[0]);
        for (Mask c : ls.cells[p]) out.push_back({c, w, -1});
    }
    return out;
}

Cell make_cell(const bott::BundleSpec& b, const Part& part, const std::vector<const FactorCell*>& fc)
{
    Cell cell;
    for (std::size_t i = 0; i < part.size(); ++i) {
        cell.sets.push_back(fc[i]->set);
        cell.exps.insert(cell.exps.end(), fc[i]->exps.begin(), fc[i]->exps.end());
        if (fc[i]->gen >= 0) cell.gen = coordinate_offset(b, static_cast<int>(i)) + fc[i]->gen;
    }
    return cell;
}

// Enumerate cells of a part block in degree n in the tensor basis order.
std::vector<Cell> block_cells(ShapeCache& cache, const bott::BundleSpec& b, const Part& part,
                              const std::vector<std::vector<Mask>>& keys, const std::vector<std::vector<int>>& ws, int n)
{
    std::vector<Cell> out;
    if (part.size() == 1) {
        for (const auto& c : factor_cells(cache, part[0], keys[0], ws[0], n)) out.push_back(make_cell(b, part, {&c}));
        return out;
    }
    const auto& ca = cache.complex(part[0], keys[0]);
    const auto& cb = cache.complex(part[1], keys[1]);
    for (int p = 0; p <= ca.top(); ++p) {
        int r = n - p;
        if (r < 0 || r > cb.top()) continue;
        auto fa = factor_cells(cache, part[0], keys[0], ws[0], p);
        auto fbv = factor_cells(cache, part[1], keys[1], ws[1], r);
        for (const auto& x : fa)
            for (const auto& y : fbv) out.push_back(make_cell(b, part, {&x, &y}));
    }
    return out;
}

// Identify the block of a cell: per-factor weight (tangent factor: exps - e_gen).
std::vector<std::vector<int>> cell_weights(const bott::BundleSpec& b, const Part& part, const Cell& c)
{
    std::vector<std::vector<int>> ws;
    int off = 0;
    for (std::size_t i = 0; i < part.size(); ++i) {
        std::vector<int> w(c.exps.begin() + off, c.exps.begin() + off + part[i].m + 1);
        if (part[i].tangent) {
            int g = c.gen - off;
            if (g < 0 || g > part[i].m) throw std::invalid_argument("cell generator outside its factor");
            w[g] -= 1;
        }
        ws.push_back(w);
        off += part[i].m + 1;
    }
    (void)b;
    return ws;
}

int part_of_cell(const bott::BundleSpec& b, const std::vector<Part>& parts, const Cell& c)
{
    if (parts.size() == 1) return 0;
    // full tangent: decide by the factor owning the generator
    int off = 0;
    for (std::size_t i = 0; i < b.factors.size(); ++i) {
        if (c.gen >= off && c.gen <= off + b.factors[i]) {
            for (std::size_t p = 0; p < parts.size(); ++p)
                if (parts[p][i].tangent) return static_cast<int>(p);
        }
        off += b.factors[i] + 1;
    }
    throw std::invalid_argument("cell generator does not match the bundle");
}

// Local coordinates of a factor cell inside its block's degree-p space.
// Tangent factors: ambient unit vector reduced modulo the Euler image.
SparseVector factor_coords(ShapeCache& cache, const FactorKind& f, const std::vector<Mask>& key, int p, Mask set,
                           int gen)
{
    if (!f.tangent) {
        const auto& ls = cache.line(f.m, key[0]);
        auto it = ls.index[p].find(set);
        if (it == ls.index[p].end()) throw std::invalid_argument("cell not regular for its monomial");
        return {{it->second, Scalar(1)}};
    }
    const auto& ts = cache.tangent(f, key);
    auto it = ts.ambient_index[p].find({gen, set});
    if (it == ts.ambient_index[p].end()) throw std::invalid_argument("cell not regular for its monomial");
    auto coords = ts.reducer[p].solve({{it->second, Scalar(1)}});
    SparseVector kept;
    for (const auto& [i, v] : *coords)
        if (i < ts.kept_count[p]) kept.emplace_back(i, v);
    return kept;
}

struct BlockId {
    int part;
    std::vector<std::vector<int>> ws;
    auto operator<=>(const BlockId&) const = default;
};

// Decompose a cochain into blocks with local coordinates in degree q.
std::map<BlockId, SparseVector> localize(ShapeCache& cache, const bott::BundleSpec& b, const std::vector<Part>& parts,
                                         const std::map<Cell, Scalar>& cochain, int q)
{
    std::map<BlockId, SparseVector> out;
    for (const auto& [cell, val] : cochain) {
        int pi = part_of_cell(b, parts, cell);
        const Part& part = parts[pi];
        auto ws = cell_weights(b, part, cell);
        std::vector<std::vector<Mask>> keys;
        for (std::size_t i = 0; i < part.size(); ++i) keys.push_back(cache.key(part[i], ws[i]));
        SparseVector coords;
        int off = 0;
        if (part.size() == 1) {
            coords = factor_coords(cache, part[0], keys[0], std::popcount(cell.sets[0]) - 1, cell.sets[0], cell.gen);
        } else {
            int p = std::popcount(cell.sets[0]) - 1, r = std::popcount(cell.sets[1]) - 1;
            int g0 = part[0].tangent ? cell.gen : -1;
            int g1 = part[1].tangent ? cell.gen - (part[0].m + 1) : -1;
            auto c0 = factor_coords(cache, part[0], keys[0], p, cell.sets[0], g0);
            auto c1 = factor_coords(cache, part[1], keys[1], r, cell.sets[1], g1);
            const auto& ca = cache.complex(part[0], keys[0]);
            const auto& cb = cache.complex(part[1], keys[1]);
            std::size_t base = tensor_offset(ca, cb, p, r);
            for (const auto& [i, vi] : c0)
                for (const auto& [j, vj] : c1) coords.emplace_back(base + i * cb.dims[r] + j, vi * vj);
            std::sort(coords.begin(), coords.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        }
        (void)off;
        (void)q;
        auto& acc = out[BlockId{pi, ws}];
        acc = exactalg::add(acc, coords, val);
    }
    return out;
}

const FiniteComplex& block_complex(ShapeCache& cache, const Part& part, const std::vector<std::vector<int>>& ws)
{
    std::vector<std::vector<Mask>> keys;
    for (std::size_t i = 0; i < part.size(); ++i) keys.push_back(cache.key(part[i], ws[i]));
    std::vector<FiniteComplex> scratch;
    return part_complex(cache, part, keys, scratch);
}

void check_degree(const bott::BundleSpec& b, int q)
{
    if (q < 0 || q > b.total_dim()) throw std::invalid_argument("degree outside the base dimension range");
}

}  // namespace

// ---------------------------------------------------------------- public API

int min_box(const bott::BundleSpec& b)
{
    b.validate();
    int t = 0;
    for (int d : b.twist) t = std::max(t, std::abs(d));
    return t + b.total_dim() + 2;
}

long cech_dim(const bott::BundleSpec& b, int q, int box)
{
    if (box < min_box(b)) throw std::invalid_argument("cech_dim: exponent box below the stabilization bound");
    if (q < 0 || q > b.total_dim()) return 0;
    std::lock_guard lock(cache_mutex());
    ShapeCache& cache = shared_cache();
    long total = 0;
    for (const Part& part : parts_of(b)) {
        std::vector<FactorBlocks> fbs;
        for (const auto& f : part) fbs.push_back(factor_blocks(cache, f, box));
        if (part.size() == 1) {
            for (const auto& [k, ws] : fbs[0].by_key) {
                const auto& h = cache.cohomology(part[0], k);
                if (q <= static_cast<int>(h.size()) - 1) total += h[q] * static_cast<long>(ws.size());
            }
        } else {
            for (const auto& [k0, w0] : fbs[0].by_key)
                for (const auto& [k1, w1] : fbs[1].by_key) {
                    const auto& h = cache.tensor_cohomology(cache.complex(part[0], k0), cache.complex(part[1], k1), k0, k1);
                    if (q < static_cast<int>(h.size())) total += h[q] * static_cast<long>(w0.size() * w1.size());
                }
        }
    }
    return total;
}

long cech_dim(const bott::BundleSpec& b, int q) { return cech_dim(b, q, min_box(b)); }

bott::CohomologyTable cech_table(const bott::BundleSpec& b, int box)
{
    bott::CohomologyTable t{b, {}, bott::Source::Oracle};
    for (int q = 0; q <= b.total_dim(); ++q) t.dims.push_back(cech_dim(b, q, box));
    return t;
}

std::vector<MonomialBlock> contributing_blocks(const bott::BundleSpec& b, int q, int box)
{
    if (box < min_box(b)) throw std::invalid_argument("contributing_blocks: exponent box below the stabilization bound");
    check_degree(b, q);
    std::lock_guard lock(cache_mutex());
    ShapeCache& cache = shared_cache();
    std::vector<MonomialBlock> out;
    for (const Part& part : parts_of(b)) {
        std::vector<FactorBlocks> fbs;
        for (const auto& f : part) fbs.push_back(factor_blocks(cache, f, box));
        auto emit = [&](const FiniteComplex& cx, const std::vector<std::vector<int>>& ws) {
            MonomialBlock mb{b, {}, {}};
            for (const auto& w : ws) mb.multidegree.insert(mb.multidegree.end(), w.begin(), w.end());
            for (int p = 0; p <= cx.top(); ++p) mb.cochain_dims[p] = static_cast<long>(cx.dims[p]);
            out.push_back(mb);
        };
        if (part.size() == 1) {
            for (const auto& [k, ws] : fbs[0].by_key) {
                if (cache.cohomology(part[0], k)[q] == 0) continue;
                for (const auto& w : ws) emit(cache.complex(part[0], k), {w});
            }
        } else {
            for (const auto& [k0, w0] : fbs[0].by_key)
                for (const auto& [k1, w1] : fbs[1].by_key) {
                    const auto& c0 = cache.complex(part[0], k0);
                    const auto& c1 = cache.complex(part[1], k1);
                    if (cache.tensor_cohomology(c0, c1, k0, k1)[q] == 0) continue;
                    const auto& cx = cache.tensor_complex(c0, c1, k0, k1);
                    for (const auto& a : w0)
                        for (const auto& c : w1) emit(cx, {a, c});
                }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.multidegree < y.multidegree; });
    return out;
}

std::vector<CechClass> cech_basis(const bott::BundleSpec& b, int q)
{
    check_degree(b, q);
    const int box = min_box(b);
    std::lock_guard lock(cache_mutex());
    ShapeCache& cache = shared_cache();
    std::vector<CechClass> out;
    auto parts = parts_of(b);
    for (const Part& part : parts) {
        std::vector<FactorBlocks> fbs;
        for (const auto& f : part) fbs.push_back(factor_blocks(cache, f, box));
        auto reps_of = [&](const FiniteComplex& cx) {
            // kernel basis vectors completing the image
            Subspace ker = (q < cx.top()) ? exactalg::kernel(cx.d[q]) : Subspace::full(cx.dims[q]);
            Subspace img = (q > 0) ? exactalg::image(cx.d[q - 1]) : Subspace::zero(cx.dims[q]);
            return exactalg::complement(img, ker);
        };
        auto emit = [&](const std::vector<std::vector<Mask>>& keys, const Subspace& reps,
                        const std::vector<std::vector<int>>& ws) {
            auto cells = block_cells(cache, b, part, keys, ws, q);
            for (const auto& v : reps.basis) {
                CechClass c{b, q, {}};
                for (const auto& [i, x] : v) c.cochain[cells[i]] = x;
                out.push_back(std::move(c));
            }
        };
        if (part.size() == 1) {
            for (const auto& [k, ws] : fbs[0].by_key) {
                if (cache.cohomology(part[0], k)[q] == 0) continue;
                Subspace reps = reps_of(cache.complex(part[0], k));
                for (const auto& w : ws) emit({k}, reps, {w});
            }
        } else {
            for (const auto& [k0, w0] : fbs[0].by_key)
                for (const auto& [k1, w1] : fbs[1].by_key) {
                    const auto& c0 = cache.complex(part[0], k0);
                    const auto& c1 = cache.complex(part[1], k1);
                    if (cache.tensor_cohomology(c0, c1, k0, k1)[q] == 0) continue;
                    Subspace reps = reps_of(cache.tensor_complex(c0, c1, k0, k1));
                    for (const auto& a : w0)
                        for (const auto& c : w1) emit({k0, k1}, reps, {a, c});
                }
        }
    }
    return out;
}

bott::BundleSpec multiplied_bundle(const bott::BundleSpec& b, int coordinate)
{
    b.validate();
    bott::BundleSpec out = b;
    int off = 0;
    for (std::size_t i = 0; i < b.factors.size(); ++i) {
        if (coordinate >= off && coordinate <= off + b.factors[i]) {
            out.twist[i] += 1;
            return out;
        }
        off += b.factors[i] + 1;
    }
    throw std::invalid_argument("multiply: coordinate index out of range");
}

CechClass multiply(const bott::BundleSpec& b, int coordinate, const CechClass& c)
{
    CechClass out{multiplied_bundle(b, coordinate), c.degree, {}};
    for (const auto& [cell, v] : c.cochain) {
        Cell x = cell;
        x.exps.at(coordinate) += 1;
        out.cochain[x] = v;
    }
    return out;
}

CechClass contract_with_F(const CechClass& c)
{
    const auto& b = c.bundle;
    b.validate();
    if (b.structure == bott::Structure::Line) throw std::invalid_argument("contract_with_F: class must be tangent valued");
    bott::BundleSpec target = bott::BundleSpec::line(b.factors, b.twist);
    CechClass out{target, c.degree + 1, {}};
    const bool product = b.factors.size() == 2;
    for (const auto& [cell, v] : c.cochain) {
        int f = 0, off = 0;
        for (std::size_t i = 0; i < b.factors.size(); ++i) {
            if (cell.gen >= off && cell.gen <= off + b.factors[i]) {
                f = static_cast<int>(i);
                break;
            }
            off += b.factors[i] + 1;
        }
        const int m = b.factors[f];
        const int g = cell.gen - off;
        const Mask set = cell.sets[f];
        const int last = 31 - std::countl_zero(set);
        Scalar s = (product && f == 0) ? Scalar(-1) : Scalar(1);
        if (product && f == 0 && (std::popcount(cell.sets[1]) - 1) % 2) s = -s;
        for (int j = last + 1; j <= m; ++j) {
            // (x^a d_g) contracted with dlog(x_j / x_last)
            Scalar coeff = 0;
            if (g == j) coeff += 1;
            if (g == last) coeff -= 1;
            if (sgn(coeff) == 0) continue;
            Cell x = cell;
            x.sets[f] = set | (Mask(1) << j);
            x.exps[off + g] -= 1;
            x.gen = -1;
            Scalar val = s * coeff * v;
            auto it = out.cochain.find(x);
            if (it == out.cochain.end()) out.cochain[x] = val;
            else {
                it->second += val;
                if (sgn(it->second) == 0) out.cochain.erase(it);
            }
        }
    }
    return out;
}

namespace {

// Apply the block differential to the localized cochain; returns true if all vanish.
bool blocks_all(const CechClass& c, const std::function<bool(const FiniteComplex&, const SparseVector&)>& pred)
{
    std::lock_guard lock(cache_mutex());
    ShapeCache& cache = shared_cache();
    auto parts = parts_of(c.bundle);
    auto loc = localize(cache, c.bundle, parts, c.cochain, c.degree);
    for (const auto& [id, v] : loc) {
        const auto& cx = block_complex(cache, parts[id.part], id.ws);
        if (!pred(cx, v)) return false;
    }
    return true;
}

}  // namespace

bool is_cocycle(const CechClass& c)
{
    return blocks_all(c, [&](const FiniteComplex& cx, const SparseVector& v) {
        if (c.degree >= cx.top()) return true;
        return cx.d[c.degree].apply(v).empty();
    });
}

bool is_zero_class(const CechClass& c)
{
    return blocks_all(c, [&](const FiniteComplex& cx, const SparseVector& v) {
        if (v.empty()) return true;
        if (c.degree == 0) return false;
        return exactalg::solve(cx.d[c.degree - 1], v).has_value();
    });
}

long induced_rank(const std::vector<CechClass>& images, const bott::BundleSpec& target, int q)
{
    std::lock_guard lock(cache_mutex());
    ShapeCache& cache = shared_cache();
    auto parts = parts_of(target);
    std::vector<std::map<BlockId, SparseVector>> locs;
    std::map<BlockId, std::size_t> offset;
    std::size_t total = 0;
    for (const auto& img : images) {
        if (!(img.bundle == target) || img.degree != q) throw std::invalid_argument("induced_rank: image on a different bundle");
        locs.push_back(localize(cache, target, parts, img.cochain, q));
        for (const auto& [id, v] : locs.back())
            if (!offset.count(id)) offset[id] = 0;
    }
    for (auto& [id, off] : offset) {
        off = total;
        total += block_complex(cache, parts[id.part], id.ws).dims[q];
    }
    std::vector<exactalg::SparseVector> coboundaries;
    for (const auto& [id, off] : offset) {
        const auto& cx = block_complex(cache, parts[id.part], id.ws);
        if (q == 0) continue;
        for (const auto& col : exactalg::image(cx.d[q - 1]).basis) {
            SparseVector v;
            for (const auto& [i, x] : col) v.emplace_back(off + i, x);
            coboundaries.push_back(v);
        }
    }
    std::vector<exactalg::SparseVector> all = coboundaries;
    for (const auto& loc : locs) {
        SparseVector v;
        for (const auto& [id, lv] : loc)
            for (const auto& [i, x] : lv) v.emplace_back(offset.at(id) + i, x);
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        all.push_back(v);
    }
    return static_cast<long>(exactalg::rank_of(all, total)) - static_cast<long>(exactalg::rank_of(coboundaries, total));
}

long euler_multiplication_rank(int n, int k, int q)
{
    auto src = bott::BundleSpec::line({n}, {k});
    auto tgt = bott::BundleSpec::line({n}, {k + 1});
    if (q < 0 || q > n) return 0;
    auto basis = cech_basis(src, q);
    if (basis.empty()) return 0;
    // (n+1) copies of the target: stack by shifting the generator slot
    // Each copy is kept apart by tagging cells with gen = copy index on a line bundle,
    // so ranks are computed per copy block and summed over a joint coordinate space.
    std::lock_guard lock(cache_mutex());
    ShapeCache& cache = shared_cache();
    auto parts = parts_of(tgt);
    std::map<std::pair<int, BlockId>, std::size_t> offset;
    std::vector<std::vector<std::pair<std::pair<int, BlockId>, SparseVector>>> imgs;
    for (const auto& c : basis) {
        std::vector<std::pair<std::pair<int, BlockId>, SparseVector>> parts_img;
        for (int x = 0; x <= n; ++x) {
            auto img = multiply(src, x, c);
            for (auto& [id, v] : localize(cache, tgt, parts, img.cochain, q)) {
                offset[{x, id}] = 0;
                parts_img.push_back({{x, id}, v});
            }
        }
        imgs.push_back(std::move(parts_img));
    }
    std::size_t total = 0;
    std::vector<SparseVector> cob;
    for (auto& [key, off] : offset) {
        off = total;
        const auto& cx = block_complex(cache, parts[key.second.part], key.second.ws);
        if (q > 0)
            for (const auto& col : exactalg::image(cx.d[q - 1]).basis) {
                SparseVector v;
                for (const auto& [i, x] : col) v.emplace_back(off + i, x);
                cob.push_back(v);
            }
        total += cx.dims[q];
    }
    std::vector<SparseVector> all = cob;
    for (const auto& pi : imgs) {
        SparseVector v;
        for (const auto& [key, lv] : pi)
            for (const auto& [i, x] : lv) v.emplace_back(offset.at(key) + i, x);
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        all.push_back(v);
    }
    return static_cast<long>(exactalg::rank_of(all, total)) - static_cast<long>(exactalg::rank_of(cob, total));
}

long contraction_rank(const bott::BundleSpec& b, int q)
{
    if (q < 0 || q >= b.total_dim()) return 0;
    auto basis = cech_basis(b, q);
    if (basis.empty()) return 0;
    std::vector<CechClass> imgs;
    for (const auto& c : basis) imgs.push_back(contract_with_F(c));
    return induced_rank(imgs, bott::BundleSpec::line(b.factors, b.twist), q + 1);
}

}  // namespace cech
