#include "crx/global.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace crx {

using exactalg::Entry;

BlockWeight weight_of(const Key& k) { return {k.z.weight(), k.y.weight()}; }

Levels levels_of(const Cochain& x)
{
    Levels L;
    for (const auto& [k, c] : x) {
        L.z = std::max(L.z, k.z.level());
        L.y = std::max(L.y, k.y.level());
    }
    return L;
}

int degree_of(const Cochain& x)
{
    int d = -1;
    for (const auto& [k, c] : x) {
        if (d >= 0 && k.degree() != d) throw std::invalid_argument("cochain mixes form degrees");
        d = k.degree();
    }
    return d;
}

std::map<BlockWeight, Cochain> split_by_weight(const Cochain& x)
{
    std::map<BlockWeight, Cochain> out;
    for (const auto& [k, c] : x) out[weight_of(k)].emplace(k, c);
    return out;
}

namespace {

void accumulate_product(Cochain& out, const FVec& zs, const FVec& ys, const Scalar& c)
{
    for (const auto& [z, cz] : zs)
        for (const auto& [y, cy] : ys) accumulate(out, Key{z, y}, c * cz * cy);
}

void accumulate_normal(Cochain& out, const Key& k, const Scalar& c)
{
    FVec zs, ys;
    crx::accumulate_normal(zs, k.z, Scalar(1));
    crx::accumulate_normal(ys, k.y, Scalar(1));
    accumulate_product(out, zs, ys, c);
}

std::atomic<bool> g_bracket_fault{false};

}  // namespace

namespace testing {
void set_bracket_fault(bool on) { g_bracket_fault = on; }
bool bracket_fault() { return g_bracket_fault; }
}  // namespace testing

Cochain normalize(const Cochain& x)
{
    Cochain out;
    for (const auto& [k, c] : x) accumulate_normal(out, k, c);
    return out;
}

Cochain dbar(const Cochain& x)
{
    Cochain out;
    for (const auto& [k, c] : x) {
        for (const auto& [z, cz] : dbar_factor(k.z)) accumulate(out, Key{z, k.y}, c * cz);
        const Scalar s = (k.z.degree() % 2) ? Scalar(-c) : c;
        for (const auto& [y, cy] : dbar_factor(k.y)) accumulate(out, Key{k.z, y}, s * cy);
    }
    return out;
}

Cochain flat(const Cochain& x)
{
    Cochain out;
    for (const auto& [k, c] : x) {
        if (k.z.v >= 0) {
            // dxbar_v lands behind the y-form part; the P^1 factor enters F with sign -1
            const Scalar s = (k.y.degree() % 2) ? c : Scalar(-c);
            for (const auto& [z, cz] : flat_factor(k.z)) accumulate(out, Key{z, k.y}, s * cz);
        } else if (k.y.v >= 0) {
            for (const auto& [y, cy] : flat_factor(k.y)) accumulate(out, Key{k.z, y}, c * cy);
        } else {
            throw std::invalid_argument("flat applies to vector-valued cochains");
        }
    }
    return out;
}

Cochain sharp(const Cochain& x)
{
    Cochain out;
    for (const auto& [k, c] : x) {
        if (k.is_vector() || k.degree() != 1) throw std::invalid_argument("sharp applies to scalar 1-forms");
        if (k.z.degree() == 1) {
            for (const auto& [z, cz] : sharp_factor(k.z)) accumulate(out, Key{z, k.y}, -c * cz);
        } else {
            for (const auto& [y, cy] : sharp_factor(k.y)) accumulate(out, Key{k.z, y}, c * cy);
        }
    }
    return out;
}

Cochain horizontal(const Cochain& x)
{
    Cochain out;
    for (const auto& [k, c] : x) {
        if (k.z.v >= 0) {
            for (const auto& [z, cz] : horizontal_factor(k.z)) accumulate(out, Key{z, k.y}, c * cz);
        } else if (k.y.v >= 0) {
            for (const auto& [y, cy] : horizontal_factor(k.y)) accumulate(out, Key{k.z, y}, c * cy);
        } else {
            throw std::invalid_argument("horizontal projection applies to vector-valued cochains");
        }
    }
    return out;
}

namespace {

FKey strip_vector(FKey k)
{
    k.v = -1;
    return k;
}

FKey add_exponents(const FKey& p, const FKey& q, std::uint8_t J)
{
    FKey r = p;
    for (int t = 0; t <= p.m; ++t) {
        r.a[t] = static_cast<std::int16_t>(p.a[t] + q.a[t]);
        r.b[t] = static_cast<std::int16_t>(p.b[t] + q.b[t]);
    }
    r.J = J;
    return r;
}

struct KeyHash {
    std::size_t operator()(const Key& k) const
    {
        std::size_t h = 1469598103934665603ull;
        auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
        for (const FKey* f : {&k.z, &k.y}) {
            mix(static_cast<std::size_t>(f->m));
            for (int t = 0; t <= f->m; ++t) mix(static_cast<std::size_t>(f->a[t]) << 16 | static_cast<std::uint16_t>(f->b[t]));
            mix(f->J);
            mix(static_cast<std::size_t>(f->v + 8));
        }
        return h;
    }
};

using HashCochain = std::unordered_map<Key, Scalar, KeyHash>;

void accumulate(HashCochain& out, const Key& k, const Scalar& c)
{
    if (sgn(c) == 0) return;
    auto [it, fresh] = out.try_emplace(k, c);
    if (!fresh) it->second += c;
}

void accumulate_normal(HashCochain& out, const Key& k, const Scalar& c)
{
    if (k.z.is_normal() && k.y.is_normal()) {
        accumulate(out, k, c);
        return;
    }
    FVec zs, ys;
    crx::accumulate_normal(zs, k.z, Scalar(1));
    crx::accumulate_normal(ys, k.y, Scalar(1));
    for (const auto& [z, cz] : zs)
        for (const auto& [y, cy] : ys) accumulate(out, Key{z, y}, c * cz * cy);
}

// Derivatives of the coefficients of y along every coordinate, z factor then y factor.
struct Derivatives {
    using Terms = std::vector<std::pair<FKey, Scalar>>;
    struct Entry {
        const Key* key;
        const Scalar* coeff;
        std::array<Terms, 2> dz;
        std::array<Terms, kMaxCoords> dy;
    };
    std::vector<Entry> entries;

    explicit Derivatives(const Cochain& y)
    {
        entries.reserve(y.size());
        for (const auto& [k, c] : y) {
            Entry e{&k, &c, {}, {}};
            for (int i = 0; i <= k.z.m; ++i)
                for (auto& [f, cf] : deriv_factor(k.z, i)) e.dz[i].emplace_back(f, cf);
            for (int i = 0; i <= k.y.m; ++i)
                for (auto& [f, cf] : deriv_factor(k.y, i)) e.dy[i].emplace_back(f, cf);
            entries.push_back(std::move(e));
        }
    }
};

// sum over terms: x^i ∧ d_i(y^j) d_j, scaled by s
void half_bracket(HashCochain& out, const Cochain& x, const Derivatives& y, const Scalar& s)
{
    Scalar t;
    for (const auto& [kx, cx] : x) {
        const bool xz = kx.z.v >= 0;
        const int i = xz ? kx.z.v : kx.y.v;
        const FKey fz = strip_vector(kx.z), fy = strip_vector(kx.y);
        const Scalar scx = s * cx;
        for (const auto& e : y.entries) {
            const Key& ky = *e.key;
            // derivative of the coefficient of ky along coordinate i of x's factor
            for (const auto& [f, cf] : xz ? e.dz[i] : e.dy[i]) {
                const FKey& dz = xz ? f : ky.z;
                const FKey& dyk = xz ? ky.y : f;
                // (fz ∧ fy) ∧ (dz ∧ dy): move dz past fy
                std::uint8_t Jz, Jy;
                const int s1 = wedge_sets(fz.J, dz.J, Jz);
                const int s2 = wedge_sets(fy.J, dyk.J, Jy);
                if (s1 == 0 || s2 == 0) continue;
                const int s3 = (fy.degree() * dz.degree()) % 2 ? -1 : 1;
                Key r{add_exponents(dz, fz, Jz), add_exponents(dyk, fy, Jy)};
                t = scx * cf;
                t *= *e.coeff;
                if (s1 * s2 * s3 < 0) t = -t;
                accumulate_normal(out, r, t);
            }
        }
    }
}

}  // namespace

Cochain bracket(const Cochain& x, int p, const Cochain& y, int q)
{
    for (const Cochain* c : {&x, &y}) {
        for (const auto& [k, v] : *c)
            if (!k.is_vector()) throw std::invalid_argument("bracket takes vector-valued cochains");
        if (!flat(*c).empty()) throw std::invalid_argument("bracket inputs must lie in ker flat");
    }
    HashCochain h;
    half_bracket(h, x, Derivatives(y), Scalar(1));
    int s = ((p * q) % 2) ? 1 : -1;
    if (testing::bracket_fault()) s = -s;
    half_bracket(h, y, Derivatives(x), Scalar(s));
    Cochain r;
    for (auto& [k, c] : h)
        if (sgn(c) != 0) r.emplace(k, std::move(c));
    return horizontal(r);
}

Cochain contact_action(const Cochain& f)
{
    for (const auto& [k, c] : f)
        if (!k.is_function()) throw std::invalid_argument("contact action takes a function");
    return dbar(sharp(dbar(f)));
}

Cochain embedding_action(const Cochain& f) { return contact_action(f); }

Cochain conjugate(const Cochain& f)
{
    Cochain out;
    for (const auto& [k, c] : f) accumulate(out, Key{crx::conjugate(k.z), crx::conjugate(k.y)}, c);
    return out;
}

// ---------------------------------------------------------------- GlobalBlock

namespace {

void kron_into(std::vector<Entry>& out, const SparseMatrix& a, const SparseMatrix& b, std::size_t roff,
               std::size_t coff, const Scalar& s)
{
    for (std::size_t ca = 0; ca < a.cols(); ++ca)
        for (const auto& [ra, va] : a.column(ca))
            for (std::size_t cb = 0; cb < b.cols(); ++cb)
                for (const auto& [rb, vb] : b.column(cb))
                    out.push_back({roff + ra * b.rows() + rb, coff + ca * b.cols() + cb, s * va * vb});
}

Scalar sign(int e) { return (e % 2) ? Scalar(-1) : Scalar(1); }

SparseVector to_vector(const std::map<std::size_t, Scalar>& m)
{
    SparseVector v;
    for (const auto& [i, c] : m)
        if (sgn(c) != 0) v.emplace_back(i, c);
    return v;
}

}  // namespace

const FactorBlock& GlobalBlock::zblock(Kind k) const { return factor_block(1, levels_.z, k, w_.z); }
const FactorBlock& GlobalBlock::yblock(Kind k) const { return factor_block(l_, levels_.y, k, w_.y); }

GradedPart GlobalBlock::graded(bool ambient, int q) const
{
    GradedPart g;
    for (int qz = 0; qz <= 1; ++qz) {
        const int qy = q - qz;
        if (qy < 0 || qy > l_) continue;
        std::vector<std::pair<Kind, Kind>> kinds;
        if (ambient) kinds = {{Kind::Tangent, Kind::Line}, {Kind::Line, Kind::Tangent}};
        else kinds = {{Kind::Line, Kind::Line}};
        for (auto [kz, ky] : kinds) {
            Piece p;
            p.qz = qz;
            p.kz = kz;
            p.qy = qy;
            p.ky = ky;
            p.offset = g.dim;
            p.zs = &zblock(kz).space(qz);
            p.ys = &yblock(ky).space(qy);
            g.dim += p.dim();
            g.pieces.push_back(p);
        }
    }
    return g;
}

const Piece* GlobalBlock::find_piece(bool ambient, int q, int qz, Kind kz, int qy, Kind ky) const
{
    if (q < 0 || q > top()) return nullptr;
    for (const auto& p : (ambient ? A_ : B_)[q].pieces)
        if (p.qz == qz && p.kz == kz && p.qy == qy && p.ky == ky) return &p;
    return nullptr;
}

GlobalBlock::GlobalBlock(int l, const BlockWeight& w, Levels levels) : l_(l), w_(w), levels_(levels)
{
    for (int q = 0; q <= top(); ++q) {
        A_.push_back(graded(true, q));
        B_.push_back(graded(false, q));
    }
    for (int amb = 0; amb <= 1; ++amb) {
        const auto& parts = amb ? A_ : B_;
        auto& ds = amb ? dA_ : dB_;
        for (int q = 0; q < top(); ++q) {
            std::vector<Entry> e;
            for (const auto& p : parts[q].pieces) {
                if (p.dim() == 0) continue;
                if (const Piece* t = find_piece(amb, q + 1, p.qz + 1, p.kz, p.qy, p.ky); t && t->dim())
                    kron_into(e, zblock(p.kz).d[p.qz], SparseMatrix::identity(p.ys->dim()), t->offset, p.offset, Scalar(1));
                if (const Piece* t = find_piece(amb, q + 1, p.qz, p.kz, p.qy + 1, p.ky); t && t->dim())
                    kron_into(e, SparseMatrix::identity(p.zs->dim()), yblock(p.ky).d[p.qy], t->offset, p.offset,
                              sign(p.qz));
            }
            ds.push_back(SparseMatrix::from_entries(parts[q + 1].dim, parts[q].dim, e));
        }
    }
    for (int q = 0; q < top(); ++q) {
        std::vector<Entry> e;
        for (const auto& p : A_[q].pieces) {
            if (p.dim() == 0) continue;
            if (p.kz == Kind::Tangent) {
                const Piece* t = find_piece(false, q + 1, p.qz + 1, Kind::Line, p.qy, Kind::Line);
                if (t && t->dim())
                    kron_into(e, factor_flat(1, levels_.z, w_.z, p.qz), SparseMatrix::identity(p.ys->dim()), t->offset,
                              p.offset, -sign(p.qy));
            } else {
                const Piece* t = find_piece(false, q + 1, p.qz, Kind::Line, p.qy + 1, Kind::Line);
                if (t && t->dim())
                    kron_into(e, SparseMatrix::identity(p.zs->dim()), factor_flat(l_, levels_.y, w_.y, p.qy), t->offset,
                              p.offset, Scalar(1));
            }
        }
        flat_.push_back(SparseMatrix::from_entries(B_[q + 1].dim, A_[q].dim, e));
    }
    {
        std::vector<Entry> e;
        for (const auto& p : B_[1].pieces) {
            if (p.dim() == 0) continue;
            if (p.qz == 1) {
                const Piece* t = find_piece(true, 0, 0, Kind::Tangent, 0, Kind::Line);
                if (t->dim())
                    kron_into(e, factor_sharp(1, levels_.z, w_.z), SparseMatrix::identity(p.ys->dim()), t->offset, p.offset,
                              Scalar(-1));
            } else {
                const Piece* t = find_piece(true, 0, 0, Kind::Line, 0, Kind::Tangent);
                if (t->dim())
                    kron_into(e, SparseMatrix::identity(p.zs->dim()), factor_sharp(l_, levels_.y, w_.y), t->offset, p.offset,
                              Scalar(1));
            }
        }
        sharp_ = SparseMatrix::from_entries(A_[0].dim, B_[1].dim, e);
    }
    contact_ = dA_[0].multiply(sharp_.multiply(dB_[0]));
}

std::optional<SparseVector> GlobalBlock::coords(bool ambient, int q, const Cochain& x) const
{
    if (q < 0 || q > top()) return x.empty() ? std::optional<SparseVector>(SparseVector{}) : std::nullopt;
    std::map<std::size_t, Scalar> c;
    for (const auto& [k, v] : x) {
        if (k.degree() != q || k.z.m != 1 || k.y.m != l_ || weight_of(k) != w_) return std::nullopt;
        const Kind kz = k.z.v >= 0 ? Kind::Tangent : Kind::Line;
        const Kind ky = k.y.v >= 0 ? Kind::Tangent : Kind::Line;
        if (!ambient && (kz == Kind::Tangent || ky == Kind::Tangent)) return std::nullopt;
        if (ambient && (kz == ky)) return std::nullopt;
        const Piece* p = find_piece(ambient, q, k.z.degree(), kz, k.y.degree(), ky);
        if (!p) return std::nullopt;
        auto iz = p->zs->index.find(k.z);
        auto iy = p->ys->index.find(k.y);
        if (iz == p->zs->index.end() || iy == p->ys->index.end()) return std::nullopt;
        const auto& fz = p->zs->free_cols;
        const auto& fy = p->ys->free_cols;
        auto pz = std::lower_bound(fz.begin(), fz.end(), iz->second);
        auto py = std::lower_bound(fy.begin(), fy.end(), iy->second);
        if (pz == fz.end() || *pz != iz->second || py == fy.end() || *py != iy->second) continue;
        c[p->offset + static_cast<std::size_t>(pz - fz.begin()) * p->ys->dim() + static_cast<std::size_t>(py - fy.begin())] = v;
    }
    SparseVector out = to_vector(c);
    if (expand(ambient, q, out) != x) return std::nullopt;
    return out;
}

Cochain GlobalBlock::expand(bool ambient, int q, const SparseVector& c) const
{
    Cochain out;
    if (c.empty()) return out;
    const auto& part = (ambient ? A_ : B_).at(q);
    for (const auto& [idx, v] : c) {
        const Piece* p = nullptr;
        for (const auto& pc : part.pieces)
            if (idx >= pc.offset && idx < pc.offset + pc.dim()) p = &pc;
        if (!p) throw std::out_of_range("block coordinate out of range");
        const std::size_t i = (idx - p->offset) / p->ys->dim(), j = (idx - p->offset) % p->ys->dim();
        for (const auto& [cz, vz] : p->zs->basis[i])
            for (const auto& [cy, vy] : p->ys->basis[j]) accumulate(out, Key{p->zs->keys[cz], p->ys->keys[cy]}, v * vz * vy);
    }
    return out;
}

std::shared_ptr<const GlobalBlock> global_block(int l, const BlockWeight& w, Levels levels)
{
    static std::mutex mu;
    static std::map<std::tuple<int, BlockWeight, Levels>, std::shared_ptr<const GlobalBlock>> cache;
    {
        std::lock_guard lock(mu);
        auto it = cache.find({l, w, levels});
        if (it != cache.end()) return it->second;
    }
    auto b = std::make_shared<const GlobalBlock>(l, w, levels);
    std::lock_guard lock(mu);
    return cache.try_emplace({l, w, levels}, b).first->second;
}

// ---------------------------------------------------------------- BlockHomotopy

namespace {

const Homotopy& piece_homotopy_z(const GlobalBlock& b, const Piece& p)
{
    return factor_homotopy(1, b.levels().z, p.kz, b.weight().z);
}

const Homotopy& piece_homotopy_y(const GlobalBlock& b, const Piece& p)
{
    return factor_homotopy(b.l(), b.levels().y, p.ky, b.weight().y);
}

}  // namespace

BlockHomotopy::BlockHomotopy(const GlobalBlock& block, bool ambient) : block_(&block), ambient_(ambient)
{
    for (int q = 0; q <= block.top(); ++q) {
        std::vector<std::size_t> off{0};
        for (const auto& p : (ambient ? block.A(q) : block.B(q)).pieces) {
            const std::size_t hz = piece_homotopy_z(block, p).harmonic(p.qz).dim();
            const std::size_t hy = piece_homotopy_y(block, p).harmonic(p.qy).dim();
            off.push_back(off.back() + hz * hy);
        }
        hoff_.push_back(std::move(off));
    }
}

SparseVector BlockHomotopy::h(int q, const SparseVector& x) const
{
    if (q <= 0) return {};
    const auto& part = ambient_ ? block_->A(q) : block_->B(q);
    const auto& below = ambient_ ? block_->A(q - 1) : block_->B(q - 1);
    auto find = [&](int qz, Kind kz, int qy, Kind ky) -> const Piece* {
        for (const auto& p : below.pieces)
            if (p.qz == qz && p.kz == kz && p.qy == qy && p.ky == ky) return &p;
        return nullptr;
    };
    std::map<std::size_t, Scalar> out;
    for (const auto& p : part.pieces) {
        if (p.dim() == 0) continue;
        const Homotopy& hz = piece_homotopy_z(*block_, p);
        const Homotopy& hy = piece_homotopy_y(*block_, p);
        const Piece* t1 = p.qz > 0 ? find(p.qz - 1, p.kz, p.qy, p.ky) : nullptr;
        const Piece* t2 = p.qy > 0 ? find(p.qz, p.kz, p.qy - 1, p.ky) : nullptr;
        const std::size_t dy = p.ys->dim();
        const Scalar s = sign(p.qz);
        for (auto it = std::lower_bound(x.begin(), x.end(), p.offset, [](const auto& e, std::size_t v) { return e.first < v; });
             it != x.end() && it->first < p.offset + p.dim(); ++it) {
            const std::size_t i = (it->first - p.offset) / dy, j = (it->first - p.offset) % dy;
            if (t1 && t1->dim())
                for (const auto& [i2, v] : hz.h_matrix(p.qz).column(i)) out[t1->offset + i2 * dy + j] += it->second * v;
            if (t2 && t2->dim()) {
                const std::size_t dy2 = t2->ys->dim();
                for (const auto& [i2, pv] : hz.pi_matrix(p.qz).column(i))
                    for (const auto& [j2, hv] : hy.h_matrix(p.qy).column(j)) out[t2->offset + i2 * dy2 + j2] += s * it->second * pv * hv;
            }
        }
    }
    return to_vector(out);
}

SparseVector BlockHomotopy::pi_coords(int q, const SparseVector& x) const
{
    const auto& part = ambient_ ? block_->A(q) : block_->B(q);
    std::map<std::size_t, Scalar> out;
    for (std::size_t n = 0; n < part.pieces.size(); ++n) {
        const Piece& p = part.pieces[n];
        if (p.dim() == 0 || hoff_[q][n + 1] == hoff_[q][n]) continue;
        const Homotopy& hz = piece_homotopy_z(*block_, p);
        const Homotopy& hy = piece_homotopy_y(*block_, p);
        const std::size_t dy = p.ys->dim(), hdy = hy.harmonic(p.qy).dim();
        for (auto it = std::lower_bound(x.begin(), x.end(), p.offset, [](const auto& e, std::size_t v) { return e.first < v; });
             it != x.end() && it->first < p.offset + p.dim(); ++it) {
            const std::size_t i = (it->first - p.offset) / dy, j = (it->first - p.offset) % dy;
            for (const auto& [a, va] : hz.pi_coords_matrix(p.qz).column(i))
                for (const auto& [b, vb] : hy.pi_coords_matrix(p.qy).column(j)) out[hoff_[q][n] + a * hdy + b] += it->second * va * vb;
        }
    }
    return to_vector(out);
}

SparseVector BlockHomotopy::harmonic_vector(int q, std::size_t idx) const
{
    const auto& part = ambient_ ? block_->A(q) : block_->B(q);
    for (std::size_t n = 0; n < part.pieces.size(); ++n) {
        if (idx >= hoff_[q][n + 1]) continue;
        const Piece& p = part.pieces[n];
        const Homotopy& hz = piece_homotopy_z(*block_, p);
        const Homotopy& hy = piece_homotopy_y(*block_, p);
        const std::size_t hdy = hy.harmonic(p.qy).dim();
        const std::size_t a = (idx - hoff_[q][n]) / hdy, b = (idx - hoff_[q][n]) % hdy;
        std::map<std::size_t, Scalar> out;
        for (const auto& [i, vi] : hz.harmonic(p.qz).basis[a])
            for (const auto& [j, vj] : hy.harmonic(p.qy).basis[b]) out[p.offset + i * p.ys->dim() + j] = vi * vj;
        return to_vector(out);
    }
    throw std::out_of_range("harmonic index out of range");
}

// ---------------------------------------------------------------- random functions

namespace {

void random_composition(std::mt19937_64& rng, int total, int m, std::array<std::int16_t, kMaxCoords>& out)
{
    out.fill(0);
    for (int i = 0; i < total; ++i) ++out[rng() % (m + 1)];
}

std::optional<FKey> random_factor_function(int m, int twist, int max_level, std::mt19937_64& rng)
{
    const int lo = std::max(0, -twist);
    if (lo > max_level) return std::nullopt;
    for (int attempt = 0; attempt < 64; ++attempt) {
        FKey k;
        k.m = static_cast<std::int8_t>(m);
        const int level = lo + static_cast<int>(rng() % (max_level - lo + 1));
        random_composition(rng, level, m, k.b);
        random_composition(rng, twist + level, m, k.a);
        if (k.is_normal()) return k;
    }
    return std::nullopt;
}

}  // namespace

Cochain random_function(int l, int k, Levels max_levels, std::mt19937_64& rng, int terms)
{
    Cochain f;
    for (int t = 0; t < terms; ++t) {
        auto z = random_factor_function(1, k, max_levels.z, rng);
        auto y = random_factor_function(l, -k, max_levels.y, rng);
        if (!z || !y) return {};
        const long c = static_cast<long>(rng() % 5) + 1;
        const long sign = rng() % 2 ? 1 : -1;
        accumulate(f, Key{*z, *y}, Scalar(sign * c));
    }
    return f;
}

// ---------------------------------------------------------------- solving in C

SolveInC solve_in_C(int l, const Cochain& r, int max_raise)
{
    SolveInC out;
    Cochain x;
    if (r.empty()) {
        out.x = x;
        return out;
    }
    if (degree_of(r) != 2) throw std::invalid_argument("solve_in_C: right-hand side must be a 2-form");
    if (l + 1 < 2) throw std::invalid_argument("solve_in_C: no 2-forms on P^1 x P^0");
    for (const auto& [w, part] : split_by_weight(r)) {
        const Levels base = levels_of(part);
        bool solved = false;
        for (int raise = 0; raise <= max_raise && !solved; ++raise) {
            auto b = global_block(l, w, {base.z + raise, base.y + raise});
            auto rc = b->coords(true, 2, part);
            if (!rc) throw std::logic_error("solve_in_C: right-hand side outside its block");
            const SparseMatrix m = b->dA(1).vstack(b->flat(1));
            auto sol = exactalg::solve(m, *rc);
            if (!sol) continue;
            x = add(x, b->expand(true, 1, *sol));
            solved = true;
        }
        if (!solved) {
            out.failed_block = w;
            out.failed_part = part;
            return out;
        }
    }
    out.x = std::move(x);
    return out;
}

// ---------------------------------------------------------------- numbers

namespace {

long dim_kernel_stack(std::size_t cols, const std::vector<const SparseMatrix*>& ms)
{
    std::vector<SparseVector> rows;
    for (const auto* m : ms)
        for (auto& r : m->row_vectors())
            if (!r.empty()) rows.push_back(std::move(r));
    return static_cast<long>(cols) - static_cast<long>(exactalg::rank_of(rows, cols));
}

long rk(const SparseMatrix& m) { return static_cast<long>(exactalg::rank(m)); }

}  // namespace

BlockNumbers block_numbers(const GlobalBlock& b)
{
    BlockNumbers n;
    const int top = b.top();
    std::vector<long> rA(top + 1, 0), rB(top + 1, 0);
    for (int q = 0; q < top; ++q) {
        rA[q] = rk(b.dA(q));
        rB[q] = rk(b.dB(q));
    }
    for (int q = 0; q <= top; ++q) {
        n.hA.push_back(static_cast<long>(b.A(q).dim) - rA[q] - (q ? rA[q - 1] : 0));
        n.hB.push_back(static_cast<long>(b.B(q).dim) - rB[q] - (q ? rB[q - 1] : 0));
    }
    // cocycles of C in degree q: ker [flat; d] on A^q
    auto z_dim = [&](int q) -> long {
        std::vector<const SparseMatrix*> ms;
        if (q < top) {
            ms.push_back(&b.flat(q));
            ms.push_back(&b.dA(q));
        }
        return dim_kernel_stack(b.A(q).dim, ms);
    };
    const long z1 = z_dim(1);
    n.w = z1 - rk(b.contact());
    const long r_ext = rA[0] - (top > 1 ? rk(b.flat(1).multiply(b.dA(0))) : 0);
    n.h1_ext = z1 - r_ext;
    if (top >= 2) {
        const long im = (static_cast<long>(b.A(1).dim) - z1) - rk(b.flat(1));
        n.h2 = z_dim(2) - im;
    }
    return n;
}

}  // namespace crx
