#include "crx/terms.hpp"

#include <bit>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace crx {

int FKey::level() const
{
    int s = 0;
    for (int t = 0; t <= m; ++t) s += b[t];
    return s;
}

int FKey::degree() const { return std::popcount(J); }

int FKey::twist() const
{
    int s = 0;
    for (int t = 0; t <= m; ++t) s += a[t] - b[t];
    return s - degree() - (v >= 0 ? 1 : 0);
}

std::array<int, kMaxCoords> FKey::weight() const
{
    std::array<int, kMaxCoords> w{};
    for (int t = 0; t <= m; ++t) w[t] = a[t] - b[t] - ((J >> t) & 1) - (v == t ? 1 : 0);
    return w;
}

void accumulate(FVec& out, const FKey& k, const Scalar& c)
{
    if (sgn(c) == 0) return;
    auto [it, fresh] = out.try_emplace(k, c);
    if (!fresh) {
        it->second += c;
        if (sgn(it->second) == 0) out.erase(it);
    }
}

namespace {

// compositions of `left` into slots t..m, with the multinomial coefficient times coeff
void compositions(int m, int t, std::array<std::int16_t, kMaxCoords>& c, const Integer& coeff, int left,
                  const std::function<void(const std::array<std::int16_t, kMaxCoords>&, const Integer&)>& f)
{
    if (t == m) {
        c[t] = static_cast<std::int16_t>(left);
        f(c, coeff);
        return;
    }
    for (int x = 0; x <= left; ++x) {
        c[t] = static_cast<std::int16_t>(x);
        Integer bin;
        mpz_bin_uiui(bin.get_mpz_t(), left, x);
        compositions(m, t + 1, c, coeff * bin, left - x, f);
    }
}

}  // namespace

void accumulate_normal(FVec& out, const FKey& k, const Scalar& c)
{
    if (sgn(c) == 0) return;
    const int p = std::min(k.a[0], k.b[0]);
    if (p == 0) {
        accumulate(out, k, c);
        return;
    }
    // x0 xbar0 = |x|^2 - sum_{t>0} x_t xbar_t, expanded p times
    FKey base = k;
    base.a[0] -= p;
    base.b[0] -= p;
    if (k.m == 0) {
        accumulate(out, base, c);
        return;
    }
    for (int j = 0; j <= p; ++j) {
        Integer bin;
        mpz_bin_uiui(bin.get_mpz_t(), p, j);
        if (j % 2) bin = -bin;
        std::array<std::int16_t, kMaxCoords> comp{};
        std::function<void(const std::array<std::int16_t, kMaxCoords>&, const Integer&)> emit =
            [&](const std::array<std::int16_t, kMaxCoords>& cc, const Integer& mult) {
                FKey t = base;
                for (int s = 1; s <= k.m; ++s) {
                    t.a[s] += cc[s];
                    t.b[s] += cc[s];
                }
                accumulate(out, t, c * Scalar(mult));
            };
        compositions(k.m, 1, comp, bin, j, emit);
    }
}

int wedge_front(std::uint8_t J, int j, std::uint8_t& out)
{
    if ((J >> j) & 1) return 0;
    out = static_cast<std::uint8_t>(J | (1u << j));
    int pos = std::popcount(static_cast<unsigned>(J & ((1u << j) - 1)));
    return (pos % 2) ? -1 : 1;
}

int wedge_back(std::uint8_t J, int j, std::uint8_t& out)
{
    if ((J >> j) & 1) return 0;
    out = static_cast<std::uint8_t>(J | (1u << j));
    int pos = std::popcount(static_cast<unsigned>(J >> (j + 1)));
    return (pos % 2) ? -1 : 1;
}

int wedge_sets(std::uint8_t J, std::uint8_t K, std::uint8_t& out)
{
    if (J & K) return 0;
    out = static_cast<std::uint8_t>(J | K);
    // inversions: pairs (j in J, k in K) with j > k
    int inv = 0;
    for (int k = 0; k < 8; ++k)
        if ((K >> k) & 1) inv += std::popcount(static_cast<unsigned>(J >> (k + 1)));
    return (inv % 2) ? -1 : 1;
}

FVec dbar_factor(const FKey& k)
{
    FVec out;
    const int N = k.level() + k.degree();
    for (int j = 0; j <= k.m; ++j) {
        std::uint8_t J2;
        int s = wedge_front(k.J, j, J2);
        if (s == 0) continue;
        if (k.b[j] > 0) {
            // b_j x^a xbar^{b-e_j} / |x|^{2N}: one level lower
            FKey t = k;
            t.b[j] -= 1;
            t.J = J2;
            accumulate_normal(out, t, Scalar(s * k.b[j]));
        }
        FKey t = k;
        t.a[j] += 1;
        t.J = J2;
        accumulate_normal(out, t, Scalar(-s * N));
    }
    if (k.v >= 0) {
        std::uint8_t J2;
        int s = wedge_front(k.J, k.v, J2);
        if (s != 0)
            for (int i = 0; i <= k.m; ++i) {
                FKey t = k;
                t.a[i] += 1;
                t.J = J2;
                t.v = static_cast<std::int8_t>(i);
                accumulate_normal(out, t, Scalar(s));
            }
    }
    return out;
}

FVec flat_factor(const FKey& k)
{
    FVec out;
    if (k.v < 0) return out;
    std::uint8_t J2;
    int s = wedge_back(k.J, k.v, J2);
    if (s == 0) return out;
    FKey t = k;
    t.J = J2;
    t.v = -1;
    accumulate(out, t, Scalar(s));
    return out;
}

FVec sharp_factor(const FKey& k)
{
    if (k.v >= 0 || k.degree() != 1) throw std::invalid_argument("sharp applies to scalar 1-forms");
    FKey t = k;
    t.v = static_cast<std::int8_t>(std::countr_zero(k.J));
    t.J = 0;
    return {{t, Scalar(1)}};
}

FVec deriv_factor(const FKey& k, int i)
{
    FVec out;
    const int N = k.level() + k.degree();
    if (k.a[i] > 0) {
        FKey t = k;
        t.a[i] -= 1;
        accumulate_normal(out, t, Scalar(k.a[i]));
    }
    if (N != 0) {
        FKey t = k;
        t.b[i] += 1;
        accumulate_normal(out, t, Scalar(-N));
    }
    return out;
}

FVec horizontal_factor(const FKey& k)
{
    FVec out;
    if (k.v < 0) throw std::invalid_argument("horizontal projection applies to vector terms");
    accumulate(out, k, Scalar(1));
    for (int i = 0; i <= k.m; ++i) {
        FKey t = k;
        t.a[i] += 1;
        t.b[k.v] += 1;
        t.v = static_cast<std::int8_t>(i);
        accumulate_normal(out, t, Scalar(-1));
    }
    return out;
}

FVec constraint_factor(const FKey& k)
{
    FVec out;
    int pos = 0;
    for (int j = 0; j <= k.m; ++j) {
        if (!((k.J >> j) & 1)) continue;
        FKey t = k;
        t.b[j] += 1;
        t.J = static_cast<std::uint8_t>(k.J & ~(1u << j));
        t.v = static_cast<std::int8_t>(k.v >= 0 ? -4 - k.v : -2);
        accumulate_normal(out, t, Scalar((pos % 2) ? -1 : 1));
        ++pos;
    }
    if (k.v >= 0) {
        FKey t = k;
        t.b[k.v] += 1;
        t.v = -3;
        accumulate_normal(out, t, Scalar(1));
    }
    return out;
}

FKey conjugate(const FKey& k)
{
    if (k.v >= 0 || k.J != 0) throw std::invalid_argument("conjugation is defined on functions");
    FKey t = k;
    std::swap(t.a, t.b);
    return t;
}

void accumulate(Cochain& out, const Key& k, const Scalar& c)
{
    if (sgn(c) == 0) return;
    auto [it, fresh] = out.try_emplace(k, c);
    if (!fresh) {
        it->second += c;
        if (sgn(it->second) == 0) out.erase(it);
    }
}

Cochain add(const Cochain& x, const Cochain& y, const Scalar& cy)
{
    Cochain out = x;
    for (const auto& [k, c] : y) accumulate(out, k, cy * c);
    return out;
}

Cochain scale(const Cochain& x, const Scalar& c)
{
    if (sgn(c) == 0) return {};
    Cochain out;
    for (const auto& [k, v] : x) out.emplace(k, v * c);
    return out;
}

std::string label(const FKey& k)
{
    std::ostringstream os;
    os << "a=";
    for (int t = 0; t <= k.m; ++t) os << (t ? "," : "") << k.a[t];
    os << ";b=";
    for (int t = 0; t <= k.m; ++t) os << (t ? "," : "") << k.b[t];
    os << ";J=";
    bool first = true;
    for (int t = 0; t <= k.m; ++t)
        if ((k.J >> t) & 1) {
            os << (first ? "" : ",") << t;
            first = false;
        }
    os << ";v=";
    if (k.v >= 0) os << int(k.v);
    else os << "-";
    return os.str();
}

std::string label(const Key& k) { return "z[" + label(k.z) + "]y[" + label(k.y) + "]"; }

namespace {

std::vector<int> parse_ints(const std::string& s)
{
    std::vector<int> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int x = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad integer '" + item + "'");
        out.push_back(x);
    }
    return out;
}

std::string field(const std::string& s, const std::string& name)
{
    auto p = s.find(name + "=");
    if (p == std::string::npos) throw std::invalid_argument("missing field " + name + " in '" + s + "'");
    p += name.size() + 1;
    auto e = s.find(';', p);
    return s.substr(p, e == std::string::npos ? std::string::npos : e - p);
}

}  // namespace

FKey parse_factor_label(const std::string& s, int m)
{
    FKey k;
    k.m = static_cast<std::int8_t>(m);
    auto a = parse_ints(field(s, "a")), b = parse_ints(field(s, "b"));
    if (static_cast<int>(a.size()) != m + 1 || static_cast<int>(b.size()) != m + 1)
        throw std::invalid_argument("exponent vector length must be " + std::to_string(m + 1) + " in '" + s + "'");
    for (int t = 0; t <= m; ++t) {
        if (a[t] < 0 || b[t] < 0) throw std::invalid_argument("negative exponent in '" + s + "'");
        k.a[t] = static_cast<std::int16_t>(a[t]);
        k.b[t] = static_cast<std::int16_t>(b[t]);
    }
    for (int j : parse_ints(field(s, "J"))) {
        if (j < 0 || j > m || ((k.J >> j) & 1)) throw std::invalid_argument("bad form index in '" + s + "'");
        k.J = static_cast<std::uint8_t>(k.J | (1u << j));
    }
    auto v = field(s, "v");
    if (v != "-") {
        auto vs = parse_ints(v);
        if (vs.size() != 1 || vs[0] < 0 || vs[0] > m) throw std::invalid_argument("bad vector index in '" + s + "'");
        k.v = static_cast<std::int8_t>(vs[0]);
    }
    if (!k.is_normal()) throw std::invalid_argument("key not in normal form (min(a0,b0) must be 0): '" + s + "'");
    return k;
}

Key parse_label(const std::string& s, int l)
{
    if (s.size() < 6 || s.rfind("z[", 0) != 0) throw std::invalid_argument("label must start with z[: '" + s + "'");
    auto mid = s.find("]y[");
    if (mid == std::string::npos || s.back() != ']') throw std::invalid_argument("malformed label '" + s + "'");
    return {parse_factor_label(s.substr(2, mid - 2), 1), parse_factor_label(s.substr(mid + 3, s.size() - mid - 4), l)};
}

}  // namespace crx
