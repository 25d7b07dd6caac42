#include "bott/bott.hpp"

#include "cech/cech.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace bott {

namespace {

long binom(long n, long r)
{
    if (r < 0 || n < r) return 0;
    long c = 1;
    for (long i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return c;
}

CohomologyTable line_table(int n, int k)
{
    CohomologyTable t{BundleSpec::line({n}, {k}), {}, Source::ClosedForm};
    for (int q = 0; q <= n; ++q) t.dims.push_back(h_line(n, k, q));
    return t;
}

CohomologyTable tangent_table(int n, int k)
{
    CohomologyTable t{n >= 1 ? BundleSpec::tangent_of({n}, {k}, 0) : BundleSpec::line({n}, {k}), {}, Source::ClosedForm};
    for (int q = 0; q <= n; ++q) t.dims.push_back(n >= 1 ? h_tangent(n, k, q) : 0);
    return t;
}

}  // namespace

long h_line(int n, int k, int q)
{
    if (n < 0) throw std::invalid_argument("h_line: negative dimension");
    if (n == 0) return q == 0 ? 1 : 0;
    if (q == 0) return k >= 0 ? binom(n + k, n) : 0;
    if (q == n) return k <= -n - 1 ? binom(-k - 1, n) : 0;
    return 0;
}

long h_tangent(int n, int k, int q)
{
    if (n < 1) throw std::invalid_argument("h_tangent: dimension must be at least 1");
    if (q < 0 || q > n) return 0;
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, long> memo;
    {
        std::lock_guard lock(mu);
        auto it = memo.find({n, k, q});
        if (it != memo.end()) return it->second;
    }
    // 0 -> O(k) -> O(k+1)^{n+1} -> T(k) -> 0
    auto mu_rank = [&](int p) -> long {
        if (p < 0 || p > n) return 0;
        if (h_line(n, k, p) == 0 || h_line(n, k + 1, p) == 0) return 0;
        return cech::euler_multiplication_rank(n, k, p);
    };
    long r = (n + 1) * h_line(n, k + 1, q) - mu_rank(q) + h_line(n, k, q + 1) - mu_rank(q + 1);
    std::lock_guard lock(mu);
    memo[{n, k, q}] = r;
    return r;
}

long kunneth(const CohomologyTable& a, const CohomologyTable& b, int q)
{
    long s = 0;
    for (int i = 0; i <= q; ++i) s += a.at(i) * b.at(q - i);
    return s;
}

long h_product_tangent(int m, int l, std::array<int, 2> twist, int q)
{
    if (m < 0 || l < 0) throw std::invalid_argument("h_product_tangent: negative dimension");
    long s = 0;
    if (m >= 1) s += kunneth(tangent_table(m, twist[0]), line_table(l, twist[1]), q);
    if (l >= 1) s += kunneth(line_table(m, twist[0]), tangent_table(l, twist[1]), q);
    return s;
}

long h(const BundleSpec& b, int q)
{
    b.validate();
    if (q < 0 || q > b.total_dim()) return 0;
    if (b.factors.size() == 1) {
        if (b.structure == Structure::Line) return h_line(b.factors[0], b.twist[0], q);
        return b.factors[0] >= 1 ? h_tangent(b.factors[0], b.twist[0], q) : 0;
    }
    const int m = b.factors[0], l = b.factors[1];
    switch (b.structure) {
    case Structure::Line: return kunneth(line_table(m, b.twist[0]), line_table(l, b.twist[1]), q);
    case Structure::TangentOfFactor:
        if (b.tangent_factor == 0) return kunneth(tangent_table(m, b.twist[0]), line_table(l, b.twist[1]), q);
        return kunneth(line_table(m, b.twist[0]), tangent_table(l, b.twist[1]), q);
    case Structure::FullTangent: return h_product_tangent(m, l, {b.twist[0], b.twist[1]}, q);
    }
    return 0;
}

CohomologyTable table(const BundleSpec& b)
{
    CohomologyTable t{b, {}, Source::ClosedForm};
    for (int q = 0; q <= b.total_dim(); ++q) t.dims.push_back(h(b, q));
    return t;
}

}  // namespace bott
