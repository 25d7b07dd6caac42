#include "exactalg/exactalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace exactalg {

SparseVector to_sparse(const Vector& v)
{
    SparseVector out;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (sgn(v[i]) != 0) out.emplace_back(i, v[i]);
    return out;
}

Vector to_dense(const SparseVector& v, std::size_t n)
{
    Vector out(n);
    for (const auto& [i, c] : v) {
        if (i >= n) throw std::out_of_range("to_dense: index out of range");
        out[i] = c;
    }
    return out;
}

SparseVector add(const SparseVector& a, const SparseVector& b, const Scalar& cb)
{
    SparseVector out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            Scalar v = cb * b[j].second;
            if (sgn(v) != 0) out.emplace_back(b[j].first, std::move(v));
            ++j;
        } else {
            Scalar v = a[i].second + cb * b[j].second;
            if (sgn(v) != 0) out.emplace_back(a[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    return out;
}

SparseVector scale(const SparseVector& a, const Scalar& c)
{
    if (sgn(c) == 0) return {};
    SparseVector out = a;
    for (auto& e : out) e.second *= c;
    return out;
}

Scalar dot(const SparseVector& a, const SparseVector& b)
{
    Scalar s = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) ++i;
        else if (b[j].first < a[i].first) ++j;
        else s += a[i++].second * b[j++].second;
    }
    return s;
}

namespace {

void normalize_row(IntRow& row)
{
    if (row.empty()) return;
    Integer g = 0;
    for (const auto& e : row) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), e.second.get_mpz_t());
        if (g == 1) break;
    }
    if (row.front().second < 0) g = -g;
    if (g != 1)
        for (auto& e : row) mpz_divexact(e.second.get_mpz_t(), e.second.get_mpz_t(), g.get_mpz_t());
}

// a*ra - b*rb, normalized
IntRow combine(const IntRow& ra, const Integer& a, const IntRow& rb, const Integer& b)
{
    IntRow out;
    out.reserve(ra.size() + rb.size());
    std::size_t i = 0, j = 0;
    Integer t;
    while (i < ra.size() || j < rb.size()) {
        if (j == rb.size() || (i < ra.size() && ra[i].first < rb[j].first)) {
            out.emplace_back(ra[i].first, a * ra[i].second);
            ++i;
        } else if (i == ra.size() || rb[j].first < ra[i].first) {
            out.emplace_back(rb[j].first, -b * rb[j].second);
            ++j;
        } else {
            t = a * ra[i].second;
            mpz_submul(t.get_mpz_t(), b.get_mpz_t(), rb[j].second.get_mpz_t());
            if (sgn(t) != 0) out.emplace_back(ra[i].first, t);
            ++i;
            ++j;
        }
    }
    normalize_row(out);
    return out;
}

const Integer* find_entry(const IntRow& row, std::size_t col)
{
    auto it = std::lower_bound(row.begin(), row.end(), col,
                               [](const auto& e, std::size_t c) { return e.first < c; });
    if (it == row.end() || it->first != col) return nullptr;
    return &it->second;
}

// eliminate column col of row using pivot row p (p has a nonzero at col)
IntRow eliminate(const IntRow& row, const Integer& rc, const IntRow& p, const Integer& pc)
{
    Integer g;
    mpz_gcd(g.get_mpz_t(), pc.get_mpz_t(), rc.get_mpz_t());
    Integer a = pc / g, b = rc / g;
    return combine(row, a, p, b);
}

}  // namespace

IntRow primitive_row(const SparseVector& v)
{
    Integer l = 1;
    for (const auto& e : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), e.second.get_den_mpz_t());
    IntRow row;
    row.reserve(v.size());
    for (const auto& e : v) {
        if (sgn(e.second) == 0) continue;
        Integer x = e.second.get_num() * (l / e.second.get_den());
        row.emplace_back(e.first, std::move(x));
    }
    normalize_row(row);
    return row;
}

// ---------------------------------------------------------------- SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), columns_(cols) {}

SparseMatrix SparseMatrix::from_entries(std::size_t rows, std::size_t cols, const std::vector<Entry>& entries)
{
    SparseMatrix m(rows, cols);
    for (const auto& e : entries) {
        if (e.row >= rows || e.col >= cols) throw std::out_of_range("SparseMatrix: entry index out of range");
        m.columns_[e.col].emplace_back(e.row, e.value);
    }
    for (auto& col : m.columns_) {
        std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < col.size(); ++i)
            if (col[i].first == col[i - 1].first) throw std::invalid_argument("SparseMatrix: duplicate entry");
        col.erase(std::remove_if(col.begin(), col.end(), [](const auto& e) { return sgn(e.second) == 0; }),
                  col.end());
    }
    return m;
}

SparseMatrix SparseMatrix::from_columns(std::size_t rows, std::vector<SparseVector> columns)
{
    SparseMatrix m(rows, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        auto& col = columns[c];
        for (std::size_t i = 0; i < col.size(); ++i) {
            if (col[i].first >= rows) throw std::out_of_range("SparseMatrix: row index out of range");
            if (i > 0 && col[i].first <= col[i - 1].first)
                throw std::invalid_argument("SparseMatrix: column not sorted or duplicated");
        }
        col.erase(std::remove_if(col.begin(), col.end(), [](const auto& e) { return sgn(e.second) == 0; }),
                  col.end());
        m.columns_[c] = std::move(col);
    }
    return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n)
{
    SparseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.columns_[i].emplace_back(i, 1);
    return m;
}

std::size_t SparseMatrix::nnz() const
{
    std::size_t s = 0;
    for (const auto& c : columns_) s += c.size();
    return s;
}

std::vector<Entry> SparseMatrix::entries() const
{
    std::vector<Entry> out;
    for (std::size_t c = 0; c < cols_; ++c)
        for (const auto& [r, v] : columns_[c]) out.push_back({r, c, v});
    return out;
}

Scalar SparseMatrix::at(std::size_t r, std::size_t c) const
{
    const auto& col = columns_.at(c);
    auto it = std::lower_bound(col.begin(), col.end(), r, [](const auto& e, std::size_t x) { return e.first < x; });
    if (it == col.end() || it->first != r) return 0;
    return it->second;
}

Vector SparseMatrix::apply(const Vector& x) const
{
    if (x.size() != cols_) throw std::invalid_argument("apply: dimension mismatch");
    Vector y(rows_);
    for (std::size_t c = 0; c < cols_; ++c) {
        if (sgn(x[c]) == 0) continue;
        for (const auto& [r, v] : columns_[c]) y[r] += v * x[c];
    }
    return y;
}

SparseVector SparseMatrix::apply(const SparseVector& x) const
{
    std::vector<Scalar> acc;
    std::vector<std::size_t> touched;
    std::vector<char> seen(rows_, 0);
    acc.resize(rows_);
    for (const auto& [c, xv] : x) {
        if (c >= cols_) throw std::invalid_argument("apply: index out of range");
        for (const auto& [r, v] : columns_[c]) {
            if (!seen[r]) {
                seen[r] = 1;
                touched.push_back(r);
            }
            acc[r] += v * xv;
        }
    }
    std::sort(touched.begin(), touched.end());
    SparseVector out;
    for (auto r : touched)
        if (sgn(acc[r]) != 0) out.emplace_back(r, acc[r]);
    return out;
}

SparseMatrix SparseMatrix::transpose() const
{
    SparseMatrix t(cols_, rows_);
    for (std::size_t c = 0; c < cols_; ++c)
        for (const auto& [r, v] : columns_[c]) t.columns_[r].emplace_back(c, v);
    return t;
}

std::vector<SparseVector> SparseMatrix::row_vectors() const { return transpose().columns_; }

SparseMatrix SparseMatrix::multiply(const SparseMatrix& rhs) const
{
    if (cols_ != rhs.rows_) throw std::invalid_argument("multiply: dimension mismatch");
    SparseMatrix out(rows_, rhs.cols_);
    for (std::size_t c = 0; c < rhs.cols_; ++c) out.columns_[c] = apply(rhs.columns_[c]);
    return out;
}

SparseMatrix SparseMatrix::vstack(const SparseMatrix& below) const
{
    if (cols_ != below.cols_) throw std::invalid_argument("vstack: column mismatch");
    SparseMatrix out(rows_ + below.rows_, cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
        out.columns_[c] = columns_[c];
        for (const auto& [r, v] : below.columns_[c]) out.columns_[c].emplace_back(r + rows_, v);
    }
    return out;
}

SparseMatrix SparseMatrix::hstack(const SparseMatrix& right) const
{
    if (rows_ != right.rows_) throw std::invalid_argument("hstack: row mismatch");
    SparseMatrix out(rows_, cols_ + right.cols_);
    for (std::size_t c = 0; c < cols_; ++c) out.columns_[c] = columns_[c];
    for (std::size_t c = 0; c < right.cols_; ++c) out.columns_[cols_ + c] = right.columns_[c];
    return out;
}

bool SparseMatrix::operator==(const SparseMatrix& o) const
{
    return rows_ == o.rows_ && cols_ == o.cols_ && columns_ == o.columns_;
}

Subspace Subspace::zero(std::size_t ambient) { return Subspace{ambient, {}}; }

Subspace Subspace::full(std::size_t ambient)
{
    Subspace s{ambient, {}};
    for (std::size_t i = 0; i < ambient; ++i) s.basis.push_back({{i, Scalar(1)}});
    return s;
}

SparseMatrix Subspace::as_columns() const { return SparseMatrix::from_columns(ambient, basis); }

// ---------------------------------------------------------------- Echelon

Echelon::Echelon(std::size_t ncols) : ncols_(ncols), pivot_of_col_(ncols, -1) {}

IntRow Echelon::reduce(IntRow row) const
{
    while (!row.empty()) {
        std::size_t c = row.front().first;
        long p = pivot_of_col_[c];
        if (p < 0) break;
        const IntRow& pr = rows_[p];
        row = eliminate(row, row.front().second, pr, pr.front().second);
    }
    return row;
}

bool Echelon::insert(IntRow row)
{
    normalize_row(row);
    row = reduce(std::move(row));
    if (row.empty()) return false;
    std::size_t c = row.front().first;
    if (c >= ncols_) throw std::out_of_range("Echelon: column out of range");
    pivot_of_col_[c] = static_cast<long>(rows_.size());
    rows_.push_back(std::move(row));
    return true;
}

bool Echelon::in_span(const SparseVector& v) const { return reduce(primitive_row(v)).empty(); }

void Echelon::to_rref()
{
    std::vector<std::size_t> order(rows_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return rows_[a].front().first > rows_[b].front().first; });
    for (std::size_t idx : order) {
        const std::size_t c = rows_[idx].front().first;
        for (std::size_t other = 0; other < rows_.size(); ++other) {
            if (other == idx) continue;
            IntRow& r = rows_[other];
            if (r.front().first >= c) continue;
            const Integer* e = find_entry(r, c);
            if (!e) continue;
            Integer rc = *e;
            r = eliminate(r, rc, rows_[idx], rows_[idx].front().second);
        }
    }
}

std::vector<std::size_t> Echelon::pivot_columns() const
{
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < ncols_; ++c)
        if (pivot_of_col_[c] >= 0) out.push_back(c);
    return out;
}

const IntRow& Echelon::pivot_row(std::size_t col) const
{
    if (!has_pivot(col)) throw std::out_of_range("Echelon: no pivot at column");
    return rows_[pivot_of_col_[col]];
}

// ---------------------------------------------------------------- operations

namespace {

Echelon rows_echelon(const SparseMatrix& m, std::size_t extra_cols = 0, const SparseVector* extra = nullptr)
{
    Echelon e(m.cols() + extra_cols);
    auto rows = m.row_vectors();
    if (extra) {
        for (const auto& [r, v] : *extra) rows[r].emplace_back(m.cols(), v);
    }
    for (auto& r : rows)
        if (!r.empty()) e.insert(primitive_row(r));
    return e;
}

}  // namespace

std::size_t rank_of(const std::vector<SparseVector>& vectors, std::size_t ambient)
{
    std::vector<const SparseVector*> order;
    for (const auto& v : vectors)
        if (!v.empty()) order.push_back(&v);
    std::stable_sort(order.begin(), order.end(),
                     [](const SparseVector* a, const SparseVector* b) { return a->size() < b->size(); });
    Echelon e(ambient);
    for (auto* v : order) e.insert(primitive_row(*v));
    return e.rank();
}

std::size_t rank(const SparseMatrix& m) { return rank_of(m.columns(), m.rows()); }

std::vector<std::size_t> pivot_columns(const SparseMatrix& m) { return rows_echelon(m).pivot_columns(); }

Subspace kernel(const SparseMatrix& m)
{
    Echelon e = rows_echelon(m);
    e.to_rref();
    std::vector<long> pivot_pos(m.cols(), -1);
    auto piv = e.pivot_columns();
    Subspace ker{m.cols(), {}};
    for (std::size_t f = 0; f < m.cols(); ++f) {
        if (e.has_pivot(f)) continue;
        SparseVector v;
        for (auto p : piv) {
            if (p > f) break;
            const IntRow& row = e.pivot_row(p);
            const Integer* x = find_entry(row, f);
            if (!x) continue;
            v.emplace_back(p, -Scalar(*x, row.front().second));
        }
        for (auto& t : v) t.second.canonicalize();
        v.emplace_back(f, Scalar(1));
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        ker.basis.push_back(std::move(v));
    }
    return ker;
}

Subspace image(const SparseMatrix& m)
{
    Subspace s{m.rows(), {}};
    for (auto c : pivot_columns(m)) s.basis.push_back(m.column(c));
    return s;
}

std::optional<SparseVector> solve(const SparseMatrix& m, const SparseVector& b)
{
    for (const auto& [r, v] : b)
        if (r >= m.rows()) throw std::invalid_argument("solve: rhs dimension mismatch");
    Echelon e = rows_echelon(m, 1, &b);
    if (e.has_pivot(m.cols())) return std::nullopt;
    e.to_rref();
    SparseVector x;
    for (auto p : e.pivot_columns()) {
        const IntRow& row = e.pivot_row(p);
        const Integer* rhs = find_entry(row, m.cols());
        if (!rhs) continue;
        Scalar v(*rhs, row.front().second);
        v.canonicalize();
        x.emplace_back(p, v);
    }
    return x;
}

std::optional<Vector> solve(const SparseMatrix& m, const Vector& b)
{
    if (b.size() != m.rows()) throw std::invalid_argument("solve: rhs dimension mismatch");
    auto x = solve(m, to_sparse(b));
    if (!x) return std::nullopt;
    return to_dense(*x, m.cols());
}

bool contains(const Subspace& outer, const Subspace& inner)
{
    if (outer.ambient != inner.ambient) throw std::invalid_argument("contains: ambient mismatch");
    Echelon e(outer.ambient);
    for (const auto& v : outer.basis) e.insert(primitive_row(v));
    for (const auto& v : inner.basis)
        if (!e.in_span(v)) return false;
    return true;
}

Subspace complement(const Subspace& sub, const Subspace& inside)
{
    if (sub.ambient != inside.ambient) throw std::invalid_argument("complement: ambient mismatch");
    if (!contains(inside, sub)) throw std::invalid_argument("complement: subspace not contained in the ambient subspace");
    Echelon e(sub.ambient);
    for (const auto& v : sub.basis) e.insert(primitive_row(v));
    Subspace out{sub.ambient, {}};
    for (const auto& v : inside.basis)
        if (e.insert(primitive_row(v))) out.basis.push_back(v);
    return out;
}

Subspace span(const std::vector<SparseVector>& vectors, std::size_t ambient)
{
    Echelon e(ambient);
    Subspace out{ambient, {}};
    for (const auto& v : vectors)
        if (!v.empty() && e.insert(primitive_row(v))) out.basis.push_back(v);
    return out;
}

// ---------------------------------------------------------------- ImageSolver

ImageSolver::ImageSolver(const SparseMatrix& m) : m_(m)
{
    pivots_ = pivot_columns(m);
    const std::size_t r = pivots_.size();
    // rows of m restricted to the pivot columns, pick independent ones greedily
    std::vector<long> col_pos(m.cols(), -1);
    for (std::size_t i = 0; i < r; ++i) col_pos[pivots_[i]] = static_cast<long>(i);
    std::vector<SparseVector> sub_rows(m.rows());
    for (std::size_t i = 0; i < r; ++i)
        for (const auto& [row, v] : m.column(pivots_[i])) sub_rows[row].emplace_back(i, v);
    Echelon e(r);
    for (std::size_t row = 0; row < m.rows() && rows_sel_.size() < r; ++row)
        if (!sub_rows[row].empty() && e.insert(primitive_row(sub_rows[row]))) rows_sel_.push_back(row);
    // inverse of the square block by rref of [S | I]
    Echelon aug(2 * r);
    for (std::size_t i = 0; i < r; ++i) {
        SparseVector v = sub_rows[rows_sel_[i]];
        v.emplace_back(r + i, Scalar(1));
        aug.insert(primitive_row(v));
    }
    aug.to_rref();
    std::vector<Entry> inv;
    for (std::size_t i = 0; i < r; ++i) {
        const IntRow& row = aug.pivot_row(i);
        for (const auto& [c, v] : row) {
            if (c < r) continue;
            Scalar s(v, row.front().second);
            s.canonicalize();
            inv.push_back({i, c - r, s});
        }
    }
    inverse_ = SparseMatrix::from_entries(r, r, inv);
}

std::optional<SparseVector> ImageSolver::solve(const SparseVector& b) const
{
    const std::size_t r = pivots_.size();
    std::vector<long> sel_pos(m_.rows(), -1);
    for (std::size_t i = 0; i < r; ++i) sel_pos[rows_sel_[i]] = static_cast<long>(i);
    SparseVector bs;
    for (const auto& [row, v] : b) {
        if (row >= m_.rows()) throw std::invalid_argument("ImageSolver: rhs dimension mismatch");
        if (sel_pos[row] >= 0) bs.emplace_back(sel_pos[row], v);
    }
    std::sort(bs.begin(), bs.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
    SparseVector xs = inverse_.apply(bs);
    SparseVector x;
    for (const auto& [i, v] : xs) x.emplace_back(pivots_[i], v);
    std::sort(x.begin(), x.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
    SparseVector check = add(m_.apply(x), b, Scalar(-1));
    if (!check.empty()) return std::nullopt;
    return x;
}

std::string to_string(const Scalar& s) { return s.get_str(); }

}  // namespace exactalg
