#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace exactalg {

using Integer = mpz_class;
using Scalar = mpq_class;
using Vector = std::vector<Scalar>;

// Sorted by index, no stored zeros.
using SparseVector = std::vector<std::pair<std::size_t, Scalar>>;
using IntRow = std::vector<std::pair<std::size_t, Integer>>;

struct Entry {
    std::size_t row;
    std::size_t col;
    Scalar value;
};

SparseVector to_sparse(const Vector& v);
Vector to_dense(const SparseVector& v, std::size_t n);
SparseVector add(const SparseVector& a, const SparseVector& b, const Scalar& cb = 1);
SparseVector scale(const SparseVector& a, const Scalar& c);
Scalar dot(const SparseVector& a, const SparseVector& b);

// Primitive integer row on the same line as v (positive leading entry).
IntRow primitive_row(const SparseVector& v);

class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);

    static SparseMatrix from_entries(std::size_t rows, std::size_t cols, const std::vector<Entry>& entries);
    static SparseMatrix from_columns(std::size_t rows, std::vector<SparseVector> columns);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const;

    const SparseVector& column(std::size_t c) const { return columns_[c]; }
    const std::vector<SparseVector>& columns() const { return columns_; }
    std::vector<Entry> entries() const;
    Scalar at(std::size_t r, std::size_t c) const;

    Vector apply(const Vector& x) const;
    SparseVector apply(const SparseVector& x) const;
    SparseMatrix transpose() const;
    SparseMatrix multiply(const SparseMatrix& rhs) const;
    std::vector<SparseVector> row_vectors() const;

    // [this ; below] and [this | right]
    SparseMatrix vstack(const SparseMatrix& below) const;
    SparseMatrix hstack(const SparseMatrix& right) const;

    bool operator==(const SparseMatrix& o) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<SparseVector> columns_;
};

struct Subspace {
    std::size_t ambient = 0;
    std::vector<SparseVector> basis;

    std::size_t dim() const { return basis.size(); }
    static Subspace zero(std::size_t ambient);
    static Subspace full(std::size_t ambient);
    SparseMatrix as_columns() const;
};

// Row echelon form over Q kept as primitive integer rows.
// Rows are reduced on their leading entry only until to_rref().
class Echelon {
public:
    explicit Echelon(std::size_t ncols);

    bool insert(IntRow row);
    bool insert(const SparseVector& v) { return insert(primitive_row(v)); }
    // Leading-term reduction against the current pivots; empty result means dependent.
    IntRow reduce(IntRow row) const;
    bool in_span(const SparseVector& v) const;

    void to_rref();

    std::size_t rank() const { return rows_.size(); }
    std::size_t ncols() const { return ncols_; }
    // Leading columns, ascending.
    std::vector<std::size_t> pivot_columns() const;
    // Row with the given leading column (to_rref first for reduced rows).
    const IntRow& pivot_row(std::size_t col) const;
    bool has_pivot(std::size_t col) const { return col < ncols_ && pivot_of_col_[col] >= 0; }

private:
    std::size_t ncols_;
    std::vector<long> pivot_of_col_;
    std::vector<IntRow> rows_;
};

std::size_t rank(const SparseMatrix& m);
std::size_t rank_of(const std::vector<SparseVector>& vectors, std::size_t ambient);
Subspace kernel(const SparseMatrix& m);
Subspace image(const SparseMatrix& m);
// Leftmost maximal independent set of columns.
std::vector<std::size_t> pivot_columns(const SparseMatrix& m);

struct NoSolution {};

// x with m x = b, supported on the pivot columns; nullopt when b is not in the image.
std::optional<Vector> solve(const SparseMatrix& m, const Vector& b);
std::optional<SparseVector> solve(const SparseMatrix& m, const SparseVector& b);

bool contains(const Subspace& outer, const Subspace& inner);
// Throws std::invalid_argument when sub is not contained in inside.
Subspace complement(const Subspace& sub, const Subspace& inside);
// Basis of span(vectors) chosen greedily in order.
Subspace span(const std::vector<SparseVector>& vectors, std::size_t ambient);

// Repeated solves against one matrix. Same solutions as solve().
class ImageSolver {
public:
    ImageSolver() = default;
    explicit ImageSolver(const SparseMatrix& m);

    std::optional<SparseVector> solve(const SparseVector& b) const;
    std::size_t rank() const { return pivots_.size(); }
    const std::vector<std::size_t>& pivots() const { return pivots_; }
    std::size_t rows() const { return m_.rows(); }
    std::size_t cols() const { return m_.cols(); }

private:
    SparseMatrix m_;
    std::vector<std::size_t> pivots_;
    std::vector<std::size_t> rows_sel_;
    SparseMatrix inverse_;  // inverse of m[rows_sel_, pivots_]
};

std::string to_string(const Scalar& s);

}  // namespace exactalg
