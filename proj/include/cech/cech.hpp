#pragma once

#include "bott/bundle.hpp"
#include "exactalg/exactalg.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

namespace cech {

using exactalg::Scalar;
using exactalg::SparseMatrix;

// Cochain complex with explicit finite bases, d[q] : C^q -> C^{q+1}.
struct FiniteComplex {
    std::vector<std::size_t> dims;
    std::vector<SparseMatrix> d;

    int top() const { return static_cast<int>(dims.size()) - 1; }
    std::vector<long> ranks() const;
    std::vector<long> cohomology() const;
    bool squares_to_zero() const;
};

// Koszul-signed tensor product; basis (i, j) enumerated by total degree, then i, then j.
FiniteComplex tensor(const FiniteComplex& a, const FiniteComplex& b);
// Degree-p-of-a, degree-r-of-b basis offset inside tensor degree p+r.
std::size_t tensor_offset(const FiniteComplex& a, const FiniteComplex& b, int p, int r);

// One cochain basis element: a cover intersection per factor (bitmask of charts),
// a Laurent monomial (exponents of all coordinates, factors concatenated) and the
// generator d/dx_gen of the tangent part (-1 for line bundles).
struct Cell {
    std::vector<std::uint32_t> sets;
    std::vector<int> exps;
    int gen = -1;
    auto operator<=>(const Cell&) const = default;
};

struct CechClass {
    bott::BundleSpec bundle;
    int degree = 0;
    std::map<Cell, Scalar> cochain;
};

struct MonomialBlock {
    bott::BundleSpec base;
    std::vector<int> multidegree;
    std::map<int, long> cochain_dims;
};

// Smallest admissible exponent box for a bundle.
int min_box(const bott::BundleSpec& bundle);

long cech_dim(const bott::BundleSpec& bundle, int q, int box);
long cech_dim(const bott::BundleSpec& bundle, int q);
bott::CohomologyTable cech_table(const bott::BundleSpec& bundle, int box);
std::vector<CechClass> cech_basis(const bott::BundleSpec& bundle, int q);
std::vector<MonomialBlock> contributing_blocks(const bott::BundleSpec& bundle, int q, int box);

// Multiplication by the homogeneous coordinate with global index `coordinate`.
CechClass multiply(const bott::BundleSpec& bundle, int coordinate, const CechClass& c);
// Twist raised by one in the factor owning the coordinate.
bott::BundleSpec multiplied_bundle(const bott::BundleSpec& bundle, int coordinate);

// Cup product with the signed hyperplane classes: -[factor 0] + [factor 1] on products,
// +[factor] on a single factor. Full-tangent or tangent-of-factor classes only.
CechClass contract_with_F(const CechClass& c);

// Čech differential of the representative; for tangent bundles the result is reduced
// modulo the Euler image, so zero means cocycle.
bool is_cocycle(const CechClass& c);
bool is_zero_class(const CechClass& c);

// Rank of the map H^q(E) -> H^{q'}(E') induced by f on cocycle representatives.
long induced_rank(const std::vector<CechClass>& images, const bott::BundleSpec& target, int q);
// Rank of H^q(P^n, O(k)) -> H^q(P^n, O(k+1))^{n+1}, c -> (x_0 c, ..., x_n c).
long euler_multiplication_rank(int n, int k, int q);
// Rank of contract_with_F on H^q of the bundle.
long contraction_rank(const bott::BundleSpec& bundle, int q);

}  // namespace cech
