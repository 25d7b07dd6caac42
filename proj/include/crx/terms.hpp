#pragma once

#include "exactalg/exactalg.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>

// Monomial terms of bi-homogeneous Dolbeault forms on C^{m+1} \ 0.
//
// A factor key (m, a, b, J, v) stands for
//     x^a xbar^b / |x|^{2N} dxbar_J  (x d/dx_v if v >= 0),   N = |b| + |J|,
// and the level of the key is |b|. Keys are kept in normal form
// min(a_0, b_0) = 0, which makes the representation of a function unique.
namespace crx {

using exactalg::Integer;
using exactalg::Scalar;

constexpr int kMaxCoords = 5;

struct FKey {
    std::int8_t m = 0;
    std::array<std::int16_t, kMaxCoords> a{};
    std::array<std::int16_t, kMaxCoords> b{};
    std::uint8_t J = 0;
    std::int8_t v = -1;

    auto operator<=>(const FKey&) const = default;

    int level() const;
    int degree() const;  // |J|
    int twist() const;   // |a| - |b| - |J| - (v >= 0)
    std::array<int, kMaxCoords> weight() const;  // a - b - e_J - e_v
    bool is_normal() const { return a[0] == 0 || b[0] == 0; }
};

using FVec = std::map<FKey, Scalar>;

void accumulate(FVec& out, const FKey& k, const Scalar& c);
// Adds c * k rewritten in normal form.
void accumulate_normal(FVec& out, const FKey& k, const Scalar& c);

// Factor operators, term by term at the term's own level. Outputs are normal.
FVec dbar_factor(const FKey& k);
FVec flat_factor(const FKey& k);          // dxbar_v appended on the right, vector removed
FVec sharp_factor(const FKey& k);         // 1-form dxbar_j -> d/dx_j
FVec deriv_factor(const FKey& k, int i);  // d/dx_i of the coefficient
FVec horizontal_factor(const FKey& k);    // w |x|^2 - x (xbar . w) for a vector term
// Descent conditions: contraction with the conjugate Euler field (tag 0) and
// horizontality xbar . v (tag 1). The tag is stored in the returned key's v slot
// as -2 (contraction) or -3 (horizontality).
FVec constraint_factor(const FKey& k);
FKey conjugate(const FKey& k);  // functions only: swaps a and b

// Global key on P^1 x P^l.
struct Key {
    FKey z;
    FKey y;
    auto operator<=>(const Key&) const = default;
    int degree() const { return z.degree() + y.degree(); }
    bool is_vector() const { return z.v >= 0 || y.v >= 0; }
    bool is_function() const { return degree() == 0 && !is_vector(); }
};

using Cochain = std::map<Key, Scalar>;

void accumulate(Cochain& out, const Key& k, const Scalar& c);
Cochain add(const Cochain& x, const Cochain& y, const Scalar& cy = 1);
Cochain scale(const Cochain& x, const Scalar& c);

std::string label(const FKey& k);
std::string label(const Key& k);
FKey parse_factor_label(const std::string& s, int m);
Key parse_label(const std::string& s, int l);

// Sign of dxbar_j ^ dxbar_J (j put in front) and the merged set; 0 if j in J.
int wedge_front(std::uint8_t J, int j, std::uint8_t& out);
// Sign of dxbar_J ^ dxbar_j.
int wedge_back(std::uint8_t J, int j, std::uint8_t& out);
// Sign of dxbar_J ^ dxbar_K reordered into dxbar_{J u K}; 0 if they meet.
int wedge_sets(std::uint8_t J, std::uint8_t K, std::uint8_t& out);

}  // namespace crx
