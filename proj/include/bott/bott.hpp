#pragma once

#include "bott/bundle.hpp"

#include <array>

namespace bott {

// h^q(P^n, O(k)); on P^0 every twist gives a point.
long h_line(int n, int k, int q);
// h^q(P^n, T(k)) from the Euler sequence, connecting ranks computed by Čech.
long h_tangent(int n, int k, int q);
// Σ_i a_i b_{q-i}.
long kunneth(const CohomologyTable& a, const CohomologyTable& b, int q);
// h^q(P^m x P^l, (T_{P^m} ⊞ T_{P^l}) ⊗ O(a,b)).
long h_product_tangent(int m, int l, std::array<int, 2> twist, int q);

// Closed-form table for any supported bundle.
CohomologyTable table(const BundleSpec& bundle);
long h(const BundleSpec& bundle, int q);

}  // namespace bott
