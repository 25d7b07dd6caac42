#pragma once

#include "crx/crx.hpp"
#include "crx/tensor.hpp"

#include <json.hpp>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Formal solution of dbar_H phi + 1/2 [phi, phi] = 0, flat phi = 0 from a linearized
// seed, order by order.
namespace kuranishi {

using crx::Cochain;
using crx::DeformationTensor;

// dbar_H x = r has no solution x in C^1: r carries an H^2 class.
struct NoSolution : std::runtime_error {
    NoSolution(const std::string& what, int order, crx::BlockWeight block, Cochain part)
        : std::runtime_error(what), order(order), block(block), obstruction(std::move(part))
    {
    }
    int order = 0;
    crx::BlockWeight block;
    Cochain obstruction;
};

// Weights of the series would leave the configured range.
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// P: x in C^1 with dbar_H x = r, block by block (so it commutes with the circle action).
// r must be a degree-2 cochain of the ambient model; throws NoSolution otherwise.
Cochain right_inverse_P(int n, const Cochain& r, int max_raise = 2);

struct FormalSeries {
    int n = 0;
    std::vector<DeformationTensor> terms;  // terms[i-1] has order i

    int truncation_order() const { return static_cast<int>(terms.size()); }
    const DeformationTensor& term(int order) const { return terms.at(order - 1); }
    DeformationTensor sum() const;
    FormalSeries truncated(int order) const;
};

struct ChartOptions {
    int kmin = -6;
    int kmax = 6;
    int max_raise = 2;
};

// phi_1 = seed, phi_i = -P 1/2 sum_{j=1}^{i-1} [phi_j, phi_{i-j}].
// Throws std::invalid_argument unless dbar seed = 0 and flat seed = 0, RangeError
// when an i-fold weight sum leaves [kmin, kmax], NoSolution from P.
FormalSeries chart_phi(const DeformationTensor& seed, int order, const ChartOptions& opt = {});

// Order by order, phi + P 1/2 [phi, phi] through the series' truncation order.
FormalSeries inverse_chart(const FormalSeries& phi, int max_raise = 2);
// Ungraded: phi + P 1/2 [phi, phi]; needs [phi, phi] exact in C.
DeformationTensor inverse_chart(const DeformationTensor& phi, int max_raise = 2);

struct OrderResidual {
    int order = 0;
    Cochain integrability;  // order-i part of dbar phi + 1/2 [phi, phi]
    Cochain flat;           // flat phi_i
    bool zero() const { return integrability.empty() && flat.empty(); }
};
std::vector<OrderResidual> integrability_residual(const FormalSeries& phi, int order);

// The n = 4 representative route: every part of the seed of weight >= 0 is written
// as dbar(upsilon) with upsilon in the extended degree-0 space and removed, leaving a
// representative with negative weights only. Throws NoSolution if some part is not
// of that form.
struct Representative {
    DeformationTensor seed;  // negative weights only
    Cochain upsilon;         // seed_in = seed + dbar upsilon
};
Representative negative_representative(const DeformationTensor& seed, int max_raise = 2);

// Random sparse dbar-closed seed: at each weight, the contact image of a random function
// with `terms` terms; with `classes`, also a random cocycle of a candidate block at each
// weight <= -2 (nonzero in H^1 generically). Levels go up to the model level + 1.
DeformationTensor random_seed(int n, const std::vector<int>& weights, std::mt19937_64& rng, bool classes,
                              int terms = 1);

// Weight support helpers.
bool nonnegative_weights(const DeformationTensor& t);
bool nonnegative_weights(const FormalSeries& s);

nlohmann::json to_json(const FormalSeries& s);
FormalSeries series_from_json(const nlohmann::json& j);

}  // namespace kuranishi
