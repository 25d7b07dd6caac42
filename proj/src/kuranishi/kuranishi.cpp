#include "kuranishi/kuranishi.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace kuranishi {

using crx::Scalar;
using nlohmann::json;

namespace {

std::string weight_string(const crx::BlockWeight& w)
{
    std::ostringstream os;
    os << "(" << w.z[0] << "," << w.z[1] << " | ";
    for (int i = 0; i < crx::kMaxCoords; ++i) os << (i ? "," : "") << w.y[i];
    os << ")";
    return os.str();
}

// 1/2 sum_{j=1}^{i-1} [phi_j, phi_{i-j}]; the bracket is symmetric on 1-forms.
Cochain half_sum(const std::vector<Cochain>& phi, int i)
{
    Cochain r;
    for (int j = 1; 2 * j <= i; ++j) {
        const int o = i - j;
        if (o >= static_cast<int>(phi.size()) || phi[j].empty() || phi[o].empty()) continue;
        const Cochain b = crx::bracket(phi[j], 1, phi[o], 1);
        r = crx::add(r, b, j == o ? Scalar(1, 2) : Scalar(1));
    }
    return r;
}

std::vector<Cochain> graded(const FormalSeries& s)
{
    std::vector<Cochain> phi(s.terms.size() + 1);
    for (std::size_t i = 0; i < s.terms.size(); ++i) phi[i + 1] = s.terms[i].total();
    return phi;
}

}  // namespace

Cochain right_inverse_P(int n, const Cochain& r, int max_raise)
{
    auto sol = crx::solve_in_C(n - 2, r, max_raise);
    if (!sol.x) {
        throw NoSolution("dbar_H x = r has no solution in C^1 in block " + weight_string(sol.failed_block) +
                             " (weight " + std::to_string(crx::weight_of_key(sol.failed_part.begin()->first)) + ")",
                         0, sol.failed_block, sol.failed_part);
    }
    if (crx::dbar(*sol.x) != r || !crx::flat(*sol.x).empty())
        throw std::logic_error("right_inverse_P: solution failed verification");
    return *sol.x;
}

DeformationTensor FormalSeries::sum() const
{
    Cochain total;
    for (const auto& t : terms) total = crx::add(total, t.total());
    return DeformationTensor::from_cochain(n, total);
}

FormalSeries FormalSeries::truncated(int order) const
{
    FormalSeries s;
    s.n = n;
    for (int i = 0; i < std::min(order, truncation_order()); ++i) s.terms.push_back(terms[i]);
    return s;
}

FormalSeries chart_phi(const DeformationTensor& seed, int order, const ChartOptions& opt)
{
    if (order < 1) throw std::invalid_argument("order must be >= 1");
    const Cochain phi1 = seed.total();
    if (!phi1.empty() && crx::degree_of(phi1) != 1) throw std::invalid_argument("seed must consist of 1-forms");
    if (!crx::flat(phi1).empty()) throw std::invalid_argument("seed is not in ker flat");
    if (!crx::dbar(phi1).empty()) throw std::invalid_argument("seed is not dbar_H-closed");

    std::set<int> support;
    for (const auto& [k, c] : seed.coeffs)
        if (!c.empty()) support.insert(k);
    std::set<int> sums = support;
    for (int i = 1; i <= order && !support.empty(); ++i) {
        if (*sums.begin() < opt.kmin || *sums.rbegin() > opt.kmax) {
            std::ostringstream os;
            os << "order " << i << " reaches weights [" << *sums.begin() << ", " << *sums.rbegin()
               << "], outside the built range [" << opt.kmin << ", " << opt.kmax << "]; widen --kmin/--kmax";
            throw RangeError(os.str());
        }
        std::set<int> next;
        for (int a : sums)
            for (int b : support) next.insert(a + b);
        sums = std::move(next);
    }

    std::vector<Cochain> phi(order + 1);
    phi[1] = phi1;
    for (int i = 2; i <= order; ++i) {
        const Cochain r = half_sum(phi, i);
        if (r.empty()) continue;
        try {
            phi[i] = crx::scale(right_inverse_P(seed.n, r, opt.max_raise), Scalar(-1));
        } catch (const NoSolution& e) {
            throw NoSolution(std::string(e.what()) + " at order " + std::to_string(i), i, e.block, e.obstruction);
        }
    }
    FormalSeries s;
    s.n = seed.n;
    for (int i = 1; i <= order; ++i) s.terms.push_back(DeformationTensor::from_cochain(seed.n, phi[i]));
    return s;
}

FormalSeries inverse_chart(const FormalSeries& phi, int max_raise)
{
    const auto g = graded(phi);
    FormalSeries out;
    out.n = phi.n;
    for (int i = 1; i <= phi.truncation_order(); ++i) {
        const Cochain r = half_sum(g, i);
        Cochain psi = g[i];
        if (!r.empty()) psi = crx::add(psi, right_inverse_P(phi.n, r, max_raise));
        out.terms.push_back(DeformationTensor::from_cochain(phi.n, psi));
    }
    return out;
}

DeformationTensor inverse_chart(const DeformationTensor& phi, int max_raise)
{
    const Cochain x = phi.total();
    const Cochain r = crx::scale(crx::bracket(x, 1, x, 1), Scalar(1, 2));
    if (r.empty()) return DeformationTensor::from_cochain(phi.n, x);
    return DeformationTensor::from_cochain(phi.n, crx::add(x, right_inverse_P(phi.n, r, max_raise)));
}

std::vector<OrderResidual> integrability_residual(const FormalSeries& phi, int order)
{
    const auto g = graded(phi);
    std::vector<OrderResidual> out;
    for (int i = 1; i <= std::min(order, phi.truncation_order()); ++i) {
        OrderResidual r;
        r.order = i;
        r.integrability = crx::add(crx::dbar(g[i]), half_sum(g, i));
        r.flat = crx::flat(g[i]);
        out.push_back(std::move(r));
    }
    return out;
}

Representative negative_representative(const DeformationTensor& seed, int max_raise)
{
    Representative rep;
    rep.seed.n = seed.n;
    const int l = seed.n - 2;
    for (const auto& [k, c] : seed.coeffs) {
        if (c.empty()) continue;
        if (k < 0) {
            rep.seed.coeffs[k] = c;
            continue;
        }
        for (const auto& [w, part] : crx::split_by_weight(c)) {
            const auto base = crx::levels_of(part);
            bool solved = false;
            for (int raise = 0; raise <= max_raise && !solved; ++raise) {
                auto b = crx::global_block(l, w, {base.z + raise, base.y + raise});
                auto rc = b->coords(true, 1, part);
                if (!rc) throw std::invalid_argument("seed term outside the model");
                auto sol = exactalg::solve(b->dA(0), *rc);
                if (!sol) continue;
                rep.upsilon = crx::add(rep.upsilon, b->expand(true, 0, *sol));
                solved = true;
            }
            if (!solved)
                throw NoSolution("weight-" + std::to_string(k) + " part of the seed in block " + weight_string(w) +
                                     " is not dbar of the extended degree-0 space",
                                 0, w, part);
        }
    }
    Cochain check = crx::add(rep.seed.total(), crx::dbar(rep.upsilon));
    if (check != seed.total()) throw std::logic_error("negative_representative: reconstruction failed");
    return rep;
}

DeformationTensor random_seed(int n, const std::vector<int>& weights, std::mt19937_64& rng, bool classes, int terms)
{
    Cochain seed;
    for (int k : weights) {
        const auto wc = crx::build_weight_complex(n, k);
        const crx::Levels lv{wc.levels.z + 1, wc.levels.y + 1};
        for (int attempt = 0; attempt < 16; ++attempt) {
            const Cochain c = crx::contact_action(crx::random_function(n - 2, k, lv, rng, terms));
            if (c.empty()) continue;
            seed = crx::add(seed, c);
            break;
        }
        if (!classes || k > -2) continue;
        const auto blocks = wc.candidate_blocks();
        if (blocks.empty()) continue;
        const auto b = wc.block(blocks[rng() % blocks.size()].w);
        const auto z1 = b->top() > 1 ? exactalg::kernel(b->dA(1).vstack(b->flat(1)))
                                     : exactalg::Subspace::full(b->A(1).dim);
        if (z1.dim() == 0) continue;
        const auto& v = z1.basis[rng() % z1.dim()];
        seed = crx::add(seed, b->expand(true, 1, v), Scalar(static_cast<long>(rng() % 3) + 1));
    }
    return DeformationTensor::from_cochain(n, seed);
}

bool nonnegative_weights(const DeformationTensor& t)
{
    return std::all_of(t.coeffs.begin(), t.coeffs.end(), [](const auto& kv) { return kv.first >= 0 || kv.second.empty(); });
}

bool nonnegative_weights(const FormalSeries& s)
{
    return std::all_of(s.terms.begin(), s.terms.end(), [](const DeformationTensor& t) { return nonnegative_weights(t); });
}

json to_json(const FormalSeries& s)
{
    json terms = json::array();
    for (int i = 1; i <= s.truncation_order(); ++i) {
        json t = crx::to_json(s.term(i));
        terms.push_back({{"order", i}, {"entries", t["entries"]}});
    }
    return {{"schema_version", crx::kSchemaVersion},
            {"kind", "formal_series"},
            {"n", s.n},
            {"truncation_order", s.truncation_order()},
            {"terms", terms}};
}

FormalSeries series_from_json(const json& j)
{
    if (!j.is_object()) throw crx::FormatError("/: expected an object");
    if (!j.contains("kind") || j["kind"] != "formal_series") throw crx::FormatError("/kind: expected \"formal_series\"");
    if (!j.contains("terms") || !j["terms"].is_array()) throw crx::FormatError("/terms: missing or not an array");
    FormalSeries s;
    s.n = j.value("n", 0);
    const int m = j.value("truncation_order", 0);
    s.terms.assign(m, DeformationTensor{s.n, {}});
    for (std::size_t i = 0; i < j["terms"].size(); ++i) {
        const auto& t = j["terms"][i];
        const std::string where = "/terms/" + std::to_string(i);
        if (!t.contains("order") || !t["order"].is_number_integer())
            throw crx::FormatError(where + "/order: missing or not an integer");
        const int o = t["order"].get<int>();
        if (o < 1 || o > m) throw crx::FormatError(where + "/order: outside [1, truncation_order]");
        json doc = {{"schema_version", j.value("schema_version", 0)}, {"kind", "deformation_tensor"}, {"n", s.n},
                    {"entries", t.value("entries", json::array())}};
        try {
            s.terms[o - 1] = crx::tensor_from_json(doc);
        } catch (const crx::FormatError& e) {
            throw crx::FormatError(where + e.what());
        }
    }
    return s;
}

}  // namespace kuranishi
