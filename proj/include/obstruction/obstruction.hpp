#pragma once

#include "crx/crx.hpp"
#include "crx/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace obstruction {

using crx::BlockWeight;
using crx::Cochain;
using exactalg::Scalar;
using exactalg::Subspace;

// Theory and linear algebra disagree. Never expected; reported as a hard error.
struct Discrepancy : std::logic_error {
    using std::logic_error::logic_error;
};

// Input outside what the built complexes can decide (weight range, model level,
// not linearized-integrable).
struct ScopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dim W_k for k <= 0 from the closed form on the factors.
long w_dim_closed(int n, int k);
// dim W_k for k >= 0 by linear algebra on the built complex.
long w_dim_positive(int n, int k, std::optional<int> cutoff = std::nullopt);

// The same numbers on the sheaf level: bott dimensions and ranks of the contraction
// with F on Čech cohomology. Independent of the polynomial model.
struct SheafNumbers {
    std::vector<long> hA, hB, rank_f;
    long w = 0;
    long h1_ext = 0;
    long h2 = 0;
};
SheafNumbers sheaf_numbers(int n, int k);

// Cocycles Z^1(C), the contact image inside them and a chosen complement, in the
// degree-1 coordinates of one block.
struct BlockSplit {
    std::shared_ptr<const crx::GlobalBlock> block;
    Subspace cocycles;
    Subspace image;
    Subspace complement;
};
std::shared_ptr<const BlockSplit> block_split(const std::shared_ptr<const crx::GlobalBlock>& block);

struct WSpace {
    int n = 0;
    int k = 0;
    struct Entry {
        crx::WeightedBlock rep;
        std::shared_ptr<const BlockSplit> split;
    };
    std::vector<Entry> blocks;  // candidate blocks, one per orbit
    long dim = 0;               // weighted by orbit size
    // Basis vector i of the complement in block `b`, as a cochain.
    Cochain vector(std::size_t b, std::size_t i) const;
};
// Throws Discrepancy if the dimension differs from the closed form (k <= 0) or the
// sheaf numbers (k > 0).
WSpace w_space(const crx::WeightComplex& wc);

long h1_extended(int n, int k, std::optional<int> cutoff = std::nullopt);

struct H2Check {
    long h2 = 0;          // built model
    long ambient_h2 = 0;  // h^2 of T ⊗ O(k,-k) on P^1 x P^{n-2}
    long contraction_rank = 0;  // rank of the contraction with F on that H^2 (Čech)
    long scalar_part = 0;       // h^2(O(k,-k)) - rank on H^1
};
H2Check h2_check(int n, int k, std::optional<int> cutoff = std::nullopt);

// ---- dimension 7 ------------------------------------------------------------

struct BracketSample {
    int k1 = 0;
    int k2 = 0;
    bool exact = false;
    bool zero_bracket = false;
};

struct Dim7Report {
    int kmin = 0;
    int kmax = 0;
    std::vector<std::pair<int, long>> h1_ext;  // k >= 0
    std::vector<std::pair<int, long>> h2;      // k <= 0
    long ambient_h1_k3 = 0;                    // nonzero Künneth summand at k = 3
    std::vector<BracketSample> brackets;
    bool ok = true;
};
// Throws Discrepancy when a bracket fails to be exact.
Dim7Report dim7_analysis(int kmin, int kmax, std::uint64_t seed = 1, int samples = 6);

// ---- reports and verdicts -----------------------------------------------------

struct WeightRow {
    int k = 0;
    long h1_ext = 0;
    long h2 = 0;
    long w_closed = 0;  // closed form for k <= 0, sheaf numbers for k > 0
    long w_linear = 0;
    bool match = true;
    bool stable = true;
};

struct BlockCoefficients {
    BlockWeight w;
    std::vector<Scalar> coefficients;  // in the complement basis of the block at the model level
    bool operator==(const BlockCoefficients&) const = default;
};

struct Residual {
    int k = 0;
    Cochain vector;                       // component along the chosen complement
    std::vector<BlockCoefficients> blocks;  // blocks with a nonzero component
};

struct FillabilityVerdict {
    bool fillable_N = true;
    bool fillable_M = true;
    bool stable = true;
    bool m_theorem_backed = true;  // false for n in {2, 3}
    std::vector<Residual> residuals;  // nonzero weights only, k != 0
    std::vector<Residual> informational;  // weight 0
};

struct ObstructionReport {
    int n = 0;
    int kmin = 0;
    int kmax = 0;
    std::vector<WeightRow> rows;
    std::vector<std::string> diagnostics;
    std::optional<FillabilityVerdict> verdict;

    bool all_match() const;
    bool all_stable() const;
};

ObstructionReport obstruction_report(int n, int kmin, int kmax, std::optional<int> cutoff = std::nullopt);

struct ClassifyOptions {
    int kmin = -6;
    int kmax = 6;
    std::optional<int> cutoff;
};
// Gauge fixing at the linear level per weight. Throws ScopeError for inputs the model
// cannot decide.
FillabilityVerdict classify(const crx::DeformationTensor& dt, const ClassifyOptions& opt = {});

nlohmann::json to_json(const WeightRow& r);
nlohmann::json to_json(const FillabilityVerdict& v);
nlohmann::json to_json(const ObstructionReport& r);
nlohmann::json to_json(const Dim7Report& r);

}  // namespace obstruction
