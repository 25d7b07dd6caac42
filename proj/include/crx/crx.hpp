#pragma once

#include "crx/global.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// The weight-k piece of the deformation complex of X^{2n-1} ⊂ P^n, modelled on
// P^1 x P^{n-2} with values in T ⊗ O(k,-k).
namespace crx {

// Cohomology numbers assembled from the factor models by Künneth and the long
// exact sequence of 0 -> C -> A -> B[1] -> 0.
struct LesNumbers {
    std::vector<long> hA, hB;
    std::vector<long> rank_f;  // rank of H^q(A) -> H^{q+1}(B)
    long w = 0;                // obstruction space, dim H^1(C)
    long h1_ext = 0;           // H^1 of the extended complex
    long h2 = 0;               // H^2(C)
};

LesNumbers les_numbers(int l, const FactorData& z, const FactorData& y);

// A model whose cutoff does not stabilize was asked for a verdict.
struct Unstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Diagnostics {
    bool stable = true;
    std::vector<std::string> messages;
};

struct WeightedBlock {
    BlockWeight w;  // sorted representative
    long orbit = 1;
};

struct WeightComplex {
    int n = 0;
    int k = 0;
    int l = 0;
    Levels levels;
    FactorData zdata;  // P^1, twist k
    FactorData ydata;  // P^{n-2}, twist -k
    Diagnostics diagnostics;
    LesNumbers numbers;

    // Blocks where A or B can carry cohomology, up to coordinate permutations.
    std::vector<WeightedBlock> candidate_blocks() const;
    // All blocks in the orbit of a representative.
    std::vector<BlockWeight> orbit(const BlockWeight& rep) const;
    std::shared_ptr<const GlobalBlock> block(const BlockWeight& w) const { return global_block(l, w, levels); }
};

// cutoff: common level for both factors; when absent each factor's level is raised
// until the numbers stabilize. Instability is reported in diagnostics.
WeightComplex build_weight_complex(int n, int k, std::optional<int> cutoff = std::nullopt);

// Sum of block_numbers over candidate blocks, weighted by orbit size.
struct DirectNumbers {
    long w = 0;
    long h1_ext = 0;
    long h2 = 0;
    std::vector<long> hA, hB;
};
DirectNumbers direct_numbers(const WeightComplex& wc);

}  // namespace crx
