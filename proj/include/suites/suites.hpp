#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Invariant suites shared by `verify` and the acceptance runner.
namespace suites {

struct Check {
    std::string group;
    bool pass = true;
    long cases = 0;
    std::string detail;  // first failure, if any
};

struct CohomologyRow {
    std::string bundle;
    int q = 0;
    long closed = 0;
    long oracle = 0;
    bool match() const { return closed == oracle; }
};

// Line and tangent bundles on P^0..P^max_dim, twists in [kmin, kmax], all degrees;
// with `products`, also O(k,-k) and T ⊗ O(k,-k) on P^1 x P^{n-2}.
std::vector<CohomologyRow> cohomology_grid(int max_dim, int kmin, int kmax, int n = 0, bool products = false);

struct VerifyConfig {
    int n = 5;
    int kmin = -6;
    int kmax = 6;
    int order = 4;
    std::uint64_t seed = 1;
    int kuranishi_seeds = 3;
};

// Every group is independent; a throwing group is recorded as failed.
std::vector<Check> verify(const VerifyConfig& cfg);

// ---- acceptance criteria ------------------------------------------------------

struct Outcome {
    bool pass = true;
    std::string detail;
};

Outcome criterion_cohomology();                       // 1
Outcome criterion_h2();                               // 2
Outcome criterion_obstruction_table();                // 3
Outcome criterion_dimension7();                       // 4
Outcome criterion_kuranishi(std::uint64_t seed);      // 5
// 6: `cli` is the command-line binary, `data` the directory of bundled tensors.
Outcome criterion_classifier(const std::string& cli, const std::string& data);
Outcome criterion_growth();                           // 7

}  // namespace suites
