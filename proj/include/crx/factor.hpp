#pragma once

#include "crx/terms.hpp"

#include <memory>
#include <optional>
#include <vector>

// Single-factor models: twisted (0,q)-forms on P^m, scalar (Line) or with values
// in the tangent bundle (Tangent), split by torus weight and truncated at a level.
namespace crx {

using exactalg::ImageSolver;
using exactalg::SparseMatrix;
using exactalg::SparseVector;
using exactalg::Subspace;

enum class Kind { Line, Tangent };
using Weight = std::array<int, kMaxCoords>;

// One degree of one weight block: normal-form keys of level <= `level` and the
// kernel of the descent conditions on their span.
struct FactorSpace {
    int m = 0;
    int q = 0;
    int level = 0;
    Kind kind = Kind::Line;
    Weight w{};
    std::vector<FKey> keys;
    std::map<FKey, std::size_t> index;
    std::vector<SparseVector> basis;     // kernel basis in key coordinates (reduced echelon form)
    std::vector<std::size_t> free_cols;  // basis[i] is 1 at free_cols[i] and 0 at the others

    std::size_t dim() const { return basis.size(); }
    // Kernel coordinates; nullopt if x is not in this space.
    std::optional<SparseVector> coords(const FVec& x) const;
    FVec expand(const SparseVector& c) const;
};

struct FactorBlock {
    int m = 0;
    int level = 0;
    Kind kind = Kind::Line;
    Weight w{};
    std::vector<std::shared_ptr<const FactorSpace>> spaces;  // degrees 0..m
    std::vector<SparseMatrix> d;                             // dbar, degree q -> q+1

    const FactorSpace& space(int q) const { return *spaces.at(q); }
    std::vector<long> cohomology() const;
};

// Splitting K^q = B^q + H^q + L^q with L^q spanned by unit vectors at the pivot
// columns of d[q]. Gives h with dh + hd = 1 - pi.
class Homotopy {
public:
    explicit Homotopy(const FactorBlock& block);

    // y in K^p: returns h(y) in K^{p-1} (empty when p = 0).
    SparseVector h(int p, const SparseVector& y) const;
    // Harmonic coordinates of y in K^p (with respect to harmonic(p)).
    SparseVector pi_coords(int p, const SparseVector& y) const;
    SparseVector pi(int p, const SparseVector& y) const;
    const Subspace& harmonic(int p) const { return harmonic_.at(p); }
    // The same maps as matrices: h: K^p -> K^{p-1}, pi_coords: K^p -> H^p,
    // and pi as an endomorphism of K^p.
    const SparseMatrix& h_matrix(int p) const { return h_mat_.at(p); }
    const SparseMatrix& pi_coords_matrix(int p) const { return pic_mat_.at(p); }
    const SparseMatrix& pi_matrix(int p) const { return pi_mat_.at(p); }

private:
    struct Parts {
        SparseVector boundary_source;  // coefficients on the pivot columns of d[p-1]
        SparseVector harmonic;
    };
    Parts split(int p, const SparseVector& y) const;

    const FactorBlock* block_;
    std::vector<std::vector<std::size_t>> pivots_;  // pivots_[q]: pivot columns of d[q]
    std::vector<Subspace> harmonic_;
    std::vector<std::optional<ImageSolver>> d_solver_;    // d[p]
    std::vector<std::optional<ImageSolver>> cycle_solver_;  // [d[p-1] e_S | H^p]
    std::vector<SparseMatrix> h_mat_, pic_mat_, pi_mat_;
};

std::vector<FKey> block_keys(int m, int q, int level, Kind kind, const Weight& w);

// Cached, thread-safe accessors.
const FactorBlock& factor_block(int m, int level, Kind kind, const Weight& w);
const Homotopy& factor_homotopy(int m, int level, Kind kind, const Weight& w);
// flat: Tangent degree q -> Line degree q+1; sharp: Line degree 1 -> Tangent degree 0.
const SparseMatrix& factor_flat(int m, int level, const Weight& w, int q);
const SparseMatrix& factor_sharp(int m, int level, const Weight& w);

// Cohomology of O(d) and T(d) on P^m at a level, and ranks of the maps
// H^q(T(d)) -> H^{q+1}(O(d)) induced by flat.
struct FactorData {
    int m = 0;
    int d = 0;
    int level = 0;
    std::vector<long> h_line;
    std::vector<long> h_tangent;
    std::vector<long> flat_rank;
    std::vector<Weight> support;  // sorted weights carrying cohomology

    bool same_numbers(const FactorData& o) const
    {
        return h_line == o.h_line && h_tangent == o.h_tangent && flat_rank == o.flat_rank && support == o.support;
    }
};

FactorData factor_data(int m, int d, int level);
int start_level(int m, int d);
// Raises the level from `start` until two consecutive levels agree; gives up after
// `max_steps` raises.
std::optional<FactorData> stable_factor_data(int m, int d, int start, int max_steps = 8);

std::vector<Weight> weight_orbit(const Weight& sorted, int m);
long orbit_size(const Weight& sorted, int m);
Weight sorted_weight(const Weight& w, int m);

}  // namespace crx
