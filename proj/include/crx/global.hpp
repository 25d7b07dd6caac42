#pragma once

#include "crx/factor.hpp"

#include <memory>
#include <random>

// Forms on P^1 x P^l valued in T ⊗ O(k,-k) (ambient model A) or in O(k,-k)
// (scalar model B), as tensor products of the factor models.
namespace crx {

struct Levels {
    int z = 0;
    int y = 0;
    auto operator<=>(const Levels&) const = default;
};

// Torus weight of a global block: z uses entries 0..1, y entries 0..l.
struct BlockWeight {
    Weight z{};
    Weight y{};
    auto operator<=>(const BlockWeight&) const = default;
};

BlockWeight weight_of(const Key& k);
Levels levels_of(const Cochain& x);  // max term level per factor
int degree_of(const Cochain& x);     // -1 for the zero cochain; throws on mixed degrees
std::map<BlockWeight, Cochain> split_by_weight(const Cochain& x);

// ---- termwise operators on cochains -------------------------------------------

Cochain dbar(const Cochain& x);
Cochain flat(const Cochain& x);
Cochain sharp(const Cochain& x);  // scalar 1-forms only
Cochain horizontal(const Cochain& x);
// Graded bracket of vector-valued forms of degrees p and q, horizontally projected.
// Both inputs must lie in ker flat.
Cochain bracket(const Cochain& x, int p, const Cochain& y, int q);
// f -> dbar sharp dbar f on functions.
Cochain contact_action(const Cochain& f);
// Same linear map, exposed for complex parameters.
Cochain embedding_action(const Cochain& f);
// Functions only: swaps holomorphic and antiholomorphic exponents (weight k <-> -k).
Cochain conjugate(const Cochain& f);
// Rewrites every term in normal form.
Cochain normalize(const Cochain& x);

// Random function cochain of weight k: `terms` normal-form keys with levels at most
// `max_levels` and small integer coefficients. Empty if no key fits.
Cochain random_function(int l, int k, Levels max_levels, std::mt19937_64& rng, int terms);

namespace testing {
// Flips the sign of the second half of the bracket. For detector checks only.
void set_bracket_fault(bool on);
bool bracket_fault();
}  // namespace testing

// ---- one torus-weight block ---------------------------------------------------

struct Piece {
    int qz = 0;
    Kind kz = Kind::Line;
    int qy = 0;
    Kind ky = Kind::Line;
    std::size_t offset = 0;
    const FactorSpace* zs = nullptr;
    const FactorSpace* ys = nullptr;
    std::size_t dim() const { return zs->dim() * ys->dim(); }
};

struct GradedPart {
    std::vector<Piece> pieces;
    std::size_t dim = 0;
};

class GlobalBlock {
public:
    GlobalBlock(int l, const BlockWeight& w, Levels levels);

    int l() const { return l_; }
    const BlockWeight& weight() const { return w_; }
    Levels levels() const { return levels_; }
    int top() const { return l_ + 1; }

    const GradedPart& A(int q) const { return A_.at(q); }
    const GradedPart& B(int q) const { return B_.at(q); }

    // Coordinates in the tensor of factor kernel bases; nullopt if x is not in the block.
    std::optional<SparseVector> coords(bool ambient, int q, const Cochain& x) const;
    Cochain expand(bool ambient, int q, const SparseVector& c) const;

    const SparseMatrix& dA(int q) const { return dA_.at(q); }  // A^q -> A^{q+1}
    const SparseMatrix& dB(int q) const { return dB_.at(q); }
    const SparseMatrix& flat(int q) const { return flat_.at(q); }  // A^q -> B^{q+1}
    const SparseMatrix& sharp() const { return sharp_; }           // B^1 -> A^0
    const SparseMatrix& contact() const { return contact_; }       // B^0 -> A^1

    const FactorBlock& zblock(Kind k) const;
    const FactorBlock& yblock(Kind k) const;

private:
    GradedPart graded(bool ambient, int q) const;
    const Piece* find_piece(bool ambient, int q, int qz, Kind kz, int qy, Kind ky) const;

    int l_;
    BlockWeight w_;
    Levels levels_;
    std::vector<GradedPart> A_, B_;
    std::vector<SparseMatrix> dA_, dB_, flat_;
    SparseMatrix sharp_, contact_;
};

std::shared_ptr<const GlobalBlock> global_block(int l, const BlockWeight& w, Levels levels);

// Tensor homotopy H(a ⊗ b) = h a ⊗ b + (-1)^{|a|} pi a ⊗ h b on A or B of one block.
class BlockHomotopy {
public:
    BlockHomotopy(const GlobalBlock& block, bool ambient);

    SparseVector h(int q, const SparseVector& x) const;
    // Harmonic coordinates: for each piece, pairs of harmonic factor classes.
    SparseVector pi_coords(int q, const SparseVector& x) const;
    std::size_t harmonic_dim(int q) const { return hoff_.at(q).back(); }
    // Block coordinates of harmonic basis vector i in degree q.
    SparseVector harmonic_vector(int q, std::size_t i) const;

private:
    const GlobalBlock* block_;
    bool ambient_;
    std::vector<std::vector<std::size_t>> hoff_;  // per degree: harmonic offsets of pieces (+ total)
};

// Solves dbar x = r with flat x = 0 (x in C^1) block by block, by the pivoting solve
// of exactalg. Each block starts at the levels of its part of r and is raised up to
// `max_raise` times before giving up. On failure `x` is empty and the failing block's
// part of r is returned.
struct SolveInC {
    std::optional<Cochain> x;
    BlockWeight failed_block{};
    Cochain failed_part;
};
SolveInC solve_in_C(int l, const Cochain& r, int max_raise = 2);

// Direct invariants of one block: dim H^1(C) = W, H^1 of the extended complex,
// H^2(C), and the ambient H^q(A), H^q(B).
struct BlockNumbers {
    long w = 0;
    long h1_ext = 0;
    long h2 = 0;
    std::vector<long> hA, hB;
};
BlockNumbers block_numbers(const GlobalBlock& b);

}  // namespace crx
