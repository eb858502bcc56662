// Conilpotent bialgebras over Q(t), the Cousin object E(A)_n on the
// composition faces of Sym^n, the factorizable tower Omega(A), and the
// hyperbolic-stalk reconstruction.
//
// Storage mirrors LieBialgebra: the augmentation ideal on a basis adapted to
// the canonical filtration A_1 c ... c A_N (unit and counit implicit).
// Truncation convention: products with level(a) + level(b) > N vanish (the
// components that would need more than N points are cut; associativity stays
// exact under this cut).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranq/betti.hpp"
#include "ranq/liebialg.hpp"

namespace ranq {

struct Bialgebra {
    int trunc = 0;
    std::vector<int> dims;    // dims[k-1] = dim A_k
    MatrixQ product;          // d x d^2
    MatrixQ coproduct;        // d^2 x d (reduced coproduct)

    int dim() const { return dims.empty() ? 0 : dims.back(); }
    int dim_at(int level) const;
    int level_of(int basis_index) const;
    MatrixQ product_component(int a, int b) const;    // A_a (x) A_b -> A_{a+b}
    MatrixQ coproduct_component(int a, int b) const;  // A_{a+b} -> A_a (x) A_b
    bool is_commutative() const;
    bool is_cocommutative() const;
};

AxiomReport check_bialg_axioms(const Bialgebra& a);

// Cousin object on Sym^n: supported on the faces with consecutive blocks
// ({1..n_1} | {n_1+1..} | ...), which realize the compositions of n.
DoubleRepB cousin_build(const Bialgebra& a, int n);

// Omega(A)_I = p^! E(A)_|I|: every face (B_1|...|B_k) carries
// A_{|B_1|} (x) ... (x) A_{|B_k|} with operators pulled back along block sizes.
DoubleRepB omega_build(const Bialgebra& a, const FiniteIndexSet& ground);

struct OmegaStructureIsos {
    Surjection pi;
    PullbackB pullback;                 // of Omega(A)_J along pi
    std::vector<MatrixQ> phi_maps;      // Omega(A)_I face space -> kernel coords
    DoubleRepB restricted;              // j^(pi)* Omega(A)_J
    DoubleRepB exterior;                // j^(pi)* boxtimes Omega(A)_{J_i}
    std::vector<MatrixQ> v_maps;        // per J-face (zero off U^(pi))
    bool verified = false;
    std::string failure;
};
OmegaStructureIsos structure_isos(const Bialgebra& a, const Surjection& pi);

struct OmegaTower {
    Bialgebra a;
    int max_points = 0;
    std::vector<DoubleRepB> e_levels;      // E(A)_n
    std::vector<DoubleRepB> omega_levels;  // Omega(A)_[n]
    bool verified = false;
    std::string failure;
};
OmegaTower omega_tower(const Bialgebra& a, int n_max);

// Hyperbolic-stalk reconstruction; exact on towers built here.  Throws on
// axiom failure (fatal defect).
Bialgebra omega_ran_reconstruct(const OmegaTower& t);

enum class BialgExampleKind { Polynomial, Tensor, Enveloping, FunctionHopf, Random };

Bialgebra make_example_bialg(BialgExampleKind kind, int trunc,
                             const LieBialgebra* lie = nullptr, int generators = 1,
                             uint64_t seed = 0);

Bialgebra bialg_polynomial(int trunc);                     // Q[x], binomial coproduct
Bialgebra bialg_tensor(int generators, int trunc);         // shuffle product, deconcatenation
Bialgebra bialg_enveloping(const LieBialgebra& lie, int trunc);     // PBW
Bialgebra bialg_function_hopf(const LieBialgebra& lie, int trunc);  // BCH coproduct

}  // namespace ranq
