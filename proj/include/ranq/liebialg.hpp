// Conilpotent Lie bialgebras over Q(t), the factorization-algebra tower
// Lambda(g), its structure isomorphisms, and the vanishing-cycles
// reconstruction.
//
// A LieBialgebra is stored on a basis adapted to the canonical filtration
// g_1 c ... c g_N: basis vectors are ordered by level, g_k = span of the
// first dims[k-1] vectors.  Tensor-space conventions for Lambda: every
// tensor slot counts as odd, operators are odd, and the canonical-model
// operator for merging the blocks at canonical positions p < q (1-based)
// carries the Koszul coefficient (-1)^q.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ranq/derham.hpp"
#include "ranq/matrix.hpp"
#include "ranq/strata.hpp"

namespace ranq {

struct LieBialgebra {
    int trunc = 0;            // N
    std::vector<int> dims;    // dims[k-1] = dim g_k, nondecreasing
    MatrixQ bracket;          // d x d^2, column index = i*d + j for b_i (x) b_j
    MatrixQ cobracket;        // d^2 x d

    int dim() const { return dims.empty() ? 0 : dims.back(); }
    int dim_at(int level) const;      // dim g_level (level in 1..N)
    int level_of(int basis_index) const;

    // [ -, - ] restricted to g_a (x) g_b -> g_{a+b} (requires a+b <= N).
    MatrixQ bracket_component(int a, int b) const;
    // Truncated cobracket g_{a+b} -> g_a (x) g_b: keep basis terms b_i (x) b_j
    // with level(i) <= a and level(j) <= b (requires a+b <= N).
    MatrixQ cobracket_component(int a, int b) const;
};

struct AxiomCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AxiomReport {
    std::vector<AxiomCheck> checks;
    bool pass = true;
    std::string summary() const;
};

AxiomReport check_lie_axioms(const LieBialgebra& g);

// The unipotent D-module surrogate Lambda(g)_I.
DoubleRepDR lambda_build(const LieBialgebra& g, const FiniteIndexSet& ground);

// Signed permutation transport of Lambda(g)_I along sigma; components are
// signed slot permutations and the result is an automorphism of the rep.
RepMapDR lambda_equivariance(const LieBialgebra& g, const FiniteIndexSet& ground,
                             const Permutation& sigma);

// theta(pi): Lambda(g)_I -> Delta^(pi)! Lambda(g)_J, verified vertex-wise.
struct ThetaIso {
    Surjection pi;
    PullbackDR pullback;                  // of Lambda(g)_J along pi
    std::vector<MatrixQ> vertex_maps;     // V_I[alpha] -> kernel coordinates
    std::vector<MatrixQ> ambient_maps;    // V_I[alpha] -> Lambda(g)_J space at alpha_pi
    bool verified = false;
    std::string failure;
};
ThetaIso theta_iso(const LieBialgebra& g, const Surjection& pi);

// c(pi): j^(pi)* Lambda(g)_J -> j^(pi)* boxtimes_I Lambda(g)_{J_i} as signed
// regrouping matrices on the surviving vertices (zero columns elsewhere).
struct FactorizationIso {
    Surjection pi;
    DoubleRepDR restricted;               // j^(pi)* Lambda(g)_J
    DoubleRepDR exterior;                 // j^(pi)* boxtimes of the fiber towers
    std::vector<MatrixQ> vertex_maps;     // per J-vertex (zero off U^(pi))
    bool verified = false;
    std::string failure;
};
FactorizationIso factorization_iso_dr(const LieBialgebra& g, const Surjection& pi);

// The factorization-algebra tower with verified structure maps.
struct LambdaTower {
    LieBialgebra g;
    int max_points = 0;
    std::vector<DoubleRepDR> levels;  // levels[n-1] over [n]
    bool verified = false;
    std::string failure;
};
// Builds levels 1..n_max and verifies relations, theta for the canonical
// collapses, equivariance for adjacent transpositions, and c for the
// canonical two-block splits.
LambdaTower lambda_tower(const LieBialgebra& g, int n_max);

// Vanishing-cycles reconstruction; throws on axiom failure (fatal defect).
LieBialgebra phi_ran_reconstruct(const LambdaTower& t);

enum class LieExampleKind { Abelian, HeisenbergDual, Heisenberg, Random };

// abelian(d, N); heisenberg_dual (hd3); heisenberg (heis3); random(dims, seed).
LieBialgebra make_example_liebialg(LieExampleKind kind, std::vector<int> dims = {},
                                   int trunc = 0, uint64_t seed = 0);

// Convenience accessors for the named examples.
LieBialgebra lie_ab1(int trunc = 3);
LieBialgebra lie_hd3();   // xi, eta in g_1; zeta with delta(zeta) = xi^eta; zero bracket
LieBialgebra lie_heis3(); // [xi, eta] = zeta, zero cobracket

// Fiberwise split [n] ->> [k] with consecutive fibers of the given sizes.
Surjection block_collapse(const std::vector<int>& sizes);

}  // namespace ranq
