// Quiver-level Riemann-Hilbert layer.
//
// The transform is dimension changing: the Betti face space at a real face
// (B_1|...|B_k) is the graded sum over refinements
//     E_rho = (x)_j ( (+)_{beta partition of B_j} V_[beta] ),
// so the deepest face carries the sum of all de Rham vertex spaces.  On the
// unique wall of a 2-point configuration the transform is the classical
// unipotent disk correspondence, exact over Q(t):
//     B^+ = [ A^+ | id ],   B^- = [ phi_t(A^- A^+) A^- ; id ],
// written against the deep-face block convention  E_deep = [ V_Delta | V_O ];
// the induced monodromy block is exp_t(A^- A^+), t standing in for 2*pi*i.
//
// Beyond two points the paper names the equivalence without formulas; the
// 3-point wall data is produced either from a classical particular solution
// (enveloping algebra for zero cobracket, function Hopf algebra for zero
// bracket) transported into the 2-point gauge, or by an order-by-order
// linear solver on the shape whose failures are reported as Obstructions
// with stage coordinates and ambiguity dimensions.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ranq/bialg.hpp"
#include "ranq/betti.hpp"
#include "ranq/liebialg.hpp"

namespace ranq {

enum class SeedStrategy { Auto, None, Enveloping, FunctionHopf };

struct RhConfig {
    int n_max = 3;
    std::map<int, int> tau_degree_cap = {{2, 2}, {3, 4}};
    SeedStrategy seed_strategy = SeedStrategy::Auto;

    std::string to_json() const;
    static RhConfig from_json(const std::string& text);
};

// Frozen normalization constants of the quantization gauge (measured by the
// semiclassical check and regression-locked):
//   skew part of m_{1,1}        = 4t * bracket,
//   skew part of Delta-bar|g_2  =  2 * cobracket.
Scalar rh_bracket_scale();    // 4t
Scalar rh_cobracket_scale();  // 2

struct Obstruction {
    int tau_degree = -1;
    int depth = -1;
    std::string location;
    std::string message;
    std::vector<int> ambiguity_dims;  // per completed stage
    std::string to_json() const;
};

struct DefectEntry {
    std::string kind;
    std::string location;
    std::string residual;  // printed matrix or determinant
};

struct DefectReport {
    std::vector<DefectEntry> entries;
    bool empty() const { return entries.empty(); }
    std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Shape of the hyperbolic stalk with its prescribed leading terms.

struct ShapeSummand {
    std::vector<SetPartition> parts;  // one partition per face block
    int offset = 0;                   // coordinate offset inside the face space
    int dim = 0;
    int depth = 0;                    // |I| - total block count of the parts
};

struct ShapeFace {
    std::vector<ShapeSummand> summands;
    int dim = 0;
};

struct HyperStalkShape {
    int n = 0;
    LieBialgebra g;
    std::shared_ptr<const FacePoset> poset;
    std::vector<ShapeFace> faces;
    std::vector<MatrixQ> lead_up;    // per face arrow, leading B^+
    std::vector<MatrixQ> lead_down;  // per face arrow, leading B^-

    int face_dim(int f) const { return faces[f].dim; }
};

HyperStalkShape rh_shape(const LambdaTower& t, int n);

// Exact one-wall transform; deep-face coordinates are [V_Delta | V_O].
DoubleRepB rh_closed_form_2(const DoubleRepDR& m);

// Exact inverse of the closed form (dim_delta = dim of the V_Delta block).
DoubleRepDR rh_inverse_closed_2(const DoubleRepB& b, int dim_delta);

// Result of the forward transform at a given order.
struct RhResult {
    bool ok = false;
    // When omega_model is true the levels are the Omega tower of `model` (a
    // classical particular solution transported to the quantization gauge by
    // the pipeline); otherwise they live on the shape spaces.
    bool omega_model = false;
    Bialgebra model;
    std::vector<DoubleRepB> levels;
    std::vector<int> stage_ambiguity;
    Obstruction obstruction;
};

RhResult rh_solve(const LambdaTower& t, int order, const RhConfig& cfg = RhConfig());

// Quiver-level inverse: extract the Lie bialgebra candidate from a
// conilpotent bialgebra using the frozen gauge constants.  The pipeline
// rebuilds Lambda(candidate) and verifies round trip; failures there are
// reported as Obstructions.
struct RhInverseResult {
    bool ok = false;
    LieBialgebra candidate;
    Obstruction obstruction;
};
RhInverseResult rh_inverse_candidate(const Bialgebra& a, int order);

// Defect report over a Betti tower: relations, monodromy, factorization and
// tower-compatibility squares, equivariance.  Empty report = all exact zeros.
DefectReport rh_verify_omega(const OmegaTower& t);
DefectReport rh_verify_closed_2(const DoubleRepDR& m, const DoubleRepB& b);

}  // namespace ranq
