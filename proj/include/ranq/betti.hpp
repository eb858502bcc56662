// Double representations over the real face poset (unipotent perverse-sheaf
// surrogates): per arrow (fine -> coarse, merging the adjacent block pair at
// `pos`) a rep carries B^+ (generalization, coarse -> fine) and B^-
// (costalk/merge, fine -> coarse), with invertible monodromy id + B -+ B +-.
//
// Relation families mirror the de Rham ones with the sign twist absorbed by
// the real walls (generalization maps compose transitively):
//   R1  all B^- B^- composites through a length-2 interval agree,
//   R2  the B^+ B^+ analogue,
//   R3  disjoint mixed squares commute: for merges at positions i and j with
//       |i - j| >= 2, going split-then-merge equals merge-then-split.
//       Overlapping squares are deliberately NOT imposed: their failure is
//       exactly the invertible-monodromy phenomenon of the real walls.
//   R4  invertibility (nonzero determinant) of id + B^- B^+ and id + B^+ B^-.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ranq/derham.hpp"
#include "ranq/matrix.hpp"
#include "ranq/strata.hpp"

namespace ranq {

struct DoubleRepB {
    FiniteIndexSet ground;
    std::shared_ptr<const FacePoset> poset;
    std::vector<LabeledSpace> spaces;
    std::vector<MatrixQ> up_ops;    // B^+, coarse -> fine
    std::vector<MatrixQ> down_ops;  // B^-, fine -> coarse

    int dim(int face) const { return spaces[face].dim(); }
    int total_dim() const;
    static DoubleRepB zero(const FiniteIndexSet& ground);
    void validate_shapes() const;
};

struct BettiRelationReport {
    RelationReport relations;                 // R1/R2/R3 entries
    std::vector<std::pair<std::string, Scalar>> monodromy_dets;  // per arrow
    bool monodromy_invertible = true;
    bool pass = true;
    std::string summary() const;
};

BettiRelationReport check_relations_betti(const DoubleRepB& b);

// Space at the deepest real face (the one-block ordered partition).
struct HyperbolicStalk {
    LabeledSpace space;
    int face = -1;
};
HyperbolicStalk hyperbolic_functor(const DoubleRepB& b);

DoubleRepB pushforward_betti(const Surjection& pi, const DoubleRepB& m);

struct PullbackB {
    DoubleRepB rep;
    std::vector<MatrixQ> embed;
    std::vector<int> source_face;
};
PullbackB shriek_pullback_betti(const Surjection& pi, const DoubleRepB& m);

DoubleRepB open_restrict_betti(const Surjection& pi, const DoubleRepB& m);

DoubleRepB exterior_betti(const Surjection& pi, const std::vector<DoubleRepB>& parts);

struct RepMapB {
    std::vector<MatrixQ> components;
};
bool intertwines_betti(const DoubleRepB& m, const DoubleRepB& n, const RepMapB& f);
std::vector<RepMapB> hom_space_betti(const DoubleRepB& m, const DoubleRepB& n);

struct BettiAdjunctionReport {
    int dim_hom_push = -1;
    int dim_hom_pull = -1;
    bool dims_equal = false;
    bool pass = false;
};
BettiAdjunctionReport adjunction_check_betti(const Surjection& pi, const DoubleRepB& m,
                                             const DoubleRepB& n);

// JSON dump symmetrical to the de Rham one; faces keyed "2,3|1".
std::string dump_json(const DoubleRepB& m);

}  // namespace ranq
