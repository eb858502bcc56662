// Double quiver representations over the partition poset of A^I: unipotent
// D-module surrogates.  Per arrow (fine alpha -> coarse beta) a rep carries
// A^+ : V_beta -> V_alpha (splitting direction) and A^- : V_alpha -> V_beta
// (merging direction); all monodromy composites are nilpotent.
//
// Checked relation families:
//   R1  for every length-2 interval, the sum over intermediates of A^- A^-
//       vanishes (Jacobi-type; two-intermediate intervals encode the Koszul
//       anticommutation of disjoint merges),
//   R2  the A^+ A^+ analogue (coJacobi-type),
//   R3  for every ordered pair of distinct merges out of a common vertex,
//       A^-_{g2<-a} A^+_{a<-g1} + A^+_{g2<-w} A^-_{w<-g1} = 0 (cocycle-type),
//   R4  nilpotency of A^- A^+ and A^+ A^- on every arrow.
// The sign law of disjoint-merge A^-A^- composites is probed and reported,
// not asserted.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ranq/matrix.hpp"
#include "ranq/strata.hpp"

namespace ranq {

// Memoized poset construction (posets are immutable).
std::shared_ptr<const PartitionPoset> partition_poset(const FiniteIndexSet& ground);
std::shared_ptr<const FacePoset> face_poset(const FiniteIndexSet& ground);

// Permutation operator on a tensor product of slot spaces.  perm[i] is the
// target slot of source slot i.  With koszul = true every slot counts as odd,
// so the matrix carries sgn(perm).
MatrixQ slot_permutation_matrix(const std::vector<int>& slot_dims,
                                const std::vector<int>& perm, bool koszul);

struct DoubleRepDR {
    FiniteIndexSet ground;
    std::shared_ptr<const PartitionPoset> poset;
    std::vector<LabeledSpace> spaces;  // per vertex
    std::vector<MatrixQ> up_ops;       // per arrow: A^+, coarse -> fine
    std::vector<MatrixQ> down_ops;     // per arrow: A^-, fine -> coarse

    int dim(int vertex) const { return spaces[vertex].dim(); }
    int total_dim() const;
    static DoubleRepDR zero(const FiniteIndexSet& ground);
    void validate_shapes() const;  // throws on operator/space mismatches
};

struct RelationEntry {
    std::string family;    // "R1", "R2", "R3", "R4", "shape"
    std::string location;  // human-readable interval / arrow tag
    MatrixQ residual;
    bool pass = false;
};

struct RelationReport {
    std::vector<RelationEntry> entries;
    bool pass = true;
    // "anticommute", "commute", "mixed", or "n/a" when no disjoint square exists.
    std::string disjoint_sign_law = "n/a";

    std::vector<const RelationEntry*> failures() const;
    std::string summary() const;
};

RelationReport check_relations_dr(const DoubleRepDR& m);

// Direct image along the diagonal of pi: spaces transported to the induced
// coarsenings (with signed slot reorder), zero elsewhere.
DoubleRepDR pushforward_dr(const Surjection& pi, const DoubleRepDR& m);

// Shriek pullback: kernel intersections over admissible paths, with the
// per-vertex embeddings into m's spaces retained for downstream use.
struct PullbackDR {
    DoubleRepDR rep;                // over the target of pi
    std::vector<MatrixQ> embed;     // vertex v of rep -> columns in m's space at v_pi
    std::vector<int> source_vertex; // vertex id in m's poset that embed lands in
};
PullbackDR shriek_pullback_dr(const Surjection& pi, const DoubleRepDR& m);

// Open restriction to U^(pi): spaces survive on partitions refining the fiber
// partition of pi, all other vertices are zeroed.
DoubleRepDR open_restrict_dr(const Surjection& pi, const DoubleRepDR& m);

// Quiver exterior tensor product along pi; parts are indexed by the target
// labels of pi in order and live over the fibers.  Vertex spaces are grouped
// Kronecker products of the parts' spaces; operators act with Koszul signs.
DoubleRepDR exterior_dr(const Surjection& pi, const std::vector<DoubleRepDR>& parts);

struct VanishingData {
    LabeledSpace phi;                      // space at the one-block partition
    int phi_vertex = -1;
    std::vector<LabeledSpace> omega_graded;  // all vertex spaces graded by block count
    std::vector<int> grading;                // block count per entry
};
VanishingData vanishing_functor(const DoubleRepDR& m);

// Morphisms of double representations and Hom-space computation.
struct RepMapDR {
    std::vector<MatrixQ> components;  // per vertex of the shared poset
};
bool intertwines(const DoubleRepDR& m, const DoubleRepDR& n, const RepMapDR& f);
// Basis of the intertwiner space Hom(m, n); dimension = result size.
std::vector<RepMapDR> hom_space_dr(const DoubleRepDR& m, const DoubleRepDR& n);

struct AdjunctionReport {
    int dim_hom_push = -1;   // dim Hom(push(m), n)
    int dim_hom_pull = -1;   // dim Hom(m, pull(n))
    bool dims_equal = false;
    bool bijection_ok = false;  // the unit-induced map is a bijection on bases
    bool triangles_ok = false;  // unit/counit triangle identities
    bool pass = false;
};
AdjunctionReport adjunction_check(const Surjection& pi, const DoubleRepDR& m,
                                  const DoubleRepDR& n);

// JSON dump/load: vertices keyed by canonical partition strings, matrices as
// nested arrays of Scalar strings.
std::string dump_json(const DoubleRepDR& m);
DoubleRepDR load_dr_json(const std::string& text);

}  // namespace ranq
