// Combinatorics of the diagonal stratification of A^I and its real form:
// set partitions, ordered set partitions, their posets, codimension-one
// merge arrows, admissible ascending paths, and symmetric-group transport.
//
// Conventions frozen here:
//   * Partitions are kept in canonical form: elements sorted inside blocks,
//     blocks sorted by minimal element.  The poset order has the one-block
//     partition as minimum and the all-singletons partition as maximum.
//   * act(sigma, -) returns the relabeled object together with a sign.  The
//     sign is the signature of the permutation induced on the canonical
//     tensor-slot order (blocks by minimal element).  Ordered partitions
//     keep their block order under relabeling, so their sign is always +1.
//     A path's sign is the product of the signs at its two endpoints.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ranq {

using FiniteIndexSet = std::vector<int>;  // distinct labels, ascending

FiniteIndexSet index_set(int n);  // {1, ..., n}

// Hard cap on |I|; Bell(6) = 203 and Fubini(6) = 4683 stay desk-sized.
inline constexpr int kMaxIndexSetSize = 6;

struct SetPartition {
    std::vector<std::vector<int>> blocks;  // canonical form

    static SetPartition of(std::vector<std::vector<int>> blocks);
    static SetPartition singletons(const FiniteIndexSet& ground);
    static SetPartition one_block(const FiniteIndexSet& ground);

    int block_count() const { return static_cast<int>(blocks.size()); }
    FiniteIndexSet ground() const;
    int block_of(int label) const;  // canonical position of the block holding label
    // True when every block of `coarser` is a union of blocks of *this.
    bool refines(const SetPartition& coarser) const;
    std::string str() const;  // "1,2|3"

    auto operator<=>(const SetPartition& o) const = default;
};

struct OrderedSetPartition {
    std::vector<std::vector<int>> blocks;  // order significant; sorted inside

    static OrderedSetPartition of(std::vector<std::vector<int>> blocks);
    int block_count() const { return static_cast<int>(blocks.size()); }
    FiniteIndexSet ground() const;
    SetPartition forget_order() const;
    std::vector<int> shape() const;  // block sizes in order (a composition)
    std::string str() const;         // "2,3|1"

    auto operator<=>(const OrderedSetPartition& o) const = default;
};

struct Surjection {
    FiniteIndexSet source;  // J
    FiniteIndexSet target;  // I
    std::map<int, int> map;

    static Surjection of(FiniteIndexSet source, FiniteIndexSet target,
                         std::map<int, int> map);
    static Surjection identity(const FiniteIndexSet& s);
    // Canonical collapse [n] ->> [m] sending 1..n-m+1 to 1 and n-m+k to k.
    static Surjection canonical_collapse(int n, int m);

    bool is_bijection() const { return source.size() == target.size(); }
    int operator()(int label) const { return map.at(label); }
    std::vector<int> fiber(int target_label) const;
    SetPartition fiber_partition() const;
    OrderedSetPartition fiber_ordered_partition() const;  // fibers in target order
    Surjection compose(const Surjection& inner) const;    // this o inner
};

// Arrow of the partition poset: merge blocks at canonical positions p < q of
// the finer vertex.  Arrows point fine -> coarse (toward the small diagonal).
struct MergeArrow {
    int fine = -1;
    int coarse = -1;
    int p = -1, q = -1;
};

class PartitionPoset {
public:
    static PartitionPoset build(const FiniteIndexSet& ground);

    const FiniteIndexSet& ground() const { return ground_; }
    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    const SetPartition& vertex(int v) const { return vertices_[v]; }
    int index_of(const SetPartition& p) const;
    const std::vector<MergeArrow>& arrows() const { return arrows_; }
    const std::vector<int>& arrows_from_fine(int v) const { return from_fine_[v]; }
    const std::vector<int>& arrows_into_coarse(int v) const { return into_coarse_[v]; }
    // a <= b iff vertex a is a coarsening of vertex b (b refines a).
    bool leq(int a, int b) const { return vertices_[b].refines(vertices_[a]); }
    int arrow_between(int fine, int coarse) const;  // -1 if none

    std::string dump_json() const;  // adjacency lists, vertices by canonical string

private:
    FiniteIndexSet ground_;
    std::vector<SetPartition> vertices_;
    std::map<SetPartition, int> index_;
    std::vector<MergeArrow> arrows_;
    std::vector<std::vector<int>> from_fine_, into_coarse_;
};

// Arrow of the face poset: merge the adjacent blocks (pos, pos+1).
struct FaceArrow {
    int fine = -1;
    int coarse = -1;
    int pos = -1;
};

class FacePoset {
public:
    static FacePoset build(const FiniteIndexSet& ground);

    const FiniteIndexSet& ground() const { return ground_; }
    int face_count() const { return static_cast<int>(faces_.size()); }
    const OrderedSetPartition& face(int v) const { return faces_[v]; }
    int index_of(const OrderedSetPartition& p) const;
    const std::vector<FaceArrow>& arrows() const { return arrows_; }
    const std::vector<int>& arrows_from_fine(int v) const { return from_fine_[v]; }
    const std::vector<int>& arrows_into_coarse(int v) const { return into_coarse_[v]; }
    int arrow_between(int fine, int coarse) const;

    std::string dump_json() const;

private:
    FiniteIndexSet ground_;
    std::vector<OrderedSetPartition> faces_;
    std::map<OrderedSetPartition, int> index_;
    std::vector<FaceArrow> arrows_;
    std::vector<std::vector<int>> from_fine_, into_coarse_;
};

// Ascending path in a partition poset: starts at a coarse vertex and refines
// one merge at a time; stored as the visited vertex ids, coarse to fine.
struct Path {
    std::vector<int> vertices;
    int length() const { return static_cast<int>(vertices.size()) - 1; }
};

// Preimage partition: blocks of the result are pi-preimages of blocks of alpha.
SetPartition induced_coarsening(const Surjection& pi, const SetPartition& alpha);
OrderedSetPartition induced_coarsening(const Surjection& pi, const OrderedSetPartition& alpha);

// sigma (over the source of pi) factors as J ->> I ->> T.
bool factors_through(const SetPartition& sigma, const Surjection& pi);
bool factors_through(const OrderedSetPartition& sigma, const Surjection& pi);

// All ascending paths of length |J| - |I| starting at the coarsening of alpha
// along pi such that no vertex strictly after the start factors through pi
// (the terminal vertex included; this is the reading under which the shriek
// pullback is right adjoint to the pushforward).  A bijection yields the
// single empty path.
std::vector<Path> admissible_paths(const PartitionPoset& poset, const Surjection& pi,
                                   const SetPartition& alpha);

// Face-poset analogue used by the Betti transports.
std::vector<Path> admissible_face_paths(const FacePoset& poset, const Surjection& pi,
                                        const OrderedSetPartition& alpha);

// Permutation of the ground set as label map.
struct Permutation {
    std::map<int, int> map;
    static Permutation of(const FiniteIndexSet& ground, const std::vector<int>& images);
    static Permutation identity(const FiniteIndexSet& ground);
    static Permutation transposition(const FiniteIndexSet& ground, int a, int b);
    Permutation compose(const Permutation& inner) const;  // this o inner
    int operator()(int label) const { return map.at(label); }
};

struct ActedPartition {
    SetPartition image;
    int sign;  // signature of the induced slot permutation
};
struct ActedOrderedPartition {
    OrderedSetPartition image;
    int sign;  // always +1, see header comment
};
struct ActedPath {
    Path image;
    int sign;
};

ActedPartition act(const Permutation& sigma, const SetPartition& x);
ActedOrderedPartition act(const Permutation& sigma, const OrderedSetPartition& x);
ActedPath act(const Permutation& sigma, const Path& x, const PartitionPoset& poset);

// Slot permutation induced by sigma on the canonical block order: entry i is
// the canonical position (in the image) of the image of block i.
std::vector<int> slot_permutation(const Permutation& sigma, const SetPartition& x);
int permutation_sign(const std::vector<int>& perm);

// Enumeration helpers (independent of the poset builders; used as oracles too).
std::vector<SetPartition> all_set_partitions(const FiniteIndexSet& ground);
std::vector<OrderedSetPartition> all_ordered_set_partitions(const FiniteIndexSet& ground);
std::vector<std::vector<int>> compositions_of(int n);  // ordered positive parts
// All surjections [n] ->> [m] as label maps 1..n -> 1..m.
std::vector<Surjection> all_surjections(int n, int m);
std::vector<Permutation> all_permutations(const FiniteIndexSet& ground);

}  // namespace ranq
