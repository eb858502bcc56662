// Dense exact linear algebra over Q(t): matrices, canonical echelon
// subspaces, terminating nilpotent series, and group averaging.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ranq/scalar.hpp"

namespace ranq {

class MatrixQ {
public:
    MatrixQ() : rows_(0), cols_(0) {}
    MatrixQ(int rows, int cols) : rows_(rows), cols_(cols), e_(size_t(rows) * cols) {}

    static MatrixQ identity(int n);
    static MatrixQ zero(int rows, int cols) { return MatrixQ(rows, cols); }
    // Permutation matrix P with P*e_j = e_{perm[j]} (column j has 1 in row perm[j]).
    static MatrixQ permutation(const std::vector<int>& perm);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Scalar& at(int r, int c) { return e_[size_t(r) * cols_ + c]; }
    const Scalar& at(int r, int c) const { return e_[size_t(r) * cols_ + c]; }

    bool is_zero() const;
    bool operator==(const MatrixQ& o) const;

    MatrixQ operator+(const MatrixQ& o) const;
    MatrixQ operator-(const MatrixQ& o) const;
    MatrixQ operator*(const MatrixQ& o) const;  // matrix product
    MatrixQ operator*(const Scalar& s) const;
    MatrixQ operator-() const;
    MatrixQ transpose() const;

    MatrixQ kronecker(const MatrixQ& o) const;        // this (x) o
    static MatrixQ direct_sum(const std::vector<MatrixQ>& blocks);

    // Row reduction (in place helpers return data about the reduction).
    MatrixQ rref(std::vector<int>* pivot_cols = nullptr) const;
    int rank() const;
    Scalar det() const;              // square only
    std::optional<MatrixQ> inverse() const;

    // Right null space: columns form a basis of {x : A x = 0}.
    MatrixQ null_space() const;

    // Solve A X = B exactly; returns nullopt if inconsistent.  When the
    // system is underdetermined, free variables are set to zero (pivot rule
    // fixed, so the result is deterministic).
    std::optional<MatrixQ> solve(const MatrixQ& b) const;

    bool is_nilpotent() const;

    std::string str() const;  // human-readable, row per line

private:
    int rows_, cols_;
    std::vector<Scalar> e_;
};

// Subspace of an ambient Q(t)^n in canonical form: rows of `basis` are a
// reduced row echelon basis, so equality of subspaces is matrix equality.
class Subspace {
public:
    Subspace() : ambient_(0) {}
    explicit Subspace(int ambient) : ambient_(ambient), basis_(0, ambient) {}
    // Span of the rows of `vectors` (ambient = vectors.cols()).
    static Subspace row_span(const MatrixQ& vectors);
    static Subspace full(int ambient);

    int ambient() const { return ambient_; }
    int dim() const { return basis_.rows(); }
    const MatrixQ& basis() const { return basis_; }  // dim x ambient, RREF

    bool contains(const MatrixQ& column_vector) const;
    bool contains(const Subspace& other) const;
    bool operator==(const Subspace& o) const { return ambient_ == o.ambient_ && basis_ == o.basis_; }

    Subspace intersect(const Subspace& o) const;
    Subspace sum(const Subspace& o) const;

    // Coordinates of a column vector in this basis; nullopt if not contained.
    std::optional<MatrixQ> coordinates(const MatrixQ& column_vector) const;

private:
    int ambient_;
    MatrixQ basis_;
};

// Basis bookkeeping for the tensor spaces the representations live on.
// Labels are structured tags (filtration word / partition summand index).
struct LabeledSpace {
    std::vector<std::string> labels;
    int dim() const { return static_cast<int>(labels.size()); }
};

// Intersection of kernels of a family of maps sharing a domain.
// An empty family yields the full ambient space.
Subspace kernel_intersection(const std::vector<MatrixQ>& maps, int domain_dim);

struct NilpotentCalculus {
    MatrixQ exp_tau;  // sum_k t^k N^k / k!
    MatrixQ phi_tau;  // sum_k t^{k+1} N^k / (k+1)!   (phi_tau * N = exp_tau - id)
};

// Terminating series of a nilpotent matrix; throws if N is not nilpotent.
NilpotentCalculus nilpotent_calculus(const MatrixQ& n);

// log of a unipotent matrix: sum (-1)^{k+1} (U-id)^k / k; throws if U-id is
// not nilpotent.  log_unipotent(exp_tau(N)) == t*N.
MatrixQ log_unipotent(const MatrixQ& u);

enum class AverageMode { SkewInvariants, Invariants, Projector };

struct GroupAverage {
    MatrixQ projector;   // idempotent averaging operator
    Subspace fixed;      // image of the projector (column span, canonical)
};

// `generators`: pairs (permutation label, operator).  The full group is the
// closure under composition; generator relations are checked and a violation
// throws.  SkewInvariants twists each operator by the sign of its permutation.
GroupAverage group_average(
    const std::vector<std::pair<std::vector<int>, MatrixQ>>& generators,
    AverageMode mode);

}  // namespace ranq
