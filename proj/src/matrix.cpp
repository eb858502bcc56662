#include "ranq/matrix.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace ranq {

MatrixQ MatrixQ::identity(int n) {
    MatrixQ m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Scalar(1);
    return m;
}

MatrixQ MatrixQ::permutation(const std::vector<int>& perm) {
    int n = static_cast<int>(perm.size());
    MatrixQ m(n, n);
    for (int j = 0; j < n; ++j) m.at(perm[j], j) = Scalar(1);
    return m;
}

bool MatrixQ::is_zero() const {
    for (const auto& x : e_)
        if (!x.is_zero()) return false;
    return true;
}

bool MatrixQ::operator==(const MatrixQ& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
}

MatrixQ MatrixQ::operator+(const MatrixQ& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("MatrixQ: shape mismatch in +");
    MatrixQ r = *this;
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
    return r;
}

MatrixQ MatrixQ::operator-(const MatrixQ& o) const { return *this + (-o); }

MatrixQ MatrixQ::operator-() const {
    MatrixQ r = *this;
    for (auto& x : r.e_) x = -x;
    return r;
}

MatrixQ MatrixQ::operator*(const MatrixQ& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("MatrixQ: shape mismatch in *");
    MatrixQ r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const Scalar& a = at(i, k);
            if (a.is_zero()) continue;
            for (int j = 0; j < o.cols_; ++j) {
                const Scalar& b = o.at(k, j);
                if (b.is_zero()) continue;
                r.at(i, j) += a * b;
            }
        }
    return r;
}

MatrixQ MatrixQ::operator*(const Scalar& s) const {
    MatrixQ r = *this;
    for (auto& x : r.e_) x *= s;
    return r;
}

MatrixQ MatrixQ::transpose() const {
    MatrixQ r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

MatrixQ MatrixQ::kronecker(const MatrixQ& o) const {
    MatrixQ r(rows_ * o.rows_, cols_ * o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) {
            if (at(i, j).is_zero()) continue;
            for (int k = 0; k < o.rows_; ++k)
                for (int l = 0; l < o.cols_; ++l)
                    r.at(i * o.rows_ + k, j * o.cols_ + l) = at(i, j) * o.at(k, l);
        }
    return r;
}

MatrixQ MatrixQ::direct_sum(const std::vector<MatrixQ>& blocks) {
    int rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    MatrixQ r(rows, cols);
    int ro = 0, co = 0;
    for (const auto& b : blocks) {
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j) r.at(ro + i, co + j) = b.at(i, j);
        ro += b.rows();
        co += b.cols();
    }
    return r;
}

MatrixQ MatrixQ::rref(std::vector<int>* pivot_cols) const {
    MatrixQ m = *this;
    if (pivot_cols) pivot_cols->clear();
    int lead = 0;
    for (int col = 0; col < cols_ && lead < rows_; ++col) {
        int piv = -1;
        for (int r = lead; r < rows_; ++r)
            if (!m.at(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != lead)
            for (int j = 0; j < cols_; ++j) std::swap(m.at(piv, j), m.at(lead, j));
        Scalar inv = m.at(lead, col).inverse();
        for (int j = col; j < cols_; ++j) m.at(lead, j) *= inv;
        for (int r = 0; r < rows_; ++r) {
            if (r == lead || m.at(r, col).is_zero()) continue;
            Scalar f = m.at(r, col);
            for (int j = col; j < cols_; ++j) m.at(r, j) -= f * m.at(lead, j);
        }
        if (pivot_cols) pivot_cols->push_back(col);
        ++lead;
    }
    return m;
}

int MatrixQ::rank() const {
    std::vector<int> piv;
    rref(&piv);
    return static_cast<int>(piv.size());
}

Scalar MatrixQ::det() const {
    if (rows_ != cols_) throw std::invalid_argument("MatrixQ::det: not square");
    MatrixQ m = *this;
    Scalar d(1);
    for (int col = 0; col < cols_; ++col) {
        int piv = -1;
        for (int r = col; r < rows_; ++r)
            if (!m.at(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) return Scalar(0);
        if (piv != col) {
            for (int j = 0; j < cols_; ++j) std::swap(m.at(piv, j), m.at(col, j));
            d = -d;
        }
        d *= m.at(col, col);
        Scalar inv = m.at(col, col).inverse();
        for (int r = col + 1; r < rows_; ++r) {
            if (m.at(r, col).is_zero()) continue;
            Scalar f = m.at(r, col) * inv;
            for (int j = col; j < cols_; ++j) m.at(r, j) -= f * m.at(col, j);
        }
    }
    return d;
}

std::optional<MatrixQ> MatrixQ::inverse() const {
    if (rows_ != cols_) throw std::invalid_argument("MatrixQ::inverse: not square");
    MatrixQ aug(rows_, 2 * cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
        aug.at(i, cols_ + i) = Scalar(1);
    }
    std::vector<int> piv;
    MatrixQ r = aug.rref(&piv);
    if (static_cast<int>(piv.size()) != rows_ || piv.back() >= cols_) {
        // rank deficiency in the left block
        for (int k = 0; k < static_cast<int>(piv.size()); ++k)
            if (piv[k] >= cols_) return std::nullopt;
        if (static_cast<int>(piv.size()) != rows_) return std::nullopt;
    }
    MatrixQ inv(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) inv.at(i, j) = r.at(i, cols_ + j);
    return inv;
}

MatrixQ MatrixQ::null_space() const {
    std::vector<int> piv;
    MatrixQ r = rref(&piv);
    std::vector<bool> is_pivot(cols_, false);
    for (int c : piv) is_pivot[c] = true;
    std::vector<int> free_cols;
    for (int c = 0; c < cols_; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    MatrixQ basis(cols_, static_cast<int>(free_cols.size()));
    for (size_t k = 0; k < free_cols.size(); ++k) {
        int fc = free_cols[k];
        basis.at(fc, static_cast<int>(k)) = Scalar(1);
        for (size_t p = 0; p < piv.size(); ++p)
            basis.at(piv[p], static_cast<int>(k)) = -r.at(static_cast<int>(p), fc);
    }
    return basis;
}

std::optional<MatrixQ> MatrixQ::solve(const MatrixQ& b) const {
    if (b.rows() != rows_) throw std::invalid_argument("MatrixQ::solve: shape mismatch");
    MatrixQ aug(rows_, cols_ + b.cols());
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
        for (int j = 0; j < b.cols(); ++j) aug.at(i, cols_ + j) = b.at(i, j);
    }
    std::vector<int> piv;
    MatrixQ r = aug.rref(&piv);
    for (int c : piv)
        if (c >= cols_) return std::nullopt;  // inconsistent row 0...0 | nonzero
    MatrixQ x(cols_, b.cols());
    for (size_t p = 0; p < piv.size(); ++p)
        for (int j = 0; j < b.cols(); ++j) x.at(piv[p], j) = r.at(static_cast<int>(p), cols_ + j);
    return x;
}

bool MatrixQ::is_nilpotent() const {
    if (rows_ != cols_) return false;
    MatrixQ p = *this;
    for (int k = 1; k <= rows_; ++k) {
        if (p.is_zero()) return true;
        p = p * (*this);
    }
    return p.is_zero();
}

std::string MatrixQ::str() const {
    std::ostringstream os;
    for (int i = 0; i < rows_; ++i) {
        os << "[";
        for (int j = 0; j < cols_; ++j) {
            if (j) os << ", ";
            os << at(i, j).str();
        }
        os << "]\n";
    }
    return os.str();
}

Subspace Subspace::row_span(const MatrixQ& vectors) {
    Subspace s(vectors.cols());
    std::vector<int> piv;
    MatrixQ r = vectors.rref(&piv);
    MatrixQ basis(static_cast<int>(piv.size()), vectors.cols());
    for (int i = 0; i < basis.rows(); ++i)
        for (int j = 0; j < vectors.cols(); ++j) basis.at(i, j) = r.at(i, j);
    s.basis_ = basis;
    return s;
}

Subspace Subspace::full(int ambient) { return row_span(MatrixQ::identity(ambient)); }

bool Subspace::contains(const MatrixQ& v) const {
    return coordinates(v).has_value();
}

bool Subspace::contains(const Subspace& other) const {
    for (int i = 0; i < other.dim(); ++i) {
        MatrixQ v(ambient_, 1);
        for (int j = 0; j < ambient_; ++j) v.at(j, 0) = other.basis_.at(i, j);
        if (!contains(v)) return false;
    }
    return true;
}

std::optional<MatrixQ> Subspace::coordinates(const MatrixQ& v) const {
    if (v.rows() != ambient_ || v.cols() != 1)
        throw std::invalid_argument("Subspace::coordinates: bad vector shape");
    return basis_.transpose().solve(v);
}

Subspace Subspace::sum(const Subspace& o) const {
    if (ambient_ != o.ambient_) throw std::invalid_argument("Subspace::sum: ambient mismatch");
    MatrixQ stacked(dim() + o.dim(), ambient_);
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < ambient_; ++j) stacked.at(i, j) = basis_.at(i, j);
    for (int i = 0; i < o.dim(); ++i)
        for (int j = 0; j < ambient_; ++j) stacked.at(dim() + i, j) = o.basis_.at(i, j);
    return row_span(stacked);
}

Subspace Subspace::intersect(const Subspace& o) const {
    if (ambient_ != o.ambient_)
        throw std::invalid_argument("Subspace::intersect: ambient mismatch");
    // Zassenhaus: null space of [B1^T | -B2^T] glued through coefficients.
    int d1 = dim(), d2 = o.dim();
    if (d1 == 0 || d2 == 0) return Subspace(ambient_);
    MatrixQ sys(ambient_, d1 + d2);
    for (int j = 0; j < d1; ++j)
        for (int i = 0; i < ambient_; ++i) sys.at(i, j) = basis_.at(j, i);
    for (int j = 0; j < d2; ++j)
        for (int i = 0; i < ambient_; ++i) sys.at(i, d1 + j) = -o.basis_.at(j, i);
    MatrixQ ns = sys.null_space();  // columns (c1, c2) with B1^T c1 = B2^T c2
    MatrixQ vecs(ns.cols(), ambient_);
    for (int k = 0; k < ns.cols(); ++k)
        for (int i = 0; i < ambient_; ++i) {
            Scalar acc(0);
            for (int j = 0; j < d1; ++j) acc += ns.at(j, k) * basis_.at(j, i);
            vecs.at(k, i) = acc;
        }
    return row_span(vecs);
}

Subspace kernel_intersection(const std::vector<MatrixQ>& maps, int domain_dim) {
    if (maps.empty()) return Subspace::full(domain_dim);
    int total_rows = 0;
    for (const auto& m : maps) {
        if (m.cols() != domain_dim)
            throw std::invalid_argument("kernel_intersection: domain dimension mismatch");
        total_rows += m.rows();
    }
    MatrixQ stacked(total_rows, domain_dim);
    int ro = 0;
    for (const auto& m : maps) {
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < domain_dim; ++j) stacked.at(ro + i, j) = m.at(i, j);
        ro += m.rows();
    }
    return Subspace::row_span(stacked.null_space().transpose());
}

NilpotentCalculus nilpotent_calculus(const MatrixQ& n) {
    if (n.rows() != n.cols()) throw std::invalid_argument("nilpotent_calculus: not square");
    if (!n.is_nilpotent()) throw std::invalid_argument("nilpotent_calculus: matrix not nilpotent");
    int d = n.rows();
    Scalar tau = Scalar::tau();
    MatrixQ expt = MatrixQ::identity(d);
    MatrixQ phit = MatrixQ::identity(d) * tau;
    MatrixQ pw = n;  // N^k
    Scalar tk = tau;
    Rat fact(1);
    for (int k = 1; k <= d && !pw.is_zero(); ++k) {
        fact *= k;
        expt = expt + pw * (tk * Scalar(Rat(1) / fact));
        // phi term: t^{k+1} N^k / (k+1)!
        Rat fact1 = fact * (k + 1);
        phit = phit + pw * (tk * tau * Scalar(Rat(1) / fact1));
        pw = pw * n;
        tk = tk * tau;
    }
    return {expt, phit};
}

MatrixQ log_unipotent(const MatrixQ& u) {
    if (u.rows() != u.cols()) throw std::invalid_argument("log_unipotent: not square");
    MatrixQ m = u - MatrixQ::identity(u.rows());
    if (!m.is_nilpotent()) throw std::invalid_argument("log_unipotent: input not unipotent");
    MatrixQ acc(u.rows(), u.cols());
    MatrixQ pw = m;
    for (int k = 1; k <= u.rows() && !pw.is_zero(); ++k) {
        Scalar c = Scalar(Rat((k % 2) ? 1 : -1) / Rat(k));
        acc = acc + pw * c;
        pw = pw * m;
    }
    return acc;
}

namespace {

std::vector<int> compose_perm(const std::vector<int>& a, const std::vector<int>& b) {
    // (a o b)(i) = a[b[i]]
    std::vector<int> r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[b[i]];
    return r;
}

int perm_sign(const std::vector<int>& p) {
    int n = static_cast<int>(p.size());
    std::vector<bool> seen(n, false);
    int sign = 1;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        int len = 0, j = i;
        while (!seen[j]) {
            seen[j] = true;
            j = p[j];
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

}  // namespace

GroupAverage group_average(
    const std::vector<std::pair<std::vector<int>, MatrixQ>>& generators,
    AverageMode mode) {
    if (generators.empty()) throw std::invalid_argument("group_average: no generators");
    int dim = generators.front().second.rows();
    size_t n = generators.front().first.size();
    std::vector<int> id_perm(n);
    for (size_t i = 0; i < n; ++i) id_perm[i] = static_cast<int>(i);

    std::map<std::vector<int>, MatrixQ> group;
    group.emplace(id_perm, MatrixQ::identity(dim));
    bool grew = true;
    const size_t kMaxGroup = 5040;
    while (grew) {
        grew = false;
        auto snapshot = group;
        for (const auto& [gp, gm] : snapshot)
            for (const auto& [hp, hm] : generators) {
                auto pp = compose_perm(hp, gp);
                MatrixQ mm = hm * gm;
                auto it = group.find(pp);
                if (it == group.end()) {
                    group.emplace(pp, mm);
                    grew = true;
                    if (group.size() > kMaxGroup)
                        throw std::invalid_argument("group_average: group too large");
                } else if (!(it->second == mm)) {
                    throw std::invalid_argument(
                        "group_average: generators do not define a representation");
                }
            }
    }

    MatrixQ sum(dim, dim);
    for (const auto& [p, m] : group) {
        if (mode == AverageMode::SkewInvariants && perm_sign(p) < 0)
            sum = sum - m;
        else
            sum = sum + m;
    }
    Scalar inv_order = Scalar(Rat(1) / Rat(static_cast<long>(group.size())));
    MatrixQ proj = sum * inv_order;
    GroupAverage res;
    res.projector = proj;
    res.fixed = Subspace::row_span(proj.transpose());
    return res;
}

}  // namespace ranq
