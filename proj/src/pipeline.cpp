#include "ranq/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace ranq {

void RunReport::stage(const std::string& name, bool okflag, const std::string& detail,
                      long ms) {
    stages.push_back({name, okflag, detail, ms});
}

std::string RunReport::to_json(bool with_timings) const {
    std::ostringstream os;
    os << "{\"ok\":" << (ok ? "true" : "false") << ",\"stages\":[";
    for (size_t i = 0; i < stages.size(); ++i) {
        if (i) os << ",";
        os << "{\"name\":\"" << stages[i].name << "\",\"ok\":" << (stages[i].ok ? "true" : "false")
           << ",\"detail\":\"" << stages[i].detail << "\"";
        if (with_timings) os << ",\"wall_ms\":" << stages[i].wall_ms;
        os << "}";
    }
    os << "]";
    if (has_obstruction) os << ",\"obstruction\":" << obstruction.to_json();
    if (!iso_note.empty()) os << ",\"iso\":\"" << iso_note << "\"";
    os << "}";
    return os.str();
}

int effective_max_points() {
    int cap = kMaxIndexSetSize;
    if (const char* env = std::getenv("RANQ_MAX_POINTS")) {
        int v = std::atoi(env);
        if (v >= 1) cap = std::min(v, kMaxIndexSetSize);
    }
    return cap;
}

Bialgebra truncate_bialg(const Bialgebra& a, int k) {
    if (k >= a.trunc) return a;
    Bialgebra out;
    out.trunc = k;
    out.dims.assign(a.dims.begin(), a.dims.begin() + k);
    int d = out.dims.back(), da = a.dim();
    out.product = MatrixQ(d, d * d);
    out.coproduct = MatrixQ(d * d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (a.level_of(i) + a.level_of(j) > k) continue;  // truncation window
            for (int r = 0; r < d; ++r)
                out.product.at(r, i * d + j) = a.product.at(r, i * da + j);
        }
    for (int c = 0; c < d; ++c)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out.coproduct.at(i * d + j, c) = a.coproduct.at(i * da + j, c);
    return out;
}

LieBialgebra truncate_lie(const LieBialgebra& g, int k) {
    if (k >= g.trunc) return g;
    LieBialgebra out;
    out.trunc = k;
    out.dims.assign(g.dims.begin(), g.dims.begin() + k);
    int d = out.dims.back(), dg = g.dim();
    out.bracket = MatrixQ(d, d * d);
    out.cobracket = MatrixQ(d * d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (g.level_of(i) + g.level_of(j) > k) continue;
            for (int r = 0; r < d; ++r)
                out.bracket.at(r, i * d + j) = g.bracket.at(r, i * dg + j);
        }
    for (int c = 0; c < d; ++c)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out.cobracket.at(i * d + j, c) = g.cobracket.at(i * dg + j, c);
    return out;
}

bool bialg_equal(const Bialgebra& a, const Bialgebra& b) {
    return a.trunc == b.trunc && a.dims == b.dims && a.product == b.product &&
           a.coproduct == b.coproduct;
}

bool lie_equal(const LieBialgebra& a, const LieBialgebra& b) {
    return a.trunc == b.trunc && a.dims == b.dims && a.bracket == b.bracket &&
           a.cobracket == b.cobracket;
}

// ---------------------------------------------------------------------------
// Normalizer: filtered isomorphism search.

namespace {

// Candidate leading blocks T|_{level-1}: scalar and weight-graded diagonals.
std::vector<MatrixQ> leading_candidates(const MatrixQ& bracket_src, int d1, int trunc) {
    std::vector<Scalar> scales = {Scalar(1),
                                  Scalar(4) * Scalar::tau(),
                                  (Scalar(4) * Scalar::tau()).inverse(),
                                  Scalar(2) * Scalar::tau(),
                                  (Scalar(2) * Scalar::tau()).inverse(),
                                  Scalar::tau(),
                                  Scalar::tau().inverse(),
                                  Scalar(2),
                                  Scalar::of(1, 2)};
    // Weights from the lower central series of the level-1 bracket.
    std::vector<int> weights(d1, 1);
    {
        LieBialgebra tmp;
        tmp.trunc = trunc;
        tmp.dims.assign(trunc, d1);
        tmp.bracket = bracket_src;
        tmp.cobracket = MatrixQ(d1 * d1, d1);
        // Lower central series by brute force.
        std::vector<Subspace> series;
        series.push_back(Subspace::full(d1));
        while (true) {
            const Subspace& prev = series.back();
            if (prev.dim() == 0) break;
            MatrixQ vecs(d1 * prev.dim(), d1);
            int row = 0;
            for (int i = 0; i < d1; ++i)
                for (int r = 0; r < prev.dim(); ++r) {
                    for (int k = 0; k < d1; ++k) {
                        Scalar acc(0);
                        for (int j = 0; j < d1; ++j)
                            acc += bracket_src.at(k, i * d1 + j) * prev.basis().at(r, j);
                        vecs.at(row, k) = acc;
                    }
                    ++row;
                }
            Subspace next = Subspace::row_span(vecs);
            if (next.dim() == prev.dim() || next.dim() == 0) {
                if (next.dim() != 0) series.clear();  // not nilpotent: no weights
                break;
            }
            series.push_back(next);
        }
        if (!series.empty())
            for (int i = 0; i < d1; ++i) {
                MatrixQ e(d1, 1);
                e.at(i, 0) = Scalar(1);
                for (size_t k = 1; k < series.size(); ++k)
                    if (series[k].contains(e)) weights[i] = static_cast<int>(k) + 1;
            }
    }
    std::vector<MatrixQ> out;
    for (const Scalar& s : scales) {
        MatrixQ scalar_diag(d1, d1), weighted(d1, d1);
        for (int i = 0; i < d1; ++i) {
            scalar_diag.at(i, i) = s;
            Scalar w(1);
            for (int k = 1; k < weights[i]; ++k) w *= s;
            weighted.at(i, i) = w;
        }
        out.push_back(scalar_diag);
        out.push_back(weighted);
    }
    return out;
}

// Shared level-by-level solver for filtered maps.  `product`/`coproduct` are
// the structure matrices (d x d^2 and d^2 x d); level data from dims.
struct FilteredAlgebra {
    int trunc;
    std::vector<int> dims;
    MatrixQ mul;    // d x d^2
    MatrixQ comul;  // d^2 x d
    int dim() const { return dims.back(); }
    int level_of(int i) const {
        for (int k = 1; k <= trunc; ++k)
            if (i < dims[k - 1]) return k;
        return trunc;
    }
};

bool verify_filtered_iso(const FilteredAlgebra& p, const FilteredAlgebra& r,
                         const MatrixQ& t) {
    int d = p.dim();
    if (!t.inverse()) return false;
    // Flag preservation.
    for (int lev = 1; lev < p.trunc; ++lev)
        for (int j = 0; j < p.dims[lev - 1]; ++j)
            for (int i = r.dims[lev - 1]; i < d; ++i)
                if (!t.at(i, j).is_zero()) return false;
    MatrixQ tt = t.kronecker(t);
    if (!(t * p.mul - r.mul * tt).is_zero()) return false;
    if (!(tt * p.comul - r.comul * t).is_zero()) return false;
    return true;
}

IsoResult find_filtered_iso(const FilteredAlgebra& p, const FilteredAlgebra& r,
                            const std::vector<MatrixQ>& lead_candidates) {
    IsoResult res;
    if (p.trunc != r.trunc || p.dims != r.dims) return res;
    int d = p.dim();
    int d1 = p.dims[0];
    for (const MatrixQ& t1 : lead_candidates) {
        MatrixQ t(d, d);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j) t.at(i, j) = t1.at(i, j);
        bool feasible = t1.inverse().has_value();
        for (int lev = 2; lev <= p.trunc && feasible; ++lev) {
            int lo = p.dims[lev - 2], hi = p.dims[lev - 1];
            int ncols = hi - lo;
            if (ncols == 0) continue;
            int nvars = hi * ncols;  // T block: values in A_lev(R) for new basis
            std::vector<std::vector<std::pair<int, Scalar>>> rows;
            std::vector<Scalar> rhs;
            auto var = [&](int i, int jj) { return i * ncols + (jj - lo); };

            // Known part of T restricted to A_{lev-1} columns.
            auto t_known_col = [&](int col) {
                MatrixQ v(d, 1);
                for (int i = 0; i < d; ++i) v.at(i, 0) = t.at(i, col);
                return v;
            };

            // (a) coproduct compatibility for the new columns.
            // comul_R * T e_j = (T (x) T) comul_P e_j; the right side involves
            // only lower-level columns of T.
            for (int jj = lo; jj < hi; ++jj) {
                MatrixQ target(d * d, 1);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) {
                        Scalar acc(0);
                        for (int x = 0; x < d; ++x)
                            for (int y = 0; y < d; ++y) {
                                const Scalar& c = p.comul.at(x * d + y, jj);
                                if (c.is_zero()) continue;
                                acc += t.at(a, x) * t.at(b, y) * c;
                            }
                        target.at(a * d + b, 0) = acc;
                    }
                for (int row = 0; row < d * d; ++row) {
                    std::vector<std::pair<int, Scalar>> lin;
                    for (int i = 0; i < hi; ++i) {
                        const Scalar& c = r.comul.at(row, i);
                        if (!c.is_zero()) lin.push_back({var(i, jj), c});
                    }
                    rows.push_back(std::move(lin));
                    rhs.push_back(target.at(row, 0));
                }
            }
            // (b) product compatibility for pairs with level sum = lev:
            // T m_P(u,v) = m_R(T u, T v), linear in the new block.
            for (int u = 0; u < p.dims[lev - 2]; ++u)
                for (int v = 0; v < p.dims[lev - 2]; ++v) {
                    if (p.level_of(u) + p.level_of(v) != lev) continue;
                    // RHS: m_R(Tu, Tv), known.
                    MatrixQ rhs_vec(d, 1);
                    for (int k = 0; k < d; ++k) {
                        Scalar acc(0);
                        for (int x = 0; x < d; ++x) {
                            if (t.at(x, u).is_zero()) continue;
                            for (int y = 0; y < d; ++y) {
                                const Scalar& c = r.mul.at(k, x * d + y);
                                if (c.is_zero()) continue;
                                acc += t.at(x, u) * t.at(y, v) * c;
                            }
                        }
                        rhs_vec.at(k, 0) = acc;
                    }
                    // LHS: T applied to m_P(u,v); split into known and new parts.
                    for (int k = 0; k < d; ++k) {
                        std::vector<std::pair<int, Scalar>> lin;
                        Scalar known(0);
                        for (int x = 0; x < d; ++x) {
                            const Scalar& c = p.mul.at(x, u * d + v);
                            if (c.is_zero()) continue;
                            if (x < lo) known += t.at(k, x) * c;
                            else if (x < hi) lin.push_back({var(k, x), c});
                        }
                        rows.push_back(std::move(lin));
                        rhs.push_back(rhs_vec.at(k, 0) - known);
                    }
                }

            // Assemble and solve.
            MatrixQ sys(static_cast<int>(rows.size()), nvars);
            MatrixQ b(static_cast<int>(rows.size()), 1);
            for (size_t rr = 0; rr < rows.size(); ++rr) {
                for (const auto& [cidx, val] : rows[rr]) sys.at(static_cast<int>(rr), cidx) += val;
                b.at(static_cast<int>(rr), 0) = rhs[rr];
            }
            auto sol = sys.solve(b);
            if (!sol) {
                feasible = false;
                break;
            }
            for (int i = 0; i < hi; ++i)
                for (int jj = lo; jj < hi; ++jj) t.at(i, jj) = sol->at(var(i, jj), 0);
        }
        if (!feasible) continue;
        if (verify_filtered_iso(p, r, t)) {
            res.found = true;
            res.map = t;
            return res;
        }
    }
    return res;
}

FilteredAlgebra as_filtered(const Bialgebra& a) {
    return {a.trunc, a.dims, a.product, a.coproduct};
}
FilteredAlgebra as_filtered(const LieBialgebra& g) {
    return {g.trunc, g.dims, g.bracket, g.cobracket};
}

MatrixQ level1_bracket(const FilteredAlgebra& p, bool lie) {
    int d1 = p.dims[0], d = p.dim();
    MatrixQ br(d1, d1 * d1);
    for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d1; ++j)
            for (int k = 0; k < d1; ++k) {
                Scalar v = p.mul.at(k, i * d + j);
                if (!lie) v = v - p.mul.at(k, j * d + i);  // skew part for bialgebras
                br.at(k, i * d1 + j) = v;
            }
    return br;
}

}  // namespace

IsoResult find_bialg_iso(const Bialgebra& src, const Bialgebra& dst) {
    FilteredAlgebra p = as_filtered(src), r = as_filtered(dst);
    if (p.dims != r.dims) return {};
    auto cands = leading_candidates(level1_bracket(p, false), p.dims[0], p.trunc);
    return find_filtered_iso(p, r, cands);
}

IsoResult find_lie_iso(const LieBialgebra& src, const LieBialgebra& dst) {
    FilteredAlgebra p = as_filtered(src), r = as_filtered(dst);
    if (p.dims != r.dims) return {};
    auto cands = leading_candidates(level1_bracket(p, true), p.dims[0], p.trunc);
    return find_filtered_iso(p, r, cands);
}

// ---------------------------------------------------------------------------
// Quantization.

namespace {

// Order-2 quantization in the standard gauge: A_2 = [g_2 | Sym^2 g_1].
Bialgebra quantize_order2(const LieBialgebra& g) {
    int d1 = g.dim_at(1), d2 = g.dim_at(2);
    int s = d1 * (d1 + 1) / 2;
    int d = d2 + s;
    auto sym_index = [&](int i, int j) {
        if (i > j) std::swap(i, j);
        // position of (i, j), i <= j, in row-major upper-triangular order
        return d2 + i * d1 - i * (i - 1) / 2 + (j - i);
    };

    Bialgebra a;
    a.trunc = 2;
    a.dims = {d1, d};
    a.product = MatrixQ(d, d * d);
    a.coproduct = MatrixQ(d * d, d);

    MatrixQ bc = g.bracket_component(1, 1);     // d2 x d1^2
    MatrixQ cc = g.cobracket_component(1, 1);   // d1^2 x d2
    MatrixQ n_mat = bc * cc;                    // on g_2, nilpotent
    MatrixQ phi = nilpotent_calculus(n_mat).phi_tau;
    MatrixQ dressed = phi * bc * Scalar(2);     // 2 phi_t(N) [.,.]

    // m(u_i (x) u_j) = 2 phi_t(N)[u_i, u_j] in the g_2 block plus the
    // symmetric word u_i u_j.
    for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d1; ++j) {
            for (int k = 0; k < d2; ++k) {
                const Scalar& c = dressed.at(k, i * d1 + j);
                if (!c.is_zero()) a.product.at(k, i * d + j) += c;
            }
            a.product.at(sym_index(i, j), i * d + j) += Scalar(1);
        }
    // Delta-bar: the cobracket on the g_2 block, the symmetric tensor on the
    // Sym^2 block.
    for (int k = 0; k < d2; ++k)
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j) {
                const Scalar& c = cc.at(i * d1 + j, k);
                if (!c.is_zero()) a.coproduct.at(i * d + j, k) += c;
            }
    for (int i = 0; i < d1; ++i)
        for (int j = i; j < d1; ++j) {
            int col = sym_index(i, j);
            a.coproduct.at(i * d + j, col) += Scalar(1);
            if (i != j) a.coproduct.at(j * d + i, col) += Scalar(1);
            else a.coproduct.at(i * d + i, col) = Scalar(1);
        }
    return a;
}

Bialgebra conjugate_bialg(const Bialgebra& b, const MatrixQ& t_inv, const MatrixQ& t) {
    // Structure transported along T: A_out -> A_b:  m_out = T^{-1} m_b (T x T).
    Bialgebra out = b;
    out.product = t_inv * b.product * t.kronecker(t);
    out.coproduct = t_inv.kronecker(t_inv) * b.coproduct * t;
    return out;
}

}  // namespace

QuantizeResult quantize(const LieBialgebra& g, int order, const RhConfig& cfg) {
    QuantizeResult qr;
    RunReport& rep = qr.report;
    AxiomReport ax = check_lie_axioms(g);
    rep.stage("input axioms", ax.pass, ax.summary());
    if (!ax.pass) throw std::invalid_argument("quantize: input fails the Lie bialgebra axioms");
    order = std::min({order, cfg.n_max, g.trunc});

    LambdaTower tower = lambda_tower(g, order);
    rep.stage("lambda tower", tower.verified, tower.failure);
    if (!tower.verified) throw std::runtime_error("quantize: " + tower.failure);

    if (order == 1) {
        Bialgebra a;
        a.trunc = 1;
        a.dims = {g.dim_at(1)};
        int d = a.dims[0];
        a.product = MatrixQ(d, d * d);
        a.coproduct = MatrixQ(d * d, d);
        qr.out = a;
        rep.ok = true;
        rep.stage("reconstruct", true, "order 1");
        return qr;
    }

    Bialgebra q2 = quantize_order2(g);
    {
        AxiomReport check = check_bialg_axioms(q2);
        rep.stage("order-2 reconstruction", check.pass, check.summary());
        if (!check.pass) throw std::logic_error("quantize: order-2 output fails axioms");
    }
    if (order == 2) {
        DoubleRepB closed = rh_closed_form_2(tower.levels[1]);
        DefectReport defects = rh_verify_closed_2(tower.levels[1], closed);
        rep.stage("rh verify", defects.empty(), defects.empty() ? "" : defects.to_json());
        if (!defects.empty()) throw std::logic_error("quantize: closed form verification failed");
        qr.out = q2;
        rep.ok = true;
        return qr;
    }

    // Order 3.
    RhResult rh = rh_solve(tower, order, cfg);
    if (!rh.ok) {
        rep.has_obstruction = true;
        rep.obstruction = rh.obstruction;
        rep.stage("rh solve", false, rh.obstruction.message);
        qr.out = q2;  // best verified output; the report carries the failure
        rep.ok = false;
        return qr;
    }
    rep.stage("rh solve", true, rh.omega_model ? "classical particular solution" : "shape walls");

    if (rh.omega_model) {
        const Bialgebra& model = rh.model;
        OmegaTower ot = omega_tower(model, order);
        rep.stage("omega tower", ot.verified, ot.failure);
        if (!ot.verified) throw std::logic_error("quantize: seed tower failed verification");
        DefectReport defects = rh_verify_omega(ot);
        rep.stage("rh verify", defects.empty(), defects.empty() ? "" : defects.to_json());
        Bialgebra recon = omega_ran_reconstruct(ot);
        rep.stage("hyperbolic reconstruction", bialg_equal(recon, model),
                  "round trip against the model");
        if (!bialg_equal(recon, model))
            throw std::logic_error("quantize: omega reconstruction differs from the model");

        // Transport the model into the order-2 gauge.
        IsoResult psi = find_bialg_iso(q2, truncate_bialg(model, 2));
        rep.stage("gauge normalizer", psi.found,
                  psi.found ? "order-2 iso found" : "no order-2 iso");
        if (!psi.found) {
            rep.has_obstruction = true;
            rep.obstruction.location = "gauge transport";
            rep.obstruction.message = "no filtered isomorphism onto the order-2 gauge";
            qr.out = q2;
            return qr;
        }
        int d = model.dim(), d2 = model.dim_at(2);
        MatrixQ t(d, d);
        for (int i = 0; i < d2; ++i)
            for (int j = 0; j < d2; ++j) t.at(i, j) = psi.map.at(i, j);
        for (int i = d2; i < d; ++i) t.at(i, i) = Scalar(1);
        auto t_inv = t.inverse();
        if (!t_inv) throw std::logic_error("quantize: gauge transport not invertible");
        Bialgebra out = conjugate_bialg(model, *t_inv, t);
        AxiomReport check = check_bialg_axioms(out);
        rep.stage("output axioms", check.pass, check.summary());
        if (!check.pass) throw std::logic_error("quantize: conjugated output fails axioms");
        rep.iso_note = "output is isomorphic to the classical model by the recorded gauge map";
        qr.out = out;
        rep.ok = true;
        return qr;
    }

    // Shape route: reconstruct the bialgebra from the solved levels.
    // The deep-face invariants under the plain symmetric-group transport give
    // A_n; walls give the structure maps.
    const std::vector<DoubleRepB>& levels = rh.levels;
    HyperStalkShape shape3 = rh_shape(tower, order);

    // Invariant bases per level.
    std::vector<MatrixQ> inv_basis;  // columns: invariant vectors in the deep face
    std::vector<HyperStalkShape> shapes;
    for (int n = 1; n <= order; ++n) shapes.push_back(rh_shape(tower, n));
    auto deep_equivariance = [&](int n, const Permutation& sigma) {
        const HyperStalkShape& sh = shapes[n - 1];
        int fdeep = sh.poset->index_of(
            OrderedSetPartition::of({std::vector<int>(index_set(n).begin(), index_set(n).end())}));
        const ShapeFace& sf = sh.faces[fdeep];
        MatrixQ p(sf.dim, sf.dim);
        for (const auto& s : sf.summands) {
            const SetPartition& beta = s.parts[0];
            auto acted = act(sigma, beta);
            // Plain transport: slot permutation without signs.
            std::vector<int> dims;
            for (const auto& blk : beta.blocks)
                dims.push_back(tower.g.dim_at(static_cast<int>(blk.size())));
            MatrixQ block = slot_permutation_matrix(dims, slot_permutation(sigma, beta), false);
            // Locate the target summand.
            int toff = -1;
            for (const auto& s2 : sf.summands)
                if (s2.parts[0] == acted.image) toff = s2.offset;
            if (toff < 0) throw std::logic_error("quantize: missing summand image");
            for (int r = 0; r < block.rows(); ++r)
                for (int c = 0; c < block.cols(); ++c)
                    if (!block.at(r, c).is_zero()) p.at(toff + r, s.offset + c) = block.at(r, c);
        }
        return p;
    };
    for (int n = 1; n <= order; ++n) {
        const HyperStalkShape& sh = shapes[n - 1];
        int fdeep = sh.poset->index_of(
            OrderedSetPartition::of({std::vector<int>(index_set(n).begin(), index_set(n).end())}));
        int dim = sh.faces[fdeep].dim;
        std::vector<MatrixQ> fixers;
        for (int i = 1; i < n; ++i) {
            MatrixQ p = deep_equivariance(n, Permutation::transposition(index_set(n), i, i + 1));
            fixers.push_back(p - MatrixQ::identity(dim));
        }
        Subspace inv = kernel_intersection(fixers, dim);
        inv_basis.push_back(inv.basis().transpose());
    }

    // Assemble the bialgebra: flag from symmetrized inclusions, structure
    // maps from the walls.  Failures surface as an obstruction.
    try {
        std::vector<int> dims;
        for (int n = 1; n <= order; ++n) dims.push_back(inv_basis[n - 1].cols());
        // Inclusion A_{n-1} -> A_n: preimage coarsening along the canonical
        // collapse, symmetrized over the shuffle classes.
        std::vector<MatrixQ> incl;  // from level n-1 invariants to level n invariants
        for (int n = 2; n <= order; ++n) {
            const HyperStalkShape& lo = shapes[n - 2];
            const HyperStalkShape& hi = shapes[n - 1];
            int flo = lo.poset->index_of(OrderedSetPartition::of(
                {std::vector<int>(index_set(n - 1).begin(), index_set(n - 1).end())}));
            int fhi = hi.poset->index_of(OrderedSetPartition::of(
                {std::vector<int>(index_set(n).begin(), index_set(n).end())}));
            Surjection pi = Surjection::canonical_collapse(n, n - 1);
            MatrixQ raw(hi.faces[fhi].dim, lo.faces[flo].dim);
            for (const auto& s : lo.faces[flo].summands) {
                SetPartition image = induced_coarsening(pi, s.parts[0]);
                // Per-block prefix inclusions (canonical collapse preserves
                // the block order).
                MatrixQ blockmap = MatrixQ::identity(1);
                for (const auto& blk : s.parts[0].blocks) {
                    int sfrom = tower.g.dim_at(static_cast<int>(blk.size()));
                    int sto = tower.g.dim_at(static_cast<int>(blk.size()) +
                                             (blk.front() == 1 ? 1 : 0));
                    // Only the block containing label 1 grows.
                    MatrixQ inc(sto, sfrom);
                    for (int i = 0; i < sfrom; ++i) inc.at(i, i) = Scalar(1);
                    blockmap = blockmap.kronecker(inc);
                }
                int toff = -1;
                for (const auto& s2 : hi.faces[fhi].summands)
                    if (s2.parts[0] == image) toff = s2.offset;
                if (toff < 0) throw std::logic_error("missing inclusion target");
                for (int r = 0; r < blockmap.rows(); ++r)
                    for (int c = 0; c < blockmap.cols(); ++c)
                        if (!blockmap.at(r, c).is_zero())
                            raw.at(toff + r, s.offset + c) += blockmap.at(r, c);
            }
            // Symmetrize over the full symmetric group (average).
            MatrixQ sym(hi.faces[fhi].dim, hi.faces[fhi].dim);
            auto perms = all_permutations(index_set(n));
            for (const auto& sigma : perms) sym = sym + deep_equivariance(n, sigma);
            sym = sym * Scalar(Rat(1) / Rat(static_cast<long>(perms.size())));
            MatrixQ inc_inv = sym * raw * inv_basis[n - 2];
            // Express in the level-n invariant basis.
            auto coords = inv_basis[n - 1].solve(inc_inv);
            if (!coords) throw std::runtime_error("inclusion not invariant");
            incl.push_back(*coords);
        }

        // Flag basis of A_order: inclusions of lower levels first.
        int dtot = dims[order - 1];
        MatrixQ flag(dtot, dtot);
        {
            // Columns for A_k images.
            MatrixQ chain = MatrixQ::identity(dims[0]);
            for (int n = 2; n <= order; ++n) chain = incl[n - 2] * chain;
            // chain: level-1 invariants -> level-order coordinates
            int col = 0;
            for (int k = 1; k <= order; ++k) {
                MatrixQ up = MatrixQ::identity(dims[k - 1]);
                for (int n = k + 1; n <= order; ++n) up = incl[n - 2] * up;
                // Add new columns beyond the previous flag part.
                for (int j = (k >= 2 ? dims[k - 2] : 0); j < dims[k - 1]; ++j) {
                    for (int i = 0; i < dtot; ++i) flag.at(i, col) = up.at(i, j);
                    ++col;
                }
            }
            if (col != dtot) throw std::runtime_error("flag assembly mismatch");
        }
        auto flag_inv = flag.inverse();
        if (!flag_inv) throw std::runtime_error("flag not a basis (inclusion degenerate)");

        // Structure maps from the walls at each level, expressed in flag
        // coordinates of the top level via the inclusions.
        int d = dtot;
        MatrixQ product(d, d * d), coproduct(d * d, d);
        for (int n = 2; n <= order; ++n) {
            const HyperStalkShape& sh = shapes[n - 1];
            const DoubleRepB& rep_n = levels[n - 1];
            const FacePoset& fposet = *sh.poset;
            int fdeep = fposet.index_of(OrderedSetPartition::of(
                {std::vector<int>(index_set(n).begin(), index_set(n).end())}));
            for (int i = 1; i < n; ++i) {
                int j = n - i;
                std::vector<int> left(i), right(j);
                for (int x = 0; x < i; ++x) left[x] = x + 1;
                for (int x = 0; x < j; ++x) right[x] = i + x + 1;
                int face = fposet.index_of(OrderedSetPartition::of({left, right}));
                int aid = fposet.arrow_between(face, fdeep);
                // Face space = (deep of [i]) (x) (deep of [j]) after the
                // summand reindexing; build that identification.
                const HyperStalkShape& shi = shapes[i - 1];
                const HyperStalkShape& shj = shapes[j - 1];
                int di = shi.faces[shi.poset->index_of(OrderedSetPartition::of(
                             {std::vector<int>(index_set(i).begin(), index_set(i).end())}))]
                             .dim;
                int dj = shj.faces[shj.poset->index_of(OrderedSetPartition::of(
                             {std::vector<int>(index_set(j).begin(), index_set(j).end())}))]
                             .dim;
                MatrixQ ident(sh.faces[face].dim, di * dj);
                // Summands of the face are pairs (beta_1 | beta_2); the product
                // basis index is offset_i * dj + offset_j after relabeling.
                const ShapeFace& sface = sh.faces[face];
                const ShapeFace& sdi =
                    shi.faces[shi.poset->index_of(OrderedSetPartition::of(
                        {std::vector<int>(index_set(i).begin(), index_set(i).end())}))];
                const ShapeFace& sdj =
                    shj.faces[shj.poset->index_of(OrderedSetPartition::of(
                        {std::vector<int>(index_set(j).begin(), index_set(j).end())}))];
                for (const auto& s : sface.summands) {
                    // Relabel parts to [i] and [j].
                    auto relabel = [](const SetPartition& p, int shift) {
                        std::vector<std::vector<int>> blocks;
                        for (const auto& b : p.blocks) {
                            std::vector<int> nb;
                            for (int x : b) nb.push_back(x - shift);
                            blocks.push_back(nb);
                        }
                        return SetPartition::of(blocks);
                    };
                    SetPartition b1 = relabel(s.parts[0], 0);
                    SetPartition b2 = relabel(s.parts[1], i);
                    int o1 = -1, d1s = 0, o2 = -1, d2s = 0;
                    for (const auto& s2 : sdi.summands)
                        if (s2.parts[0] == b1) {
                            o1 = s2.offset;
                            d1s = s2.dim;
                        }
                    for (const auto& s2 : sdj.summands)
                        if (s2.parts[0] == b2) {
                            o2 = s2.offset;
                            d2s = s2.dim;
                        }
                    if (o1 < 0 || o2 < 0) throw std::logic_error("face identification");
                    for (int r1 = 0; r1 < d1s; ++r1)
                        for (int r2 = 0; r2 < d2s; ++r2)
                            ident.at(s.offset + r1 * d2s + r2, (o1 + r1) * dj + (o2 + r2)) =
                                Scalar(1);
                }
                MatrixQ pair_embed = ident * inv_basis[i - 1].kronecker(inv_basis[j - 1]);

                // Delta-bar components: B^+ on invariants projected to the pair.
                MatrixQ img = rep_n.up_ops[aid] * inv_basis[n - 1];
                auto coords = pair_embed.solve(img);
                if (!coords) throw std::runtime_error("coproduct projection failed");
                // m components: all shuffle transports of B^- on the pair.
                MatrixQ msum(inv_basis[n - 1].rows(), di * dj);
                {
                    // Sum over coset representatives of S_n / (S_i x S_j).
                    std::vector<std::vector<int>> subsets;
                    std::vector<int> cur;
                    std::function<void(int, int)> rec = [&](int start, int need) {
                        if (need == 0) {
                            subsets.push_back(cur);
                            return;
                        }
                        for (int v = start; v <= n - need + 1; ++v) {
                            cur.push_back(v);
                            rec(v + 1, need - 1);
                            cur.pop_back();
                        }
                    };
                    rec(1, i);
                    for (const auto& T : subsets) {
                        std::vector<int> images(n);
                        std::vector<bool> used(n + 1, false);
                        for (int x = 0; x < i; ++x) {
                            images[x] = T[x];
                            used[T[x]] = true;
                        }
                        int at = i;
                        for (int v = 1; v <= n; ++v)
                            if (!used[v]) images[at++] = v;
                        Permutation sigma = Permutation::of(index_set(n), images);
                        msum = msum + deep_equivariance(n, sigma) * rep_n.down_ops[aid] *
                                          ident * inv_basis[i - 1].kronecker(inv_basis[j - 1]);
                    }
                }
                auto mcoords = inv_basis[n - 1].solve(msum);
                if (!mcoords) throw std::runtime_error("product not invariant");

                // Transported into top-level flag coordinates.
                // Level-n quantities sit in the first dims[n-1] flag columns.
                for (int cx = 0; cx < dims[i - 1]; ++cx)
                    for (int cy = 0; cy < dims[j - 1]; ++cy) {
                        // product column in A (x) A
                        for (int k = 0; k < dims[n - 1]; ++k) {
                            const Scalar& c = mcoords->at(k, cx * dims[j - 1] + cy);
                            if (!c.is_zero()) product.at(k, cx * d + cy) += c;
                        }
                    }
                for (int col = 0; col < dims[n - 1]; ++col)
                    for (int rx = 0; rx < dims[i - 1]; ++rx)
                        for (int ry = 0; ry < dims[j - 1]; ++ry) {
                            const Scalar& c = coords->at(rx * dims[j - 1] + ry, col);
                            if (!c.is_zero()) coproduct.at(rx * d + ry, col) += c;
                        }
            }
        }
        Bialgebra out;
        out.trunc = order;
        out.dims = dims;
        out.product = std::move(product);
        out.coproduct = std::move(coproduct);
        AxiomReport check = check_bialg_axioms(out);
        rep.stage("shape reconstruction", check.pass, check.summary());
        if (!check.pass) {
            rep.has_obstruction = true;
            rep.obstruction.location = "shape reconstruction";
            rep.obstruction.message = "reconstructed structure fails the bialgebra axioms: " +
                                      check.summary();
            qr.out = q2;
            return qr;
        }
        qr.out = out;
        rep.ok = true;
        return qr;
    } catch (const std::exception& e) {
        rep.has_obstruction = true;
        rep.obstruction.location = "shape reconstruction";
        rep.obstruction.message = e.what();
        rep.stage("shape reconstruction", false, e.what());
        qr.out = q2;
        return qr;
    }
}

DequantizeResult dequantize(const Bialgebra& a, int order, const RhConfig& cfg) {
    DequantizeResult dr;
    RunReport& rep = dr.report;
    AxiomReport ax = check_bialg_axioms(a);
    rep.stage("input axioms", ax.pass, ax.summary());
    if (!ax.pass) throw std::invalid_argument("dequantize: input fails the bialgebra axioms");
    order = std::min({order, cfg.n_max, a.trunc});

    OmegaTower tower = omega_tower(a, order);
    rep.stage("omega tower", tower.verified, tower.failure);
    if (!tower.verified) throw std::runtime_error("dequantize: " + tower.failure);
    DefectReport defects = rh_verify_omega(tower);
    rep.stage("rh verify", defects.empty(), defects.empty() ? "" : defects.to_json());

    RhInverseResult inv = rh_inverse_candidate(a, order);
    if (!inv.ok) {
        rep.has_obstruction = true;
        rep.obstruction = inv.obstruction;
        rep.stage("inverse transform", false, inv.obstruction.message);
        throw std::runtime_error("dequantize: " + inv.obstruction.message);
    }
    rep.stage("inverse transform", true,
              "candidate dims " + std::to_string(inv.candidate.dim()));

    // Round-trip verification: quantizing the candidate must reproduce the
    // input up to the canonical normalizer.
    QuantizeResult back = quantize(inv.candidate, order, cfg);
    if (!back.report.ok) {
        rep.has_obstruction = true;
        rep.obstruction = back.report.obstruction;
        rep.stage("round trip", false, "quantization of the candidate obstructed");
        dr.out = inv.candidate;
        return dr;
    }
    Bialgebra target = truncate_bialg(a, order);
    bool exact = bialg_equal(back.out, target);
    IsoResult iso;
    if (!exact) iso = find_bialg_iso(back.out, target);
    rep.stage("round trip", exact || iso.found,
              exact ? "exact" : (iso.found ? "isomorphism found" : "no isomorphism"));
    if (!exact && !iso.found) {
        rep.has_obstruction = true;
        rep.obstruction.location = "round trip";
        rep.obstruction.message = "quantized candidate is not isomorphic to the input";
        dr.out = inv.candidate;
        return dr;
    }
    rep.iso_note = exact ? "round trip exact" : "round trip up to filtered isomorphism";
    rep.ok = true;
    dr.out = inv.candidate;
    return dr;
}

RoundtripReport roundtrip(const LieBialgebra& g, int order, const RhConfig& cfg) {
    RoundtripReport rr;
    QuantizeResult q = quantize(g, order, cfg);
    rr.forward = q.report;
    if (!q.report.ok) {
        rr.note = "quantization obstructed";
        return rr;
    }
    DequantizeResult dq;
    try {
        dq = dequantize(q.out, order, cfg);
    } catch (const std::exception& e) {
        rr.note = std::string("dequantization failed: ") + e.what();
        return rr;
    }
    rr.backward = dq.report;
    if (!dq.report.ok) {
        rr.note = "dequantization obstructed";
        return rr;
    }
    LieBialgebra target = truncate_lie(g, order);
    rr.exact = lie_equal(dq.out, target);
    if (!rr.exact) {
        IsoResult iso = find_lie_iso(dq.out, target);
        rr.iso_found = iso.found;
    }
    rr.ok = rr.exact || rr.iso_found;
    rr.note = rr.exact ? "exact equality" : (rr.iso_found ? "isomorphism found" : "mismatch");
    return rr;
}

RoundtripReport roundtrip(const Bialgebra& a, int order, const RhConfig& cfg) {
    RoundtripReport rr;
    DequantizeResult dq;
    try {
        dq = dequantize(a, order, cfg);
    } catch (const std::exception& e) {
        rr.note = std::string("dequantization failed: ") + e.what();
        return rr;
    }
    rr.backward = dq.report;
    if (!dq.report.ok) {
        rr.note = "dequantization obstructed";
        return rr;
    }
    QuantizeResult q = quantize(dq.out, order, cfg);
    rr.forward = q.report;
    if (!q.report.ok) {
        rr.note = "quantization obstructed";
        return rr;
    }
    Bialgebra target = truncate_bialg(a, order);
    rr.exact = bialg_equal(q.out, target);
    if (!rr.exact) {
        IsoResult iso = find_bialg_iso(q.out, target);
        rr.iso_found = iso.found;
    }
    rr.ok = rr.exact || rr.iso_found;
    rr.note = rr.exact ? "exact equality" : (rr.iso_found ? "isomorphism found" : "mismatch");
    return rr;
}

SemiclassicalReport semiclassical_check(const LieBialgebra& g, const Bialgebra& qg) {
    SemiclassicalReport sr;
    int d1 = g.dim_at(1), d2 = g.dim_at(2);
    int d = qg.dim();

    // skew(m_{1,1})(u,v) = m(u,v) - m(v,u) must equal c * [u,v] inside the
    // g_2 block of A_2, with one scalar c for the whole instance.
    MatrixQ bc = g.bracket_component(1, 1);
    sr.bracket_side_zero = bc.is_zero();
    Scalar measured_c;
    bool c_set = false, proportional = true;
    for (int i = 0; i < d1 && proportional; ++i)
        for (int j = 0; j < d1 && proportional; ++j)
            for (int k = 0; k < d && proportional; ++k) {
                Scalar skew = qg.product.at(k, i * d + j) - qg.product.at(k, j * d + i);
                Scalar expected = (k < d2) ? bc.at(k, i * d1 + j) : Scalar(0);
                if (expected.is_zero()) {
                    if (!skew.is_zero()) proportional = false;
                    continue;
                }
                Scalar ratio = skew / expected;
                if (!c_set) {
                    measured_c = ratio;
                    c_set = true;
                } else if (!(ratio == measured_c)) {
                    proportional = false;
                }
            }
    if (!proportional) {
        sr.detail = "skew product is not proportional to the bracket";
        return sr;
    }
    if (c_set) sr.c_bracket = measured_c;

    // skew(Delta-bar) restricted to the g_2 block must equal c' * delta.
    MatrixQ cc = g.cobracket_component(1, 1);
    sr.cobracket_side_zero = cc.is_zero();
    Scalar measured_cp;
    bool cp_set = false, prop2 = true;
    for (int k = 0; k < d2 && prop2; ++k)
        for (int i = 0; i < d1 && prop2; ++i)
            for (int j = 0; j < d1 && prop2; ++j) {
                Scalar skew = qg.coproduct.at(i * d + j, k) - qg.coproduct.at(j * d + i, k);
                const Scalar& expected = cc.at(i * d1 + j, k);
                if (expected.is_zero()) continue;  // handled by its skew partner
                Scalar ratio = skew / expected;
                if (!cp_set) {
                    measured_cp = ratio;
                    cp_set = true;
                } else if (!(ratio == measured_cp)) {
                    prop2 = false;
                }
            }
    if (!prop2) {
        sr.detail = "skew coproduct is not proportional to the cobracket";
        return sr;
    }
    if (cp_set) sr.c_cobracket = measured_cp;

    bool c_ok = sr.bracket_side_zero || (c_set && sr.c_bracket == rh_bracket_scale());
    bool cp_ok = sr.cobracket_side_zero || (cp_set && sr.c_cobracket == rh_cobracket_scale());
    sr.ok = c_ok && cp_ok;
    if (!sr.ok) sr.detail = "measured constants differ from the frozen gauge";
    return sr;
}

}  // namespace ranq
