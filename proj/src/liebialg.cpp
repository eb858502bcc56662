#include "ranq/liebialg.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

namespace ranq {

int LieBialgebra::dim_at(int level) const {
    if (level < 1) return 0;
    if (level > trunc) level = trunc;
    return dims[level - 1];
}

int LieBialgebra::level_of(int basis_index) const {
    for (int k = 1; k <= trunc; ++k)
        if (basis_index < dims[k - 1]) return k;
    throw std::invalid_argument("LieBialgebra: basis index out of range");
}

MatrixQ LieBialgebra::bracket_component(int a, int b) const {
    if (a + b > trunc)
        throw std::invalid_argument("bracket_component: a+b beyond truncation");
    int d = dim(), da = dim_at(a), db = dim_at(b), dn = dim_at(a + b);
    MatrixQ m(dn, da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < db; ++j)
            for (int k = 0; k < d; ++k) {
                const Scalar& c = bracket.at(k, i * d + j);
                if (c.is_zero()) continue;
                if (k >= dn)
                    throw std::invalid_argument(
                        "bracket_component: bracket does not respect the filtration");
                m.at(k, i * db + j) = c;
            }
    return m;
}

MatrixQ LieBialgebra::cobracket_component(int a, int b) const {
    if (a + b > trunc)
        throw std::invalid_argument("cobracket_component: a+b beyond truncation");
    int d = dim(), da = dim_at(a), db = dim_at(b), dn = dim_at(a + b);
    MatrixQ m(da * db, dn);
    for (int k = 0; k < dn; ++k)
        for (int i = 0; i < da; ++i)
            for (int j = 0; j < db; ++j) m.at(i * db + j, k) = cobracket.at(i * d + j, k);
    return m;
}

std::string AxiomReport::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL");
    for (const auto& c : checks)
        if (!c.pass) os << " [" << c.name << ": " << c.detail << "]";
    return os.str();
}

namespace {

MatrixQ flip_matrix(int d) { return slot_permutation_matrix({d, d}, {1, 0}, false); }

// x (x) y (x) z -> y (x) z (x) x.
MatrixQ rotate3_matrix(int d) {
    return slot_permutation_matrix({d, d, d}, {2, 0, 1}, false);
}

}  // namespace

AxiomReport check_lie_axioms(const LieBialgebra& g) {
    AxiomReport rep;
    auto add = [&rep](const std::string& name, bool pass, const std::string& detail = "") {
        rep.checks.push_back({name, pass, detail});
        if (!pass) rep.pass = false;
    };
    int d = g.dim();
    if (static_cast<int>(g.dims.size()) != g.trunc || g.trunc < 1) {
        add("shape", false, "dims/truncation mismatch");
        return rep;
    }
    for (size_t i = 1; i < g.dims.size(); ++i)
        if (g.dims[i] < g.dims[i - 1]) add("shape", false, "dims not nondecreasing");
    if (g.bracket.rows() != d || g.bracket.cols() != d * d ||
        g.cobracket.rows() != d * d || g.cobracket.cols() != d) {
        add("shape", false, "structure constant shapes");
        return rep;
    }

    MatrixQ flip = flip_matrix(d);
    MatrixQ rot = rotate3_matrix(d);
    MatrixQ id_d = MatrixQ::identity(d);

    add("bracket_antisymmetry", (g.bracket + g.bracket * flip).is_zero());
    add("cobracket_antisymmetry", (g.cobracket + flip * g.cobracket).is_zero());

    // Jacobi: sum over cyclic rotations of [[x,y],z] vanishes.
    MatrixQ jac_core = g.bracket * g.bracket.kronecker(id_d);
    MatrixQ cyc = MatrixQ::identity(d * d * d) + rot + rot * rot;
    add("jacobi", (jac_core * cyc).is_zero());

    // coJacobi: cyclic symmetrization of (delta (x) id) delta vanishes.
    MatrixQ cojac_core = g.cobracket.kronecker(id_d) * g.cobracket;
    add("cojacobi", (cyc * cojac_core).is_zero());

    // Truncation window: brackets with level(x) + level(y) > N vanish (the
    // object is the N-truncation; components that would need more than N
    // points are cut, which keeps Jacobi exact).
    {
        bool ok = true;
        for (int i = 0; i < d && ok; ++i)
            for (int j = 0; j < d && ok; ++j) {
                if (g.level_of(i) + g.level_of(j) <= g.trunc) continue;
                for (int k = 0; k < d; ++k)
                    if (!g.bracket.at(k, i * d + j).is_zero()) {
                        ok = false;
                        break;
                    }
            }
        add("truncation_window", ok);
    }

    // Drinfeld 1-cocycle: delta([x,y]) = x.delta(y) - y.delta(x), checked on
    // the pairs inside the truncation window.
    {
        MatrixQ id_delta = id_d.kronecker(g.cobracket);        // x (x) delta(y)
        MatrixQ t_a = g.bracket.kronecker(id_d) * id_delta;    // [x,u] (x) v
        MatrixQ swap12 = slot_permutation_matrix({d, d, d}, {1, 0, 2}, false);
        MatrixQ t_b = id_d.kronecker(g.bracket) * swap12 * id_delta;  // u (x) [x,v]
        MatrixQ action = t_a + t_b;
        MatrixQ resid = g.cobracket * g.bracket - action + action * flip;
        bool ok = true;
        for (int i = 0; i < d && ok; ++i)
            for (int j = 0; j < d && ok; ++j) {
                if (g.level_of(i) + g.level_of(j) > g.trunc) continue;
                for (int r = 0; r < d * d; ++r)
                    if (!resid.at(r, i * d + j).is_zero()) {
                        ok = false;
                        break;
                    }
            }
        add("cocycle", ok);
    }

    // Filtration respect.
    {
        bool ok = true;
        for (int i = 0; i < d && ok; ++i)
            for (int j = 0; j < d && ok; ++j) {
                int cap = std::min(g.level_of(i) + g.level_of(j) - 1, g.trunc);
                for (int k = g.dim_at(cap); k < d; ++k)
                    if (!g.bracket.at(k, i * d + j).is_zero()) ok = false;
            }
        add("bracket_filtration", ok);
        ok = true;
        for (int k = 0; k < d && ok; ++k) {
            int lv = g.level_of(k);
            for (int i = 0; i < d && ok; ++i)
                for (int j = 0; j < d && ok; ++j)
                    if (!g.cobracket.at(i * d + j, k).is_zero() &&
                        g.level_of(i) + g.level_of(j) > lv)
                        ok = false;
        }
        add("cobracket_filtration", ok);
    }

    // Canonicity: g_k = Ker delta^k, and delta^N = 0.
    {
        MatrixQ iterated = g.cobracket;  // delta^1
        bool ok = true;
        std::string detail;
        for (int k = 1; k <= g.trunc; ++k) {
            if (k == g.trunc) {
                if (!iterated.is_zero()) {
                    ok = false;
                    detail = "delta^N nonzero";
                }
                break;
            }
            Subspace ker = Subspace::row_span(iterated.null_space().transpose());
            MatrixQ prefix(g.dims[k - 1], d);
            for (int i = 0; i < g.dims[k - 1]; ++i) prefix.at(i, i) = Scalar(1);
            Subspace expected = Subspace::row_span(prefix);
            if (!(ker == expected)) {
                ok = false;
                detail = "Ker delta^" + std::to_string(k) + " is not g_" + std::to_string(k);
                break;
            }
            // delta^{k+1} = (delta on the first slot) o delta^k
            iterated = g.cobracket.kronecker(MatrixQ::identity(iterated.rows() / d)) * iterated;
        }
        add("canonical_filtration", ok, detail);
    }
    return rep;
}

namespace {

std::vector<int> block_sizes(const SetPartition& p) {
    std::vector<int> s;
    for (const auto& b : p.blocks) s.push_back(static_cast<int>(b.size()));
    return s;
}

std::vector<int> slot_dims_for(const LieBialgebra& g, const SetPartition& p) {
    std::vector<int> d;
    for (const auto& b : p.blocks) d.push_back(g.dim_at(static_cast<int>(b.size())));
    return d;
}

int prod(const std::vector<int>& v) {
    int r = 1;
    for (int x : v) r *= x;
    return r;
}

MatrixQ kron_id(const MatrixQ& op, int pre, int post) {
    return MatrixQ::identity(pre).kronecker(op).kronecker(MatrixQ::identity(post));
}

// Permutation moving slot q down to position p+1 (p < q), rest in order.
std::vector<int> move_to_perm(int k, int p, int q) {
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) {
        if (i < p + 1) perm[i] = i;
        else if (i == q) perm[i] = p + 1;
        else if (i < q) perm[i] = i + 1;
        else perm[i] = i;
    }
    return perm;
}

}  // namespace

DoubleRepDR lambda_build(const LieBialgebra& g, const FiniteIndexSet& ground) {
    if (static_cast<int>(ground.size()) > g.trunc)
        throw std::invalid_argument("lambda_build: |I| exceeds the truncation order");
    DoubleRepDR out = DoubleRepDR::zero(ground);
    const PartitionPoset& poset = *out.poset;
    for (int v = 0; v < poset.vertex_count(); ++v) {
        const SetPartition& part = poset.vertex(v);
        LabeledSpace ls;
        int dim = prod(slot_dims_for(g, part));
        ls.labels.resize(dim);
        for (int i = 0; i < dim; ++i)
            ls.labels[i] = part.str() + "#" + std::to_string(i);
        out.spaces[v] = std::move(ls);
    }
    for (size_t aid = 0; aid < poset.arrows().size(); ++aid) {
        const MergeArrow& arr = poset.arrows()[aid];
        const SetPartition& fine = poset.vertex(arr.fine);
        std::vector<int> sizes = block_sizes(fine);
        std::vector<int> fdims = slot_dims_for(g, fine);
        int k = fine.block_count();
        int a = sizes[arr.p], b = sizes[arr.q];
        // Koszul coefficient (-1)^q with 1-based q.
        Scalar sign(((arr.q + 1) % 2 == 0) ? 1 : -1);

        // Move slot q next to p, then merge / split in place.
        std::vector<int> perm = move_to_perm(k, arr.p, arr.q);
        MatrixQ p_move = slot_permutation_matrix(fdims, perm, false);
        std::vector<int> moved = fdims;
        {
            int dq = moved[arr.q];
            moved.erase(moved.begin() + arr.q);
            moved.insert(moved.begin() + arr.p + 1, dq);
        }
        int pre = 1, post = 1;
        for (int i = 0; i < arr.p; ++i) pre *= moved[i];
        for (int i = arr.p + 2; i < k; ++i) post *= moved[i];

        MatrixQ bc = g.bracket_component(a, b);
        out.down_ops[aid] = (kron_id(bc, pre, post) * p_move) * sign;

        MatrixQ cc = g.cobracket_component(a, b);
        // Inverse move: slot p+1 back up to position q.
        std::vector<int> perm_back(k);
        for (int i = 0; i < k; ++i) perm_back[perm[i]] = i;
        MatrixQ p_back = slot_permutation_matrix(moved, perm_back, false);
        out.up_ops[aid] = (p_back * kron_id(cc, pre, post)) * sign;
    }
    out.validate_shapes();
    return out;
}

RepMapDR lambda_equivariance(const LieBialgebra& g, const FiniteIndexSet& ground,
                             const Permutation& sigma) {
    DoubleRepDR rep = lambda_build(g, ground);
    const PartitionPoset& poset = *rep.poset;
    RepMapDR f;
    f.components.resize(poset.vertex_count());
    for (int v = 0; v < poset.vertex_count(); ++v) {
        const SetPartition& part = poset.vertex(v);
        std::vector<int> dims = slot_dims_for(g, part);
        std::vector<int> slots = slot_permutation(sigma, part);
        // Component maps V[part] -> V[sigma part], stored at the source vertex.
        f.components[v] = slot_permutation_matrix(dims, slots, true);
    }
    return f;
}

Surjection block_collapse(const std::vector<int>& sizes) {
    int n = 0;
    for (int s : sizes) {
        if (s < 1) throw std::invalid_argument("block_collapse: parts must be positive");
        n += s;
    }
    std::map<int, int> f;
    int label = 1, at = 1;
    for (int s : sizes) {
        for (int j = 0; j < s; ++j) f[at++] = label;
        ++label;
    }
    return Surjection::of(index_set(n), index_set(static_cast<int>(sizes.size())),
                          std::move(f));
}

ThetaIso theta_iso(const LieBialgebra& g, const Surjection& pi) {
    ThetaIso iso;
    iso.pi = pi;
    DoubleRepDR lam_j = lambda_build(g, pi.source);
    DoubleRepDR lam_i = lambda_build(g, pi.target);
    iso.pullback = shriek_pullback_dr(pi, lam_j);
    const PartitionPoset& poset_i = *lam_i.poset;

    iso.vertex_maps.resize(poset_i.vertex_count());
    iso.ambient_maps.resize(poset_i.vertex_count());
    for (int v = 0; v < poset_i.vertex_count(); ++v) {
        const SetPartition& alpha = poset_i.vertex(v);
        // Natural map: per-block filtration inclusion followed by the signed
        // reorder matching the canonical block order of the coarsening.
        int k = alpha.block_count();
        std::vector<int> tgt_dims_in_alpha_order(k);
        std::vector<int> preimage_min(k);
        MatrixQ incl = MatrixQ::identity(1);
        for (int t = 0; t < k; ++t) {
            int s = static_cast<int>(alpha.blocks[t].size());
            std::vector<int> pre;
            for (int i : alpha.blocks[t]) {
                auto f = pi.fiber(i);
                pre.insert(pre.end(), f.begin(), f.end());
            }
            int sp = static_cast<int>(pre.size());
            preimage_min[t] = *std::min_element(pre.begin(), pre.end());
            tgt_dims_in_alpha_order[t] = g.dim_at(sp);
            MatrixQ inc_t(g.dim_at(sp), g.dim_at(s));
            for (int i = 0; i < g.dim_at(s); ++i) inc_t.at(i, i) = Scalar(1);
            incl = incl.kronecker(inc_t);
        }
        std::vector<int> mins_sorted = preimage_min;
        std::sort(mins_sorted.begin(), mins_sorted.end());
        std::vector<int> rho(k);
        for (int t = 0; t < k; ++t)
            rho[t] = static_cast<int>(std::lower_bound(mins_sorted.begin(), mins_sorted.end(),
                                                       preimage_min[t]) -
                                      mins_sorted.begin());
        MatrixQ reorder = slot_permutation_matrix(tgt_dims_in_alpha_order, rho, true);
        iso.ambient_maps[v] = reorder * incl;

        auto coords = iso.pullback.embed[v].solve(iso.ambient_maps[v]);
        if (!coords) {
            iso.failure = "image not contained in the kernel at " + alpha.str();
            return iso;
        }
        iso.vertex_maps[v] = *coords;
        if (iso.pullback.rep.dim(v) != lam_i.dim(v) ||
            iso.vertex_maps[v].rank() != lam_i.dim(v)) {
            iso.failure = "not an isomorphism at " + alpha.str() + " (dims " +
                          std::to_string(iso.pullback.rep.dim(v)) + " vs " +
                          std::to_string(lam_i.dim(v)) + ")";
            return iso;
        }
    }
    RepMapDR as_map;
    as_map.components = iso.vertex_maps;
    if (!intertwines(lam_i, iso.pullback.rep, as_map)) {
        iso.failure = "theta does not intertwine the operators";
        return iso;
    }
    iso.verified = true;
    return iso;
}

FactorizationIso factorization_iso_dr(const LieBialgebra& g, const Surjection& pi) {
    FactorizationIso iso;
    iso.pi = pi;
    DoubleRepDR lam_j = lambda_build(g, pi.source);
    iso.restricted = open_restrict_dr(pi, lam_j);
    std::vector<DoubleRepDR> parts;
    for (int i : pi.target) {
        FiniteIndexSet fib = pi.fiber(i);
        std::sort(fib.begin(), fib.end());
        parts.push_back(lambda_build(g, fib));
    }
    DoubleRepDR ext = exterior_dr(pi, parts);
    iso.exterior = open_restrict_dr(pi, ext);

    const PartitionPoset& poset = *lam_j.poset;
    SetPartition fibers = pi.fiber_partition();
    iso.vertex_maps.resize(poset.vertex_count());
    for (int v = 0; v < poset.vertex_count(); ++v) {
        const SetPartition& gamma = poset.vertex(v);
        if (!gamma.refines(fibers)) {
            iso.vertex_maps[v] = MatrixQ(iso.exterior.dim(v), iso.restricted.dim(v));
            continue;
        }
        // Regroup global canonical slot order into fiber-grouped order.
        int k = gamma.block_count();
        std::vector<int> dims = slot_dims_for(g, gamma);
        std::vector<int> perm(k);
        {
            // Target position: fibers in target-label order, blocks within a
            // fiber by canonical order.
            std::vector<std::pair<int, int>> key(k);  // (fiber rank, block min)
            for (int t = 0; t < k; ++t) {
                int member = gamma.blocks[t].front();
                int fiber_rank = static_cast<int>(
                    std::find(pi.target.begin(), pi.target.end(), pi(member)) -
                    pi.target.begin());
                key[t] = {fiber_rank, member};
            }
            std::vector<int> order(k);
            for (int t = 0; t < k; ++t) order[t] = t;
            std::sort(order.begin(), order.end(), [&](int x, int y) { return key[x] < key[y]; });
            for (int pos = 0; pos < k; ++pos) perm[order[pos]] = pos;
        }
        iso.vertex_maps[v] = slot_permutation_matrix(dims, perm, true);
        if (iso.vertex_maps[v].rows() != iso.exterior.dim(v)) {
            iso.failure = "shape mismatch at " + gamma.str();
            return iso;
        }
    }
    RepMapDR as_map;
    as_map.components = iso.vertex_maps;
    if (!intertwines(iso.restricted, iso.exterior, as_map)) {
        iso.failure = "c does not intertwine the restricted operators";
        return iso;
    }
    iso.verified = true;
    return iso;
}

LambdaTower lambda_tower(const LieBialgebra& g, int n_max) {
    LambdaTower t;
    t.g = g;
    t.max_points = std::min(n_max, g.trunc);
    for (int n = 1; n <= t.max_points; ++n) {
        DoubleRepDR level = lambda_build(g, index_set(n));
        RelationReport rel = check_relations_dr(level);
        if (!rel.pass) {
            t.failure = "relations fail at n=" + std::to_string(n) + ": " + rel.summary();
            return t;
        }
        t.levels.push_back(std::move(level));
    }
    // Structure maps on a generating family.
    for (int n = 2; n <= t.max_points; ++n) {
        for (int m = 1; m < n; ++m) {
            ThetaIso th = theta_iso(g, Surjection::canonical_collapse(n, m));
            if (!th.verified) {
                t.failure = "theta fails for [" + std::to_string(n) + "]->>[" +
                            std::to_string(m) + "]: " + th.failure;
                return t;
            }
        }
        for (int i = 1; i < n; ++i) {
            FactorizationIso c = factorization_iso_dr(g, block_collapse({i, n - i}));
            if (!c.verified) {
                t.failure = "factorization iso fails for split (" + std::to_string(i) + "," +
                            std::to_string(n - i) + "): " + c.failure;
                return t;
            }
        }
        for (int i = 1; i < n; ++i) {
            Permutation sigma = Permutation::transposition(index_set(n), i, i + 1);
            RepMapDR f = lambda_equivariance(g, index_set(n), sigma);
            // Check the automorphism property: components conjugate the
            // operators onto the relabeled arrows.
            const DoubleRepDR& rep = t.levels[n - 1];
            const PartitionPoset& poset = *rep.poset;
            for (size_t aid = 0; aid < poset.arrows().size(); ++aid) {
                const MergeArrow& arr = poset.arrows()[aid];
                int vf = poset.index_of(act(sigma, poset.vertex(arr.fine)).image);
                int vc = poset.index_of(act(sigma, poset.vertex(arr.coarse)).image);
                int im = poset.arrow_between(vf, vc);
                if (im < 0 ||
                    !(f.components[arr.fine] * rep.up_ops[aid] -
                      rep.up_ops[im] * f.components[arr.coarse])
                         .is_zero() ||
                    !(f.components[arr.coarse] * rep.down_ops[aid] -
                      rep.down_ops[im] * f.components[arr.fine])
                         .is_zero()) {
                    t.failure = "equivariance fails at n=" + std::to_string(n);
                    return t;
                }
            }
        }
    }
    t.verified = true;
    return t;
}

namespace {

// Extraction of the structure maps of the reconstructed Lie bialgebra from a
// verified tower, in the flag-adapted global basis.
struct TowerExtraction {
    std::vector<int> dims;          // d_n = dim Phi_n
    std::vector<MatrixQ> eff;       // per n: change of basis on Phi_n (identity here)
};

}  // namespace

LieBialgebra phi_ran_reconstruct(const LambdaTower& t) {
    if (!t.verified) throw std::invalid_argument("phi_ran_reconstruct: tower not verified");
    int n_max = t.max_points;
    // Global dimensions from the vanishing-cycles spaces.
    std::vector<int> dims;
    for (int n = 1; n <= n_max; ++n) {
        const DoubleRepDR& level = t.levels[n - 1];
        int deep = level.poset->index_of(SetPartition::one_block(level.ground));
        dims.push_back(level.dim(deep));
    }
    for (size_t i = 1; i < dims.size(); ++i)
        if (dims[i] < dims[i - 1])
            throw std::runtime_error("phi_ran_reconstruct: vanishing spaces not nested");
    // Inclusions Phi_m -> Phi_n via theta along the canonical collapses;
    // verify they are the identity on leading coordinates (the towers built
    // here are flag adapted; a non-prefix inclusion means a broken tower).
    for (int n = 2; n <= n_max; ++n) {
        ThetaIso th = theta_iso(t.g, Surjection::canonical_collapse(n, n - 1));
        if (!th.verified)
            throw std::runtime_error("phi_ran_reconstruct: theta inclusion failed");
        int v = th.pullback.rep.poset->index_of(SetPartition::one_block(index_set(n - 1)));
        MatrixQ amb = th.ambient_maps[v];
        for (int i = 0; i < amb.rows(); ++i)
            for (int j = 0; j < amb.cols(); ++j)
                if (!(amb.at(i, j) == ((i == j) ? Scalar(1) : Scalar(0))))
                    throw std::runtime_error(
                        "phi_ran_reconstruct: non-prefix inclusion, basis not adapted");
    }

    int d = dims.back();
    int trunc = n_max;
    MatrixQ cobracket(d * d, d);
    MatrixQ bracket(d, d * d);
    auto level_of = [&](int idx) {
        for (int k = 1; k <= trunc; ++k)
            if (idx < dims[k - 1]) return k;
        return trunc;
    };

    // Cobracket: for a level-n basis vector, read the exact (a, b)-bidegree
    // parts from the A^+ operator into the two-block vertex of sizes (a, n-a).
    for (int n = 2; n <= n_max; ++n) {
        const DoubleRepDR& level = t.levels[n - 1];
        const PartitionPoset& poset = *level.poset;
        int deep = poset.index_of(SetPartition::one_block(level.ground));
        std::map<std::pair<int, int>, MatrixQ> ext;  // (i,j) -> matrix
        for (int i = 1; i < n; ++i) {
            std::vector<int> left(i), right(n - i);
            for (int x = 0; x < i; ++x) left[x] = x + 1;
            for (int x = 0; x < n - i; ++x) right[x] = i + x + 1;
            SetPartition beta = SetPartition::of({left, right});
            int bv = poset.index_of(beta);
            int aid = poset.arrow_between(bv, deep);
            ext.emplace(std::make_pair(i, n - i), level.up_ops[aid]);
        }
        for (int col = (n >= 2 ? dims[n - 2] : 0); col < dims[n - 1]; ++col) {
            // Exact level-n basis vectors only.
            for (int a = 1; a < n; ++a) {
                int b_hi = n - a;
                const MatrixQ& T = ext.at({a, b_hi});
                int da = dims[a - 1], db = dims[b_hi - 1];
                for (int r = 0; r < da; ++r)
                    for (int s = 0; s < db; ++s) {
                        if (level_of(r) != a) continue;  // exact bidegree row
                        const Scalar& c = T.at(r * db + s, col);
                        if (!c.is_zero()) cobracket.at(r * d + s, col) += c;
                    }
            }
        }
    }

    // Bracket: read the (a, b) component from the A^- operator at level a+b.
    for (int a = 1; a <= n_max; ++a)
        for (int b = 1; a + b <= n_max; ++b) {
            int n = a + b;
            const DoubleRepDR& level = t.levels[n - 1];
            const PartitionPoset& poset = *level.poset;
            int deep = poset.index_of(SetPartition::one_block(level.ground));
            std::vector<int> left(a), right(b);
            for (int x = 0; x < a; ++x) left[x] = x + 1;
            for (int x = 0; x < b; ++x) right[x] = a + x + 1;
            int bv = poset.index_of(SetPartition::of({left, right}));
            int aid = poset.arrow_between(bv, deep);
            const MatrixQ& dn = level.down_ops[aid];
            int da = dims[a - 1], db = dims[b - 1];
            for (int i = 0; i < da; ++i) {
                if (level_of(i) != a) continue;
                for (int j = 0; j < db; ++j) {
                    if (level_of(j) != b) continue;
                    for (int k = 0; k < dims[n - 1]; ++k) {
                        const Scalar& c = dn.at(k, i * db + j);
                        if (!c.is_zero()) bracket.at(k, i * d + j) += c;
                    }
                }
            }
        }

    LieBialgebra out;
    out.trunc = trunc;
    out.dims = dims;
    out.bracket = std::move(bracket);
    out.cobracket = std::move(cobracket);
    AxiomReport rep = check_lie_axioms(out);
    if (!rep.pass)
        throw std::runtime_error("phi_ran_reconstruct: axioms fail on output: " +
                                 rep.summary());
    return out;
}

LieBialgebra lie_ab1(int trunc) {
    LieBialgebra g;
    g.trunc = trunc;
    g.dims.assign(trunc, 1);
    g.bracket = MatrixQ(1, 1);
    g.cobracket = MatrixQ(1, 1);
    return g;
}

LieBialgebra lie_hd3() {
    LieBialgebra g;
    g.trunc = 3;
    g.dims = {2, 3, 3};
    int d = 3;
    g.bracket = MatrixQ(d, d * d);
    g.cobracket = MatrixQ(d * d, d);
    // delta(zeta) = xi (x) eta - eta (x) xi   with basis (xi, eta, zeta).
    g.cobracket.at(0 * d + 1, 2) = Scalar(1);
    g.cobracket.at(1 * d + 0, 2) = Scalar(-1);
    return g;
}

LieBialgebra lie_heis3() {
    LieBialgebra g;
    g.trunc = 3;
    g.dims = {3, 3, 3};
    int d = 3;
    g.bracket = MatrixQ(d, d * d);
    g.cobracket = MatrixQ(d * d, d);
    // [xi, eta] = zeta.
    g.bracket.at(2, 0 * d + 1) = Scalar(1);
    g.bracket.at(2, 1 * d + 0) = Scalar(-1);
    return g;
}

namespace {

long rand_small(std::mt19937_64& rng, long lo, long hi) {
    return lo + static_cast<long>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

LieBialgebra random_liebialg(const std::vector<int>& dims, uint64_t seed) {
    if (dims.empty()) throw std::invalid_argument("random lie bialgebra: empty dims");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    int trunc = static_cast<int>(dims.size());
    int d = dims.back();

    for (int attempt = 0; attempt < 64; ++attempt) {
        LieBialgebra g;
        g.trunc = trunc;
        g.dims = dims;
        g.bracket = MatrixQ(d, d * d);
        g.cobracket = MatrixQ(d * d, d);

        auto level_of = [&](int idx) {
            for (int k = 1; k <= trunc; ++k)
                if (idx < dims[k - 1]) return k;
            return trunc;
        };

        // Bracket on g_1 x g_1, two-step: the image lies in the last g_1
        // direction, which is central, so Jacobi holds identically.
        int d1 = dims[0];
        int zslot = d1 - 1;
        if (d1 >= 3) {
            for (int i = 0; i < zslot; ++i)
                for (int j = i + 1; j < zslot; ++j) {
                    Scalar c(rand_small(rng, -1, 1));
                    g.bracket.at(zslot, i * d + j) += c;
                    g.bracket.at(zslot, j * d + i) -= c;
                }
        }

        // Cobracket level by level.  Level-2 values are wedges with the
        // central direction, which makes the cocycle condition against the
        // two-step bracket hold identically; higher levels sample the full
        // filtration window and rely on the rejection loop for coJacobi.
        for (int col = dims[0]; col < d; ++col) {
            int lv = level_of(col);
            bool nonzero = false;
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j) {
                    if (level_of(i) + level_of(j) > lv) continue;
                    if (lv == 2 && j != zslot) continue;
                    Scalar c(rand_small(rng, -1, 1));
                    if (!c.is_zero()) nonzero = true;
                    g.cobracket.at(i * d + j, col) += c;
                    g.cobracket.at(j * d + i, col) -= c;
                }
            if (!nonzero && lv == 2 && zslot >= 1) {
                g.cobracket.at(0 * d + zslot, col) = Scalar(1);
                g.cobracket.at(zslot * d + 0, col) = Scalar(-1);
            }
        }

        AxiomReport rep = check_lie_axioms(g);
        if (rep.pass) return g;
    }
    throw std::runtime_error("random lie bialgebra: no admissible instance found");
}

}  // namespace

LieBialgebra make_example_liebialg(LieExampleKind kind, std::vector<int> dims, int trunc,
                                   uint64_t seed) {
    switch (kind) {
        case LieExampleKind::Abelian: {
            int d = dims.empty() ? 1 : dims[0];
            int n = trunc > 0 ? trunc : 3;
            LieBialgebra g;
            g.trunc = n;
            g.dims.assign(n, d);
            g.bracket = MatrixQ(d, d * d);
            g.cobracket = MatrixQ(d * d, d);
            return g;
        }
        case LieExampleKind::HeisenbergDual:
            return lie_hd3();
        case LieExampleKind::Heisenberg:
            return lie_heis3();
        case LieExampleKind::Random:
            return random_liebialg(dims, seed);
    }
    throw std::invalid_argument("make_example_liebialg: unknown kind");
}

}  // namespace ranq
