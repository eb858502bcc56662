#include "ranq/betti.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace ranq {

int DoubleRepB::total_dim() const {
    int t = 0;
    for (const auto& s : spaces) t += s.dim();
    return t;
}

DoubleRepB DoubleRepB::zero(const FiniteIndexSet& ground) {
    DoubleRepB m;
    m.ground = ground;
    m.poset = face_poset(ground);
    m.spaces.resize(m.poset->face_count());
    for (size_t a = 0; a < m.poset->arrows().size(); ++a) {
        m.up_ops.emplace_back(0, 0);
        m.down_ops.emplace_back(0, 0);
    }
    return m;
}

void DoubleRepB::validate_shapes() const {
    if (!poset) throw std::invalid_argument("DoubleRepB: missing poset");
    if (static_cast<int>(spaces.size()) != poset->face_count())
        throw std::invalid_argument("DoubleRepB: face/space count mismatch");
    if (up_ops.size() != poset->arrows().size() || down_ops.size() != poset->arrows().size())
        throw std::invalid_argument("DoubleRepB: arrow/operator count mismatch");
    for (size_t a = 0; a < up_ops.size(); ++a) {
        const FaceArrow& arr = poset->arrows()[a];
        if (up_ops[a].rows() != spaces[arr.fine].dim() ||
            up_ops[a].cols() != spaces[arr.coarse].dim())
            throw std::invalid_argument("DoubleRepB: B^+ shape mismatch at arrow " +
                                        std::to_string(a));
        if (down_ops[a].rows() != spaces[arr.coarse].dim() ||
            down_ops[a].cols() != spaces[arr.fine].dim())
            throw std::invalid_argument("DoubleRepB: B^- shape mismatch at arrow " +
                                        std::to_string(a));
    }
}

std::string BettiRelationReport::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " (" << relations.entries.size() << " relation checks, "
       << monodromy_dets.size() << " walls, monodromy "
       << (monodromy_invertible ? "invertible" : "SINGULAR") << ")";
    return os.str();
}

namespace {

MatrixQ up_composite_b(const DoubleRepB& m, const std::vector<int>& vertices) {
    MatrixQ acc = MatrixQ::identity(m.dim(vertices.front()));
    for (size_t i = 0; i + 1 < vertices.size(); ++i) {
        int id = m.poset->arrow_between(vertices[i + 1], vertices[i]);
        if (id < 0) throw std::logic_error("up_composite_b: not an arrow");
        acc = m.up_ops[id] * acc;
    }
    return acc;
}

}  // namespace

BettiRelationReport check_relations_betti(const DoubleRepB& b) {
    b.validate_shapes();
    BettiRelationReport rep;
    const FacePoset& poset = *b.poset;
    auto add = [&rep](const std::string& fam, const std::string& loc, MatrixQ residual) {
        RelationEntry e;
        e.family = fam;
        e.location = loc;
        e.pass = residual.is_zero();
        e.residual = std::move(residual);
        if (!e.pass) {
            rep.relations.pass = false;
            rep.pass = false;
        }
        rep.relations.entries.push_back(std::move(e));
    };

    // R1/R2: all composites through a length-2 interval agree.
    std::map<std::pair<int, int>, std::vector<int>> intervals;
    for (int v = 0; v < poset.face_count(); ++v)
        for (int a1 : poset.arrows_from_fine(v)) {
            int mid = poset.arrows()[a1].coarse;
            for (int a2 : poset.arrows_from_fine(mid))
                intervals[{v, poset.arrows()[a2].coarse}].push_back(mid);
        }
    for (auto& [key, mids] : intervals) {
        std::sort(mids.begin(), mids.end());
        mids.erase(std::unique(mids.begin(), mids.end()), mids.end());
        if (mids.size() < 2) continue;
        std::string loc = poset.face(key.first).str() + " => " + poset.face(key.second).str();
        auto dn = [&](int mid) {
            int a1 = poset.arrow_between(key.first, mid);
            int a2 = poset.arrow_between(mid, key.second);
            return b.down_ops[a2] * b.down_ops[a1];
        };
        auto up = [&](int mid) {
            int a1 = poset.arrow_between(key.first, mid);
            int a2 = poset.arrow_between(mid, key.second);
            return b.up_ops[a1] * b.up_ops[a2];
        };
        for (size_t i = 1; i < mids.size(); ++i) {
            add("R1", loc, dn(mids[i]) - dn(mids[0]));
            add("R2", loc, up(mids[i]) - up(mids[0]));
        }
    }

    // R3: disjoint mixed squares commute.
    for (int v = 0; v < poset.face_count(); ++v) {
        const auto& outgoing = poset.arrows_from_fine(v);
        for (int a1 : outgoing)
            for (int a2 : outgoing) {
                int p1 = poset.arrows()[a1].pos, p2 = poset.arrows()[a2].pos;
                if (std::abs(p1 - p2) < 2) continue;
                int g1 = poset.arrows()[a1].coarse;
                int g2 = poset.arrows()[a2].coarse;
                // In g1 the second merge sits at p2 shifted down when p2 > p1.
                int p2_in_g1 = p2 > p1 ? p2 - 1 : p2;
                int p1_in_g2 = p1 > p2 ? p1 - 1 : p1;
                int b1 = -1, b2 = -1;
                for (int e : poset.arrows_from_fine(g1))
                    if (poset.arrows()[e].pos == p2_in_g1) b1 = e;
                for (int e : poset.arrows_from_fine(g2))
                    if (poset.arrows()[e].pos == p1_in_g2) b2 = e;
                if (b1 < 0 || b2 < 0) continue;
                int w = poset.arrows()[b1].coarse;
                if (poset.arrows()[b2].coarse != w) continue;
                MatrixQ via_fine = b.down_ops[a2] * b.up_ops[a1];
                MatrixQ via_coarse = b.up_ops[b2] * b.down_ops[b1];
                add("R3",
                    poset.face(g1).str() + " -> " + poset.face(g2).str() + " via " +
                        poset.face(v).str() + " / " + poset.face(w).str(),
                    via_fine - via_coarse);
            }
    }

    // R4: invertible monodromy per wall.
    for (size_t a = 0; a < poset.arrows().size(); ++a) {
        const FaceArrow& arr = poset.arrows()[a];
        MatrixQ m1 = MatrixQ::identity(b.dim(arr.coarse)) + b.down_ops[a] * b.up_ops[a];
        MatrixQ m2 = MatrixQ::identity(b.dim(arr.fine)) + b.up_ops[a] * b.down_ops[a];
        Scalar d1 = m1.det();
        Scalar d2 = m2.det();
        std::string loc = poset.face(arr.fine).str() + " -> " + poset.face(arr.coarse).str();
        rep.monodromy_dets.push_back({loc, d1});
        if (d1.is_zero() || d2.is_zero()) {
            rep.monodromy_invertible = false;
            rep.pass = false;
        }
    }
    return rep;
}

HyperbolicStalk hyperbolic_functor(const DoubleRepB& b) {
    HyperbolicStalk h;
    h.face = b.poset->index_of(
        OrderedSetPartition::of({std::vector<int>(b.ground.begin(), b.ground.end())}));
    h.space = b.spaces[h.face];
    return h;
}

DoubleRepB pushforward_betti(const Surjection& pi, const DoubleRepB& m) {
    if (m.ground != pi.target)
        throw std::invalid_argument("pushforward_betti: rep not over the target of pi");
    DoubleRepB out = DoubleRepB::zero(pi.source);
    const FacePoset& src = *m.poset;
    const FacePoset& dst = *out.poset;
    std::vector<int> image(src.face_count());
    for (int v = 0; v < src.face_count(); ++v) {
        image[v] = dst.index_of(induced_coarsening(pi, src.face(v)));
        out.spaces[image[v]] = m.spaces[v];
    }
    for (size_t a = 0; a < src.arrows().size(); ++a) {
        const FaceArrow& arr = src.arrows()[a];
        int id = dst.arrow_between(image[arr.fine], image[arr.coarse]);
        if (id < 0) throw std::logic_error("pushforward_betti: image arrow missing");
        out.up_ops[id] = m.up_ops[a];
        out.down_ops[id] = m.down_ops[a];
    }
    for (size_t a = 0; a < dst.arrows().size(); ++a) {
        const FaceArrow& arr = dst.arrows()[a];
        if (out.up_ops[a].rows() == 0 && out.up_ops[a].cols() == 0) {
            out.up_ops[a] = MatrixQ(out.dim(arr.fine), out.dim(arr.coarse));
            out.down_ops[a] = MatrixQ(out.dim(arr.coarse), out.dim(arr.fine));
        }
    }
    out.validate_shapes();
    return out;
}

PullbackB shriek_pullback_betti(const Surjection& pi, const DoubleRepB& m) {
    if (m.ground != pi.source)
        throw std::invalid_argument("shriek_pullback_betti: rep not over the source of pi");
    PullbackB res;
    res.rep = DoubleRepB::zero(pi.target);
    DoubleRepB& out = res.rep;
    const FacePoset& src = *m.poset;
    const FacePoset& dst = *out.poset;
    res.embed.resize(dst.face_count());
    res.source_face.resize(dst.face_count(), -1);
    for (int v = 0; v < dst.face_count(); ++v) {
        const OrderedSetPartition& alpha = dst.face(v);
        int sv = src.index_of(induced_coarsening(pi, alpha));
        res.source_face[v] = sv;
        if (pi.is_bijection()) {
            res.embed[v] = MatrixQ::identity(m.dim(sv));
            out.spaces[v] = m.spaces[sv];
            continue;
        }
        std::vector<MatrixQ> comps;
        for (const Path& path : admissible_face_paths(src, pi, alpha))
            comps.push_back(up_composite_b(m, path.vertices));
        Subspace ker = kernel_intersection(comps, m.dim(sv));
        res.embed[v] = ker.basis().transpose();
        LabeledSpace ls;
        for (int i = 0; i < ker.dim(); ++i)
            ls.labels.push_back("ker[" + alpha.str() + "]#" + std::to_string(i));
        out.spaces[v] = std::move(ls);
    }
    for (size_t a = 0; a < dst.arrows().size(); ++a) {
        const FaceArrow& arr = dst.arrows()[a];
        int sid = src.arrow_between(res.source_face[arr.fine], res.source_face[arr.coarse]);
        if (sid < 0) throw std::logic_error("shriek_pullback_betti: induced arrow missing");
        auto induce = [&](const MatrixQ& op, const MatrixQ& dom_embed, const MatrixQ& cod_embed,
                          const char* tag) {
            auto x = cod_embed.solve(op * dom_embed);
            if (!x)
                throw std::runtime_error(
                    std::string("shriek_pullback_betti: kernels not preserved (") + tag + ")");
            return *x;
        };
        out.up_ops[a] = induce(m.up_ops[sid], res.embed[arr.coarse], res.embed[arr.fine], "B+");
        out.down_ops[a] =
            induce(m.down_ops[sid], res.embed[arr.fine], res.embed[arr.coarse], "B-");
    }
    out.validate_shapes();
    return res;
}

DoubleRepB open_restrict_betti(const Surjection& pi, const DoubleRepB& m) {
    if (m.ground != pi.source)
        throw std::invalid_argument("open_restrict_betti: rep not over the source of pi");
    DoubleRepB out = DoubleRepB::zero(pi.source);
    const FacePoset& poset = *m.poset;
    SetPartition fibers = pi.fiber_partition();
    std::vector<bool> keep(poset.face_count(), false);
    for (int v = 0; v < poset.face_count(); ++v)
        keep[v] = poset.face(v).forget_order().refines(fibers);
    for (int v = 0; v < poset.face_count(); ++v)
        if (keep[v]) out.spaces[v] = m.spaces[v];
    for (size_t a = 0; a < poset.arrows().size(); ++a) {
        const FaceArrow& arr = poset.arrows()[a];
        if (keep[arr.fine] && keep[arr.coarse]) {
            out.up_ops[a] = m.up_ops[a];
            out.down_ops[a] = m.down_ops[a];
        } else {
            out.up_ops[a] = MatrixQ(out.dim(arr.fine), out.dim(arr.coarse));
            out.down_ops[a] = MatrixQ(out.dim(arr.coarse), out.dim(arr.fine));
        }
    }
    out.validate_shapes();
    return out;
}

DoubleRepB exterior_betti(const Surjection& pi, const std::vector<DoubleRepB>& parts) {
    if (parts.size() != pi.target.size())
        throw std::invalid_argument("exterior_betti: one part per target label required");
    for (size_t i = 0; i < parts.size(); ++i) {
        FiniteIndexSet fib = pi.fiber(pi.target[i]);
        std::sort(fib.begin(), fib.end());
        if (parts[i].ground != fib)
            throw std::invalid_argument("exterior_betti: part not over its fiber");
    }
    DoubleRepB out = DoubleRepB::zero(pi.source);
    const FacePoset& poset = *out.poset;
    SetPartition fibers = pi.fiber_partition();
    int nparts = static_cast<int>(parts.size());

    struct Split {
        bool ok = false;
        std::vector<int> local;
    };
    std::vector<Split> split(poset.face_count());
    auto fiber_rank = [&](int label) {
        return static_cast<int>(std::find(pi.target.begin(), pi.target.end(), pi(label)) -
                                pi.target.begin());
    };
    for (int v = 0; v < poset.face_count(); ++v) {
        const OrderedSetPartition& rho = poset.face(v);
        if (!rho.forget_order().refines(fibers)) continue;
        Split s;
        s.ok = true;
        for (int i = 0; i < nparts; ++i) {
            std::vector<std::vector<int>> blocks;
            for (const auto& blk : rho.blocks)
                if (fiber_rank(blk.front()) == i) blocks.push_back(blk);
            s.local.push_back(parts[i].poset->index_of(OrderedSetPartition::of(blocks)));
        }
        split[v] = std::move(s);
        int dim = 1;
        for (int i = 0; i < nparts; ++i) dim *= parts[i].dim(split[v].local[i]);
        LabeledSpace ls;
        ls.labels.resize(dim);
        for (int i = 0; i < dim; ++i) ls.labels[i] = "ext#" + std::to_string(i);
        out.spaces[v] = std::move(ls);
    }
    for (size_t a = 0; a < poset.arrows().size(); ++a) {
        const FaceArrow& arr = poset.arrows()[a];
        out.up_ops[a] = MatrixQ(out.dim(arr.fine), out.dim(arr.coarse));
        out.down_ops[a] = MatrixQ(out.dim(arr.coarse), out.dim(arr.fine));
        if (!split[arr.fine].ok || !split[arr.coarse].ok) continue;
        const OrderedSetPartition& fine = poset.face(arr.fine);
        int part = fiber_rank(fine.blocks[arr.pos].front());
        if (fiber_rank(fine.blocks[arr.pos + 1].front()) != part)
            throw std::logic_error("exterior_betti: cross-fiber merge with factorizing coarse");
        int lf = split[arr.fine].local[part];
        int lc = split[arr.coarse].local[part];
        int lid = parts[part].poset->arrow_between(lf, lc);
        if (lid < 0) throw std::logic_error("exterior_betti: local arrow missing");
        auto chain = [&](int face_id, int acting, const MatrixQ& op) {
            MatrixQ acc = MatrixQ::identity(1);
            for (int i = 0; i < nparts; ++i) {
                if (i == acting) acc = acc.kronecker(op);
                else acc = acc.kronecker(MatrixQ::identity(parts[i].dim(split[face_id].local[i])));
            }
            return acc;
        };
        out.up_ops[a] = chain(arr.fine, part, parts[part].up_ops[lid]);
        out.down_ops[a] = chain(arr.coarse, part, parts[part].down_ops[lid]);
    }
    out.validate_shapes();
    return out;
}

bool intertwines_betti(const DoubleRepB& m, const DoubleRepB& n, const RepMapB& f) {
    const FacePoset& poset = *m.poset;
    for (size_t a = 0; a < poset.arrows().size(); ++a) {
        const FaceArrow& arr = poset.arrows()[a];
        if (!(f.components[arr.fine] * m.up_ops[a] - n.up_ops[a] * f.components[arr.coarse])
                 .is_zero())
            return false;
        if (!(f.components[arr.coarse] * m.down_ops[a] - n.down_ops[a] * f.components[arr.fine])
                 .is_zero())
            return false;
    }
    return true;
}

std::vector<RepMapB> hom_space_betti(const DoubleRepB& m, const DoubleRepB& n) {
    if (m.ground != n.ground)
        throw std::invalid_argument("hom_space_betti: reps over different sets");
    const FacePoset& poset = *m.poset;
    std::vector<int> offsets;
    int total = 0;
    for (int v = 0; v < poset.face_count(); ++v) {
        offsets.push_back(total);
        total += m.dim(v) * n.dim(v);
    }
    std::vector<std::vector<std::pair<int, Scalar>>> rows;
    auto emit = [&](int vx, int nrows_x, const MatrixQ& right, const MatrixQ& left, int vy) {
        int out_cols = right.cols();
        for (int i = 0; i < nrows_x; ++i)
            for (int j = 0; j < out_cols; ++j) {
                std::vector<std::pair<int, Scalar>> row;
                for (int k = 0; k < right.rows(); ++k)
                    if (!right.at(k, j).is_zero())
                        row.push_back({offsets[vx] + i * right.rows() + k, right.at(k, j)});
                for (int k = 0; k < left.cols(); ++k)
                    if (!left.at(i, k).is_zero())
                        row.push_back({offsets[vy] + k * out_cols + j, -left.at(i, k)});
                if (!row.empty()) rows.push_back(std::move(row));
            }
    };
    for (size_t a = 0; a < poset.arrows().size(); ++a) {
        const FaceArrow& arr = poset.arrows()[a];
        emit(arr.fine, n.dim(arr.fine), m.up_ops[a], n.up_ops[a], arr.coarse);
        emit(arr.coarse, n.dim(arr.coarse), m.down_ops[a], n.down_ops[a], arr.fine);
    }
    MatrixQ sys(static_cast<int>(rows.size()), total);
    for (size_t r = 0; r < rows.size(); ++r)
        for (const auto& [c, val] : rows[r]) sys.at(static_cast<int>(r), c) += val;
    MatrixQ ns = total == 0 ? MatrixQ(0, 0) : sys.null_space();
    std::vector<RepMapB> basis;
    for (int k = 0; k < ns.cols(); ++k) {
        RepMapB f;
        for (int v = 0; v < poset.face_count(); ++v) {
            MatrixQ comp(n.dim(v), m.dim(v));
            for (int i = 0; i < n.dim(v); ++i)
                for (int j = 0; j < m.dim(v); ++j)
                    comp.at(i, j) = ns.at(offsets[v] + i * m.dim(v) + j, k);
            f.components.push_back(std::move(comp));
        }
        if (!intertwines_betti(m, n, f))
            throw std::logic_error("hom_space_betti: solver inconsistency");
        basis.push_back(std::move(f));
    }
    return basis;
}

BettiAdjunctionReport adjunction_check_betti(const Surjection& pi, const DoubleRepB& m,
                                             const DoubleRepB& n) {
    BettiAdjunctionReport rep;
    DoubleRepB push = pushforward_betti(pi, m);
    PullbackB pull = shriek_pullback_betti(pi, n);
    rep.dim_hom_push = static_cast<int>(hom_space_betti(push, n).size());
    rep.dim_hom_pull = static_cast<int>(hom_space_betti(m, pull.rep).size());
    rep.dims_equal = rep.dim_hom_push == rep.dim_hom_pull;
    rep.pass = rep.dims_equal;
    return rep;
}

std::string dump_json(const DoubleRepB& m) {
    std::ostringstream os;
    const FacePoset& poset = *m.poset;
    os << "{\"ground\":[";
    for (size_t i = 0; i < m.ground.size(); ++i) os << (i ? "," : "") << m.ground[i];
    os << "],\"spaces\":{";
    for (int v = 0; v < poset.face_count(); ++v) {
        if (v) os << ",";
        os << "\"" << poset.face(v).str() << "\":" << m.dim(v);
    }
    os << "},\"up\":{";
    auto mat_json = [](const MatrixQ& mat) {
        std::ostringstream ms;
        ms << "[";
        for (int i = 0; i < mat.rows(); ++i) {
            if (i) ms << ",";
            ms << "[";
            for (int j = 0; j < mat.cols(); ++j) {
                if (j) ms << ",";
                ms << "\"" << mat.at(i, j).str() << "\"";
            }
            ms << "]";
        }
        ms << "]";
        return ms.str();
    };
    bool first = true;
    for (size_t a = 0; a < poset.arrows().size(); ++a) {
        const FaceArrow& arr = poset.arrows()[a];
        if (!first) os << ",";
        first = false;
        os << "\"" << poset.face(arr.coarse).str() << "=>" << poset.face(arr.fine).str()
           << "\":" << mat_json(m.up_ops[a]);
    }
    os << "},\"down\":{";
    first = true;
    for (size_t a = 0; a < poset.arrows().size(); ++a) {
        const FaceArrow& arr = poset.arrows()[a];
        if (!first) os << ",";
        first = false;
        os << "\"" << poset.face(arr.fine).str() << "=>" << poset.face(arr.coarse).str()
           << "\":" << mat_json(m.down_ops[a]);
    }
    os << "}}";
    return os.str();
}

}  // namespace ranq
