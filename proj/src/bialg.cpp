#include "ranq/bialg.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ranq {

int Bialgebra::dim_at(int level) const {
    if (level < 1) return 0;
    if (level > trunc) level = trunc;
    return dims[level - 1];
}

int Bialgebra::level_of(int basis_index) const {
    for (int k = 1; k <= trunc; ++k)
        if (basis_index < dims[k - 1]) return k;
    throw std::invalid_argument("Bialgebra: basis index out of range");
}

MatrixQ Bialgebra::product_component(int a, int b) const {
    if (a + b > trunc)
        throw std::invalid_argument("product_component: a+b beyond truncation");
    int d = dim(), da = dim_at(a), db = dim_at(b), dn = dim_at(a + b);
    MatrixQ m(dn, da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < db; ++j)
            for (int k = 0; k < d; ++k) {
                const Scalar& c = product.at(k, i * d + j);
                if (c.is_zero()) continue;
                if (k >= dn)
                    throw std::invalid_argument(
                        "product_component: product does not respect the filtration");
                m.at(k, i * db + j) = c;
            }
    return m;
}

MatrixQ Bialgebra::coproduct_component(int a, int b) const {
    if (a + b > trunc)
        throw std::invalid_argument("coproduct_component: a+b beyond truncation");
    int d = dim(), da = dim_at(a), db = dim_at(b), dn = dim_at(a + b);
    MatrixQ m(da * db, dn);
    for (int k = 0; k < dn; ++k)
        for (int i = 0; i < da; ++i)
            for (int j = 0; j < db; ++j) m.at(i * db + j, k) = coproduct.at(i * d + j, k);
    return m;
}

bool Bialgebra::is_commutative() const {
    int d = dim();
    return (product - product * slot_permutation_matrix({d, d}, {1, 0}, false)).is_zero();
}

bool Bialgebra::is_cocommutative() const {
    int d = dim();
    return (coproduct - slot_permutation_matrix({d, d}, {1, 0}, false) * coproduct).is_zero();
}

AxiomReport check_bialg_axioms(const Bialgebra& a) {
    AxiomReport rep;
    auto add = [&rep](const std::string& name, bool pass, const std::string& detail = "") {
        rep.checks.push_back({name, pass, detail});
        if (!pass) rep.pass = false;
    };
    int d = a.dim();
    if (static_cast<int>(a.dims.size()) != a.trunc || a.trunc < 1) {
        add("shape", false, "dims/truncation mismatch");
        return rep;
    }
    if (a.product.rows() != d || a.product.cols() != d * d || a.coproduct.rows() != d * d ||
        a.coproduct.cols() != d) {
        add("shape", false, "structure constant shapes");
        return rep;
    }
    MatrixQ id_d = MatrixQ::identity(d);
    MatrixQ flip = slot_permutation_matrix({d, d}, {1, 0}, false);

    add("associativity",
        (a.product * a.product.kronecker(id_d) - a.product * id_d.kronecker(a.product))
            .is_zero());
    add("coassociativity",
        (a.coproduct.kronecker(id_d) * a.coproduct - id_d.kronecker(a.coproduct) * a.coproduct)
            .is_zero());

    // Truncation window: products with level(x)+level(y) > N vanish.
    {
        bool ok = true;
        for (int i = 0; i < d && ok; ++i)
            for (int j = 0; j < d && ok; ++j) {
                if (a.level_of(i) + a.level_of(j) <= a.trunc) continue;
                for (int k = 0; k < d; ++k)
                    if (!a.product.at(k, i * d + j).is_zero()) {
                        ok = false;
                        break;
                    }
            }
        add("truncation_window", ok);
    }

    // Reduced compatibility: Delta-bar(ab) = a(x)b + b(x)a
    //   + (Db a)(1(x)b + b(x)1) + (1(x)a + a(x)1)(Db b) + (Db a)(Db b),
    // checked inside the truncation window.
    {
        MatrixQ swap23 = slot_permutation_matrix({d, d, d}, {0, 2, 1}, false);
        MatrixQ swap12 = slot_permutation_matrix({d, d, d}, {1, 0, 2}, false);
        MatrixQ t3a = id_d.kronecker(a.product) * a.coproduct.kronecker(id_d);
        MatrixQ t3b = a.product.kronecker(id_d) * swap23 * a.coproduct.kronecker(id_d);
        MatrixQ t4a = id_d.kronecker(a.product) * swap12 * id_d.kronecker(a.coproduct);
        MatrixQ t4b = a.product.kronecker(id_d) * id_d.kronecker(a.coproduct);
        MatrixQ mid = slot_permutation_matrix({d, d, d, d}, {0, 2, 1, 3}, false);
        MatrixQ t5 =
            a.product.kronecker(a.product) * mid * a.coproduct.kronecker(a.coproduct);
        MatrixQ rhs = MatrixQ::identity(d * d) + flip + t3a + t3b + t4a + t4b + t5;
        MatrixQ resid = a.coproduct * a.product - rhs;
        bool ok = true;
        for (int i = 0; i < d && ok; ++i)
            for (int j = 0; j < d && ok; ++j) {
                if (a.level_of(i) + a.level_of(j) > a.trunc) continue;
                for (int r = 0; r < d * d; ++r)
                    if (!resid.at(r, i * d + j).is_zero()) {
                        ok = false;
                        break;
                    }
            }
        add("compatibility", ok);
    }

    // Filtration respect.
    {
        bool ok = true;
        for (int i = 0; i < d && ok; ++i)
            for (int j = 0; j < d && ok; ++j) {
                int cap = std::min(a.level_of(i) + a.level_of(j), a.trunc);
                for (int k = a.dim_at(cap); k < d; ++k)
                    if (!a.product.at(k, i * d + j).is_zero()) ok = false;
            }
        add("product_filtration", ok);
        ok = true;
        for (int k = 0; k < d && ok; ++k) {
            int lv = a.level_of(k);
            for (int i = 0; i < d && ok; ++i)
                for (int j = 0; j < d && ok; ++j)
                    if (!a.coproduct.at(i * d + j, k).is_zero() &&
                        a.level_of(i) + a.level_of(j) > lv)
                        ok = false;
        }
        add("coproduct_filtration", ok);
    }

    // Canonicity: A_k = Ker Delta-bar^k and Delta-bar^N = 0.
    {
        MatrixQ iterated = a.coproduct;
        bool ok = true;
        std::string detail;
        for (int k = 1; k <= a.trunc; ++k) {
            if (k == a.trunc) {
                if (!iterated.is_zero()) {
                    ok = false;
                    detail = "Delta-bar^N nonzero";
                }
                break;
            }
            Subspace ker = Subspace::row_span(iterated.null_space().transpose());
            MatrixQ prefix(a.dims[k - 1], d);
            for (int i = 0; i < a.dims[k - 1]; ++i) prefix.at(i, i) = Scalar(1);
            if (!(ker == Subspace::row_span(prefix))) {
                ok = false;
                detail = "Ker Delta-bar^" + std::to_string(k) + " is not A_" + std::to_string(k);
                break;
            }
            iterated = a.coproduct.kronecker(MatrixQ::identity(iterated.rows() / d)) * iterated;
        }
        add("canonical_filtration", ok, detail);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Examples.

namespace {

Rat binomial(int n, int k) {
    Rat r(1);
    for (int i = 0; i < k; ++i) r = r * Rat(n - i) / Rat(i + 1);
    return r;
}

}  // namespace

Bialgebra bialg_polynomial(int trunc) {
    Bialgebra a;
    a.trunc = trunc;
    a.dims.resize(trunc);
    for (int k = 1; k <= trunc; ++k) a.dims[k - 1] = k;  // x, x^2, ..., x^k
    int d = trunc;
    a.product = MatrixQ(d, d * d);
    a.coproduct = MatrixQ(d * d, d);
    for (int i = 1; i <= trunc; ++i)
        for (int j = 1; j <= trunc; ++j)
            if (i + j <= trunc) a.product.at(i + j - 1, (i - 1) * d + (j - 1)) = Scalar(1);
    for (int n = 2; n <= trunc; ++n)
        for (int i = 1; i < n; ++i)
            a.coproduct.at((i - 1) * d + (n - i - 1), n - 1) = Scalar(binomial(n, i));
    return a;
}

namespace {

// Shuffle product of words with multiplicities.
void shuffles(const std::vector<int>& u, const std::vector<int>& v, std::vector<int>& cur,
              size_t i, size_t j, std::map<std::vector<int>, Rat>& out) {
    if (i == u.size() && j == v.size()) {
        out[cur] += 1;
        return;
    }
    if (i < u.size()) {
        cur.push_back(u[i]);
        shuffles(u, v, cur, i + 1, j, out);
        cur.pop_back();
    }
    if (j < v.size()) {
        cur.push_back(v[j]);
        shuffles(u, v, cur, i, j + 1, out);
        cur.pop_back();
    }
}

}  // namespace

Bialgebra bialg_tensor(int generators, int trunc) {
    // Basis: words of length 1..N over the alphabet, ordered by (length, lex).
    std::vector<std::vector<int>> words;
    std::map<std::vector<int>, int> index;
    std::vector<std::vector<int>> frontier = {{}};
    for (int len = 1; len <= trunc; ++len) {
        std::vector<std::vector<int>> next;
        for (const auto& w : frontier)
            for (int c = 0; c < generators; ++c) {
                auto w2 = w;
                w2.push_back(c);
                next.push_back(w2);
            }
        std::sort(next.begin(), next.end());
        for (auto& w : next) {
            index[w] = static_cast<int>(words.size());
            words.push_back(w);
        }
        frontier = std::move(next);
    }
    Bialgebra a;
    a.trunc = trunc;
    a.dims.resize(trunc);
    {
        int cnt = 0, p = 1;
        for (int k = 1; k <= trunc; ++k) {
            p *= generators;
            cnt += p;
            a.dims[k - 1] = cnt;
        }
    }
    int d = static_cast<int>(words.size());
    a.product = MatrixQ(d, d * d);
    a.coproduct = MatrixQ(d * d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (static_cast<int>(words[i].size() + words[j].size()) > trunc) continue;
            std::map<std::vector<int>, Rat> out;
            std::vector<int> cur;
            shuffles(words[i], words[j], cur, 0, 0, out);
            for (const auto& [w, c] : out) a.product.at(index.at(w), i * d + j) = Scalar(c);
        }
    for (int k = 0; k < d; ++k) {
        const auto& w = words[k];
        for (size_t cut = 1; cut < w.size(); ++cut) {
            std::vector<int> left(w.begin(), w.begin() + cut);
            std::vector<int> right(w.begin() + cut, w.end());
            a.coproduct.at(index.at(left) * d + index.at(right), k) += Scalar(1);
        }
    }
    return a;
}

namespace {

using ExpVec = std::vector<int>;

struct PbwBasis {
    std::vector<ExpVec> monomials;  // ordered by (degree, lex)
    std::map<ExpVec, int> index;
    int gens = 0;
    int trunc = 0;
};

PbwBasis pbw_basis(int gens, int trunc) {
    PbwBasis b;
    b.gens = gens;
    b.trunc = trunc;
    std::vector<ExpVec> all;
    ExpVec cur(gens, 0);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == gens) {
            int deg = 0;
            for (int e : cur) deg += e;
            if (deg >= 1) all.push_back(cur);
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            cur[pos] = e;
            rec(pos + 1, remaining - e);
        }
        cur[pos] = 0;
    };
    rec(0, trunc);
    std::sort(all.begin(), all.end(), [](const ExpVec& a, const ExpVec& b) {
        int da = 0, db = 0;
        for (int e : a) da += e;
        for (int e : b) db += e;
        if (da != db) return da < db;
        return a < b;
    });
    b.monomials = std::move(all);
    for (size_t i = 0; i < b.monomials.size(); ++i)
        b.index[b.monomials[i]] = static_cast<int>(i);
    return b;
}

int exp_degree(const ExpVec& e) {
    int d = 0;
    for (int x : e) d += x;
    return d;
}

std::vector<int> exp_to_word(const ExpVec& e) {
    std::vector<int> w;
    for (size_t g = 0; g < e.size(); ++g)
        for (int k = 0; k < e[g]; ++k) w.push_back(static_cast<int>(g));
    return w;
}

ExpVec word_to_exp(const std::vector<int>& w, int gens) {
    ExpVec e(gens, 0);
    for (int g : w) ++e[g];
    return e;
}

// PBW normal form of a word, as a map monomial -> coefficient.
std::map<ExpVec, Scalar> straighten(const LieBialgebra& lie, std::vector<int> word) {
    int gens = lie.dim();
    std::map<ExpVec, Scalar> result;
    std::vector<std::pair<std::vector<int>, Scalar>> work;
    work.push_back({std::move(word), Scalar(1)});
    while (!work.empty()) {
        auto [w, c] = std::move(work.back());
        work.pop_back();
        size_t inv = w.size();
        for (size_t i = 0; i + 1 < w.size(); ++i)
            if (w[i] > w[i + 1]) {
                inv = i;
                break;
            }
        if (inv == w.size()) {
            result[word_to_exp(w, gens)] += c;
            continue;
        }
        auto swapped = w;
        std::swap(swapped[inv], swapped[inv + 1]);
        work.push_back({std::move(swapped), c});
        int u = w[inv], v = w[inv + 1];
        for (int k = 0; k < gens; ++k) {
            const Scalar& bc = lie.bracket.at(k, u * gens + v);
            if (bc.is_zero()) continue;
            std::vector<int> shorter;
            shorter.reserve(w.size() - 1);
            for (size_t i = 0; i < w.size(); ++i) {
                if (i == inv) shorter.push_back(k);
                else if (i != inv + 1) shorter.push_back(w[i]);
            }
            work.push_back({std::move(shorter), c * bc});
        }
    }
    return result;
}

}  // namespace

Bialgebra bialg_enveloping(const LieBialgebra& lie, int trunc) {
    int gens = lie.dim();
    PbwBasis basis = pbw_basis(gens, trunc);
    int d = static_cast<int>(basis.monomials.size());
    Bialgebra a;
    a.trunc = trunc;
    a.dims.resize(trunc, 0);
    for (const auto& m : basis.monomials) {
        int deg = exp_degree(m);
        for (int k = deg; k <= trunc; ++k) ++a.dims[k - 1];
    }
    a.product = MatrixQ(d, d * d);
    a.coproduct = MatrixQ(d * d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (exp_degree(basis.monomials[i]) + exp_degree(basis.monomials[j]) > trunc)
                continue;  // truncation window
            std::vector<int> w = exp_to_word(basis.monomials[i]);
            std::vector<int> w2 = exp_to_word(basis.monomials[j]);
            w.insert(w.end(), w2.begin(), w2.end());
            for (const auto& [mono, c] : straighten(lie, std::move(w)))
                a.product.at(basis.index.at(mono), i * d + j) += c;
        }
    // Coproduct: generators are primitive, so splitting is binomial per slot.
    for (int k = 0; k < d; ++k) {
        const ExpVec& m = basis.monomials[k];
        // Iterate over sub-exponent vectors.
        ExpVec sub(gens, 0);
        std::function<void(int, Rat)> rec = [&](int pos, Rat coeff) {
            if (pos == gens) {
                int dl = exp_degree(sub);
                if (dl == 0 || dl == exp_degree(m)) return;  // reduced part only
                ExpVec rest(gens);
                for (int g = 0; g < gens; ++g) rest[g] = m[g] - sub[g];
                a.coproduct.at(basis.index.at(sub) * d + basis.index.at(rest), k) +=
                    Scalar(coeff);
                return;
            }
            for (int e = 0; e <= m[pos]; ++e) {
                sub[pos] = e;
                rec(pos + 1, coeff * binomial(m[pos], e));
            }
            sub[pos] = 0;
        };
        rec(0, Rat(1));
    }
    return a;
}

namespace {

// g-valued polynomials in two generic arguments u, v: term = (u-monomial,
// v-monomial) -> coefficient vector in g.
using GPKey = std::pair<ExpVec, ExpVec>;
using GPoly = std::map<GPKey, std::vector<Scalar>>;

GPoly gp_bracket(const LieBialgebra& lie, const GPoly& p, const GPoly& q) {
    int gens = lie.dim();
    GPoly out;
    for (const auto& [kp, vp] : p)
        for (const auto& [kq, vq] : q) {
            ExpVec mu = kp.first, mv = kp.second;
            for (size_t t = 0; t < kq.first.size(); ++t) mu[t] += kq.first[t];
            for (size_t t = 0; t < kq.second.size(); ++t) mv[t] += kq.second[t];
            std::vector<Scalar> val(gens, Scalar(0));
            bool nonzero = false;
            for (int i = 0; i < gens; ++i) {
                if (vp[i].is_zero()) continue;
                for (int j = 0; j < gens; ++j) {
                    if (vq[j].is_zero()) continue;
                    for (int k = 0; k < gens; ++k) {
                        const Scalar& bc = lie.bracket.at(k, i * gens + j);
                        if (bc.is_zero()) continue;
                        val[k] += vp[i] * vq[j] * bc;
                        nonzero = true;
                    }
                }
            }
            if (!nonzero) continue;
            auto it = out.find({mu, mv});
            if (it == out.end()) out[{mu, mv}] = val;
            else
                for (int k = 0; k < gens; ++k) it->second[k] += val[k];
        }
    return out;
}

void gp_axpy(GPoly& acc, const GPoly& p, const Scalar& c) {
    for (const auto& [k, v] : p) {
        auto it = acc.find(k);
        if (it == acc.end()) {
            std::vector<Scalar> scaled = v;
            for (auto& x : scaled) x *= c;
            acc[k] = std::move(scaled);
        } else {
            for (size_t i = 0; i < v.size(); ++i) it->second[i] += v[i] * c;
        }
    }
}

// Weights from the lower central series; requires the basis adapted to it.
std::vector<int> lcs_weights(const LieBialgebra& lie) {
    int d = lie.dim();
    std::vector<Subspace> series;
    series.push_back(Subspace::full(d));
    while (true) {
        const Subspace& prev = series.back();
        MatrixQ vecs(d * prev.dim(), d);
        int row = 0;
        for (int i = 0; i < d; ++i)
            for (int r = 0; r < prev.dim(); ++r) {
                for (int k = 0; k < d; ++k) {
                    Scalar acc(0);
                    for (int j = 0; j < d; ++j)
                        acc += lie.bracket.at(k, i * d + j) * prev.basis().at(r, j);
                    vecs.at(row, k) = acc;
                }
                ++row;
            }
        Subspace next = Subspace::row_span(vecs);
        if (next.dim() == 0) break;
        if (next.dim() == prev.dim())
            throw std::invalid_argument("function_hopf: Lie algebra is not nilpotent");
        series.push_back(next);
    }
    std::vector<int> weights(d, 1);
    for (int i = 0; i < d; ++i) {
        MatrixQ e(d, 1);
        e.at(i, 0) = Scalar(1);
        for (size_t k = 1; k < series.size(); ++k)
            if (series[k].contains(e)) weights[i] = static_cast<int>(k) + 1;
    }
    return weights;
}

struct WeightedBasis {
    std::vector<ExpVec> monomials;
    std::map<ExpVec, int> index;
    std::vector<int> weights;  // per generator
};

int wdeg(const ExpVec& e, const std::vector<int>& w) {
    int s = 0;
    for (size_t i = 0; i < e.size(); ++i) s += e[i] * w[i];
    return s;
}

WeightedBasis weighted_basis(const std::vector<int>& weights, int trunc) {
    WeightedBasis b;
    b.weights = weights;
    int gens = static_cast<int>(weights.size());
    std::vector<ExpVec> all;
    ExpVec cur(gens, 0);
    std::function<void(int)> rec = [&](int pos) {
        if (wdeg(cur, weights) > trunc) return;
        if (pos == gens) {
            if (wdeg(cur, weights) >= 1) all.push_back(cur);
            return;
        }
        for (int e = 0; e * weights[pos] <= trunc; ++e) {
            cur[pos] = e;
            if (wdeg(cur, weights) <= trunc) rec(pos + 1);
        }
        cur[pos] = 0;
    };
    rec(0);
    std::sort(all.begin(), all.end(), [&](const ExpVec& a, const ExpVec& c) {
        int wa = wdeg(a, weights), wc = wdeg(c, weights);
        if (wa != wc) return wa < wc;
        return a < c;
    });
    b.monomials = std::move(all);
    for (size_t i = 0; i < b.monomials.size(); ++i)
        b.index[b.monomials[i]] = static_cast<int>(i);
    return b;
}

}  // namespace

Bialgebra bialg_function_hopf(const LieBialgebra& lie, int trunc) {
    int gens = lie.dim();
    std::vector<int> weights = lcs_weights(lie);
    int cls = *std::max_element(weights.begin(), weights.end());
    if (cls > 4)
        throw std::invalid_argument("function_hopf: nilpotency class above 4 unsupported");
    WeightedBasis basis = weighted_basis(weights, trunc);
    int d = static_cast<int>(basis.monomials.size());

    Bialgebra a;
    a.trunc = trunc;
    a.dims.resize(trunc, 0);
    for (const auto& m : basis.monomials) {
        int w = wdeg(m, weights);
        for (int k = w; k <= trunc; ++k) ++a.dims[k - 1];
    }
    a.product = MatrixQ(d, d * d);
    a.coproduct = MatrixQ(d * d, d);

    // Product: polynomial multiplication inside the truncation window.
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (wdeg(basis.monomials[i], weights) + wdeg(basis.monomials[j], weights) > trunc)
                continue;
            ExpVec sum = basis.monomials[i];
            for (int g = 0; g < gens; ++g) sum[g] += basis.monomials[j][g];
            a.product.at(basis.index.at(sum), i * d + j) = Scalar(1);
        }

    // BCH series Z(u, v) up to commutator degree 4.
    GPoly u, v;
    for (int g = 0; g < gens; ++g) {
        ExpVec eu(gens, 0), ev(gens, 0);
        std::vector<Scalar> val(gens, Scalar(0));
        val[g] = Scalar(1);
        eu[g] = 1;
        u[{eu, ExpVec(gens, 0)}] = val;
        ev[g] = 1;
        v[{ExpVec(gens, 0), ev}] = val;
    }
    GPoly z;
    gp_axpy(z, u, Scalar(1));
    gp_axpy(z, v, Scalar(1));
    GPoly uv = gp_bracket(lie, u, v);
    gp_axpy(z, uv, Scalar::of(1, 2));
    if (cls >= 3) {
        GPoly uuv = gp_bracket(lie, u, uv);
        GPoly vvu = gp_bracket(lie, v, gp_bracket(lie, v, u));
        gp_axpy(z, uuv, Scalar::of(1, 12));
        gp_axpy(z, vvu, Scalar::of(1, 12));
        if (cls >= 4) {
            GPoly vuuv = gp_bracket(lie, v, uuv);
            gp_axpy(z, vuuv, Scalar::of(-1, 24));
        }
    }

    // Delta(x_g) as a polynomial in A (x) A, unit terms included.
    using Tensor = std::map<GPKey, Scalar>;
    std::vector<Tensor> delta_gen(gens);
    for (const auto& [key, val] : z)
        for (int g = 0; g < gens; ++g)
            if (!val[g].is_zero()) delta_gen[g][key] += val[g];

    auto tensor_mul = [&](const Tensor& p, const Tensor& q) {
        Tensor out;
        for (const auto& [kp, cp] : p)
            for (const auto& [kq, cq] : q) {
                ExpVec l = kp.first, r = kp.second;
                for (int g = 0; g < gens; ++g) {
                    l[g] += kq.first[g];
                    r[g] += kq.second[g];
                }
                if (wdeg(l, weights) > trunc || wdeg(r, weights) > trunc) continue;
                out[{l, r}] += cp * cq;
            }
        return out;
    };

    for (int k = 0; k < d; ++k) {
        const ExpVec& m = basis.monomials[k];
        Tensor acc;
        acc[{ExpVec(gens, 0), ExpVec(gens, 0)}] = Scalar(1);
        for (int g = 0; g < gens; ++g)
            for (int e = 0; e < m[g]; ++e) acc = tensor_mul(acc, delta_gen[g]);
        for (const auto& [key, c] : acc) {
            if (exp_degree(key.first) == 0 || exp_degree(key.second) == 0) continue;
            a.coproduct.at(basis.index.at(key.first) * d + basis.index.at(key.second), k) += c;
        }
    }
    return a;
}

Bialgebra make_example_bialg(BialgExampleKind kind, int trunc, const LieBialgebra* lie,
                             int generators, uint64_t seed) {
    switch (kind) {
        case BialgExampleKind::Polynomial:
            return bialg_polynomial(trunc);
        case BialgExampleKind::Tensor:
            return bialg_tensor(generators, trunc);
        case BialgExampleKind::Enveloping:
            if (!lie) throw std::invalid_argument("make_example_bialg: missing Lie algebra");
            return bialg_enveloping(*lie, trunc);
        case BialgExampleKind::FunctionHopf:
            if (!lie) throw std::invalid_argument("make_example_bialg: missing Lie algebra");
            return bialg_function_hopf(*lie, trunc);
        case BialgExampleKind::Random: {
            std::vector<int> dims = {2 + static_cast<int>(seed % 2), 0, 0};
            LieBialgebra g = make_example_liebialg(LieExampleKind::Random,
                                                   {dims[0], dims[0], dims[0]}, 0, seed);
            if (seed % 2 == 0) return bialg_enveloping(g, trunc);
            return bialg_function_hopf(g, trunc);
        }
    }
    throw std::invalid_argument("make_example_bialg: unknown kind");
}

// ---------------------------------------------------------------------------
// Cousin and Omega objects.

namespace {

bool is_consecutive_face(const OrderedSetPartition& f) {
    int expect = 1;
    for (const auto& b : f.blocks)
        for (int x : b)
            if (x != expect++) return false;
    return true;
}

std::vector<int> face_slot_dims(const Bialgebra& a, const OrderedSetPartition& f) {
    std::vector<int> dims;
    for (const auto& b : f.blocks) dims.push_back(a.dim_at(static_cast<int>(b.size())));
    return dims;
}

void fill_betti_ops(const Bialgebra& a, DoubleRepB& out,
                    const std::vector<bool>& keep) {
    const FacePoset& poset = *out.poset;
    for (size_t aid = 0; aid < poset.arrows().size(); ++aid) {
        const FaceArrow& arr = poset.arrows()[aid];
        out.up_ops[aid] = MatrixQ(out.dim(arr.fine), out.dim(arr.coarse));
        out.down_ops[aid] = MatrixQ(out.dim(arr.coarse), out.dim(arr.fine));
        if (!keep[arr.fine] || !keep[arr.coarse]) continue;
        const OrderedSetPartition& fine = poset.face(arr.fine);
        std::vector<int> dims = face_slot_dims(a, fine);
        int sa = static_cast<int>(fine.blocks[arr.pos].size());
        int sb = static_cast<int>(fine.blocks[arr.pos + 1].size());
        int pre = 1, post = 1;
        for (int i = 0; i < arr.pos; ++i) pre *= dims[i];
        for (int i = arr.pos + 2; i < static_cast<int>(dims.size()); ++i) post *= dims[i];
        MatrixQ mc = a.product_component(sa, sb);
        MatrixQ cc = a.coproduct_component(sa, sb);
        MatrixQ idp = MatrixQ::identity(pre), idq = MatrixQ::identity(post);
        out.down_ops[aid] = idp.kronecker(mc).kronecker(idq);
        out.up_ops[aid] = idp.kronecker(cc).kronecker(idq);
    }
}

}  // namespace

DoubleRepB cousin_build(const Bialgebra& a, int n) {
    if (n > a.trunc) throw std::invalid_argument("cousin_build: n beyond truncation");
    DoubleRepB out = DoubleRepB::zero(index_set(n));
    const FacePoset& poset = *out.poset;
    std::vector<bool> keep(poset.face_count(), false);
    for (int v = 0; v < poset.face_count(); ++v) {
        const OrderedSetPartition& f = poset.face(v);
        if (!is_consecutive_face(f)) continue;
        keep[v] = true;
        int dim = 1;
        for (const auto& b : f.blocks) dim *= a.dim_at(static_cast<int>(b.size()));
        LabeledSpace ls;
        ls.labels.resize(dim);
        for (int i = 0; i < dim; ++i) ls.labels[i] = f.str() + "#" + std::to_string(i);
        out.spaces[v] = std::move(ls);
    }
    fill_betti_ops(a, out, keep);
    out.validate_shapes();
    return out;
}

DoubleRepB omega_build(const Bialgebra& a, const FiniteIndexSet& ground) {
    if (static_cast<int>(ground.size()) > a.trunc)
        throw std::invalid_argument("omega_build: |I| beyond truncation");
    DoubleRepB out = DoubleRepB::zero(ground);
    const FacePoset& poset = *out.poset;
    std::vector<bool> keep(poset.face_count(), true);
    for (int v = 0; v < poset.face_count(); ++v) {
        const OrderedSetPartition& f = poset.face(v);
        int dim = 1;
        for (const auto& b : f.blocks) dim *= a.dim_at(static_cast<int>(b.size()));
        LabeledSpace ls;
        ls.labels.resize(dim);
        for (int i = 0; i < dim; ++i) ls.labels[i] = f.str() + "#" + std::to_string(i);
        out.spaces[v] = std::move(ls);
    }
    fill_betti_ops(a, out, keep);
    out.validate_shapes();
    return out;
}

OmegaStructureIsos structure_isos(const Bialgebra& a, const Surjection& pi) {
    OmegaStructureIsos iso;
    iso.pi = pi;
    DoubleRepB omega_j = omega_build(a, pi.source);
    DoubleRepB omega_i = omega_build(a, pi.target);
    iso.pullback = shriek_pullback_betti(pi, omega_j);
    const FacePoset& poset_i = *omega_i.poset;

    iso.phi_maps.resize(poset_i.face_count());
    for (int v = 0; v < poset_i.face_count(); ++v) {
        const OrderedSetPartition& alpha = poset_i.face(v);
        // Per-block filtration inclusion; ordered blocks keep their order.
        MatrixQ incl = MatrixQ::identity(1);
        for (const auto& blk : alpha.blocks) {
            int s = static_cast<int>(blk.size());
            int sp = 0;
            for (int i : blk) sp += static_cast<int>(pi.fiber(i).size());
            MatrixQ inc_t(a.dim_at(sp), a.dim_at(s));
            for (int i = 0; i < a.dim_at(s); ++i) inc_t.at(i, i) = Scalar(1);
            incl = incl.kronecker(inc_t);
        }
        auto coords = iso.pullback.embed[v].solve(incl);
        if (!coords) {
            iso.failure = "phi image not in kernel at " + alpha.str();
            return iso;
        }
        iso.phi_maps[v] = *coords;
        if (iso.pullback.rep.dim(v) != omega_i.dim(v) ||
            iso.phi_maps[v].rank() != omega_i.dim(v)) {
            iso.failure = "phi not an isomorphism at " + alpha.str();
            return iso;
        }
    }
    RepMapB phi_map;
    phi_map.components = iso.phi_maps;
    if (!intertwines_betti(omega_i, iso.pullback.rep, phi_map)) {
        iso.failure = "phi does not intertwine";
        return iso;
    }

    // v: regroup the surviving faces into fiber order (plain, no signs).
    iso.restricted = open_restrict_betti(pi, omega_j);
    std::vector<DoubleRepB> parts;
    for (int i : pi.target) {
        FiniteIndexSet fib = pi.fiber(i);
        std::sort(fib.begin(), fib.end());
        parts.push_back(omega_build(a, fib));
    }
    DoubleRepB ext = exterior_betti(pi, parts);
    iso.exterior = open_restrict_betti(pi, ext);
    const FacePoset& poset_j = *omega_j.poset;
    SetPartition fibers = pi.fiber_partition();
    iso.v_maps.resize(poset_j.face_count());
    for (int v = 0; v < poset_j.face_count(); ++v) {
        const OrderedSetPartition& rho = poset_j.face(v);
        if (!rho.forget_order().refines(fibers)) {
            iso.v_maps[v] = MatrixQ(iso.exterior.dim(v), iso.restricted.dim(v));
            continue;
        }
        int k = rho.block_count();
        std::vector<int> dims = face_slot_dims(a, rho);
        std::vector<std::pair<int, int>> key(k);  // (fiber rank, position in rho)
        for (int t = 0; t < k; ++t) {
            int member = rho.blocks[t].front();
            int fiber_rank = static_cast<int>(
                std::find(pi.target.begin(), pi.target.end(), pi(member)) - pi.target.begin());
            key[t] = {fiber_rank, t};
        }
        std::vector<int> order(k);
        for (int t = 0; t < k; ++t) order[t] = t;
        std::sort(order.begin(), order.end(), [&](int x, int y) { return key[x] < key[y]; });
        std::vector<int> perm(k);
        for (int pos = 0; pos < k; ++pos) perm[order[pos]] = pos;
        iso.v_maps[v] = slot_permutation_matrix(dims, perm, false);
        if (iso.v_maps[v].rows() != iso.exterior.dim(v)) {
            iso.failure = "v shape mismatch at " + rho.str();
            return iso;
        }
    }
    RepMapB v_map;
    v_map.components = iso.v_maps;
    if (!intertwines_betti(iso.restricted, iso.exterior, v_map)) {
        iso.failure = "v does not intertwine";
        return iso;
    }
    iso.verified = true;
    return iso;
}

OmegaTower omega_tower(const Bialgebra& a, int n_max) {
    OmegaTower t;
    t.a = a;
    t.max_points = std::min(n_max, a.trunc);
    for (int n = 1; n <= t.max_points; ++n) {
        DoubleRepB e = cousin_build(a, n);
        BettiRelationReport er = check_relations_betti(e);
        if (!er.pass) {
            t.failure = "E(A)_" + std::to_string(n) + " relations: " + er.summary();
            return t;
        }
        t.e_levels.push_back(std::move(e));
        DoubleRepB om = omega_build(a, index_set(n));
        BettiRelationReport orp = check_relations_betti(om);
        if (!orp.pass) {
            t.failure = "Omega(A)_" + std::to_string(n) + " relations: " + orp.summary();
            return t;
        }
        t.omega_levels.push_back(std::move(om));
    }
    for (int n = 2; n <= t.max_points; ++n) {
        for (int m = 1; m < n; ++m) {
            OmegaStructureIsos s = structure_isos(a, Surjection::canonical_collapse(n, m));
            if (!s.verified) {
                t.failure = "structure isos fail for [" + std::to_string(n) + "]->>[" +
                            std::to_string(m) + "]: " + s.failure;
                return t;
            }
        }
        for (int i = 1; i < n; ++i) {
            OmegaStructureIsos s = structure_isos(a, block_collapse({i, n - i}));
            if (!s.verified) {
                t.failure = "structure isos fail for split (" + std::to_string(i) + "," +
                            std::to_string(n - i) + "): " + s.failure;
                return t;
            }
        }
    }
    t.verified = true;
    return t;
}

Bialgebra omega_ran_reconstruct(const OmegaTower& t) {
    if (!t.verified) throw std::invalid_argument("omega_ran_reconstruct: tower not verified");
    int n_max = t.max_points;
    std::vector<int> dims;
    for (int n = 1; n <= n_max; ++n) {
        HyperbolicStalk h = hyperbolic_functor(t.e_levels[n - 1]);
        dims.push_back(h.space.dim());
    }
    int d = dims.back();
    int trunc = n_max;
    auto level_of = [&](int idx) {
        for (int k = 1; k <= trunc; ++k)
            if (idx < dims[k - 1]) return k;
        return trunc;
    };
    MatrixQ coproduct(d * d, d);
    MatrixQ product(d, d * d);

    for (int n = 2; n <= n_max; ++n) {
        const DoubleRepB& level = t.e_levels[n - 1];
        const FacePoset& poset = *level.poset;
        int deep = poset.index_of(
            OrderedSetPartition::of({std::vector<int>(index_set(n).begin(), index_set(n).end())}));
        std::map<std::pair<int, int>, std::pair<MatrixQ, MatrixQ>> walls;  // (i,j) -> (up, down)
        for (int i = 1; i < n; ++i) {
            std::vector<int> left(i), right(n - i);
            for (int x = 0; x < i; ++x) left[x] = x + 1;
            for (int x = 0; x < n - i; ++x) right[x] = i + x + 1;
            int face = poset.index_of(OrderedSetPartition::of({left, right}));
            int aid = poset.arrow_between(face, deep);
            walls.emplace(std::make_pair(i, n - i),
                          std::make_pair(level.up_ops[aid], level.down_ops[aid]));
        }
        // Coproduct columns for exact level-n vectors.
        for (int col = dims[n - 2]; col < dims[n - 1]; ++col)
            for (int a = 1; a < n; ++a) {
                const MatrixQ& up = walls.at({a, n - a}).first;
                int db = dims[n - a - 1];
                for (int r = 0; r < dims[a - 1]; ++r) {
                    if (level_of(r) != a) continue;
                    for (int s = 0; s < db; ++s) {
                        const Scalar& c = up.at(r * db + s, col);
                        if (!c.is_zero()) coproduct.at(r * d + s, col) += c;
                    }
                }
            }
        // Product components (a, b) with a + b = n.
        for (int a = 1; a < n; ++a) {
            int b = n - a;
            const MatrixQ& dn = walls.at({a, b}).second;
            int da = dims[a - 1], db = dims[b - 1];
            for (int i = 0; i < da; ++i) {
                if (level_of(i) != a) continue;
                for (int j = 0; j < db; ++j) {
                    if (level_of(j) != b) continue;
                    for (int k = 0; k < dims[n - 1]; ++k) {
                        const Scalar& c = dn.at(k, i * db + j);
                        if (!c.is_zero()) product.at(k, i * d + j) += c;
                    }
                }
            }
        }
    }

    Bialgebra out;
    out.trunc = trunc;
    out.dims = dims;
    out.product = std::move(product);
    out.coproduct = std::move(coproduct);
    AxiomReport rep = check_bialg_axioms(out);
    if (!rep.pass)
        throw std::runtime_error("omega_ran_reconstruct: axioms fail on output: " +
                                 rep.summary());
    return out;
}

}  // namespace ranq
