#include "ranq/strata.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ranq {

FiniteIndexSet index_set(int n) {
    if (n < 1) throw std::invalid_argument("index_set: need n >= 1");
    FiniteIndexSet s(n);
    for (int i = 0; i < n; ++i) s[i] = i + 1;
    return s;
}

namespace {

void check_ground_size(const FiniteIndexSet& g) {
    if (g.empty()) throw std::invalid_argument("index set must be nonempty");
    if (static_cast<int>(g.size()) > kMaxIndexSetSize)
        throw std::invalid_argument("index set larger than the configured bound (" +
                                    std::to_string(kMaxIndexSetSize) + ")");
}

std::vector<std::vector<int>> canonicalize_blocks(std::vector<std::vector<int>> blocks,
                                                  bool sort_blocks) {
    for (auto& b : blocks) {
        if (b.empty()) throw std::invalid_argument("partition block must be nonempty");
        std::sort(b.begin(), b.end());
    }
    if (sort_blocks)
        std::sort(blocks.begin(), blocks.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::set<int> seen;
    for (const auto& b : blocks)
        for (int x : b)
            if (!seen.insert(x).second)
                throw std::invalid_argument("partition blocks are not disjoint");
    return blocks;
}

std::string blocks_str(const std::vector<std::vector<int>>& blocks) {
    std::ostringstream os;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (i) os << "|";
        for (size_t j = 0; j < blocks[i].size(); ++j) {
            if (j) os << ",";
            os << blocks[i][j];
        }
    }
    return os.str();
}

}  // namespace

SetPartition SetPartition::of(std::vector<std::vector<int>> blocks) {
    return SetPartition{canonicalize_blocks(std::move(blocks), true)};
}

SetPartition SetPartition::singletons(const FiniteIndexSet& ground) {
    std::vector<std::vector<int>> b;
    for (int x : ground) b.push_back({x});
    return of(std::move(b));
}

SetPartition SetPartition::one_block(const FiniteIndexSet& ground) {
    return of({ground});
}

FiniteIndexSet SetPartition::ground() const {
    FiniteIndexSet g;
    for (const auto& b : blocks) g.insert(g.end(), b.begin(), b.end());
    std::sort(g.begin(), g.end());
    return g;
}

int SetPartition::block_of(int label) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        for (int x : blocks[i])
            if (x == label) return static_cast<int>(i);
    throw std::invalid_argument("label not in partition");
}

bool SetPartition::refines(const SetPartition& coarser) const {
    for (const auto& b : blocks) {
        int home = coarser.block_of(b.front());
        for (int x : b)
            if (coarser.block_of(x) != home) return false;
    }
    return true;
}

std::string SetPartition::str() const { return blocks_str(blocks); }

OrderedSetPartition OrderedSetPartition::of(std::vector<std::vector<int>> blocks) {
    return OrderedSetPartition{canonicalize_blocks(std::move(blocks), false)};
}

FiniteIndexSet OrderedSetPartition::ground() const {
    FiniteIndexSet g;
    for (const auto& b : blocks) g.insert(g.end(), b.begin(), b.end());
    std::sort(g.begin(), g.end());
    return g;
}

SetPartition OrderedSetPartition::forget_order() const { return SetPartition::of(blocks); }

std::vector<int> OrderedSetPartition::shape() const {
    std::vector<int> s;
    for (const auto& b : blocks) s.push_back(static_cast<int>(b.size()));
    return s;
}

std::string OrderedSetPartition::str() const { return blocks_str(blocks); }

Surjection Surjection::of(FiniteIndexSet source, FiniteIndexSet target,
                          std::map<int, int> map) {
    Surjection s{std::move(source), std::move(target), std::move(map)};
    std::set<int> hit;
    for (int j : s.source) {
        auto it = s.map.find(j);
        if (it == s.map.end()) throw std::invalid_argument("surjection: unmapped label");
        if (std::find(s.target.begin(), s.target.end(), it->second) == s.target.end())
            throw std::invalid_argument("surjection: image outside target");
        hit.insert(it->second);
    }
    if (hit.size() != s.target.size())
        throw std::invalid_argument("surjection: some target label has empty fiber");
    return s;
}

Surjection Surjection::identity(const FiniteIndexSet& s) {
    std::map<int, int> m;
    for (int x : s) m[x] = x;
    return of(s, s, std::move(m));
}

Surjection Surjection::canonical_collapse(int n, int m) {
    if (m > n || m < 1) throw std::invalid_argument("canonical_collapse: need 1 <= m <= n");
    std::map<int, int> f;
    int k = n - m + 1;  // first fiber is {1..k}
    for (int j = 1; j <= n; ++j) f[j] = j <= k ? 1 : j - k + 1;
    return of(index_set(n), index_set(m), std::move(f));
}

std::vector<int> Surjection::fiber(int target_label) const {
    std::vector<int> f;
    for (int j : source)
        if (map.at(j) == target_label) f.push_back(j);
    return f;
}

SetPartition Surjection::fiber_partition() const {
    std::vector<std::vector<int>> blocks;
    for (int i : target) blocks.push_back(fiber(i));
    return SetPartition::of(std::move(blocks));
}

OrderedSetPartition Surjection::fiber_ordered_partition() const {
    std::vector<std::vector<int>> blocks;
    for (int i : target) blocks.push_back(fiber(i));
    return OrderedSetPartition::of(std::move(blocks));
}

Surjection Surjection::compose(const Surjection& inner) const {
    if (inner.target != source)
        throw std::invalid_argument("Surjection::compose: middle sets differ");
    std::map<int, int> m;
    for (int j : inner.source) m[j] = map.at(inner.map.at(j));
    return of(inner.source, target, std::move(m));
}

namespace {

void enumerate_partitions_rec(const FiniteIndexSet& g, size_t k,
                              std::vector<std::vector<int>>& blocks,
                              std::vector<SetPartition>& out) {
    if (k == g.size()) {
        out.push_back(SetPartition::of(blocks));
        return;
    }
    for (auto& b : blocks) {
        b.push_back(g[k]);
        enumerate_partitions_rec(g, k + 1, blocks, out);
        b.pop_back();
    }
    blocks.push_back({g[k]});
    enumerate_partitions_rec(g, k + 1, blocks, out);
    blocks.pop_back();
}

}  // namespace

std::vector<SetPartition> all_set_partitions(const FiniteIndexSet& ground) {
    check_ground_size(ground);
    std::vector<SetPartition> out;
    std::vector<std::vector<int>> blocks;
    enumerate_partitions_rec(ground, 0, blocks, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<OrderedSetPartition> all_ordered_set_partitions(const FiniteIndexSet& ground) {
    check_ground_size(ground);
    std::vector<OrderedSetPartition> out;
    for (const auto& p : all_set_partitions(ground)) {
        std::vector<int> idx(p.block_count());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end());
        do {
            std::vector<std::vector<int>> blocks;
            for (int i : idx) blocks.push_back(p.blocks[i]);
            out.push_back(OrderedSetPartition::of(std::move(blocks)));
        } while (std::next_permutation(idx.begin(), idx.end()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> compositions_of(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int rest) {
        if (rest == 0) {
            out.push_back(cur);
            return;
        }
        for (int part = 1; part <= rest; ++part) {
            cur.push_back(part);
            rec(rest - part);
            cur.pop_back();
        }
    };
    rec(n);
    return out;
}

std::vector<Surjection> all_surjections(int n, int m) {
    std::vector<Surjection> out;
    std::vector<int> f(n, 1);
    while (true) {
        std::set<int> hit(f.begin(), f.end());
        if (static_cast<int>(hit.size()) == m) {
            std::map<int, int> mp;
            for (int j = 0; j < n; ++j) mp[j + 1] = f[j];
            out.push_back(Surjection::of(index_set(n), index_set(m), std::move(mp)));
        }
        int k = n - 1;
        while (k >= 0 && f[k] == m) {
            f[k] = 1;
            --k;
        }
        if (k < 0) break;
        ++f[k];
    }
    return out;
}

std::vector<Permutation> all_permutations(const FiniteIndexSet& ground) {
    std::vector<int> images = ground;
    std::vector<Permutation> out;
    std::sort(images.begin(), images.end());
    do {
        out.push_back(Permutation::of(ground, images));
    } while (std::next_permutation(images.begin(), images.end()));
    return out;
}

PartitionPoset PartitionPoset::build(const FiniteIndexSet& ground) {
    check_ground_size(ground);
    PartitionPoset p;
    p.ground_ = ground;
    p.vertices_ = all_set_partitions(ground);
    for (size_t i = 0; i < p.vertices_.size(); ++i)
        p.index_[p.vertices_[i]] = static_cast<int>(i);
    p.from_fine_.resize(p.vertices_.size());
    p.into_coarse_.resize(p.vertices_.size());
    for (size_t v = 0; v < p.vertices_.size(); ++v) {
        const SetPartition& fine = p.vertices_[v];
        int k = fine.block_count();
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b) {
                std::vector<std::vector<int>> blocks;
                for (int i = 0; i < k; ++i) {
                    if (i == b) continue;
                    if (i == a) {
                        std::vector<int> merged = fine.blocks[a];
                        merged.insert(merged.end(), fine.blocks[b].begin(),
                                      fine.blocks[b].end());
                        blocks.push_back(std::move(merged));
                    } else {
                        blocks.push_back(fine.blocks[i]);
                    }
                }
                SetPartition coarse = SetPartition::of(std::move(blocks));
                MergeArrow arr;
                arr.fine = static_cast<int>(v);
                arr.coarse = p.index_.at(coarse);
                arr.p = a;
                arr.q = b;
                int id = static_cast<int>(p.arrows_.size());
                p.arrows_.push_back(arr);
                p.from_fine_[v].push_back(id);
                p.into_coarse_[arr.coarse].push_back(id);
            }
    }
    return p;
}

int PartitionPoset::index_of(const SetPartition& part) const {
    auto it = index_.find(part);
    if (it == index_.end()) throw std::invalid_argument("partition not in poset");
    return it->second;
}

int PartitionPoset::arrow_between(int fine, int coarse) const {
    for (int id : from_fine_[fine])
        if (arrows_[id].coarse == coarse) return id;
    return -1;
}

std::string PartitionPoset::dump_json() const {
    std::ostringstream os;
    os << "{";
    for (size_t v = 0; v < vertices_.size(); ++v) {
        if (v) os << ",";
        os << "\"" << vertices_[v].str() << "\":[";
        bool first = true;
        for (int id : from_fine_[v]) {
            if (!first) os << ",";
            os << "\"" << vertices_[arrows_[id].coarse].str() << "\"";
            first = false;
        }
        os << "]";
    }
    os << "}";
    return os.str();
}

FacePoset FacePoset::build(const FiniteIndexSet& ground) {
    check_ground_size(ground);
    FacePoset p;
    p.ground_ = ground;
    p.faces_ = all_ordered_set_partitions(ground);
    for (size_t i = 0; i < p.faces_.size(); ++i) p.index_[p.faces_[i]] = static_cast<int>(i);
    p.from_fine_.resize(p.faces_.size());
    p.into_coarse_.resize(p.faces_.size());
    for (size_t v = 0; v < p.faces_.size(); ++v) {
        const OrderedSetPartition& fine = p.faces_[v];
        int k = fine.block_count();
        for (int a = 0; a + 1 < k; ++a) {
            std::vector<std::vector<int>> blocks;
            for (int i = 0; i < k; ++i) {
                if (i == a + 1) continue;
                if (i == a) {
                    std::vector<int> merged = fine.blocks[a];
                    merged.insert(merged.end(), fine.blocks[a + 1].begin(),
                                  fine.blocks[a + 1].end());
                    std::sort(merged.begin(), merged.end());
                    blocks.push_back(std::move(merged));
                } else {
                    blocks.push_back(fine.blocks[i]);
                }
            }
            OrderedSetPartition coarse = OrderedSetPartition::of(std::move(blocks));
            FaceArrow arr;
            arr.fine = static_cast<int>(v);
            arr.coarse = p.index_.at(coarse);
            arr.pos = a;
            int id = static_cast<int>(p.arrows_.size());
            p.arrows_.push_back(arr);
            p.from_fine_[v].push_back(id);
            p.into_coarse_[arr.coarse].push_back(id);
        }
    }
    return p;
}

int FacePoset::index_of(const OrderedSetPartition& part) const {
    auto it = index_.find(part);
    if (it == index_.end()) throw std::invalid_argument("face not in poset");
    return it->second;
}

int FacePoset::arrow_between(int fine, int coarse) const {
    for (int id : from_fine_[fine])
        if (arrows_[id].coarse == coarse) return id;
    return -1;
}

std::string FacePoset::dump_json() const {
    std::ostringstream os;
    os << "{";
    for (size_t v = 0; v < faces_.size(); ++v) {
        if (v) os << ",";
        os << "\"" << faces_[v].str() << "\":[";
        bool first = true;
        for (int id : from_fine_[v]) {
            if (!first) os << ",";
            os << "\"" << faces_[arrows_[id].coarse].str() << "\"";
            first = false;
        }
        os << "]";
    }
    os << "}";
    return os.str();
}

SetPartition induced_coarsening(const Surjection& pi, const SetPartition& alpha) {
    if (alpha.ground() != pi.target)
        throw std::invalid_argument("induced_coarsening: alpha does not partition the target");
    std::vector<std::vector<int>> blocks;
    for (const auto& b : alpha.blocks) {
        std::vector<int> pre;
        for (int i : b) {
            auto f = pi.fiber(i);
            pre.insert(pre.end(), f.begin(), f.end());
        }
        blocks.push_back(std::move(pre));
    }
    return SetPartition::of(std::move(blocks));
}

OrderedSetPartition induced_coarsening(const Surjection& pi, const OrderedSetPartition& alpha) {
    if (alpha.ground() != pi.target)
        throw std::invalid_argument("induced_coarsening: alpha does not partition the target");
    std::vector<std::vector<int>> blocks;
    for (const auto& b : alpha.blocks) {
        std::vector<int> pre;
        for (int i : b) {
            auto f = pi.fiber(i);
            pre.insert(pre.end(), f.begin(), f.end());
        }
        blocks.push_back(std::move(pre));
    }
    return OrderedSetPartition::of(std::move(blocks));
}

bool factors_through(const SetPartition& sigma, const Surjection& pi) {
    if (sigma.ground() != pi.source) return false;
    for (const auto& b : sigma.blocks) {
        std::set<int> in_block(b.begin(), b.end());
        for (int j : b)
            for (int j2 : pi.fiber(pi(j)))
                if (!in_block.count(j2)) return false;
    }
    return true;
}

bool factors_through(const OrderedSetPartition& sigma, const Surjection& pi) {
    return factors_through(sigma.forget_order(), pi);
}

std::vector<Path> admissible_paths(const PartitionPoset& poset, const Surjection& pi,
                                   const SetPartition& alpha) {
    int len = static_cast<int>(pi.source.size()) - static_cast<int>(pi.target.size());
    SetPartition start = induced_coarsening(pi, alpha);
    int start_id = poset.index_of(start);
    std::vector<Path> out;
    Path cur;
    cur.vertices.push_back(start_id);
    // Ascend: next finer vertices are the fine ends of arrows into the current.
    std::function<void(int, int)> rec = [&](int v, int remaining) {
        if (remaining == 0) {
            out.push_back(cur);
            return;
        }
        for (int id : poset.arrows_into_coarse(v)) {
            int fine = poset.arrows()[id].fine;
            // No vertex strictly after the start may factor through pi; this
            // includes the terminal vertex, which is what makes the pullback
            // right adjoint to the pushforward.
            if (factors_through(poset.vertex(fine), pi)) continue;
            cur.vertices.push_back(fine);
            rec(fine, remaining - 1);
            cur.vertices.pop_back();
        }
    };
    rec(start_id, len);
    return out;
}

std::vector<Path> admissible_face_paths(const FacePoset& poset, const Surjection& pi,
                                        const OrderedSetPartition& alpha) {
    int len = static_cast<int>(pi.source.size()) - static_cast<int>(pi.target.size());
    OrderedSetPartition start = induced_coarsening(pi, alpha);
    int start_id = poset.index_of(start);
    std::vector<Path> out;
    Path cur;
    cur.vertices.push_back(start_id);
    std::function<void(int, int)> rec = [&](int v, int remaining) {
        if (remaining == 0) {
            out.push_back(cur);
            return;
        }
        for (int id : poset.arrows_into_coarse(v)) {
            int fine = poset.arrows()[id].fine;
            if (factors_through(poset.face(fine), pi)) continue;
            cur.vertices.push_back(fine);
            rec(fine, remaining - 1);
            cur.vertices.pop_back();
        }
    };
    rec(start_id, len);
    return out;
}

Permutation Permutation::of(const FiniteIndexSet& ground, const std::vector<int>& images) {
    if (ground.size() != images.size())
        throw std::invalid_argument("Permutation: size mismatch");
    Permutation p;
    std::set<int> seen;
    for (size_t i = 0; i < ground.size(); ++i) {
        p.map[ground[i]] = images[i];
        if (!seen.insert(images[i]).second)
            throw std::invalid_argument("Permutation: images not distinct");
    }
    for (int x : ground)
        if (!p.map.count(x)) throw std::invalid_argument("Permutation: unmapped label");
    return p;
}

Permutation Permutation::identity(const FiniteIndexSet& ground) {
    return of(ground, ground);
}

Permutation Permutation::transposition(const FiniteIndexSet& ground, int a, int b) {
    std::vector<int> images = ground;
    for (auto& x : images) {
        if (x == a) x = b;
        else if (x == b) x = a;
    }
    return of(ground, images);
}

Permutation Permutation::compose(const Permutation& inner) const {
    Permutation p;
    for (const auto& [k, v] : inner.map) p.map[k] = map.at(v);
    return p;
}

int permutation_sign(const std::vector<int>& perm) {
    int n = static_cast<int>(perm.size());
    std::vector<bool> seen(n, false);
    int sign = 1;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        int len = 0, j = i;
        while (!seen[j]) {
            seen[j] = true;
            j = perm[j];
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

std::vector<int> slot_permutation(const Permutation& sigma, const SetPartition& x) {
    std::vector<std::vector<int>> mapped;
    for (const auto& b : x.blocks) {
        std::vector<int> nb;
        for (int e : b) nb.push_back(sigma(e));
        std::sort(nb.begin(), nb.end());
        mapped.push_back(std::move(nb));
    }
    // Canonical position of each image block = rank of its min element among mins.
    std::vector<int> mins;
    for (const auto& b : mapped) mins.push_back(b.front());
    std::vector<int> sorted = mins;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> slot(x.block_count());
    for (int i = 0; i < x.block_count(); ++i)
        slot[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), mins[i]) -
                                   sorted.begin());
    return slot;
}

ActedPartition act(const Permutation& sigma, const SetPartition& x) {
    std::vector<std::vector<int>> mapped;
    for (const auto& b : x.blocks) {
        std::vector<int> nb;
        for (int e : b) nb.push_back(sigma(e));
        mapped.push_back(std::move(nb));
    }
    ActedPartition r{SetPartition::of(std::move(mapped)),
                     permutation_sign(slot_permutation(sigma, x))};
    return r;
}

ActedOrderedPartition act(const Permutation& sigma, const OrderedSetPartition& x) {
    std::vector<std::vector<int>> mapped;
    for (const auto& b : x.blocks) {
        std::vector<int> nb;
        for (int e : b) nb.push_back(sigma(e));
        std::sort(nb.begin(), nb.end());
        mapped.push_back(std::move(nb));
    }
    return {OrderedSetPartition::of(std::move(mapped)), +1};
}

ActedPath act(const Permutation& sigma, const Path& x, const PartitionPoset& poset) {
    Path img;
    for (int v : x.vertices) {
        auto a = act(sigma, poset.vertex(v));
        img.vertices.push_back(poset.index_of(a.image));
    }
    int s0 = act(sigma, poset.vertex(x.vertices.front())).sign;
    int s1 = act(sigma, poset.vertex(x.vertices.back())).sign;
    return {img, s0 * s1};
}

}  // namespace ranq
