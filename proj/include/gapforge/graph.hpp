#pragma once

// Period cells of Z^n-periodic metric graphs and their decompositions
// Y = Y_0 ∪ Y_1 ∪ ... ∪ Y_m.
//
// A cell is a finite combinatorial graph. Points where the cell touches its
// lattice translates are modelled as degree-one "boundary" half-vertices sitting
// on edge interiors; each one is paired with its partner through a lattice
// shift: the pair (v, w, s) states that w is the translate of v by s.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gapforge/error.hpp"

namespace gapforge {

enum class VertexKind { interior, boundary };

struct Vertex {
    std::string id;
    VertexKind kind = VertexKind::interior;
};

struct Edge {
    std::string id;
    std::string from;
    std::string to;
    double length = 0.0;
};

struct BoundaryPair {
    std::string v;
    std::string w;
    std::vector<int> shift;
};

struct PeriodCell {
    int n = 1;
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<BoundaryPair> boundary_pairs;

    double total_length() const {
        double s = 0.0;
        for (const auto& e : edges) s += e.length;
        return s;
    }
};

struct Decomposition {
    int m = 0;
    std::map<std::string, int> edge_component;
    std::string tilde_v;
};

struct ComponentStats {
    std::vector<double> l;  // l_0 .. l_m
    std::vector<int> N;     // N_1 .. N_m

    int m() const { return static_cast<int>(N.size()); }
};

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool has(const std::string& code) const {
        for (const auto& v : violations)
            if (v.code == code) return true;
        return false;
    }
    void add(std::string code, std::string message) {
        violations.push_back({std::move(code), std::move(message)});
    }
    std::string summary() const {
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += v.code + ": " + v.message;
        }
        return s;
    }
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

// Index lookup built once per operation; ids stay strings in the public types.
struct CellIndex {
    std::unordered_map<std::string, std::size_t> vertex;
    std::unordered_map<std::string, std::size_t> edge;
    std::vector<std::vector<std::size_t>> incident;  // vertex -> edges (a loop would appear twice)

    explicit CellIndex(const PeriodCell& cell) : incident(cell.vertices.size()) {
        for (std::size_t i = 0; i < cell.vertices.size(); ++i) vertex.emplace(cell.vertices[i].id, i);
        for (std::size_t i = 0; i < cell.edges.size(); ++i) {
            edge.emplace(cell.edges[i].id, i);
            auto a = vertex.find(cell.edges[i].from);
            auto b = vertex.find(cell.edges[i].to);
            if (a != vertex.end()) incident[a->second].push_back(i);
            if (b != vertex.end()) incident[b->second].push_back(i);
        }
    }

    std::optional<std::size_t> find_vertex(const std::string& id) const {
        auto it = vertex.find(id);
        if (it == vertex.end()) return std::nullopt;
        return it->second;
    }

    std::size_t vertex_or_throw(const std::string& id, const std::string& field) const {
        auto v = find_vertex(id);
        if (!v) throw InvalidDecomposition("undefined vertex id '" + id + "'", field);
        return *v;
    }
};

inline std::string join_index(const std::vector<int>& idx) {
    std::string s;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k) s += ',';
        s += std::to_string(idx[k]);
    }
    return s;
}

}  // namespace detail

// Checks the standing assumptions on a period cell. Violations are reported as
// data; nothing is thrown.
inline ValidationReport validate_cell(const PeriodCell& cell) {
    ValidationReport rep;
    if (cell.n < 1) rep.add("lattice_dimension", "n must be positive, got " + std::to_string(cell.n));
    if (cell.edges.empty()) rep.add("no_edges", "cell has no edges");

    std::set<std::string> seen;
    for (const auto& v : cell.vertices)
        if (!seen.insert(v.id).second) rep.add("duplicate_id", "vertex id '" + v.id + "' repeated");
    seen.clear();
    for (const auto& e : cell.edges)
        if (!seen.insert(e.id).second) rep.add("duplicate_id", "edge id '" + e.id + "' repeated");

    const detail::CellIndex idx(cell);
    bool endpoints_ok = true;
    for (const auto& e : cell.edges) {
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            rep.add("nonpositive_length", "edge '" + e.id + "' has invalid length");
        for (const auto* end : {&e.from, &e.to}) {
            if (!idx.find_vertex(*end)) {
                rep.add("undefined_vertex", "edge '" + e.id + "' references unknown vertex '" + *end + "'");
                endpoints_ok = false;
            }
        }
        if (e.from == e.to) rep.add("loop_edge", "edge '" + e.id + "' is a loop at '" + e.from + "'");
    }

    std::map<std::string, int> pair_count;
    for (const auto& p : cell.boundary_pairs) {
        if (static_cast<int>(p.shift.size()) != cell.n)
            rep.add("shift_dimension", "pair (" + p.v + ", " + p.w + ") has shift of wrong length");
        else if (std::all_of(p.shift.begin(), p.shift.end(), [](int s) { return s == 0; }))
            rep.add("zero_shift", "pair (" + p.v + ", " + p.w + ") has zero shift");
        if (p.v == p.w) rep.add("pair_self", "boundary vertex '" + p.v + "' paired with itself");
        for (const auto* id : {&p.v, &p.w}) {
            auto vi = idx.find_vertex(*id);
            if (!vi) {
                rep.add("undefined_vertex", "boundary pair references unknown vertex '" + *id + "'");
                endpoints_ok = false;
            } else if (cell.vertices[*vi].kind != VertexKind::boundary) {
                rep.add("pair_not_boundary", "paired vertex '" + *id + "' is not a boundary vertex");
            }
            ++pair_count[*id];
        }
    }
    for (std::size_t i = 0; i < cell.vertices.size(); ++i) {
        const auto& v = cell.vertices[i];
        if (v.kind != VertexKind::boundary) continue;
        const int count = pair_count.count(v.id) ? pair_count.at(v.id) : 0;
        if (count == 0) rep.add("boundary_unpaired", "boundary vertex '" + v.id + "' is not paired");
        if (count > 1) rep.add("boundary_multiply_paired", "boundary vertex '" + v.id + "' is paired more than once");
        if (idx.incident[i].size() != 1)
            rep.add("boundary_degree", "boundary vertex '" + v.id + "' has degree " +
                                           std::to_string(idx.incident[i].size()) + ", expected 1");
    }
    if (cell.boundary_pairs.empty() && !cell.edges.empty())
        rep.add("no_boundary_pairs", "cell has no boundary pairs, translates never connect");

    if (endpoints_ok && !cell.vertices.empty()) {
        // Connectivity of the glued graph.
        detail::UnionFind glued(cell.vertices.size());
        detail::UnionFind local(cell.vertices.size());
        std::size_t local_cycles = 0;
        for (const auto& e : cell.edges) {
            const auto a = idx.vertex.at(e.from), b = idx.vertex.at(e.to);
            glued.unite(a, b);
            if (!local.unite(a, b)) ++local_cycles;
        }
        for (const auto& p : cell.boundary_pairs) glued.unite(idx.vertex.at(p.v), idx.vertex.at(p.w));
        const auto root = glued.find(0);
        for (std::size_t i = 1; i < cell.vertices.size(); ++i) {
            if (glued.find(i) != root) {
                rep.add("disconnected", "vertex '" + cell.vertices[i].id + "' is not connected to '" +
                                            cell.vertices[0].id + "' after gluing");
                break;
            }
        }
        std::size_t max_interior_degree = 0;
        for (std::size_t i = 0; i < cell.vertices.size(); ++i)
            if (cell.vertices[i].kind == VertexKind::interior)
                max_interior_degree = std::max(max_interior_degree, idx.incident[i].size());
        if (max_interior_degree < 3 && local_cycles == 0)
            rep.add("graph_is_line", "no vertex of degree >= 3 and no cycle: the periodic graph is a line");
    }
    return rep;
}

inline void require_valid(const PeriodCell& cell) {
    const auto rep = validate_cell(cell);
    if (!rep.ok()) throw InvalidCell("invalid period cell: " + rep.summary());
}

// Glues prod(counts) translated copies of the cell into one larger cell.
// Copy ids get the suffix "@i1,...,in". A boundary pair whose partner copy lies
// inside the block is glued: the w half-vertex is dropped, its edge is
// re-attached to v's copy, which becomes an interior vertex. Remaining pairs
// carry shifts measured in units of the coarser lattice.
inline PeriodCell tile_cell(const PeriodCell& cell, const std::vector<int>& counts) {
    require_valid(cell);
    if (static_cast<int>(counts.size()) != cell.n)
        throw InvalidCell("tile counts must have one entry per lattice direction", "counts");
    for (int c : counts)
        if (c < 1) throw InvalidCell("tile counts must be positive", "counts");

    std::vector<std::vector<int>> copies{{}};
    for (int c : counts) {
        std::vector<std::vector<int>> next;
        for (const auto& prefix : copies)
            for (int i = 0; i < c; ++i) {
                auto idx = prefix;
                idx.push_back(i);
                next.push_back(std::move(idx));
            }
        copies = std::move(next);
    }
    auto name = [](const std::string& id, const std::vector<int>& i) { return id + "@" + detail::join_index(i); };

    // Resolve every (w, copy) to either a glued interior vertex or a new pair.
    std::map<std::string, std::string> redirect;  // old w copy id -> v copy id
    std::set<std::string> glued_v;
    PeriodCell out;
    out.n = cell.n;
    for (const auto& i : copies) {
        for (const auto& p : cell.boundary_pairs) {
            std::vector<int> target(cell.n), wrap(cell.n);
            bool inside = true;
            for (int k = 0; k < cell.n; ++k) {
                const int t = i[k] + p.shift[k];
                const int r = ((t % counts[k]) + counts[k]) % counts[k];
                target[k] = r;
                wrap[k] = (t - r) / counts[k];
                if (wrap[k] != 0) inside = false;
            }
            if (inside) {
                redirect[name(p.w, i)] = name(p.v, target);
                glued_v.insert(name(p.v, target));
            } else {
                out.boundary_pairs.push_back({name(p.v, target), name(p.w, i), wrap});
            }
        }
    }
    for (const auto& i : copies) {
        for (const auto& v : cell.vertices) {
            const auto id = name(v.id, i);
            if (redirect.count(id)) continue;
            const auto kind = glued_v.count(id) ? VertexKind::interior : v.kind;
            out.vertices.push_back({id, kind});
        }
        for (const auto& e : cell.edges) {
            auto from = name(e.from, i), to = name(e.to, i);
            if (auto it = redirect.find(from); it != redirect.end()) from = it->second;
            if (auto it = redirect.find(to); it != redirect.end()) to = it->second;
            out.edges.push_back({name(e.id, i), from, to, e.length});
        }
    }
    return out;
}

// Decomposition for a tiled cell: component j >= 1 of copy c becomes
// j + c*m (copies in the order used by tile_cell); Y_0 is shared and the
// delta vertex is taken from copy 0.
inline Decomposition replicate_decomposition(const PeriodCell& cell, const Decomposition& d,
                                             const std::vector<int>& counts) {
    std::vector<std::vector<int>> copies{{}};
    for (int c : counts) {
        std::vector<std::vector<int>> next;
        for (const auto& prefix : copies)
            for (int i = 0; i < c; ++i) {
                auto idx = prefix;
                idx.push_back(i);
                next.push_back(std::move(idx));
            }
        copies = std::move(next);
    }
    Decomposition out;
    out.m = d.m * static_cast<int>(copies.size());
    for (std::size_t c = 0; c < copies.size(); ++c) {
        const auto suffix = "@" + detail::join_index(copies[c]);
        for (const auto& e : cell.edges) {
            auto it = d.edge_component.find(e.id);
            if (it == d.edge_component.end()) continue;
            const int j = it->second;
            out.edge_component[e.id + suffix] = j == 0 ? 0 : j + static_cast<int>(c) * d.m;
        }
    }
    out.tilde_v = d.tilde_v + "@" + detail::join_index(copies.front());
    return out;
}

namespace detail {

struct ComponentSets {
    std::vector<std::set<std::size_t>> vertices;  // per component
    std::vector<std::vector<std::size_t>> edges;   // per component
};

inline ComponentSets component_sets(const PeriodCell& cell, const Decomposition& d, const CellIndex& idx,
                                    ValidationReport* rep) {
    ComponentSets sets;
    sets.vertices.resize(d.m + 1);
    sets.edges.resize(d.m + 1);
    for (const auto& [eid, j] : d.edge_component)
        if (!idx.edge.count(eid))
            throw InvalidDecomposition("decomposition references undefined edge id '" + eid + "'",
                                       "decomposition.edge_component");
    for (std::size_t i = 0; i < cell.edges.size(); ++i) {
        const auto& e = cell.edges[i];
        auto it = d.edge_component.find(e.id);
        if (it == d.edge_component.end()) {
            if (rep) rep->add("unassigned_edge", "edge '" + e.id + "' is not assigned to a component");
            continue;
        }
        const int j = it->second;
        if (j < 0 || j > d.m) {
            if (rep) rep->add("component_out_of_range", "edge '" + e.id + "' assigned to component " + std::to_string(j));
            continue;
        }
        sets.edges[j].push_back(i);
        sets.vertices[j].insert(idx.vertex_or_throw(e.from, "edges"));
        sets.vertices[j].insert(idx.vertex_or_throw(e.to, "edges"));
    }
    return sets;
}

}  // namespace detail

// Checks conditions (i)-(v) on Y = Y_0 ∪ ... ∪ Y_m. Violations are data;
// references to undefined ids throw InvalidDecomposition.
inline ValidationReport validate_decomposition(const PeriodCell& cell, const Decomposition& d) {
    ValidationReport rep;
    if (d.m < 1) {
        rep.add("component_count", "m must be positive");
        return rep;
    }
    const detail::CellIndex idx(cell);
    const auto sets = detail::component_sets(cell, d, idx, &rep);

    // (i) each Y_j is nonempty and connected inside the cell.
    for (int j = 0; j <= d.m; ++j) {
        if (sets.edges[j].empty()) {
            rep.add("condition_i", "Y_" + std::to_string(j) + " is empty");
            continue;
        }
        detail::UnionFind uf(cell.vertices.size());
        for (auto ei : sets.edges[j]) uf.unite(idx.vertex.at(cell.edges[ei].from), idx.vertex.at(cell.edges[ei].to));
        const auto root = uf.find(*sets.vertices[j].begin());
        for (auto v : sets.vertices[j]) {
            if (uf.find(v) != root) {
                rep.add("condition_i", "Y_" + std::to_string(j) + " is disconnected");
                break;
            }
        }
    }

    // (ii) boundary points belong to Y_0 only.
    for (std::size_t vi = 0; vi < cell.vertices.size(); ++vi) {
        if (cell.vertices[vi].kind != VertexKind::boundary) continue;
        for (auto ei : idx.incident[vi]) {
            auto it = d.edge_component.find(cell.edges[ei].id);
            if (it != d.edge_component.end() && it->second != 0)
                rep.add("condition_ii", "boundary vertex '" + cell.vertices[vi].id + "' touches Y_" +
                                            std::to_string(it->second));
        }
        for (int j = 1; j <= d.m; ++j)
            if (sets.vertices[j].count(vi) && !rep.has("condition_ii"))
                rep.add("condition_ii", "boundary vertex '" + cell.vertices[vi].id + "' lies in Y_" + std::to_string(j));
    }

    // (iii) attached components are pairwise vertex-disjoint.
    for (int j = 1; j <= d.m; ++j)
        for (int k = j + 1; k <= d.m; ++k)
            for (auto v : sets.vertices[j])
                if (sets.vertices[k].count(v)) {
                    rep.add("condition_iii", "Y_" + std::to_string(j) + " and Y_" + std::to_string(k) +
                                                 " share vertex '" + cell.vertices[v].id + "'");
                    break;
                }

    // (iv) V_j = Y_j ∩ Y_0 is nonempty.
    for (int j = 1; j <= d.m; ++j) {
        bool any = false;
        for (auto v : sets.vertices[j]) any = any || sets.vertices[0].count(v) > 0;
        if (!any) rep.add("condition_iv", "V_" + std::to_string(j) + " = Y_" + std::to_string(j) + " ∩ Y_0 is empty");
    }

    // (v) the delta vertex is an interior vertex of Y_0 away from every Y_j.
    const auto tv = idx.find_vertex(d.tilde_v);
    if (!tv) throw InvalidDecomposition("tilde_v references undefined vertex '" + d.tilde_v + "'", "decomposition.tilde_v");
    if (cell.vertices[*tv].kind != VertexKind::interior)
        rep.add("condition_v", "tilde_v '" + d.tilde_v + "' is a boundary vertex");
    else if (!sets.vertices[0].count(*tv))
        rep.add("condition_v", "tilde_v '" + d.tilde_v + "' is not a vertex of Y_0");
    else
        for (int j = 1; j <= d.m; ++j)
            if (sets.vertices[j].count(*tv)) {
                rep.add("condition_v", "tilde_v '" + d.tilde_v + "' belongs to Y_" + std::to_string(j));
                break;
            }
    return rep;
}

inline void require_valid(const PeriodCell& cell, const Decomposition& d) {
    require_valid(cell);
    const auto rep = validate_decomposition(cell, d);
    if (!rep.ok()) throw InvalidDecomposition("invalid decomposition: " + rep.summary());
}

// Vertex ids of V_j = Y_j ∩ Y_0 for j = 1..m (index 0 unused, left empty).
inline std::vector<std::set<std::string>> attachment_vertices(const PeriodCell& cell, const Decomposition& d) {
    const detail::CellIndex idx(cell);
    const auto sets = detail::component_sets(cell, d, idx, nullptr);
    std::vector<std::set<std::string>> out(d.m + 1);
    for (int j = 1; j <= d.m; ++j)
        for (auto v : sets.vertices[j])
            if (sets.vertices[0].count(v)) out[j].insert(cell.vertices[v].id);
    return out;
}

inline ComponentStats component_stats(const PeriodCell& cell, const Decomposition& d) {
    require_valid(cell, d);
    ComponentStats st;
    st.l.assign(d.m + 1, 0.0);
    for (const auto& e : cell.edges) st.l[d.edge_component.at(e.id)] += e.length;
    const auto attach = attachment_vertices(cell, d);
    for (int j = 1; j <= d.m; ++j) st.N.push_back(static_cast<int>(attach[j].size()));
    return st;
}

}  // namespace gapforge
