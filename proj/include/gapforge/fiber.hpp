#pragma once

// Floquet–Bloch fiber operators on a period cell.
//
// The fiber form is
//   ε⁻¹ Σ_e ∫ |u'|²  +  Σ_j Σ_{v∈V_j} α_j |u_0(v) − β_j u_j(v)|²  +  γ |u(ṽ)|²
// on functions that are continuous at ordinary vertices, carry one value per
// side (Y_0 side, Y_j side) at attachment vertices, and satisfy
// u(w) = θ^s u(v) for every boundary pair (v, w, s). It is discretised with
// continuous piecewise-linear elements and a consistent mass matrix; the
// vertex terms are exact point evaluations.
//
// Neumann and Dirichlet comparison operators differ only at boundary pairs:
// both half-vertices are left free, or both are pinned to zero.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gapforge/error.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/limit_model.hpp"

namespace gapforge {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class BoundaryVariant { quasiperiodic, neumann, dirichlet };

struct Boundary {
    BoundaryVariant variant = BoundaryVariant::quasiperiodic;
    std::vector<cplx> theta;  // used by the quasiperiodic variant only

    static Boundary quasiperiodic(std::vector<cplx> theta) {
        return {BoundaryVariant::quasiperiodic, std::move(theta)};
    }
    static Boundary from_phases(const std::vector<double>& phases) {
        std::vector<cplx> t;
        for (double p : phases) t.push_back(std::polar(1.0, p));
        return quasiperiodic(std::move(t));
    }
    static Boundary periodic(int n) { return quasiperiodic(std::vector<cplx>(n, cplx(1.0, 0.0))); }
    static Boundary antiperiodic(int n) { return quasiperiodic(std::vector<cplx>(n, cplx(-1.0, 0.0))); }
    static Boundary neumann() { return {BoundaryVariant::neumann, {}}; }
    static Boundary dirichlet() { return {BoundaryVariant::dirichlet, {}}; }
};

inline constexpr double kRichardsonThreshold = 1e-6;
inline constexpr int kDefaultMesh = 32;

struct FiberSpec {
    double epsilon = 1.0;
    Boundary boundary = Boundary::periodic(1);
    int mesh = kDefaultMesh;  // elements per unit length, at least 4 per edge
    int k_max = 6;
    double tolerance = kRichardsonThreshold;  // below the threshold eigenvalues are Richardson-extrapolated
};

struct NodeRef {
    int dof = -1;  // -1: value pinned to zero
    cplx coeff{0.0, 0.0};
};

struct DofMap {
    int size = 0;
    std::vector<int> elements;                  // per edge
    std::vector<std::vector<NodeRef>> nodes;    // per edge, elements+1 nodes from `from` to `to`
    std::map<std::string, std::vector<int>> vertex_dofs;  // attachment vertices list (Y_0 side, Y_j side)
    int boundary_dofs = 0;                      // trailing dofs that live on boundary half-vertices
};

struct FiberProblem {
    Eigen::MatrixXcd stiffness;
    Eigen::MatrixXcd mass;
    DofMap dofs;
};

inline CouplingSpec zero_coupling(int m) {
    return CouplingSpec{std::vector<double>(m, 0.0), std::vector<double>(m, 1.0), 0.0};
}

namespace detail {

inline cplx theta_power(const std::vector<cplx>& theta, const std::vector<int>& shift) {
    cplx r(1.0, 0.0);
    for (std::size_t k = 0; k < shift.size(); ++k) {
        const cplx base = shift[k] >= 0 ? theta[k] : std::conj(theta[k]);
        for (int i = 0; i < std::abs(shift[k]); ++i) r *= base;
    }
    return r;
}

// Light structural check for cells that need not satisfy the full standing
// assumptions (sub-cells Y_0 and Y_j used for the decoupled operators).
inline void require_structure(const PeriodCell& cell) {
    const CellIndex idx(cell);
    for (const auto& e : cell.edges) {
        if (!(e.length > 0.0) || !std::isfinite(e.length)) throw InvalidCell("edge '" + e.id + "' has invalid length");
        if (!idx.find_vertex(e.from) || !idx.find_vertex(e.to))
            throw InvalidCell("edge '" + e.id + "' references an unknown vertex");
        if (e.from == e.to) throw InvalidCell("edge '" + e.id + "' is a loop");
    }
    for (const auto& p : cell.boundary_pairs) {
        if (static_cast<int>(p.shift.size()) != cell.n) throw InvalidCell("boundary pair shift has wrong length");
        for (const auto* id : {&p.v, &p.w}) {
            auto v = idx.find_vertex(*id);
            if (!v) throw InvalidCell("boundary pair references unknown vertex '" + *id + "'");
            if (idx.incident[*v].size() != 1) throw InvalidCell("boundary vertex '" + *id + "' must have degree 1");
        }
    }
    if (cell.edges.empty()) throw InvalidCell("cell has no edges");
}

}  // namespace detail

// A cell with its vertex roles resolved and couplings fixed. Cheap to copy;
// assembling for different θ reuses it.
class FiberModel {
public:
    FiberModel(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c, double epsilon,
               int mesh = kDefaultMesh)
        : cell_(cell), epsilon_(epsilon), coupling_(c) {
        require_valid(cell, d);
        if (c.alpha.size() != static_cast<std::size_t>(d.m) || c.beta.size() != static_cast<std::size_t>(d.m))
            throw InvalidCoupling("coupling sizes do not match m = " + std::to_string(d.m), "couplings");
        for (double x : c.alpha)
            if (!std::isfinite(x)) throw InvalidCoupling("alpha must be finite", "couplings.alpha");
        for (double x : c.beta)
            if (!std::isfinite(x)) throw InvalidCoupling("beta must be finite", "couplings.beta");
        if (!std::isfinite(c.gamma)) throw InvalidCoupling("gamma must be finite", "couplings.gamma");
        init_common(mesh);
        for (std::size_t e = 0; e < cell.edges.size(); ++e) edge_component_[e] = d.edge_component.at(cell.edges[e].id);
        const auto attach = attachment_vertices(cell, d);
        for (int j = 1; j <= d.m; ++j)
            for (const auto& id : attach[j]) vertex_component_[index_.vertex.at(id)] = j;
        tilde_ = static_cast<int>(index_.vertex.at(d.tilde_v));
    }

    // Plain Laplacian ε⁻¹ Σ ∫|u'|² with Kirchhoff conditions everywhere.
    static FiberModel laplacian(const PeriodCell& cell, double epsilon, int mesh = kDefaultMesh) {
        return FiberModel(cell, epsilon, mesh);
    }

    const PeriodCell& cell() const { return cell_; }
    double epsilon() const { return epsilon_; }
    const std::vector<int>& elements() const { return elements_; }

    FiberProblem assemble(const Boundary& b, int refine = 1) const;

    // Smallest k_max eigenvalues, ascending with multiplicity. With
    // `richardson` the mesh is doubled and (4 λ_fine − λ_coarse)/3 returned.
    std::vector<double> eigenvalues(const Boundary& b, int k_max, bool richardson = false) const;

private:
    FiberModel(const PeriodCell& cell, double epsilon, int mesh) : cell_(cell), epsilon_(epsilon) {
        detail::require_structure(cell);
        init_common(mesh);
    }

    void init_common(int mesh) {
        if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) throw InvalidFiberSpec("epsilon must be positive", "epsilon");
        if (mesh < 1) throw InvalidFiberSpec("mesh density must be at least 1 element per unit length", "mesh");
        index_ = detail::CellIndex(cell_);
        edge_component_.assign(cell_.edges.size(), 0);
        vertex_component_.assign(cell_.vertices.size(), 0);
        elements_.clear();
        for (const auto& e : cell_.edges)
            elements_.push_back(std::max(4, static_cast<int>(std::ceil(mesh * e.length - 1e-9))));
    }

    PeriodCell cell_;
    double epsilon_ = 1.0;
    CouplingSpec coupling_;
    detail::CellIndex index_{PeriodCell{}};
    std::vector<int> edge_component_;
    std::vector<int> vertex_component_;  // j > 0 for attachment vertices of Y_j
    std::vector<int> elements_;
    int tilde_ = -1;
};

inline FiberProblem FiberModel::assemble(const Boundary& b, int refine) const {
    if (b.variant == BoundaryVariant::quasiperiodic) {
        if (static_cast<int>(b.theta.size()) != cell_.n)
            throw InvalidFiberSpec("theta must have one entry per lattice direction", "theta");
        for (const auto& t : b.theta)
            if (std::abs(std::abs(t) - 1.0) > 1e-14) throw InvalidFiberSpec("theta entries must be unimodular", "theta");
    }
    const auto nv = cell_.vertices.size();
    FiberProblem p;
    DofMap& map = p.dofs;
    int next = 0;

    // Vertex dofs: one for ordinary interior vertices, two at attachment vertices.
    std::vector<std::vector<int>> vdof(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        if (cell_.vertices[v].kind == VertexKind::boundary) continue;
        vdof[v].push_back(next++);
        if (vertex_component_[v] > 0) {
            vdof[v].push_back(next++);
            map.vertex_dofs[cell_.vertices[v].id] = vdof[v];
        }
    }
    // Interior edge nodes.
    map.elements.resize(cell_.edges.size());
    std::vector<int> first_interior(cell_.edges.size());
    for (std::size_t e = 0; e < cell_.edges.size(); ++e) {
        map.elements[e] = elements_[e] * refine;
        first_interior[e] = next;
        next += map.elements[e] - 1;
    }
    // Boundary half-vertices go last.
    std::vector<NodeRef> bref(nv);
    const int before_boundary = next;
    for (const auto& pair : cell_.boundary_pairs) {
        const auto v = index_.vertex.at(pair.v), w = index_.vertex.at(pair.w);
        switch (b.variant) {
            case BoundaryVariant::quasiperiodic:
                bref[v] = {next, cplx(1.0, 0.0)};
                bref[w] = {next, detail::theta_power(b.theta, pair.shift)};
                ++next;
                break;
            case BoundaryVariant::neumann:
                bref[v] = {next++, cplx(1.0, 0.0)};
                bref[w] = {next++, cplx(1.0, 0.0)};
                break;
            case BoundaryVariant::dirichlet:
                bref[v] = {-1, cplx(0.0, 0.0)};
                bref[w] = {-1, cplx(0.0, 0.0)};
                break;
        }
    }
    map.size = next;
    map.boundary_dofs = next - before_boundary;

    auto endpoint = [&](std::size_t v, int component) -> NodeRef {
        if (cell_.vertices[v].kind == VertexKind::boundary) return bref[v];
        if (vertex_component_[v] > 0 && component != 0) return {vdof[v][1], cplx(1.0, 0.0)};
        return {vdof[v][0], cplx(1.0, 0.0)};
    };

    p.stiffness = Eigen::MatrixXcd::Zero(next, next);
    p.mass = Eigen::MatrixXcd::Zero(next, next);
    map.nodes.resize(cell_.edges.size());
    for (std::size_t e = 0; e < cell_.edges.size(); ++e) {
        const auto& edge = cell_.edges[e];
        const int ne = map.elements[e];
        auto& nodes = map.nodes[e];
        nodes.resize(ne + 1);
        nodes[0] = endpoint(index_.vertex.at(edge.from), edge_component_[e]);
        nodes[ne] = endpoint(index_.vertex.at(edge.to), edge_component_[e]);
        for (int i = 1; i < ne; ++i) nodes[i] = {first_interior[e] + i - 1, cplx(1.0, 0.0)};

        const double h = edge.length / ne;
        const double ks = 1.0 / (epsilon_ * h), ms = h / 6.0;
        const double kloc[2][2] = {{ks, -ks}, {-ks, ks}};
        const double mloc[2][2] = {{2 * ms, ms}, {ms, 2 * ms}};
        for (int i = 0; i < ne; ++i) {
            const NodeRef* r[2] = {&nodes[i], &nodes[i + 1]};
            for (int a = 0; a < 2; ++a) {
                if (r[a]->dof < 0) continue;
                for (int c = 0; c < 2; ++c) {
                    if (r[c]->dof < 0) continue;
                    const cplx w = std::conj(r[a]->coeff) * r[c]->coeff;
                    p.stiffness(r[a]->dof, r[c]->dof) += w * kloc[a][c];
                    p.mass(r[a]->dof, r[c]->dof) += w * mloc[a][c];
                }
            }
        }
    }
    // Point terms.
    for (std::size_t v = 0; v < nv; ++v) {
        const int j = vertex_component_[v];
        if (j == 0) continue;
        const double a = coupling_.alpha[j - 1], bt = coupling_.beta[j - 1];
        const int d0 = vdof[v][0], dj = vdof[v][1];
        p.stiffness(d0, d0) += a;
        p.stiffness(d0, dj) -= a * bt;
        p.stiffness(dj, d0) -= a * bt;
        p.stiffness(dj, dj) += a * bt * bt;
    }
    if (tilde_ >= 0) p.stiffness(vdof[tilde_][0], vdof[tilde_][0]) += coupling_.gamma;
    return p;
}

inline std::vector<double> fiber_eigenvalues(const FiberProblem& p, int k_max) {
    const auto n = p.stiffness.rows();
    if (k_max < 1 || k_max > n)
        throw InvalidFiberSpec("k_max must lie in [1, " + std::to_string(n) + "]", "k_max");
    // Cholesky of the mass matrix; the stiffness may be indefinite.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(p.stiffness, p.mass, Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) throw SolverFailure("generalized Hermitian eigensolver did not converge");
    const auto& ev = ges.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + n);
    std::sort(out.begin(), out.end());
    out.resize(k_max);
    return out;
}

inline std::vector<double> FiberModel::eigenvalues(const Boundary& b, int k_max, bool richardson) const {
    auto coarse = fiber_eigenvalues(assemble(b, 1), k_max);
    if (!richardson) return coarse;
    const auto fine = fiber_eigenvalues(assemble(b, 2), k_max);
    for (int k = 0; k < k_max; ++k) coarse[k] = (4.0 * fine[k] - coarse[k]) / 3.0;
    return coarse;
}

inline FiberProblem assemble_fiber(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c,
                                   const FiberSpec& spec) {
    return FiberModel(cell, d, c, spec.epsilon, spec.mesh).assemble(spec.boundary);
}

// Eigenvalues for a full spec, extrapolated when the requested tolerance is tight.
inline std::vector<double> solve_fiber(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c,
                                       const FiberSpec& spec) {
    return FiberModel(cell, d, c, spec.epsilon, spec.mesh)
        .eigenvalues(spec.boundary, spec.k_max, spec.tolerance < kRichardsonThreshold);
}

}  // namespace gapforge
