#pragma once

// Exact secular function of a fiber operator, used to cross-check the finite
// element eigenvalues.
//
// On every edge u(x) = a·c(x) + b·s(x) with c = cos(√(ελ)x) and
// s = sin(√(ελ)x)/√(ελ), both entire in λ (hyperbolic for λ < 0). Imposing the
// vertex matching conditions and the boundary pairing gives a square linear
// system in the 2E coefficients; λ is a fiber eigenvalue iff it is singular.
//
// Matching conditions (outgoing derivatives ∂u):
//   ordinary vertex    continuity, Σ ∂u = γε u(v) at ṽ and 0 elsewhere
//   attachment vertex  continuity per side,
//                      Σ_{Y_0} ∂u = αε (u_0 − β u_j),
//                      Σ_{Y_j} ∂u = −αβε (u_0 − β u_j)
//   boundary pair      u(w) = θ^s u(v), ∂u(w) = −θ^s ∂u(v)
// The factor β in the second attachment condition is what the quadratic form
// produces on integrating by parts.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gapforge/error.hpp"
#include "gapforge/fiber.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/limit_model.hpp"

namespace gapforge {

struct SecularValue {
    double value = 0.0;        // Re of det S(λ) / det S(λ_ref)
    double imag = 0.0;         // Im of the same ratio (zero up to rounding for real-structured problems)
    double reference = 0.0;    // λ_ref actually used
    bool reference_perturbed = false;
};

namespace detail {

struct EdgeFunctions {
    double c = 1.0, s = 0.0, dc = 0.0, ds = 1.0;  // values and x-derivatives at x = L
};

inline EdgeFunctions edge_functions(double z, double L) {
    EdgeFunctions f;
    if (z > 0.0) {
        const double k = std::sqrt(z);
        f.c = std::cos(k * L);
        f.s = std::sin(k * L) / k;
    } else if (z < 0.0) {
        const double k = std::sqrt(-z);
        f.c = std::cosh(k * L);
        f.s = std::sinh(k * L) / k;
    } else {
        f.c = 1.0;
        f.s = L;
    }
    f.dc = -z * f.s;
    f.ds = f.c;
    return f;
}

class SecularSystem {
public:
    SecularSystem(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c, double epsilon,
                  const Boundary& b)
        : cell_(cell), coupling_(c), epsilon_(epsilon), boundary_(b), index_(cell) {
        require_valid(cell, d);
        if (c.alpha.size() != static_cast<std::size_t>(d.m) || c.beta.size() != static_cast<std::size_t>(d.m))
            throw InvalidCoupling("coupling sizes do not match m", "couplings");
        if (!(epsilon > 0.0)) throw InvalidFiberSpec("epsilon must be positive", "epsilon");
        if (b.variant == BoundaryVariant::quasiperiodic && static_cast<int>(b.theta.size()) != cell.n)
            throw InvalidFiberSpec("theta must have one entry per lattice direction", "theta");
        edge_component_.resize(cell.edges.size());
        for (std::size_t e = 0; e < cell.edges.size(); ++e) edge_component_[e] = d.edge_component.at(cell.edges[e].id);
        vertex_component_.assign(cell.vertices.size(), 0);
        const auto attach = attachment_vertices(cell, d);
        for (int j = 1; j <= d.m; ++j)
            for (const auto& id : attach[j]) vertex_component_[index_.vertex.at(id)] = j;
        tilde_ = index_.vertex.at(d.tilde_v);
    }

    Eigen::MatrixXcd matrix(double lambda) const {
        const auto E = cell_.edges.size();
        const double z = epsilon_ * lambda;
        std::vector<EdgeFunctions> f(E);
        for (std::size_t e = 0; e < E; ++e) f[e] = edge_functions(z, cell_.edges[e].length);

        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(2 * E, 2 * E);
        int row = 0;
        // Row helpers: an edge end contributes to value rows and flux rows.
        auto add_value = [&](int r, std::size_t e, bool at_to, cplx w) {
            if (!at_to) {
                S(r, 2 * e) += w;
            } else {
                S(r, 2 * e) += w * f[e].c;
                S(r, 2 * e + 1) += w * f[e].s;
            }
        };
        auto add_flux = [&](int r, std::size_t e, bool at_to, cplx w) {
            if (!at_to) {
                S(r, 2 * e + 1) += w;
            } else {
                S(r, 2 * e) -= w * f[e].dc;
                S(r, 2 * e + 1) -= w * f[e].ds;
            }
        };
        struct End {
            std::size_t edge;
            bool at_to;
        };
        auto ends_of = [&](std::size_t v) {
            std::vector<End> out;
            for (std::size_t e = 0; e < E; ++e) {
                if (index_.vertex.at(cell_.edges[e].from) == v) out.push_back({e, false});
                if (index_.vertex.at(cell_.edges[e].to) == v) out.push_back({e, true});
            }
            return out;
        };

        for (std::size_t v = 0; v < cell_.vertices.size(); ++v) {
            if (cell_.vertices[v].kind == VertexKind::boundary) continue;
            const auto ends = ends_of(v);
            const int j = vertex_component_[v];
            if (j == 0) {
                for (std::size_t i = 1; i < ends.size(); ++i, ++row) {
                    add_value(row, ends[i].edge, ends[i].at_to, 1.0);
                    add_value(row, ends[0].edge, ends[0].at_to, -1.0);
                }
                for (const auto& end : ends) add_flux(row, end.edge, end.at_to, 1.0);
                if (v == tilde_) add_value(row, ends[0].edge, ends[0].at_to, -coupling_.gamma * epsilon_);
                ++row;
                continue;
            }
            std::vector<End> side0, sidej;
            for (const auto& end : ends) (edge_component_[end.edge] == 0 ? side0 : sidej).push_back(end);
            for (const auto* side : {&side0, &sidej})
                for (std::size_t i = 1; i < side->size(); ++i, ++row) {
                    add_value(row, (*side)[i].edge, (*side)[i].at_to, 1.0);
                    add_value(row, (*side)[0].edge, (*side)[0].at_to, -1.0);
                }
            const double ae = coupling_.alpha[j - 1] * epsilon_, bt = coupling_.beta[j - 1];
            for (const auto& end : side0) add_flux(row, end.edge, end.at_to, 1.0);
            add_value(row, side0[0].edge, side0[0].at_to, -ae);
            add_value(row, sidej[0].edge, sidej[0].at_to, ae * bt);
            ++row;
            for (const auto& end : sidej) add_flux(row, end.edge, end.at_to, 1.0);
            add_value(row, side0[0].edge, side0[0].at_to, ae * bt);
            add_value(row, sidej[0].edge, sidej[0].at_to, -ae * bt * bt);
            ++row;
        }
        for (const auto& pair : cell_.boundary_pairs) {
            const auto ev = ends_of(index_.vertex.at(pair.v)).front();
            const auto ew = ends_of(index_.vertex.at(pair.w)).front();
            switch (boundary_.variant) {
                case BoundaryVariant::quasiperiodic: {
                    const cplx t = theta_power(boundary_.theta, pair.shift);
                    add_value(row, ew.edge, ew.at_to, 1.0);
                    add_value(row, ev.edge, ev.at_to, -t);
                    ++row;
                    add_flux(row, ew.edge, ew.at_to, 1.0);
                    add_flux(row, ev.edge, ev.at_to, t);
                    ++row;
                    break;
                }
                case BoundaryVariant::neumann:
                    add_flux(row++, ev.edge, ev.at_to, 1.0);
                    add_flux(row++, ew.edge, ew.at_to, 1.0);
                    break;
                case BoundaryVariant::dirichlet:
                    add_value(row++, ev.edge, ev.at_to, 1.0);
                    add_value(row++, ew.edge, ew.at_to, 1.0);
                    break;
            }
        }
        if (row != static_cast<int>(2 * E)) throw NumericalError("secular system is not square");
        return S;
    }

    cplx determinant(double lambda) const { return matrix(lambda).partialPivLu().determinant(); }

private:
    PeriodCell cell_;
    CouplingSpec coupling_;
    double epsilon_;
    Boundary boundary_;
    CellIndex index_;
    std::vector<int> edge_component_;
    std::vector<int> vertex_component_;
    std::size_t tilde_ = 0;
};

}  // namespace detail

// det S(λ) normalised by det S(λ_ref), λ_ref = min_j A_j − 1 unless given.
// The c/s basis has unit Wronskian on every edge, so no further edge scaling
// is needed. If λ_ref happens to be an eigenvalue it is nudged downward until
// the normalisation is nonsingular.
inline SecularValue secular_value(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c,
                                  double epsilon, const Boundary& b, double lambda,
                                  std::optional<double> lambda_ref = std::nullopt) {
    const detail::SecularSystem sys(cell, d, c, epsilon, b);
    SecularValue out;
    if (lambda_ref) {
        out.reference = *lambda_ref;
    } else {
        const auto A = raw_A(component_stats(cell, d), c);
        out.reference = (A.empty() ? 0.0 : *std::min_element(A.begin(), A.end())) - 1.0;
    }
    cplx ref = sys.determinant(out.reference);
    const cplx probe = sys.determinant(out.reference - 1.0);
    for (int k = 0; std::abs(ref) <= 1e-12 * std::abs(probe) && k < 60; ++k) {
        out.reference -= 1e-3 * (k + 1);
        out.reference_perturbed = true;
        ref = sys.determinant(out.reference);
    }
    if (std::abs(ref) == 0.0) throw NumericalError("secular normalisation is singular");
    const cplx r = sys.determinant(lambda) / ref;
    out.value = r.real();
    out.imag = r.imag();
    return out;
}

}  // namespace gapforge
