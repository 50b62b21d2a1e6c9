#pragma once

// Small reference cells used throughout the tests, the CLI samples and the
// acceptance suite.

#include "gapforge/graph.hpp"

namespace gapforge::catalog {

// Z-periodic chain of "twins": v and w are joined both by the path v–c–w
// (through the delta vertex c) and by a direct edge of length 1.
//
//   b0 --½-- v --½-- c --½-- w --½-- b1        b1 = b0 + 1
//            \_______ 1 _______/
inline PeriodCell twin_chain() {
    PeriodCell cell;
    cell.n = 1;
    cell.vertices = {{"b0", VertexKind::boundary}, {"v", VertexKind::interior}, {"c", VertexKind::interior},
                     {"w", VertexKind::interior},  {"b1", VertexKind::boundary}};
    cell.edges = {{"e0", "b0", "v", 0.5}, {"e1", "v", "c", 0.5}, {"e2", "c", "w", 0.5},
                  {"e3", "w", "b1", 0.5}, {"e4", "v", "w", 1.0}};
    cell.boundary_pairs = {{"b0", "b1", {1}}};
    return cell;
}

inline Decomposition twin_chain_decomposition() {
    Decomposition d;
    d.m = 1;
    d.edge_component = {{"e0", 0}, {"e1", 0}, {"e2", 0}, {"e3", 0}, {"e4", 1}};
    d.tilde_v = "c";
    return d;
}

// A straight periodic chain b0 - x1 - ... - x_{k-1} - b1 with k unit edges.
inline PeriodCell line_cell(int segments) {
    PeriodCell cell;
    cell.n = 1;
    cell.vertices.push_back({"b0", VertexKind::boundary});
    for (int i = 1; i < segments; ++i) cell.vertices.push_back({"x" + std::to_string(i), VertexKind::interior});
    cell.vertices.push_back({"b1", VertexKind::boundary});
    for (int i = 0; i < segments; ++i) {
        const std::string from = i == 0 ? "b0" : "x" + std::to_string(i);
        const std::string to = i + 1 == segments ? "b1" : "x" + std::to_string(i + 1);
        cell.edges.push_back({"s" + std::to_string(i), from, to, 1.0});
    }
    cell.boundary_pairs = {{"b0", "b1", {1}}};
    return cell;
}

// Equilateral hexagonal (honeycomb) lattice, unit edges. One cell holds the
// two sublattice vertices a, b, the full edge a–b and two edges cut at their
// midpoints: a–p1 / q1–b with q1 = p1 + ν1 and a–p2 / q2–b with q2 = p2 + ν2.
inline PeriodCell hexagonal_cell() {
    PeriodCell cell;
    cell.n = 2;
    cell.vertices = {{"a", VertexKind::interior},  {"b", VertexKind::interior},  {"p1", VertexKind::boundary},
                     {"q1", VertexKind::boundary}, {"p2", VertexKind::boundary}, {"q2", VertexKind::boundary}};
    cell.edges = {{"ab", "a", "b", 1.0},   {"ap1", "a", "p1", 0.5}, {"q1b", "q1", "b", 0.5},
                  {"ap2", "a", "p2", 0.5}, {"q2b", "q2", "b", 0.5}};
    cell.boundary_pairs = {{"p1", "q1", {1, 0}}, {"p2", "q2", {0, 1}}};
    return cell;
}

}  // namespace gapforge::catalog
