#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"

namespace stagemg {

/**
 * Triangulation of the unit square. Meshes produced by refine() keep a
 * handle to their parent plus provenance for every vertex: inherited
 * vertices record the coarse index, edge midpoints record the coarse edge
 * endpoints. parent_triangle maps each fine triangle to the coarse
 * triangle it subdivides.
 */
struct Mesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> boundary_vertices;         // sorted, on the square's edge
  int level = 0;

  std::shared_ptr<const Mesh> parent;
  std::vector<int> parent_vertex;                // -1 for edge midpoints
  std::vector<std::array<int, 2>> parent_edge;   // {-1,-1} for inherited
  std::vector<int> parent_triangle;              // per fine triangle

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

/** Twice the signed area is the cross product of two edge vectors. */
double triangle_signed_area(const Mesh& m, int t);

/**
 * Structured n x n grid, each cell split along the (i,j)->(i+1,j+1)
 * diagonal. Vertex (i,j) has index j*(n+1)+i and coordinate (i/n, j/n).
 */
std::shared_ptr<const Mesh> unit_square_mesh(int n);

/** Regular refinement: each triangle splits into four by edge midpoints. */
std::shared_ptr<const Mesh> refine(const std::shared_ptr<const Mesh>& m);

/**
 * Undirected edges as sorted index pairs, ordered lexicographically.
 * The ordering is the edge numbering used for midpoint vertices and for
 * quadratic edge dofs.
 */
std::vector<std::array<int, 2>> mesh_edges(const Mesh& m);

/** Plain-text export: vertex lines "x y" first, then triangle lines "i j k". */
void export_mesh(const Mesh& m, const std::string& path);

}  // namespace stagemg
