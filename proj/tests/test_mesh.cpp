#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mesh.hpp"

using namespace stagemg;

TEST_CASE("unit square mesh counts") {
  auto m1 = unit_square_mesh(1);
  CHECK(m1->vertex_count() == 4);
  CHECK(m1->triangle_count() == 2);

  auto m4 = unit_square_mesh(4);
  CHECK(m4->vertex_count() == 25);
  CHECK(m4->triangle_count() == 32);
  CHECK(m4->boundary_vertices.size() == 16);
}

TEST_CASE("boundary vertex count is 4n") {
  for (int n : {1, 2, 3, 5, 8})
    CHECK(static_cast<int>(unit_square_mesh(n)->boundary_vertices.size()) ==
          4 * n);
}

TEST_CASE("triangles are counterclockwise and tile the square") {
  for (int n = 1; n <= 8; ++n) {
    auto m = unit_square_mesh(n);
    double total = 0.0;
    for (int t = 0; t < m->triangle_count(); ++t) {
      double a = triangle_signed_area(*m, t);
      CHECK(a > 0.0);
      total += a;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("degenerate cell count is rejected") {
  CHECK_THROWS_AS(unit_square_mesh(0), Error);
  CHECK_THROWS_AS(unit_square_mesh(-3), Error);
}

TEST_CASE("refinement counts and inherited coordinates") {
  auto coarse = unit_square_mesh(1);
  auto fine = refine(coarse);
  CHECK(fine->vertex_count() == 9);
  CHECK(fine->triangle_count() == 8);
  CHECK(fine->level == 1);
  CHECK(fine->parent == coarse);

  for (int v = 0; v < coarse->vertex_count(); ++v) {
    CHECK(fine->vertices[v][0] == coarse->vertices[v][0]);
    CHECK(fine->vertices[v][1] == coarse->vertices[v][1]);
  }
}

TEST_CASE("refinement quadruples triangles and stays oriented") {
  auto m = unit_square_mesh(3);
  auto f = refine(m);
  CHECK(f->triangle_count() == 4 * m->triangle_count());
  double total = 0.0;
  for (int t = 0; t < f->triangle_count(); ++t) {
    double a = triangle_signed_area(*f, t);
    CHECK(a > 0.0);
    total += a;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("twice-refined mesh matches the directly built fine grid") {
  auto twice = refine(refine(unit_square_mesh(4)));
  auto direct = unit_square_mesh(16);
  REQUIRE(twice->vertex_count() == direct->vertex_count());
  REQUIRE(twice->triangle_count() == direct->triangle_count());

  // Dyadic coordinates are exact, so set comparison can be bitwise.
  std::set<std::pair<double, double>> a, b;
  for (const auto& v : twice->vertices) a.insert({v[0], v[1]});
  for (const auto& v : direct->vertices) b.insert({v[0], v[1]});
  CHECK(a == b);
}

TEST_CASE("vertex provenance reconstructs fine coordinates") {
  auto coarse = unit_square_mesh(4);
  auto fine = refine(coarse);
  REQUIRE(fine->parent_vertex.size() == fine->vertices.size());
  REQUIRE(fine->parent_edge.size() == fine->vertices.size());
  int inherited = 0, midpoints = 0;
  for (int v = 0; v < fine->vertex_count(); ++v) {
    if (fine->parent_vertex[v] >= 0) {
      ++inherited;
      const auto& cv = coarse->vertices[fine->parent_vertex[v]];
      CHECK(fine->vertices[v][0] == cv[0]);
      CHECK(fine->vertices[v][1] == cv[1]);
    } else {
      ++midpoints;
      auto e = fine->parent_edge[v];
      REQUIRE(e[0] >= 0);
      const auto& a = coarse->vertices[e[0]];
      const auto& b = coarse->vertices[e[1]];
      CHECK(fine->vertices[v][0] == 0.5 * (a[0] + b[0]));
      CHECK(fine->vertices[v][1] == 0.5 * (a[1] + b[1]));
    }
  }
  CHECK(inherited == coarse->vertex_count());
  CHECK(midpoints == static_cast<int>(mesh_edges(*coarse).size()));
}

TEST_CASE("children lie inside their parent triangle") {
  auto coarse = unit_square_mesh(2);
  auto fine = refine(coarse);
  REQUIRE(fine->parent_triangle.size() == fine->triangles.size());
  for (int t = 0; t < fine->triangle_count(); ++t) {
    int pt = fine->parent_triangle[t];
    const auto& ptri = coarse->triangles[pt];
    const auto& a = coarse->vertices[ptri[0]];
    const auto& b = coarse->vertices[ptri[1]];
    const auto& c = coarse->vertices[ptri[2]];
    double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    for (int k = 0; k < 3; ++k) {
      const auto& p = fine->vertices[fine->triangles[t][k]];
      double l1 =
          ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
      double l2 =
          ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
      CHECK(l1 >= -1e-14);
      CHECK(l2 >= -1e-14);
      CHECK(l1 + l2 <= 1.0 + 1e-14);
    }
  }
}

TEST_CASE("edge enumeration is sorted and complete") {
  auto m = unit_square_mesh(2);
  auto edges = mesh_edges(*m);
  // Euler: V - E + F = 2 with 9 vertices and 8 triangles plus the outer
  // face gives 16 edges.
  CHECK(edges.size() == 16);
  CHECK(std::is_sorted(edges.begin(), edges.end()));
  for (const auto& e : edges) CHECK(e[0] < e[1]);
}

TEST_CASE("plain text export round trips counts") {
  auto m = unit_square_mesh(2);
  std::string path = "mesh_export_test.txt";
  export_mesh(*m, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  int two_field = 0, three_field = 0;
  std::string line;
  bool first_vertex_checked = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.size() == 2) {
      ++two_field;
      if (!first_vertex_checked) {
        CHECK(std::stod(tok[0]) == 0.0);
        CHECK(std::stod(tok[1]) == 0.0);
        first_vertex_checked = true;
      }
      CHECK(three_field == 0);  // all vertices precede all triangles
    } else if (tok.size() == 3) {
      ++three_field;
    } else {
      FAIL("unexpected line in mesh export: " << line);
    }
  }
  CHECK(two_field == m->vertex_count());
  CHECK(three_field == m->triangle_count());
  std::remove(path.c_str());
}
