#include "mesh.hpp"

#include <cstdio>
#include <map>

namespace stagemg {

double triangle_signed_area(const Mesh& m, int t) {
  const auto& tri = m.triangles[t];
  const auto& a = m.vertices[tri[0]];
  const auto& b = m.vertices[tri[1]];
  const auto& c = m.vertices[tri[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

namespace {

bool on_unit_square_boundary(const std::array<double, 2>& p) {
  return p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
}

void collect_boundary(Mesh& m) {
  m.boundary_vertices.clear();
  for (int v = 0; v < m.vertex_count(); ++v)
    if (on_unit_square_boundary(m.vertices[v])) m.boundary_vertices.push_back(v);
}

}  // namespace

std::shared_ptr<const Mesh> unit_square_mesh(int n) {
  require(n >= 1, ErrorCode::InvalidArgument,
          "unit_square_mesh: need at least one cell per side");
  auto mesh = std::make_shared<Mesh>();
  mesh->vertices.reserve(static_cast<size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh->vertices.push_back({static_cast<double>(i) / n,
                                static_cast<double>(j) / n});
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  mesh->triangles.reserve(static_cast<size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int a = vid(i, j), b = vid(i + 1, j);
      int c = vid(i + 1, j + 1), d = vid(i, j + 1);
      mesh->triangles.push_back({a, b, c});
      mesh->triangles.push_back({a, c, d});
    }
  }
  collect_boundary(*mesh);
  return mesh;
}

std::vector<std::array<int, 2>> mesh_edges(const Mesh& m) {
  std::map<std::array<int, 2>, int> seen;
  for (const auto& tri : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      seen.emplace(std::array<int, 2>{a, b}, 0);
    }
  }
  std::vector<std::array<int, 2>> edges;
  edges.reserve(seen.size());
  for (const auto& [key, unused] : seen) edges.push_back(key);
  return edges;
}

std::shared_ptr<const Mesh> refine(const std::shared_ptr<const Mesh>& m) {
  require(m != nullptr, ErrorCode::InvalidArgument, "refine: null mesh");
  auto fine = std::make_shared<Mesh>();
  fine->level = m->level + 1;
  fine->parent = m;

  int nv = m->vertex_count();
  fine->vertices = m->vertices;
  fine->parent_vertex.resize(nv);
  fine->parent_edge.assign(nv, {-1, -1});
  for (int v = 0; v < nv; ++v) fine->parent_vertex[v] = v;

  auto edges = mesh_edges(*m);
  std::map<std::array<int, 2>, int> midpoint;
  for (const auto& e : edges) {
    const auto& a = m->vertices[e[0]];
    const auto& b = m->vertices[e[1]];
    midpoint[e] = fine->vertex_count();
    fine->vertices.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
    fine->parent_vertex.push_back(-1);
    fine->parent_edge.push_back(e);
  }

  auto mid = [&midpoint](int a, int b) {
    if (a > b) std::swap(a, b);
    return midpoint.at({a, b});
  };
  fine->triangles.reserve(static_cast<size_t>(4) * m->triangle_count());
  fine->parent_triangle.reserve(static_cast<size_t>(4) * m->triangle_count());
  for (int t = 0; t < m->triangle_count(); ++t) {
    const auto& tri = m->triangles[t];
    int v0 = tri[0], v1 = tri[1], v2 = tri[2];
    int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
    const std::array<int, 3> children[4] = {
        {v0, m01, m02}, {m01, v1, m12}, {m02, m12, v2}, {m01, m12, m02}};
    for (const auto& child : children) {
      fine->triangles.push_back(child);
      fine->parent_triangle.push_back(t);
    }
  }
  collect_boundary(*fine);
  return fine;
}

void export_mesh(const Mesh& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, ErrorCode::Io, "export_mesh: cannot open " + path);
  for (const auto& v : m.vertices)
    std::fprintf(f, "%.17g %.17g\n", v[0], v[1]);
  for (const auto& t : m.triangles)
    std::fprintf(f, "%d %d %d\n", t[0], t[1], t[2]);
  std::fclose(f);
}

}  // namespace stagemg
