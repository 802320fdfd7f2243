#include "capillary/trimesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "capillary/error.hpp"
#include "capillary/geometry.hpp"

namespace capillary {

namespace {

std::string describe(const char* what, int index) {
  std::ostringstream os;
  os << what << " (index " << index << ")";
  return os.str();
}

// Splits a loop into runs that lie on one facet each.
void collect_facet_polygons(const std::vector<std::vector<int>>& loops, const std::vector<FacetMask>& masks,
                            int facet_count, std::vector<std::vector<std::vector<int>>>& out) {
  out.assign(facet_count, {});
  for (const auto& loop : loops) {
    const int n = static_cast<int>(loop.size());
    std::vector<int> edge_facet(n);
    for (int k = 0; k < n; ++k) {
      const FacetMask shared = masks[loop[k]] & masks[loop[(k + 1) % n]];
      if (shared == 0) {
        throw Error(ErrorKind::OpenBoundary,
                    describe("boundary edge leaves the container walls after vertex", loop[k]));
      }
      edge_facet[k] = first_facet(shared);
    }
    const bool uniform =
        std::all_of(edge_facet.begin(), edge_facet.end(), [&](int f) { return f == edge_facet[0]; });
    if (uniform) {
      out[edge_facet[0]].push_back(loop);
      continue;
    }
    // Rotate so that a run starts at position 0.
    int start = 0;
    while (edge_facet[(start + n - 1) % n] == edge_facet[start]) ++start;
    for (int k = 0; k < n;) {
      const int f = edge_facet[(start + k) % n];
      std::vector<int> chain{loop[(start + k) % n]};
      while (k < n && edge_facet[(start + k) % n] == f) {
        chain.push_back(loop[(start + k + 1) % n]);
        ++k;
      }
      // The closing chord must run along a wedge edge.
      if (facet_count_in(masks[chain.front()]) < 2 || facet_count_in(masks[chain.back()]) < 2) {
        throw Error(ErrorKind::OpenBoundary, "facet run does not end on a wedge edge");
      }
      out[f].push_back(std::move(chain));
    }
  }
}

}  // namespace

TriMesh TriMesh::build(std::vector<Vec3> vertices, std::vector<Face> faces, const Container& container,
                       double wall_tol) {
  TriMesh m;
  m.vertices_ = std::move(vertices);
  m.faces_ = std::move(faces);
  const int nv = m.vertex_count();
  const int nf = m.face_count();
  if (nv == 0 || nf == 0) throw Error(ErrorKind::InvalidMesh, "empty mesh");

  Topology& t = m.topo_;
  t.vertex_faces.assign(nv, {});
  for (int f = 0; f < nf; ++f) {
    const Face& face = m.faces_[f];
    for (int k = 0; k < 3; ++k) {
      if (face[k] < 0 || face[k] >= nv) throw Error(ErrorKind::InvalidMesh, describe("face index out of range", f));
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw Error(ErrorKind::InvalidMesh, describe("face repeats a vertex", f));
    }
    for (int k = 0; k < 3; ++k) t.vertex_faces[face[k]].push_back(f);
  }
  for (int v = 0; v < nv; ++v) {
    if (t.vertex_faces[v].empty()) throw Error(ErrorKind::InvalidMesh, describe("isolated vertex", v));
  }

  // Directed half-edges; an undirected edge may carry at most one of each direction.
  std::map<std::pair<int, int>, int> directed;
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = m.faces_[f][k];
      const int b = m.faces_[f][(k + 1) % 3];
      if (!directed.emplace(std::make_pair(a, b), f).second) {
        throw Error(ErrorKind::InvalidMesh, describe("inconsistent orientation or non-manifold edge at face", f));
      }
    }
  }
  t.neighbors.assign(nv, {});
  t.on_boundary.assign(nv, 0);
  t.loop_prev.assign(nv, -1);
  t.loop_next.assign(nv, -1);
  for (const auto& [key, f] : directed) {
    const auto [a, b] = key;
    const auto twin = directed.find({b, a});
    if (twin != directed.end()) {
      if (a < b) t.edges.push_back(Edge{a, b, f, twin->second});
    } else {
      t.edges.push_back(Edge{a, b, f, -1});
      if (t.loop_next[a] != -1 || t.loop_prev[b] != -1) {
        throw Error(ErrorKind::InvalidMesh, describe("non-manifold boundary vertex", a));
      }
      t.loop_next[a] = b;
      t.loop_prev[b] = a;
      t.on_boundary[a] = t.on_boundary[b] = 1;
    }
    t.neighbors[a].push_back(b);
    t.neighbors[b].push_back(a);
  }
  {
    std::map<std::pair<int, int>, int> edge_id;
    for (int e = 0; e < static_cast<int>(t.edges.size()); ++e) {
      edge_id[{std::min(t.edges[e].a, t.edges[e].b), std::max(t.edges[e].a, t.edges[e].b)}] = e;
    }
    t.face_edges.resize(nf);
    for (int f = 0; f < nf; ++f) {
      for (int k = 0; k < 3; ++k) {
        const int a = m.faces_[f][(k + 1) % 3];
        const int b = m.faces_[f][(k + 2) % 3];
        t.face_edges[f][k] = edge_id.at({std::min(a, b), std::max(a, b)});
      }
    }
  }
  for (auto& nb : t.neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  // Chain boundary half-edges into loops.
  std::vector<char> seen(nv, 0);
  for (int v = 0; v < nv; ++v) {
    if (!t.on_boundary[v] || seen[v]) continue;
    std::vector<int> loop;
    int cur = v;
    while (!seen[cur]) {
      if (t.loop_next[cur] < 0 || t.loop_prev[cur] < 0) {
        throw Error(ErrorKind::InvalidMesh, describe("boundary does not close into a loop at vertex", cur));
      }
      seen[cur] = 1;
      loop.push_back(cur);
      cur = t.loop_next[cur];
    }
    if (cur != v) throw Error(ErrorKind::InvalidMesh, describe("boundary loop pinches at vertex", cur));
    if (loop.size() < 3) throw Error(ErrorKind::InvalidMesh, "boundary loop shorter than 3 vertices");
    m.loops_.push_back(std::move(loop));
  }

  m.masks_.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    if (t.on_boundary[v]) m.masks_[v] = container.facets_at(m.vertices_[v], wall_tol);
  }

  // Connected components by flood fill over faces.
  t.component_of.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (t.component_of[v] >= 0) continue;
    std::vector<int> stack{v};
    t.component_of[v] = t.components;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : t.neighbors[u]) {
        if (t.component_of[w] < 0) {
          t.component_of[w] = t.components;
          stack.push_back(w);
        }
      }
    }
    ++t.components;
  }

  validate_mesh(m, container, wall_tol);
  collect_facet_polygons(m.loops_, m.masks_, container.facet_count(), t.facet_polygons);

  // Orientation audit: the enclosed region must have positive volume per component.
  if (enclosed_volume(m, container) <= 0.0) {
    throw Error(ErrorKind::InvalidMesh, "faces are oriented inward (non-positive enclosed volume)");
  }
  return m;
}

void validate_mesh(const TriMesh& mesh, const Container& container, double wall_tol) {
  const auto& x = mesh.vertices();
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!x[v].allFinite()) throw Error(ErrorKind::InvalidMesh, describe("non-finite vertex", v));
    if (mesh.is_boundary(v)) {
      if (mesh.facet_masks()[v] == 0) {
        std::ostringstream os;
        os << "boundary vertex " << v << " is not on any container wall within " << wall_tol;
        throw Error(ErrorKind::InvalidMesh, os.str());
      }
      for (int f = 0; f < container.facet_count(); ++f) {
        if (mesh.facet_masks()[v] & (FacetMask{1} << f)) {
          if (std::abs(container.wall_distance(f, x[v])) > wall_tol) {
            throw Error(ErrorKind::InvalidMesh, describe("boundary vertex drifted off its wall", v));
          }
        }
      }
    }
  }
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& fc = mesh.faces()[f];
    const double area = 0.5 * (x[fc[1]] - x[fc[0]]).cross(x[fc[2]] - x[fc[0]]).norm();
    if (!(area > 1e-14)) throw Error(ErrorKind::InvalidMesh, describe("degenerate face", f));
  }
}

int TriMesh::loop_facet(int loop) const {
  FacetMask common = ~FacetMask{0};
  for (int v : loops_.at(loop)) common &= masks_[v];
  return first_facet(common);
}

double TriMesh::max_edge_length() const {
  double best = 0.0;
  for (const auto& e : topo_.edges) best = std::max(best, (vertices_[e.a] - vertices_[e.b]).norm());
  return best;
}

double TriMesh::min_face_area() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : faces_) {
    best = std::min(best, 0.5 * (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]).norm());
  }
  return best;
}

double TriMesh::min_angle() const {
  double best = M_PI;
  for (const auto& f : faces_) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 u = vertices_[f[(k + 1) % 3]] - vertices_[f[k]];
      const Vec3 w = vertices_[f[(k + 2) % 3]] - vertices_[f[k]];
      best = std::min(best, std::atan2(u.cross(w).norm(), u.dot(w)));
    }
  }
  return best;
}

TriMesh merge_meshes(const TriMesh& a, const TriMesh& b, const Container& container) {
  std::vector<Vec3> v = a.vertices();
  v.insert(v.end(), b.vertices().begin(), b.vertices().end());
  std::vector<Face> f = a.faces();
  const int shift = a.vertex_count();
  for (Face face : b.faces()) {
    for (int& i : face) i += shift;
    f.push_back(face);
  }
  return TriMesh::build(std::move(v), std::move(f), container);
}

}  // namespace capillary
