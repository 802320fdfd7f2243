#pragma once

#include <string>
#include <vector>

#include "capillary/trimesh.hpp"

namespace capillary {

/// Raw polygon soup as read from disk, before container-aware validation.
struct MeshData {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

MeshData read_off(const std::string& path);
/// Reads `v` and `f` records; groups and polylines are ignored because facet
/// tags are recomputed from geometry when the TriMesh is built.
MeshData read_obj(const std::string& path);
/// Dispatches on the file extension (.off or .obj).
MeshData read_mesh(const std::string& path);

void write_off(const std::string& path, const TriMesh& mesh);
/// Writes faces plus one `g facet_<i>` group per facet holding `l` polylines of
/// that facet's contact-line pieces.
void write_obj(const std::string& path, const TriMesh& mesh);

}  // namespace capillary
