#include "capillary/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << std::setprecision(17);
  return out;
}

// Next line that is neither blank nor a comment.
bool next_record(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

MeshData read_off(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!next_record(in, line)) throw Error(ErrorKind::Io, path + ": empty file");
  std::istringstream head(line);
  std::string magic;
  head >> magic;
  if (magic != "OFF") throw Error(ErrorKind::Io, path + ": missing OFF header");
  int nv = -1, nf = -1, ne = 0;
  if (!(head >> nv)) {
    if (!next_record(in, line)) throw Error(ErrorKind::Io, path + ": missing counts");
    head = std::istringstream(line);
    head >> nv;
  }
  head >> nf >> ne;
  if (nv < 0 || nf < 0) throw Error(ErrorKind::Io, path + ": bad counts");

  MeshData data;
  data.vertices.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    if (!next_record(in, line)) throw Error(ErrorKind::Io, path + ": truncated vertex list");
    std::istringstream s(line);
    Vec3 p;
    if (!(s >> p.x() >> p.y() >> p.z())) throw Error(ErrorKind::Io, path + ": bad vertex line");
    data.vertices.push_back(p);
  }
  for (int i = 0; i < nf; ++i) {
    if (!next_record(in, line)) throw Error(ErrorKind::Io, path + ": truncated face list");
    std::istringstream s(line);
    int k = 0;
    Face f{};
    if (!(s >> k >> f[0] >> f[1] >> f[2]) || k != 3) {
      throw Error(ErrorKind::Io, path + ": only triangular faces are supported");
    }
    data.faces.push_back(f);
  }
  return data;
}

MeshData read_obj(const std::string& path) {
  std::ifstream in = open_in(path);
  MeshData data;
  std::string line;
  while (next_record(in, line)) {
    std::istringstream s(line);
    std::string tag;
    s >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(s >> p.x() >> p.y() >> p.z())) throw Error(ErrorKind::Io, path + ": bad vertex line");
      data.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (s >> tok) {
        int i = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(i > 0 ? i - 1 : static_cast<int>(data.vertices.size()) + i);
      }
      if (idx.size() != 3) throw Error(ErrorKind::Io, path + ": only triangular faces are supported");
      data.faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  return data;
}

MeshData read_mesh(const std::string& path) {
  auto ends_with = [&](const char* ext) {
    const std::string e(ext);
    return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
  };
  if (ends_with(".off") || ends_with(".OFF")) return read_off(path);
  if (ends_with(".obj") || ends_with(".OBJ")) return read_obj(path);
  throw Error(ErrorKind::Io, path + ": unknown mesh extension");
}

void write_off(const std::string& path, const TriMesh& mesh) {
  std::ofstream out = open_out(path);
  out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
  for (const Vec3& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

void write_obj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out = open_out(path);
  for (const Vec3& p : mesh.vertices()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "g surface\n";
  for (const Face& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  const auto& polys = mesh.topology().facet_polygons;
  for (std::size_t facet = 0; facet < polys.size(); ++facet) {
    if (polys[facet].empty()) continue;
    out << "g facet_" << facet << '\n';
    for (const auto& poly : polys[facet]) {
      out << 'l';
      for (int v : poly) out << ' ' << v + 1;
      // Closed loops repeat their first vertex; wedge-edge chains stay open.
      if (mesh.topology().loop_next[poly.back()] == poly.front()) out << ' ' << poly.front() + 1;
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

}  // namespace capillary
