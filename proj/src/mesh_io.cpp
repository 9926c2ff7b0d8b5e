#include "pfreq/mesh_io.hpp"

#include "pfreq/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace pfreq {

namespace {

// Next line that is not blank and not a comment; returns false at EOF.
bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (std::any_of(line.begin(), line.end(), [](unsigned char c) { return !std::isspace(c); })) return true;
  }
  return false;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

void add_polygon(TriMesh& mesh, const std::vector<int>& poly, int line_no) {
  if (poly.size() < 3) fail(line_no, "face with fewer than three vertices");
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
}

TriMesh read_off(std::istream& in) {
  TriMesh mesh;
  std::string line;
  int line_no = 0;
  if (!next_content_line(in, line, line_no)) fail(line_no, "empty OFF stream");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") fail(line_no, "missing OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) {
    if (!next_content_line(in, line, line_no)) fail(line_no, "missing OFF counts");
    header = std::istringstream(line);
    header >> nv;
  }
  if (!(header >> nf) || nv < 0 || nf < 0) fail(line_no, "malformed OFF counts");
  header >> ne;

  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line, line_no)) fail(line_no, "unexpected end of vertex list");
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) fail(line_no, "malformed vertex");
    mesh.vertices.emplace_back(x, y, z);
  }
  for (long f = 0; f < nf; ++f) {
    if (!next_content_line(in, line, line_no)) fail(line_no, "unexpected end of face list");
    std::istringstream ls(line);
    int count = 0;
    if (!(ls >> count) || count < 3) fail(line_no, "malformed face");
    std::vector<int> poly(static_cast<std::size_t>(count));
    for (auto& v : poly) {
      if (!(ls >> v)) fail(line_no, "face has fewer indices than declared");
      if (v < 0 || v >= nv) fail(line_no, "face index out of range");
    }
    add_polygon(mesh, poly, line_no);
  }
  return mesh;
}

TriMesh read_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  int line_no = 0;
  while (next_content_line(in, line, line_no)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail(line_no, "malformed vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ls >> token) {
        // Accept v, v/vt, v//vn, v/vt/vn; negative indices are relative.
        const auto slash = token.find('/');
        int idx = 0;
        try {
          idx = std::stoi(token.substr(0, slash));
        } catch (const std::exception&) {
          fail(line_no, "malformed face index '" + token + "'");
        }
        if (idx < 0) idx = static_cast<int>(mesh.vertices.size()) + idx + 1;
        if (idx < 1 || static_cast<std::size_t>(idx) > mesh.vertices.size()) fail(line_no, "face index out of range");
        poly.push_back(idx - 1);
      }
      add_polygon(mesh, poly, line_no);
    }
    // Other records (vn, vt, o, g, s, usemtl, ...) carry nothing we use.
  }
  if (mesh.vertices.empty()) fail(line_no, "OBJ stream has no vertices");
  return mesh;
}

}  // namespace

TriMesh read_mesh(std::istream& in, MeshFormat format) {
  return format == MeshFormat::OFF ? read_off(in) : read_obj(in);
}

Geometry load_mesh(std::istream& in, MeshFormat format) { return Geometry::from_mesh(read_mesh(in, format)); }

Geometry load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  std::string ext = path.substr(path.find_last_of('.') + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == "off") return load_mesh(in, MeshFormat::OFF);
  if (ext == "obj") return load_mesh(in, MeshFormat::OBJ);
  throw ParseError("unknown mesh extension '." + ext + "' (expected .off or .obj)");
}

void write_off(std::ostream& out, const TriMesh& mesh) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace pfreq
