#pragma once

#include "pfreq/geometry.hpp"

#include <iosfwd>
#include <string>

namespace pfreq {

enum class MeshFormat { OFF, OBJ };

/// Parses an ASCII OFF or OBJ triangle mesh. Polygons with more than three
/// vertices are fan-triangulated. Throws ParseError on malformed input.
TriMesh read_mesh(std::istream& in, MeshFormat format);

/// Parses and validates: the result is a closed orientable surface with
/// angle-defect curvature; throws MeshError otherwise.
Geometry load_mesh(std::istream& in, MeshFormat format);

/// Format chosen from the file extension (.off / .obj).
Geometry load_mesh_file(const std::string& path);

void write_off(std::ostream& out, const TriMesh& mesh);

}  // namespace pfreq
