#pragma once

#include "savflow/mesh.hpp"

#include <array>
#include <span>
#include <vector>

namespace savflow::mesh::detail {

/// Bowyer-Watson Delaunay triangulation of distinct points. Returns CCW
/// triangles over the input indices (the convex hull is fully covered).
std::vector<Triangle> delaunay(std::span<const Point> points);

}  // namespace savflow::mesh::detail
