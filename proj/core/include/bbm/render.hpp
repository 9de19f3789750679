#pragma once

#include <string>

#include "bbm/branching.hpp"

namespace bbm {

/// Two-panel SVG of a 2-d tree: particle trajectories in the plane (one
/// polyline per particle, colored by terminal modulus) and modulus-vs-time
/// paths on the right. Requires d == 2.
std::string render_tree_svg(const ParticleTree& tree, int width = 1200, int height = 620);

}  // namespace bbm
