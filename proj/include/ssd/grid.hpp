#pragma once

#include "ssd/types.hpp"

#include <vector>

namespace ssd {

/// Points on the coordinate axes with |z| <= radius, n per axis (the origin once).
std::vector<Vec> axis_grid(int d, double radius = 5.0, int n = 101);

/// Axis grid plus the diagonals in d = 2; used where off-axis coverage matters.
std::vector<Vec> axis_diagonal_grid(int d, double radius = 5.0, int n = 101);

}  // namespace ssd
