#pragma once

#include <vector>

#include "krlab/density.hpp"

namespace krlab {

/// Radii h/2, h, 2h, 4h, ... up to L/2.
std::vector<double> dyadic_radii(const Grid& grid);

/// Average of |f| over the periodic ball of radius r around the centre of
/// `cell`. In 1D the overlap with each cell is exact; in 2D the ball is the
/// set of cells whose centres lie within distance r.
double ball_average(const GridFunction& f, std::size_t cell, double r);

/// Discrete Hardy-Littlewood maximal function: per cell, the largest ball
/// average of |f| over the dyadic radii.
GridFunction maximal_function(const GridFunction& f);

/// Same sup over an arbitrary radius list.
GridFunction maximal_function(const GridFunction& f, const std::vector<double>& radii);

}  // namespace krlab
