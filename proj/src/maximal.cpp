#include "krlab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace krlab {

namespace {

// Periodic antiderivative of |f| in 1D: F(x + L) = F(x) + total.
class Antiderivative {
 public:
  explicit Antiderivative(const GridFunction& f) : h_(f.grid().spacing()), n_(f.grid().cells_per_axis()) {
    prefix_.resize(n_ + 1, 0.0);
    for (int i = 0; i < n_; ++i) prefix_[i + 1] = prefix_[i] + std::abs(f[i]) * h_;
  }

  double operator()(double x) const {
    const double L = h_ * n_;
    const double wraps = std::floor(x / L);
    const double r = x - wraps * L;
    int i = std::min(static_cast<int>(r / h_), n_ - 1);
    const double within = r - i * h_;
    const double slope = (prefix_[i + 1] - prefix_[i]) / h_;
    return wraps * prefix_[n_] + prefix_[i] + slope * within;
  }

 private:
  double h_;
  int n_;
  std::vector<double> prefix_;
};

double ball_average_2d(const GridFunction& f, std::size_t cell, double r) {
  const Grid& g = f.grid();
  const int n = g.cells_per_axis();
  const double h = g.spacing();
  const auto [ci, cj] = g.coords(cell);
  const int reach = std::min(static_cast<int>(std::floor(r / h)), n / 2);
  double sum = 0.0;
  int count = 0;
  // offsets beyond n/2 would revisit cells through the periodic wrap
  const int lo = -reach, hi = (2 * reach >= n) ? n - 1 - reach : reach;
  for (int dj = lo; dj <= hi; ++dj)
    for (int di = lo; di <= hi; ++di) {
      const std::size_t c = g.index(ci + di, cj + dj);
      if (g.cell_distance(cell, c) <= r * (1 + 1e-12)) {
        sum += std::abs(f[c]);
        ++count;
      }
    }
  return sum / count;
}

}  // namespace

std::vector<double> dyadic_radii(const Grid& grid) {
  const double h = grid.spacing();
  std::vector<double> radii{0.5 * h};
  for (double r = h; r <= 0.5 * grid.length() * (1 + 1e-12); r *= 2) radii.push_back(r);
  return radii;
}

double ball_average(const GridFunction& f, std::size_t cell, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
  const Grid& g = f.grid();
  if (g.dimension() == 2) return ball_average_2d(f, cell, r);
  if (r <= 0.5 * g.spacing()) return std::abs(f[cell]);
  const double rr = std::min(r, 0.5 * g.length());
  const Antiderivative F(f);
  const double x = g.center(cell)[0];
  return (F(x + rr) - F(x - rr)) / (2 * rr);
}

GridFunction maximal_function(const GridFunction& f, const std::vector<double>& radii) {
  const Grid& g = f.grid();
  std::vector<double> out(g.size(), 0.0);
  if (g.dimension() == 1) {
    const Antiderivative F(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.center(i)[0];
      double best = 0.0;
      for (double r : radii) {
        if (r <= 0.5 * g.spacing()) {
          best = std::max(best, std::abs(f[i]));
          continue;
        }
        const double rr = std::min(r, 0.5 * g.length());
        best = std::max(best, (F(x + rr) - F(x - rr)) / (2 * rr));
      }
      out[i] = best;
    }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double best = 0.0;
      for (double r : radii) best = std::max(best, ball_average_2d(f, i, r));
      out[i] = best;
    }
  }
  return GridFunction(g, std::move(out));
}

GridFunction maximal_function(const GridFunction& f) { return maximal_function(f, dyadic_radii(f.grid())); }

}  // namespace krlab
