#include "krlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace krlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_number(const std::string& text, const std::string& id) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw std::invalid_argument("bad numeric parameter in identifier '" + id + "'");
  return v;
}

}  // namespace

double exact_flow_oscillatory(int k, double t, double x) {
  if (k < 1) throw std::invalid_argument("oscillatory wavenumber must be >= 1");
  const double y = k * x;
  const double m = std::floor((y + kPi) / kTwoPi);
  const double yr = y - kTwoPi * m;
  const double half = 0.5 * yr;
  const double moved = 2.0 * std::atan2(std::sin(half) * std::exp(t), std::cos(half));
  return (kTwoPi * m + moved) / k;
}

double exact_jacobian_oscillatory(int k, double t, double x) {
  const double half = 0.5 * k * x;
  const double c = std::cos(half), s = std::sin(half);
  const double et = std::exp(t);
  return et / (c * c + et * et * s * s);
}

VelocityField VelocityField::zero(int dimension) {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("field dimension must be 1 or 2");
  return VelocityField(FieldFamily::Zero, dimension, dimension == 1 ? "zero" : "zero2d");
}

VelocityField VelocityField::constant(int dimension, Vec velocity) {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("field dimension must be 1 or 2");
  if (dimension == 1) velocity[1] = 0.0;
  std::ostringstream id;
  id << "constant:" << velocity[0];
  if (dimension == 2) id << ',' << velocity[1];
  VelocityField u(FieldFamily::Constant, dimension, id.str());
  u.constant_ = velocity;
  return u;
}

VelocityField VelocityField::e1_step() { return VelocityField(FieldFamily::E1Step, 1, "e1_step"); }

VelocityField VelocityField::oscillatory(int k) {
  if (k < 1) throw std::invalid_argument("oscillatory wavenumber must be >= 1");
  VelocityField u(FieldFamily::Oscillatory, 1, "oscillatory:" + std::to_string(k));
  u.k_ = k;
  return u;
}

VelocityField VelocityField::power_cusp(double alpha, double x0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("power cusp exponent must lie in (0, 1)");
  std::ostringstream id;
  id << "power_cusp:" << alpha;
  VelocityField u(FieldFamily::PowerCusp, 1, id.str());
  u.alpha_ = alpha;
  u.x0_ = x0;
  return u;
}

VelocityField VelocityField::smooth_shear_2d() { return VelocityField(FieldFamily::SmoothShear2D, 2, "shear2d"); }

VelocityField VelocityField::rotation_2d() { return VelocityField(FieldFamily::Rotation2D, 2, "rotation2d"); }

VelocityField VelocityField::parse(const std::string& id) {
  const auto colon = id.find(':');
  const std::string head = id.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : id.substr(colon + 1);
  const bool has_arg = colon != std::string::npos;
  if (head == "zero" && !has_arg) return zero(1);
  if (head == "zero2d" && !has_arg) return zero(2);
  if (head == "e1_step" && !has_arg) return e1_step();
  if (head == "shear2d" && !has_arg) return smooth_shear_2d();
  if (head == "rotation2d" && !has_arg) return rotation_2d();
  if (head == "constant" && has_arg) return constant(1, {parse_number(arg, id), 0.0});
  if (head == "oscillatory" && has_arg) {
    const double k = parse_number(arg, id);
    if (k != std::floor(k) || k < 1) throw std::invalid_argument("oscillatory wavenumber must be a positive integer in '" + id + "'");
    return oscillatory(static_cast<int>(k));
  }
  if (head == "power_cusp" && has_arg) return power_cusp(parse_number(arg, id));
  throw std::invalid_argument("unknown velocity field '" + id +
                              "'; valid: zero, zero2d, constant:c, e1_step, oscillatory:k, "
                              "power_cusp:alpha, shear2d, rotation2d");
}

VelocityField VelocityField::scaled(double factor) const {
  VelocityField u = *this;
  u.scale_ *= factor;
  std::ostringstream id;
  id << factor << '*' << id_;
  u.id_ = id.str();
  return u;
}

VelocityField VelocityField::modulated(double omega) const {
  VelocityField u = *this;
  u.omega_ = omega;
  std::ostringstream id;
  id << id_ << "@cos" << omega;
  u.id_ = id.str();
  return u;
}

double VelocityField::period() const noexcept { return family_ == FieldFamily::Oscillatory ? kTwoPi : 1.0; }

double VelocityField::time_factor(double t) const noexcept {
  return omega_ == 0.0 ? scale_ : scale_ * std::cos(omega_ * t);
}

Vec VelocityField::value(double t, const Point& x) const {
  const double a = time_factor(t);
  switch (family_) {
    case FieldFamily::Zero:
      return {0.0, 0.0};
    case FieldFamily::Constant:
      return {a * constant_[0], a * constant_[1]};
    case FieldFamily::E1Step: {
      const double r = x[0] - std::floor(x[0]);
      return {r < 0.5 ? a : -a, 0.0};
    }
    case FieldFamily::Oscillatory:
      return {a * std::sin(k_ * x[0]) / k_, 0.0};
    case FieldFamily::PowerCusp: {
      const double s = std::remainder(x[0] - x0_, 1.0);
      const double m = std::abs(s);
      return {a * std::copysign(std::pow(m, alpha_) * (1.0 - 2.0 * m), s), 0.0};
    }
    case FieldFamily::SmoothShear2D:
      return {a * 0.5 * std::sin(kTwoPi * x[1]), a * 0.25 * std::sin(kTwoPi * x[0])};
    case FieldFamily::Rotation2D:
      return {a * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]),
              -a * std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1])};
  }
  return {0.0, 0.0};
}

Jacobian VelocityField::gradient(double t, const Point& x) const {
  const double a = time_factor(t);
  Jacobian J{Vec{0.0, 0.0}, Vec{0.0, 0.0}};
  switch (family_) {
    case FieldFamily::Zero:
    case FieldFamily::Constant:
    case FieldFamily::E1Step:
      break;
    case FieldFamily::Oscillatory:
      J[0][0] = a * std::cos(k_ * x[0]);
      break;
    case FieldFamily::PowerCusp: {
      const double m = std::abs(std::remainder(x[0] - x0_, 1.0));
      J[0][0] = m == 0.0 ? kInf
                         : a * (alpha_ * std::pow(m, alpha_ - 1.0) * (1.0 - 2.0 * m) - 2.0 * std::pow(m, alpha_));
      break;
    }
    case FieldFamily::SmoothShear2D:
      J[0][1] = a * kPi * std::cos(kTwoPi * x[1]);
      J[1][0] = a * 0.5 * kPi * std::cos(kTwoPi * x[0]);
      break;
    case FieldFamily::Rotation2D: {
      const double sx = std::sin(kTwoPi * x[0]), cx = std::cos(kTwoPi * x[0]);
      const double sy = std::sin(kTwoPi * x[1]), cy = std::cos(kTwoPi * x[1]);
      J[0][0] = a * kTwoPi * cx * cy;
      J[0][1] = -a * kTwoPi * sx * sy;
      J[1][0] = a * kTwoPi * sx * sy;
      J[1][1] = -a * kTwoPi * cx * cy;
      break;
    }
  }
  return J;
}

double VelocityField::divergence(double t, const Point& x) const {
  const Jacobian J = gradient(t, x);
  return J[0][0] + (dim_ == 2 ? J[1][1] : 0.0);
}

double VelocityField::max_speed() const {
  const double a = std::abs(scale_);
  switch (family_) {
    case FieldFamily::Zero:
      return 0.0;
    case FieldFamily::Constant:
      return a * norm(constant_);
    case FieldFamily::E1Step:
      return a;
    case FieldFamily::Oscillatory:
      return a / k_;
    case FieldFamily::PowerCusp: {
      const double s = alpha_ / (2.0 * (1.0 + alpha_));
      return a * std::pow(s, alpha_) * (1.0 - 2.0 * s);
    }
    case FieldFamily::SmoothShear2D:
      return a * std::hypot(0.5, 0.25);
    case FieldFamily::Rotation2D:
      return a;
  }
  return 0.0;
}

double VelocityField::sup_divergence() const {
  const double a = std::abs(scale_);
  switch (family_) {
    case FieldFamily::Oscillatory:
      return a;
    case FieldFamily::PowerCusp:
      return kInf;
    default:
      return 0.0;
  }
}

double VelocityField::max_gradient_exponent() const noexcept {
  switch (family_) {
    case FieldFamily::E1Step:
      return 0.0;
    case FieldFamily::PowerCusp:
      return 1.0 / (1.0 - alpha_);
    default:
      return kInf;
  }
}

bool VelocityField::gradient_in_lp(double p) const noexcept {
  const double bound = max_gradient_exponent();
  if (std::isinf(bound)) return p >= 1.0;
  return p >= 1.0 && p < bound;
}

bool VelocityField::has_exact_flow() const noexcept {
  return family_ == FieldFamily::Zero || family_ == FieldFamily::Constant || family_ == FieldFamily::Oscillatory;
}

namespace {

// int_0^t of the time factor.
double flow_time(double scale, double omega, double t) {
  return omega == 0.0 ? scale * t : scale * std::sin(omega * t) / omega;
}

}  // namespace

Point VelocityField::exact_flow(double t, const Point& x) const {
  const double tau = flow_time(scale_, omega_, t);
  switch (family_) {
    case FieldFamily::Zero:
      return x;
    case FieldFamily::Constant:
      return {x[0] + tau * constant_[0], x[1] + tau * constant_[1]};
    case FieldFamily::Oscillatory:
      return {exact_flow_oscillatory(k_, tau, x[0]), 0.0};
    default:
      throw std::logic_error("field '" + id_ + "' has no closed-form flow");
  }
}

double VelocityField::exact_jacobian(double t, const Point& x) const {
  const double tau = flow_time(scale_, omega_, t);
  switch (family_) {
    case FieldFamily::Zero:
    case FieldFamily::Constant:
      return 1.0;
    case FieldFamily::Oscillatory:
      return exact_jacobian_oscillatory(k_, tau, x[0]);
    default:
      throw std::logic_error("field '" + id_ + "' has no closed-form flow");
  }
}

ScalarSource ScalarSource::zero() { return ScalarSource(SourceFamily::Zero, 0.0, 1.0, "zero"); }

ScalarSource ScalarSource::constant(double c) {
  std::ostringstream id;
  id << "constant:" << c;
  return ScalarSource(SourceFamily::Constant, c, 1.0, id.str());
}

ScalarSource ScalarSource::cosine(double amplitude, double period) {
  if (!(period > 0.0)) throw std::invalid_argument("source period must be positive");
  std::ostringstream id;
  id << "cosine:" << amplitude;
  if (period != 1.0) id << ':' << period;
  return ScalarSource(SourceFamily::Cosine, amplitude, period, id.str());
}

ScalarSource ScalarSource::parse(const std::string& id) {
  const auto colon = id.find(':');
  const std::string head = id.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : id.substr(colon + 1);
  if (head == "zero" && colon == std::string::npos) return zero();
  if (head == "constant" && colon != std::string::npos) return constant(parse_number(arg, id));
  if (head == "cosine" && colon != std::string::npos) {
    const auto second = arg.find(':');
    if (second == std::string::npos) return cosine(parse_number(arg, id));
    return cosine(parse_number(arg.substr(0, second), id), parse_number(arg.substr(second + 1), id));
  }
  throw std::invalid_argument("unknown source '" + id + "'; valid: zero, constant:c, cosine:a[:period]");
}

double ScalarSource::value(double, const Point& x) const {
  switch (family_) {
    case SourceFamily::Zero:
      return 0.0;
    case SourceFamily::Constant:
      return a_;
    case SourceFamily::Cosine:
      return a_ * std::cos(kTwoPi * x[0] / period_);
  }
  return 0.0;
}

IntegrabilityModulus::IntegrabilityModulus()
    : e_([](double xi) { return xi * (1.0 + std::max(0.0, std::log(xi))); }), name_("xi(1+log+xi)") {}

IntegrabilityModulus::IntegrabilityModulus(std::function<double(double)> e, std::string name)
    : e_(std::move(e)), name_(std::move(name)) {}

namespace {

struct PsiMin {
  double M;
  double value;
};

PsiMin minimise_psi(const IntegrabilityModulus& e, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("psi_one needs delta > 0");
  const double L = std::abs(std::log(delta)) + 1.0;
  auto g = [&](double logM) {
    const double M = std::exp(logM);
    return M + M / e(M) * L;
  };
  const double lo = std::log(1e-8), hi = std::log(1e8);
  const int steps = 1600;
  const double dx = (hi - lo) / steps;
  int best = 0;
  double best_v = g(lo);
  for (int i = 1; i <= steps; ++i) {
    const double v = g(lo + i * dx);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = lo + std::max(best - 1, 0) * dx;
  double b = lo + std::min(best + 1, steps) * dx;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + phi * (b - a);
      gd = g(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double gx = g(x);
  if (gx <= best_v) return {std::exp(x), gx};
  return {std::exp(lo + best * dx), best_v};
}

double lp_accumulate(const std::vector<double>& mag, double p, double cell_volume) {
  if (std::isinf(p)) return mag.empty() ? 0.0 : *std::max_element(mag.begin(), mag.end());
  double scale = 0.0;
  for (double m : mag) scale = std::max(scale, m);
  if (scale == 0.0) return 0.0;
  if (std::isinf(scale)) return kInf;
  double s = 0.0;
  for (double m : mag) s += std::pow(m / scale, p);
  return scale * std::pow(s * cell_volume, 1.0 / p);
}

double frobenius(const Jacobian& J) { return std::sqrt(J[0][0] * J[0][0] + J[0][1] * J[0][1] + J[1][0] * J[1][0] + J[1][1] * J[1][1]); }

template <class F>
double time_integral(const VelocityField& u, double T, int steps, F&& at) {
  if (!u.time_dependent()) return T * at(0.0);
  const double dt = T / steps;
  double s = 0.5 * (at(0.0) + at(T));
  for (int i = 1; i < steps; ++i) s += at(i * dt);
  return s * dt;
}

}  // namespace

double psi_one(const IntegrabilityModulus& e, double delta) { return minimise_psi(e, delta).value; }

double psi_one_argmin(const IntegrabilityModulus& e, double delta) { return minimise_psi(e, delta).M; }

GridFunction gradient_magnitude(const VelocityField& u, const Grid& grid, double t) {
  std::vector<double> mag(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) mag[i] = frobenius(u.gradient(t, grid.center(i)));
  for (double m : mag)
    if (!std::isfinite(m)) throw std::domain_error("gradient is singular at a cell centre");
  return GridFunction(grid, std::move(mag));
}

double sobolev_seminorm(const VelocityField& u, double p, const Grid& grid, double t) {
  if (std::isnan(p) || p < 1.0) throw std::domain_error("Sobolev exponent must be >= 1");
  if (u.family() == FieldFamily::E1Step) {
    if (p > 1.0) return kInf;
    return 4.0 * std::abs(u.value(t, {0.25, 0.0})[0]);
  }
  const auto mag = gradient_magnitude(u, grid, t);
  return lp_accumulate(std::vector<double>(mag.values().begin(), mag.values().end()), p, grid.cell_volume());
}

double sobolev_seminorm_l1(const VelocityField& u, double p, const Grid& grid, double T, int time_steps) {
  return time_integral(u, T, time_steps, [&](double t) { return sobolev_seminorm(u, p, grid, t); });
}

double field_difference_norm(const VelocityField& a, const VelocityField& b, double p, const Grid& grid, double T,
                             int time_steps) {
  auto at = [&](double t) {
    std::vector<double> mag(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point x = grid.center(i);
      const Vec va = a.value(t, x), vb = b.value(t, x);
      mag[i] = std::hypot(va[0] - vb[0], va[1] - vb[1]);
    }
    return lp_accumulate(mag, p, grid.cell_volume());
  };
  if (!a.time_dependent() && !b.time_dependent()) return T * at(0.0);
  const double dt = T / time_steps;
  double s = 0.5 * (at(0.0) + at(T));
  for (int i = 1; i < time_steps; ++i) s += at(i * dt);
  return s * dt;
}

double divergence_l1_linf(const VelocityField& u, const Grid& grid, double T, int time_steps) {
  return time_integral(u, T, time_steps, [&](double t) {
    double m = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) m = std::max(m, std::abs(u.divergence(t, grid.center(i))));
    return m;
  });
}

double modulus_integral(const VelocityField& u, const IntegrabilityModulus& e, const Grid& grid) {
  const auto mag = gradient_magnitude(u, grid);
  double s = 0.0;
  for (double m : mag.values()) s += e(m);
  return s * grid.cell_volume();
}

}  // namespace krlab
