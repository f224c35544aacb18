#include "lqg/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lqg {

namespace {

[[noreturn]] void out_of_range(std::string_view what, double value, std::string_view interval) {
  std::ostringstream os;
  os << what << " = " << value << " outside " << interval;
  throw ParameterError(os.str());
}

void require_open(std::string_view what, double value, double lo, double hi, std::string_view interval) {
  if (!(value > lo && value < hi)) out_of_range(what, value, interval);
}

}  // namespace

SleParams SleParams::from_kappa(double k) {
  require_open("kappa", k, 0.0, 8.0, "(0, 8)");
  SleParams p;
  p.kappa = std::min(k, 16.0 / k);
  p.kappa_prime = 16.0 / p.kappa;
  p.gamma = std::sqrt(p.kappa);
  p.q_coeff = 0.5 * p.gamma + 2.0 / p.gamma;
  return p;
}

std::string_view to_string(FractalTag tag) {
  switch (tag) {
    case FractalTag::BoundaryTouching: return "boundary";
    case FractalTag::CutPoints: return "cut";
    case FractalTag::Pivotal: return "pivotal";
    case FractalTag::Carpet: return "carpet";
    case FractalTag::Gasket: return "gasket";
  }
  return "?";
}

FractalTag parse_fractal_tag(std::string_view name) {
  for (auto t : {FractalTag::BoundaryTouching, FractalTag::CutPoints, FractalTag::Pivotal, FractalTag::Carpet,
                 FractalTag::Gasket}) {
    if (to_string(t) == name) return t;
  }
  throw ParameterError("unknown fractal kind '" + std::string(name) + "'");
}

void validate(const FractalKind& kind, const SleParams& p) {
  switch (kind.tag) {
    case FractalTag::BoundaryTouching:
      require_open("kappa", p.kappa, 0.0, 4.0, "(0, 4)");
      require_open("rho", kind.rho, -2.0, 0.5 * p.kappa - 2.0, "(-2, kappa/2 - 2)");
      return;
    case FractalTag::CutPoints:
    case FractalTag::Pivotal:
    case FractalTag::Gasket:
      require_open("kappa'", p.kappa_prime, 4.0, 8.0, "(4, 8)");
      return;
    case FractalTag::Carpet:
      require_open("kappa", p.kappa, 8.0 / 3.0, 4.0, "(8/3, 4)");
      return;
  }
}

double dimension(const FractalKind& kind, const SleParams& p) {
  validate(kind, p);
  const double k = p.kappa, kp = p.kappa_prime;
  switch (kind.tag) {
    case FractalTag::BoundaryTouching: return (kind.rho + 4.0) * (k - 4.0 - 2.0 * kind.rho) / (2.0 * k);
    case FractalTag::CutPoints: return 3.0 - 3.0 * kp / 8.0;
    case FractalTag::Pivotal: return 2.0 - (12.0 - kp) * (4.0 + kp) / (8.0 * kp);
    case FractalTag::Carpet: return 2.0 - (3.0 * k - 8.0) * (8.0 - k) / (32.0 * k);
    case FractalTag::Gasket: return 2.0 - (3.0 * kp - 8.0) * (8.0 - kp) / (32.0 * kp);
  }
  return 0.0;
}

double quantum_exponent(const FractalKind& kind, const SleParams& p) {
  validate(kind, p);
  const double g = p.gamma;
  switch (kind.tag) {
    case FractalTag::BoundaryTouching: return 0.5 * g * (1.0 - 2.0 * (kind.rho + 2.0) / p.kappa);
    case FractalTag::CutPoints: return g - 2.0 / g;
    case FractalTag::Pivotal: return 0.5 * g * (p.kappa_prime / 4.0 - 1.0);
    // Shifting h by C multiplies carpet mass by e^{(g/2) beta C}, beta = 4/kappa + 1/2.
    case FractalTag::Carpet: return 0.5 * g * (4.0 / p.kappa + 0.5);
    // Generalized boundary lengths of CLE_kappa' loops scale by e^{(2/g) C}; mass ~ length^{beta'}.
    case FractalTag::Gasket: return (2.0 / g) * (4.0 / p.kappa_prime + 0.5);
  }
  return 0.0;
}

double kpz_residual(const FractalKind& kind, const SleParams& p) {
  const double d = dimension(kind, p);
  const double a = quantum_exponent(kind, p);
  const double q = p.q_coeff;
  switch (kind.tag) {
    case FractalTag::BoundaryTouching: {
      const double b = 1.0 - 2.0 * (kind.rho + 2.0) / p.kappa;
      return 0.25 * p.gamma * p.gamma * b * b - 0.5 * p.gamma * b * q + d;
    }
    case FractalTag::Pivotal: {
      const double s = p.gamma * (p.kappa_prime / 4.0 - 1.0);
      return s * s / 8.0 - 0.5 * s * q + d;
    }
    case FractalTag::CutPoints:
    case FractalTag::Carpet:
    case FractalTag::Gasket:
      return 0.5 * a * a - a * q + d;
  }
  return 0.0;
}

std::string_view to_string(SubordinatorConstruction c) {
  switch (c) {
    case SubordinatorConstruction::BoundaryTouching: return "boundary";
    case SubordinatorConstruction::CutPoints: return "cut";
    case SubordinatorConstruction::Pivotal: return "pivotal";
    case SubordinatorConstruction::CarpetCpiMass: return "carpet";
    case SubordinatorConstruction::GasketMass: return "gasket";
  }
  return "?";
}

double subordinator_index(SubordinatorConstruction construction, const SleParams& p, double rho) {
  switch (construction) {
    case SubordinatorConstruction::BoundaryTouching:
      validate(FractalKind::boundary_touching(rho), p);
      return 1.0 - 2.0 * (rho + 2.0) / p.kappa;
    case SubordinatorConstruction::CutPoints:
      validate(FractalKind::cut_points(), p);
      return 2.0 - p.kappa_prime / 4.0;
    case SubordinatorConstruction::Pivotal:
      validate(FractalKind::pivotal(), p);
      return p.kappa_prime / 4.0 - 1.0;
    case SubordinatorConstruction::CarpetCpiMass: {
      validate(FractalKind::carpet(), p);
      const double alpha = 4.0 / p.kappa;
      return 1.0 / (1.0 + 0.5 * alpha);
    }
    case SubordinatorConstruction::GasketMass: {
      validate(FractalKind::gasket(), p);
      const double beta_prime = 4.0 / p.kappa_prime + 0.5;
      return 1.0 / beta_prime;
    }
  }
  return 0.0;
}

double wedge_weight(double alpha, const SleParams& p) noexcept {
  return p.gamma * (0.5 * p.gamma + p.q_coeff - alpha);
}

double wedge_alpha_for_weight(double weight, const SleParams& p) noexcept {
  return 0.5 * p.gamma + p.q_coeff - weight / p.gamma;
}

BesselForWeight bessel_dimension_for_weight(double weight, const SleParams& p) {
  if (!(weight > 0.0)) out_of_range("wedge weight", weight, "(0, inf)");
  const double g2 = p.gamma * p.gamma;
  return {4.0 * weight / g2, 1.0 - 2.0 * weight / g2};
}

}  // namespace lqg
