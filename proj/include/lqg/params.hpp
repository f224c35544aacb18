#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lqg {

/// Raised when a parameter leaves its admissible interval; the message names the interval.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The (kappa, kappa', gamma, Q) bundle.
///
/// Built from one user kappa in (0, 8). `kappa` holds the simple-regime value
/// min(k, 16/k) and `kappa_prime` its dual 16/kappa, so the same bundle serves
/// SLE_kappa and SLE_kappa' statements. gamma = sqrt(kappa) = 4/sqrt(kappa_prime).
struct SleParams {
  double kappa = 0.0;
  double kappa_prime = 0.0;
  double gamma = 0.0;
  double q_coeff = 0.0;

  static SleParams from_kappa(double k);
  static SleParams from_kappa_prime(double kp) { return from_kappa(kp); }

  /// gamma * Q, evaluated as gamma^2/2 + 2 so it stays finite as gamma -> 0.
  double gamma_q() const noexcept { return 0.5 * gamma * gamma + 2.0; }
};

enum class FractalTag { BoundaryTouching, CutPoints, Pivotal, Carpet, Gasket };

struct FractalKind {
  FractalTag tag = FractalTag::CutPoints;
  double rho = 0.0;  // only read for BoundaryTouching

  static FractalKind boundary_touching(double rho) { return {FractalTag::BoundaryTouching, rho}; }
  static FractalKind cut_points() { return {FractalTag::CutPoints, 0.0}; }
  static FractalKind pivotal() { return {FractalTag::Pivotal, 0.0}; }
  static FractalKind carpet() { return {FractalTag::Carpet, 0.0}; }
  static FractalKind gasket() { return {FractalTag::Gasket, 0.0}; }
};

std::string_view to_string(FractalTag tag);
FractalTag parse_fractal_tag(std::string_view name);

/// Throws ParameterError unless `kind` is meaningful for `p`.
void validate(const FractalKind& kind, const SleParams& p);

/// Euclidean Hausdorff dimension of the fractal.
double dimension(const FractalKind& kind, const SleParams& p);

/// Quantum scaling exponent a: the GMC-type weight e^{a h} the quantized measure carries.
double quantum_exponent(const FractalKind& kind, const SleParams& p);

/// Left-hand side of the KPZ identity linking dimension and quantum exponent.
/// Boundary-touching points use the boundary form a^2 - aQ + d; the bulk kinds use
/// a^2/2 - aQ + d (the pivotal case is written as 1/8 (2a)^2 - 1/2 (2a) Q + d).
double kpz_residual(const FractalKind& kind, const SleParams& p);

enum class SubordinatorConstruction { BoundaryTouching, CutPoints, Pivotal, CarpetCpiMass, GasketMass };

std::string_view to_string(SubordinatorConstruction c);

/// Index of the stable subordinator attached to each exploration.
/// `rho` is required for BoundaryTouching and ignored otherwise.
double subordinator_index(SubordinatorConstruction construction, const SleParams& p, double rho = 0.0);

/// Weight W = gamma (gamma/2 + Q - alpha) of an alpha-quantum wedge.
double wedge_weight(double alpha, const SleParams& p) noexcept;

/// Inverse of wedge_weight.
double wedge_alpha_for_weight(double weight, const SleParams& p) noexcept;

struct BesselForWeight {
  double dimension = 0.0;           // 4 W / gamma^2
  double subordinator_index = 0.0;  // 1 - 2 W / gamma^2
};

BesselForWeight bessel_dimension_for_weight(double weight, const SleParams& p);

}  // namespace lqg
