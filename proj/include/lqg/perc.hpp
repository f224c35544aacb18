#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "lqg/stats.hpp"

namespace lqg::perc {

/// Triangular-lattice site in axial coordinates; Euclidean position (q + r/2, r sqrt(3)/2).
struct Site {
  int q = 0;
  int r = 0;
  friend bool operator==(Site a, Site b) noexcept { return a.q == b.q && a.r == b.r; }
  friend bool operator<(Site a, Site b) noexcept { return a.r != b.r ? a.r < b.r : a.q < b.q; }
};

/// Neighbour offsets in counterclockwise order starting from +x.
inline constexpr std::array<Site, 6> kDirections{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};

inline Site operator+(Site a, Site b) noexcept { return {a.q + b.q, a.r + b.r}; }
inline Site operator-(Site a, Site b) noexcept { return {a.q - b.q, a.r - b.r}; }

int hex_distance(Site a, Site b) noexcept;
std::array<double, 2> embed(Site s) noexcept;

/// Colour key of a site; shared by every lattice so that equal seeds give equal colours.
std::uint64_t site_key(Site s) noexcept;

enum class Shape { disk, box };
enum class Color : std::uint8_t { closed = 0, open = 1 };

/// Site colouring of a disk {|x|_hex <= n/2} or a rhombus box [0, n)^2.
struct LatticeConfig {
  std::size_t n = 0;
  Shape shape = Shape::disk;
  std::uint64_t seed = 0;
  int width = 0;   // side of the backing grid
  int origin = 0;  // grid offset of site (0, 0)
  std::vector<std::uint8_t> open;    // width^2, 1 = open
  std::vector<std::uint8_t> inside;  // width^2, 1 = lattice site

  int radius() const noexcept { return static_cast<int>(n / 2); }
  double delta() const noexcept { return 1.0 / static_cast<double>(n); }
  bool contains(Site s) const noexcept;
  bool is_open(Site s) const noexcept { return open[index(s)] != 0; }
  std::size_t index(Site s) const noexcept {
    return static_cast<std::size_t>(s.q + origin) * static_cast<std::size_t>(width) + static_cast<std::size_t>(s.r + origin);
  }
  std::size_t site_count() const noexcept;
  std::size_t open_count() const noexcept;
  /// Sites in index order.
  std::vector<Site> sites() const;
};

/// Each site open independently with probability 1/2; colour of s is site_bit(seed, site_key(s)).
LatticeConfig sample_config(std::size_t n, Shape shape, std::uint64_t seed);
LatticeConfig uniform_config(std::size_t n, Shape shape, Color c);
/// Colours listed in sites() order.
LatticeConfig config_from_bits(std::size_t n, Shape shape, const std::vector<std::uint8_t>& bits);
LatticeConfig swap_colors(LatticeConfig c);

/// Annulus {r_inner <= |x - center|_hex <= r_outer}; r_inner = 0 makes the centre the inner face.
/// A length-4 pattern means four arms of alternating colours.
struct AnnulusSpec {
  Site center;
  int r_inner = 0;
  int r_outer = 1;
  std::vector<Color> pattern{Color::open};
};

AnnulusSpec one_arm_annulus(int r_inner, int r_outer, Color c = Color::open, Site center = {});
AnnulusSpec four_arm_annulus(int r_inner, int r_outer, Site center = {});
void validate(const AnnulusSpec& a);

bool arm_event(const LatticeConfig& c, const AnnulusSpec& a);

/// Largest rho in [r_inner, r_outer] for which the arm event to ring rho holds, or r_inner - 1.
int arm_radius(const LatticeConfig& c, const AnnulusSpec& a);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t hits = 0;
  std::size_t trials = 0;
};

Estimate make_estimate(std::size_t hits, std::size_t trials);

/// Monte Carlo frequency of the arm event on the disk lattice of size n; trial t uses seed
/// derive_seed(seed, t) and agrees with arm_event(sample_config(n, disk, that seed), a).
Estimate arm_probability(std::size_t n, const AnnulusSpec& a, std::size_t trials, std::uint64_t seed);

/// arm_radius for the colouring site_bit(key, site_key(s)) of the whole plane; the trial kernel
/// of arm_profile, where trial t uses key derive_seed(seed, t).
int arm_reach(const AnnulusSpec& a, std::uint64_t key);

/// Arm probabilities to every ring in `radii` (each <= a.r_outer) from one set of trials.
std::vector<Estimate> arm_profile(std::size_t n, const AnnulusSpec& a, const std::vector<int>& radii, std::size_t trials,
                                  std::uint64_t seed);

struct ScalingFit {
  std::vector<double> scales;
  std::vector<double> means;
  std::vector<double> stderrs;
  double slope = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};

/// Log-log least squares of means against scales with the smallest scale dropped; scales ascending.
ScalingFit scaling_fit(std::vector<double> scales, std::vector<double> means, std::vector<double> stderrs);

/// Log-log slope of alpha(r_inner, n/2) against delta = 1/n, smallest n dropped from the fit.
ScalingFit arm_exponent(const std::vector<std::size_t>& ns, bool four_arms, std::size_t trials, std::uint64_t seed);

/// Sites with the alternating four-arm event in (site, 1, eps_radius). On a box whose width is
/// at most eps_radius + 1 the rim is the box boundary, wired open on the left and right sides and
/// closed on the bottom and top, and the listed sites are the pivotals of the left-right crossing.
/// Otherwise sites whose eps-ball leaves the lattice are not listed.
std::vector<Site> four_arm_sites(const LatticeConfig& c, int eps_radius);
std::vector<Site> four_arm_sites_parallel(const LatticeConfig& c, int eps_radius);

/// The members of `candidates` that four_arm_sites(c, eps_radius) would list.
std::vector<Site> four_arm_filter(const LatticeConfig& c, const std::vector<Site>& candidates, int eps_radius);

/// Pivotal sites of the left-right open crossing of a box, by flipping each site.
std::vector<Site> flip_pivotals(const LatticeConfig& c);
bool left_right_crossing(const LatticeConfig& c);

struct SiteMeasure {
  struct Atom {
    Site site;
    double mass = 0.0;
  };
  std::vector<Atom> atoms;
  double delta = 0.0;
  double alpha_hat = 0.0;

  double total() const;
  double mass_within(Site center, int radius) const;
  /// Mass of atoms whose site is in `sites`.
  double mass_on(const std::vector<Site>& sites) const;
};

SiteMeasure pivotal_measure(const LatticeConfig& c, int eps_radius, double alpha4_hat);

/// Atoms are the sites of B(0, r_inner) joined to the ring |x| = r_outer by an open path in B(0, r_outer).
SiteMeasure area_measure(const LatticeConfig& c, int r_inner, int r_outer, double alpha1_hat);

struct ExplorationHit {
  std::size_t step = 0;
  Site left;
  Site right;
  Site front;
  bool color_change = false;
};

struct PseudoInterface {
  std::vector<std::pair<Site, Site>> edges;  // (left, right) hexagons of each step
  std::vector<Site> revealed;
  std::vector<ExplorationHit> hits;
  std::vector<std::size_t> disconnections;                // steps of colour changes
  std::vector<std::pair<std::size_t, std::size_t>> pockets;  // step ranges between boundary hits
  std::vector<Site> p0;

  bool on_path(Site s) const;
  /// P0 sites with r <= |x|_hex <= R.
  std::vector<Site> p0_in(int r, int R) const;
};

/// Radial exploration on a disk from the edge between (R+1, 0) and (R, 1) to the origin.
/// Open hexagons are kept on the left; sites off the lattice count as closed. When the front
/// hexagon is already explored or cut off, the turn leading back to the component of the origin
/// is taken; if that overrides the hexagon's colour the step is a colour change, otherwise the
/// pivot of the turn is a P0 point.
PseudoInterface pseudo_interface(const LatticeConfig& c);

struct QuasiMultResult {
  Estimate inner;   // alpha(r1, r2)
  Estimate outer;   // alpha(r2 + 1, r3), or alpha(r1, r3) when r2 == r1
  Estimate whole;   // alpha(r1, r3)
  double product = 0.0;
  double product_stderr = 0.0;
  double ratio = 0.0;  // whole / product
  bool pass = false;   // whole <= product + 3 sigma
};

QuasiMultResult quasi_mult_result(const Estimate& inner, const Estimate& outer, const Estimate& whole);

/// whole uses trial keys derive_seed(seed, t); inner and outer use scale_seed(seed, 1) and scale_seed(seed, 2).
QuasiMultResult quasi_mult_check(std::size_t n, int r1, int r2, int r3, std::size_t trials, std::uint64_t seed);

/// Sum over ordered pairs x != y of m_x m_y |x - y|^{-(d - eps_exp)}, positions scaled by delta.
double energy_direct(const SiteMeasure& m, double d, double eps_exp);
double energy_fft(const SiteMeasure& m, double d, double eps_exp);
double energy_estimate(const SiteMeasure& m, double d, double eps_exp);

/// Stream seed of one scale in the scaling fits: trial t at scale s uses derive_seed(scale_seed(seed, s), t).
std::uint64_t scale_seed(std::uint64_t seed, std::uint64_t scale) noexcept;

/// Mean number of pivotals of boxes of side r (times delta^2 / alpha4_hat, delta = 1 / n_ref).
ScalingFit pivotal_scaling(const std::vector<int>& sides, std::size_t n_ref, double alpha4_hat, std::size_t trials,
                           std::uint64_t seed);

/// Mean number of sites of B(0, r) joined to the ring 2r.
ScalingFit area_scaling(const std::vector<int>& radii, std::size_t trials, std::uint64_t seed);

/// Number of sites of B(0, r) joined to the ring 2r under the plane colouring keyed by `key`.
std::size_t area_count(int r, std::uint64_t key);

}  // namespace lqg::perc
