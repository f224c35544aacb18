#include "lqg/perc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fft.hpp"
#include "lqg/params.hpp"
#include "lqg/rng.hpp"

namespace lqg::perc {

int hex_distance(Site a, Site b) noexcept {
  const int dq = a.q - b.q, dr = a.r - b.r;
  return std::max({std::abs(dq), std::abs(dr), std::abs(dq + dr)});
}

std::array<double, 2> embed(Site s) noexcept {
  return {static_cast<double>(s.q) + 0.5 * static_cast<double>(s.r), std::sqrt(3.0) / 2.0 * static_cast<double>(s.r)};
}

std::uint64_t site_key(Site s) noexcept {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.q)) << 32) | static_cast<std::uint32_t>(s.r);
}

bool LatticeConfig::contains(Site s) const noexcept {
  const int a = s.q + origin, b = s.r + origin;
  if (a < 0 || b < 0 || a >= width || b >= width) return false;
  return inside[index(s)] != 0;
}

std::size_t LatticeConfig::site_count() const noexcept {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

std::size_t LatticeConfig::open_count() const noexcept {
  std::size_t k = 0;
  for (std::size_t i = 0; i < open.size(); ++i) k += (inside[i] && open[i]) ? 1 : 0;
  return k;
}

std::vector<Site> LatticeConfig::sites() const {
  std::vector<Site> out;
  for (int a = 0; a < width; ++a)
    for (int b = 0; b < width; ++b)
      if (inside[static_cast<std::size_t>(a) * static_cast<std::size_t>(width) + static_cast<std::size_t>(b)])
        out.push_back({a - origin, b - origin});
  return out;
}

namespace {

LatticeConfig empty_lattice(std::size_t n, Shape shape) {
  if (n < 2) throw ParameterError("lattice size must be >= 2");
  LatticeConfig c;
  c.n = n;
  c.shape = shape;
  if (shape == Shape::disk) {
    const int R = static_cast<int>(n / 2);
    c.width = 2 * R + 1;
    c.origin = R;
  } else {
    c.width = static_cast<int>(n);
    c.origin = 0;
  }
  const auto cells = static_cast<std::size_t>(c.width) * static_cast<std::size_t>(c.width);
  c.open.assign(cells, 0);
  c.inside.assign(cells, 0);
  for (int a = 0; a < c.width; ++a)
    for (int b = 0; b < c.width; ++b) {
      const Site s{a - c.origin, b - c.origin};
      const bool in = shape == Shape::box || hex_distance(s, {}) <= c.origin;
      c.inside[c.index(s)] = in ? 1 : 0;
    }
  return c;
}

bool ball_inside(const LatticeConfig& c, Site center, int rho) {
  if (c.shape == Shape::disk) return hex_distance(center, {}) + rho <= c.radius();
  const int hi = static_cast<int>(c.n) - 1;
  return center.q - rho >= 0 && center.r - rho >= 0 && center.q + rho <= hi && center.r + rho <= hi;
}

// Hexagonal ball of radius R listed ring by ring, with a neighbour table in local indices.
struct Ball {
  int R = 0;
  std::vector<Site> offsets;
  std::vector<int> ring_start;  // R + 2 entries
  std::vector<std::array<int, 6>> nbr;
  std::vector<int> lookup;  // (2R+1)^2

  int local(Site d) const {
    const int a = d.q + R, b = d.r + R;
    if (a < 0 || b < 0 || a > 2 * R || b > 2 * R) return -1;
    return lookup[static_cast<std::size_t>(a) * static_cast<std::size_t>(2 * R + 1) + static_cast<std::size_t>(b)];
  }
};

std::shared_ptr<const Ball> make_ball(int R) {
  auto g = std::make_shared<Ball>();
  g->R = R;
  g->ring_start.push_back(0);
  g->offsets.push_back({0, 0});
  g->ring_start.push_back(1);
  for (int rho = 1; rho <= R; ++rho) {
    Site h{kDirections[4].q * rho, kDirections[4].r * rho};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < rho; ++j) {
        g->offsets.push_back(h);
        h = h + kDirections[static_cast<std::size_t>(i)];
      }
    g->ring_start.push_back(static_cast<int>(g->offsets.size()));
  }
  const auto side = static_cast<std::size_t>(2 * R + 1);
  g->lookup.assign(side * side, -1);
  for (std::size_t i = 0; i < g->offsets.size(); ++i) {
    const auto& d = g->offsets[i];
    g->lookup[static_cast<std::size_t>(d.q + R) * side + static_cast<std::size_t>(d.r + R)] = static_cast<int>(i);
  }
  g->nbr.resize(g->offsets.size());
  for (std::size_t i = 0; i < g->offsets.size(); ++i)
    for (std::size_t k = 0; k < 6; ++k) g->nbr[i][k] = g->local(g->offsets[i] + kDirections[k]);
  return g;
}

std::shared_ptr<const Ball> get_ball(int R) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const Ball>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[R];
  if (!slot) slot = make_ball(R);
  return slot;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    const int p = parent[static_cast<std::size_t>(x)];
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(p)];
    x = p;
  }
  return x;
}

struct ArmScratch {
  std::vector<int> parent;
  std::vector<std::uint8_t> attached;
};

// Grows the annulus ring by ring with union-find and stops at the first ring the arm event misses.
template <class Open>
int arm_radius_impl(const Ball& g, Site center, int r_in, int r_out, const std::vector<Color>& pattern, Open&& is_open,
                    ArmScratch& s) {
  const bool four = pattern.size() == 4;
  const bool want_open = four || pattern[0] == Color::open;
  const auto total = static_cast<std::size_t>(g.ring_start[static_cast<std::size_t>(r_out) + 1]);
  if (s.parent.size() < total) {
    s.parent.resize(total);
    s.attached.resize(total);
  }
  const int first = g.ring_start[static_cast<std::size_t>(r_in)];
  for (int rho = r_in; rho <= r_out; ++rho) {
    const int lo = g.ring_start[static_cast<std::size_t>(rho)], hi = g.ring_start[static_cast<std::size_t>(rho) + 1];
    for (int i = lo; i < hi; ++i) {
      const bool match = is_open(center + g.offsets[static_cast<std::size_t>(i)]) == want_open;
      s.parent[static_cast<std::size_t>(i)] = match ? i : -1;
      s.attached[static_cast<std::size_t>(i)] = rho == r_in ? 1 : 0;
    }
    for (int i = lo; i < hi; ++i) {
      if (s.parent[static_cast<std::size_t>(i)] < 0) continue;
      for (int j : g.nbr[static_cast<std::size_t>(i)]) {
        if (j < first || j >= hi || s.parent[static_cast<std::size_t>(j)] < 0) continue;
        const int a = find_root(s.parent, i), b = find_root(s.parent, j);
        if (a == b) continue;
        s.parent[static_cast<std::size_t>(b)] = a;
        s.attached[static_cast<std::size_t>(a)] |= s.attached[static_cast<std::size_t>(b)];
      }
    }
    int seen = -1;
    bool ok = false;
    for (int i = lo; i < hi && !ok; ++i) {
      if (s.parent[static_cast<std::size_t>(i)] < 0) continue;
      const int root = find_root(s.parent, i);
      if (!s.attached[static_cast<std::size_t>(root)]) continue;
      if (!four) {
        ok = true;
      } else if (seen < 0) {
        seen = root;
      } else if (root != seen) {
        ok = true;
      }
    }
    if (!ok) return rho - 1;
  }
  return r_out;
}

ArmScratch& thread_scratch() {
  thread_local ArmScratch s;
  return s;
}

bool four_changes(const LatticeConfig& c, Site x) {
  int changes = 0;
  bool prev = c.is_open(x + kDirections[5]);
  for (const auto& d : kDirections) {
    const bool cur = c.is_open(x + d);
    changes += cur != prev ? 1 : 0;
    prev = cur;
  }
  return changes >= 4;
}

bool four_arm_at(const LatticeConfig& c, Site x, int eps, const Ball& g) {
  if (!four_changes(c, x)) return false;
  static const std::vector<Color> alt{Color::open, Color::closed, Color::open, Color::closed};
  return arm_radius_impl(g, x, 1, eps, alt, [&c](Site s) { return c.is_open(s); }, thread_scratch()) >= eps;
}

std::vector<Site> box_pivotals(const LatticeConfig& c) {
  const int n = static_cast<int>(c.n);
  const auto N = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  const int L = static_cast<int>(N), Rt = L + 1, B = L + 2, T = L + 3;
  std::vector<int> parent(N + 4);
  std::iota(parent.begin(), parent.end(), 0);
  auto unite = [&parent](int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[static_cast<std::size_t>(b)] = a;
  };
  for (int q = 0; q < n; ++q)
    for (int r = 0; r < n; ++r) {
      const Site s{q, r};
      const int i = static_cast<int>(c.index(s));
      const bool o = c.is_open(s);
      for (const auto& d : kDirections) {
        const Site t = s + d;
        if (c.contains(t) && c.is_open(t) == o) unite(i, static_cast<int>(c.index(t)));
      }
      if (o) {
        if (q == 0) unite(i, L);
        if (q == n - 1) unite(i, Rt);
      } else {
        if (r == 0) unite(i, B);
        if (r == n - 1) unite(i, T);
      }
    }
  const bool crossing = find_root(parent, L) == find_root(parent, Rt);
  const int ra = crossing ? find_root(parent, B) : find_root(parent, L);
  const int rb = crossing ? find_root(parent, T) : find_root(parent, Rt);
  std::vector<Site> out;
  for (int q = 0; q < n; ++q)
    for (int r = 0; r < n; ++r) {
      const Site s{q, r};
      if (c.is_open(s) != crossing) continue;
      bool a = crossing ? r == 0 : q == 0;
      bool b = crossing ? r == n - 1 : q == n - 1;
      for (const auto& d : kDirections) {
        const Site t = s + d;
        if (!c.contains(t) || c.is_open(t) == crossing) continue;
        const int root = find_root(parent, static_cast<int>(c.index(t)));
        a = a || root == ra;
        b = b || root == rb;
      }
      if (a && b) out.push_back(s);
    }
  return out;
}

}  // namespace

LatticeConfig sample_config(std::size_t n, Shape shape, std::uint64_t seed) {
  if (n < 8) throw ParameterError("lattice size must be >= 8");
  auto c = empty_lattice(n, shape);
  c.seed = seed;
  for (int a = 0; a < c.width; ++a)
    for (int b = 0; b < c.width; ++b) {
      const Site s{a - c.origin, b - c.origin};
      const auto i = c.index(s);
      if (c.inside[i]) c.open[i] = site_bit(seed, site_key(s)) ? 1 : 0;
    }
  return c;
}

LatticeConfig uniform_config(std::size_t n, Shape shape, Color col) {
  auto c = empty_lattice(n, shape);
  for (std::size_t i = 0; i < c.open.size(); ++i) c.open[i] = (c.inside[i] && col == Color::open) ? 1 : 0;
  return c;
}

LatticeConfig config_from_bits(std::size_t n, Shape shape, const std::vector<std::uint8_t>& bits) {
  auto c = empty_lattice(n, shape);
  const auto sites = c.sites();
  if (bits.size() != sites.size()) throw ParameterError("config_from_bits: one bit per site expected");
  for (std::size_t k = 0; k < sites.size(); ++k) c.open[c.index(sites[k])] = bits[k] ? 1 : 0;
  return c;
}

LatticeConfig swap_colors(LatticeConfig c) {
  for (std::size_t i = 0; i < c.open.size(); ++i) c.open[i] = c.inside[i] ? static_cast<std::uint8_t>(1 - c.open[i]) : 0;
  return c;
}

AnnulusSpec one_arm_annulus(int r_inner, int r_outer, Color c, Site center) {
  return {center, r_inner, r_outer, {c}};
}

AnnulusSpec four_arm_annulus(int r_inner, int r_outer, Site center) {
  return {center, r_inner, r_outer, {Color::open, Color::closed, Color::open, Color::closed}};
}

void validate(const AnnulusSpec& a) {
  std::ostringstream os;
  if (a.r_inner < 0 || a.r_inner >= a.r_outer) {
    os << "annulus radii must satisfy 0 <= r_inner < r_outer (got " << a.r_inner << ", " << a.r_outer << ")";
  } else if (a.pattern.size() != 1 && a.pattern.size() != 4) {
    os << "arm pattern length must be 1 or 4 (got " << a.pattern.size() << ")";
  } else if (a.pattern.size() == 4) {
    for (std::size_t k = 0; k < 4; ++k)
      if (a.pattern[k] == a.pattern[(k + 1) % 4]) os << "four-arm pattern must alternate colours";
    if (os.str().empty() && a.r_inner < 1) os << "four arms need r_inner >= 1";
  }
  if (!os.str().empty()) throw ParameterError(os.str());
}

int arm_radius(const LatticeConfig& c, const AnnulusSpec& a) {
  validate(a);
  if (!ball_inside(c, a.center, a.r_outer)) throw ParameterError("annulus exceeds lattice");
  const auto g = get_ball(a.r_outer);
  return arm_radius_impl(*g, a.center, a.r_inner, a.r_outer, a.pattern, [&c](Site s) { return c.is_open(s); },
                         thread_scratch());
}

bool arm_event(const LatticeConfig& c, const AnnulusSpec& a) { return arm_radius(c, a) >= a.r_outer; }

std::uint64_t scale_seed(std::uint64_t seed, std::uint64_t scale) noexcept {
  return derive_seed(seed, 0xA5A5000000000000ULL + scale);
}

Estimate make_estimate(std::size_t hits, std::size_t trials) {
  Estimate e;
  e.hits = hits;
  e.trials = trials;
  if (trials == 0) return e;
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  e.value = p;
  e.stderr_ = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
  return e;
}

int arm_reach(const AnnulusSpec& a, std::uint64_t key) {
  validate(a);
  const auto g = get_ball(a.r_outer);
  return arm_radius_impl(*g, a.center, a.r_inner, a.r_outer, a.pattern,
                         [key](Site s) { return site_bit(key, site_key(s)); }, thread_scratch());
}

ScalingFit scaling_fit(std::vector<double> scales, std::vector<double> means, std::vector<double> stderrs) {
  if (scales.size() < 3 || means.size() != scales.size() || stderrs.size() != scales.size())
    throw ParameterError("scaling fit needs at least three matching scales");
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k < scales.size(); ++k) {
    if (!(scales[k] > scales[k - 1])) throw ParameterError("scaling fit: scales must increase");
    if (means[k] <= 0.0) throw ParameterError("scaling fit: zero mean at a fitted scale; raise trials");
    xs.push_back(std::log(scales[k]));
    ys.push_back(std::log(means[k]));
  }
  const auto lf = stats::fit_line(xs, ys);
  ScalingFit fit{std::move(scales), std::move(means), std::move(stderrs), lf.slope, lf.slope_se, lf.r2};
  return fit;
}

std::vector<Estimate> arm_profile(std::size_t n, const AnnulusSpec& a, const std::vector<int>& radii, std::size_t trials,
                                  std::uint64_t seed) {
  validate(a);
  if (n < 8) throw ParameterError("lattice size must be >= 8");
  if (hex_distance(a.center, {}) + a.r_outer > static_cast<int>(n / 2)) throw ParameterError("annulus exceeds lattice");
  for (int r : radii)
    if (r < a.r_inner || r > a.r_outer) throw ParameterError("profile radius outside the annulus");
  get_ball(a.r_outer);
  std::vector<int> reach(trials);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t t = 0; t < trials; ++t) reach[t] = arm_reach(a, derive_seed(seed, t));
  std::vector<Estimate> out;
  for (int r : radii) {
    std::size_t hits = 0;
    for (int x : reach) hits += x >= r ? 1 : 0;
    out.push_back(make_estimate(hits, trials));
  }
  return out;
}

Estimate arm_probability(std::size_t n, const AnnulusSpec& a, std::size_t trials, std::uint64_t seed) {
  return arm_profile(n, a, {a.r_outer}, trials, seed).front();
}

ScalingFit arm_exponent(const std::vector<std::size_t>& ns, bool four_arms, std::size_t trials, std::uint64_t seed) {
  if (ns.size() < 3) throw ParameterError("arm_exponent needs at least three lattice sizes");
  auto sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  const int rmax = static_cast<int>(sorted.back() / 2);
  const auto spec = four_arms ? four_arm_annulus(1, rmax) : one_arm_annulus(0, rmax);
  std::vector<int> radii;
  for (auto n : sorted) radii.push_back(static_cast<int>(n / 2));
  const auto est = arm_profile(sorted.back(), spec, radii, trials, seed);
  std::vector<double> scales, means, stderrs;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    scales.push_back(static_cast<double>(sorted[k]));
    means.push_back(est[k].value);
    stderrs.push_back(est[k].stderr_);
  }
  auto fit = scaling_fit(scales, means, stderrs);
  fit.slope = -fit.slope;
  return fit;
}

std::vector<Site> four_arm_sites(const LatticeConfig& c, int eps_radius) {
  if (eps_radius < 2) throw ParameterError("eps_radius must be >= 2");
  if (c.shape == Shape::box && eps_radius + 1 >= static_cast<int>(c.n)) return box_pivotals(c);
  const auto g = get_ball(eps_radius);
  std::vector<Site> out;
  for (const auto& s : c.sites())
    if (ball_inside(c, s, eps_radius) && four_arm_at(c, s, eps_radius, *g)) out.push_back(s);
  return out;
}

std::vector<Site> four_arm_sites_parallel(const LatticeConfig& c, int eps_radius) {
  if (eps_radius < 2) throw ParameterError("eps_radius must be >= 2");
  if (c.shape == Shape::box && eps_radius + 1 >= static_cast<int>(c.n)) return box_pivotals(c);
  const auto g = get_ball(eps_radius);
  const auto sites = c.sites();
  std::vector<std::uint8_t> flag(sites.size(), 0);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::size_t k = 0; k < sites.size(); ++k)
    flag[k] = (ball_inside(c, sites[k], eps_radius) && four_arm_at(c, sites[k], eps_radius, *g)) ? 1 : 0;
  std::vector<Site> out;
  for (std::size_t k = 0; k < sites.size(); ++k)
    if (flag[k]) out.push_back(sites[k]);
  return out;
}

std::vector<Site> four_arm_filter(const LatticeConfig& c, const std::vector<Site>& candidates, int eps_radius) {
  if (eps_radius < 2) throw ParameterError("eps_radius must be >= 2");
  std::vector<Site> out;
  if (c.shape == Shape::box && eps_radius + 1 >= static_cast<int>(c.n)) {
    auto piv = box_pivotals(c);
    for (const auto& s : candidates)
      if (std::binary_search(piv.begin(), piv.end(), s, [](Site a, Site b) { return a.q != b.q ? a.q < b.q : a.r < b.r; }))
        out.push_back(s);
    return out;
  }
  const auto g = get_ball(eps_radius);
  for (const auto& s : candidates)
    if (c.contains(s) && ball_inside(c, s, eps_radius) && four_arm_at(c, s, eps_radius, *g)) out.push_back(s);
  return out;
}

bool left_right_crossing(const LatticeConfig& c) {
  if (c.shape != Shape::box) throw ParameterError("crossings are defined on box lattices");
  const int n = static_cast<int>(c.n);
  std::vector<std::uint8_t> seen(c.open.size(), 0);
  std::vector<Site> stack;
  for (int r = 0; r < n; ++r)
    if (c.is_open({0, r})) {
      seen[c.index({0, r})] = 1;
      stack.push_back({0, r});
    }
  while (!stack.empty()) {
    const Site s = stack.back();
    stack.pop_back();
    if (s.q == n - 1) return true;
    for (const auto& d : kDirections) {
      const Site t = s + d;
      if (c.contains(t) && c.is_open(t) && !seen[c.index(t)]) {
        seen[c.index(t)] = 1;
        stack.push_back(t);
      }
    }
  }
  return false;
}

std::vector<Site> flip_pivotals(const LatticeConfig& c) {
  const bool base = left_right_crossing(c);
  auto work = c;
  std::vector<Site> out;
  for (const auto& s : c.sites()) {
    const auto i = work.index(s);
    work.open[i] ^= 1;
    if (left_right_crossing(work) != base) out.push_back(s);
    work.open[i] ^= 1;
  }
  return out;
}

double SiteMeasure::total() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass;
  return s;
}

double SiteMeasure::mass_within(Site center, int radius) const {
  double s = 0.0;
  for (const auto& a : atoms)
    if (hex_distance(a.site, center) <= radius) s += a.mass;
  return s;
}

double SiteMeasure::mass_on(const std::vector<Site>& sites) const {
  auto sorted = sites;
  std::sort(sorted.begin(), sorted.end());
  double s = 0.0;
  for (const auto& a : atoms)
    if (std::binary_search(sorted.begin(), sorted.end(), a.site)) s += a.mass;
  return s;
}

SiteMeasure pivotal_measure(const LatticeConfig& c, int eps_radius, double alpha4_hat) {
  if (!(alpha4_hat > 0.0)) throw ParameterError("alpha4_hat must be > 0");
  SiteMeasure m;
  m.delta = c.delta();
  m.alpha_hat = alpha4_hat;
  const double mass = m.delta * m.delta / alpha4_hat;
  for (const auto& s : four_arm_sites(c, eps_radius)) m.atoms.push_back({s, mass});
  return m;
}

SiteMeasure area_measure(const LatticeConfig& c, int r_inner, int r_outer, double alpha1_hat) {
  if (!(alpha1_hat > 0.0)) throw ParameterError("alpha1_hat must be > 0");
  if (c.shape != Shape::disk) throw ParameterError("area_measure needs a disk lattice");
  if (r_inner < 0 || r_inner >= r_outer || r_outer > c.radius()) throw ParameterError("annulus exceeds lattice");
  SiteMeasure m;
  m.delta = c.delta();
  m.alpha_hat = alpha1_hat;
  const auto g = get_ball(r_outer);
  std::vector<std::uint8_t> seen(g->offsets.size(), 0);
  std::vector<int> stack;
  for (int i = g->ring_start[static_cast<std::size_t>(r_outer)]; i < g->ring_start[static_cast<std::size_t>(r_outer) + 1]; ++i)
    if (c.is_open(g->offsets[static_cast<std::size_t>(i)])) {
      seen[static_cast<std::size_t>(i)] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j : g->nbr[static_cast<std::size_t>(i)])
      if (j >= 0 && !seen[static_cast<std::size_t>(j)] && c.is_open(g->offsets[static_cast<std::size_t>(j)])) {
        seen[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
  }
  std::vector<Site> atoms;
  for (int i = 0; i < g->ring_start[static_cast<std::size_t>(r_inner) + 1]; ++i)
    if (seen[static_cast<std::size_t>(i)]) atoms.push_back(g->offsets[static_cast<std::size_t>(i)]);
  std::sort(atoms.begin(), atoms.end());
  const double mass = m.delta * m.delta / alpha1_hat;
  for (const auto& s : atoms) m.atoms.push_back({s, mass});
  return m;
}

bool PseudoInterface::on_path(Site s) const {
  return std::any_of(edges.begin(), edges.end(), [s](const auto& e) { return e.first == s || e.second == s; });
}

std::vector<Site> PseudoInterface::p0_in(int r, int R) const {
  std::vector<Site> out;
  for (const auto& s : p0) {
    const int d = hex_distance(s, {});
    if (d >= r && d <= R) out.push_back(s);
  }
  return out;
}

PseudoInterface pseudo_interface(const LatticeConfig& c) {
  if (c.shape != Shape::disk) throw ParameterError("pseudo_interface needs a disk lattice");
  const int R = c.radius();
  std::vector<std::uint8_t> live = c.inside;  // the component of the origin not yet explored
  auto in_d = [&](Site s) { return c.contains(s) && live[c.index(s)] != 0; };
  auto acts_open = [&](Site s) { return c.contains(s) && c.is_open(s); };
  auto dir = [](int k) { return kDirections[static_cast<std::size_t>(((k % 6) + 6) % 6)]; };
  auto touches_d = [&](Site s) {
    return std::any_of(kDirections.begin(), kDirections.end(), [&](Site d) { return in_d(s + d); });
  };
  auto recompute = [&]() {
    std::vector<std::uint8_t> reach(live.size(), 0);
    std::vector<Site> stack{{0, 0}};
    reach[c.index({0, 0})] = 1;
    while (!stack.empty()) {
      const Site s = stack.back();
      stack.pop_back();
      for (const auto& d : kDirections) {
        const Site t = s + d;
        if (in_d(t) && !reach[c.index(t)]) {
          reach[c.index(t)] = 1;
          stack.push_back(t);
        }
      }
    }
    live.swap(reach);
  };

  PseudoInterface out;
  std::vector<Site> p0_sorted;
  std::size_t last_p0 = 0;
  Site L{R + 1, 0};
  int k = 2;
  const std::size_t cap = 24 * (c.site_count() + 6 * static_cast<std::size_t>(R) + 12);
  for (std::size_t step = 0;; ++step) {
    if (step > cap) throw std::runtime_error("exploration stuck");
    const Site Rh = L + dir(k);
    const Site F = L + dir(k + 1);
    out.edges.emplace_back(L, Rh);
    if (in_d(F)) {
      out.revealed.push_back(F);
      live[c.index(F)] = 0;
      if (F == Site{0, 0}) break;
      if (acts_open(F)) {
        L = F;
        k -= 1;
      } else {
        k += 1;
      }
      int runs = 0;
      for (int i = 0; i < 6; ++i)
        if (!in_d(F + dir(i)) && in_d(F + dir(i - 1))) ++runs;
      if (runs >= 2) recompute();
      continue;
    }
    const bool natural_right = acts_open(F);
    const Site front_right = F + dir(k), front_left = L + dir(k + 2);
    const bool ok_right = in_d(front_right), ok_left = in_d(front_left);
    bool right = natural_right;
    if (ok_right != ok_left) {
      right = ok_right;
    } else if (!ok_right) {
      const bool piv_right = touches_d(Rh), piv_left = touches_d(L);
      if (piv_right != piv_left) right = piv_right;
    }
    ExplorationHit hit{step, L, Rh, F, right != natural_right};
    out.hits.push_back(hit);
    if (hit.color_change) {
      out.disconnections.push_back(step);
    } else if (ok_right != ok_left) {
      const Site pivot = right ? Rh : L;
      if (c.contains(pivot) && !std::binary_search(p0_sorted.begin(), p0_sorted.end(), pivot)) {
        p0_sorted.insert(std::upper_bound(p0_sorted.begin(), p0_sorted.end(), pivot), pivot);
        out.p0.push_back(pivot);
        out.pockets.emplace_back(last_p0, step);
        last_p0 = step;
      }
    }
    if (right) {
      L = F;
      k -= 1;
    } else {
      k += 1;
    }
  }
  return out;
}

QuasiMultResult quasi_mult_result(const Estimate& inner, const Estimate& outer, const Estimate& whole) {
  QuasiMultResult res;
  res.inner = inner;
  res.outer = outer;
  res.whole = whole;
  res.product = inner.value * outer.value;
  res.product_stderr = std::hypot(inner.stderr_ * outer.value, outer.stderr_ * inner.value);
  res.ratio = res.product > 0.0 ? whole.value / res.product : 0.0;
  res.pass = whole.value <= res.product + 3.0 * std::hypot(res.product_stderr, whole.stderr_);
  return res;
}

QuasiMultResult quasi_mult_check(std::size_t n, int r1, int r2, int r3, std::size_t trials, std::uint64_t seed) {
  if (!(r1 >= 0 && r1 <= r2 && r2 < r3)) throw ParameterError("quasi_mult_check needs r1 <= r2 < r3");
  QuasiMultResult res;
  res.whole = arm_probability(n, one_arm_annulus(r1, r3), trials, seed);
  if (r2 == r1) {
    res.inner = make_estimate(trials, trials);
    res.outer = res.whole;
  } else {
    res.inner = arm_probability(n, one_arm_annulus(r1, r2), trials, scale_seed(seed, 1));
    res.outer = arm_probability(n, one_arm_annulus(r2 + 1, r3), trials, scale_seed(seed, 2));
  }
  return quasi_mult_result(res.inner, res.outer, res.whole);
}

namespace {

double check_energy_args(const SiteMeasure& m, double d, double eps_exp) {
  if (m.atoms.size() < 2) throw ParameterError("energy needs at least two atoms");
  if (!(eps_exp > 0.0 && eps_exp < d)) throw ParameterError("energy needs 0 < eps_exp < d");
  return d - eps_exp;
}

}  // namespace

double energy_direct(const SiteMeasure& m, double d, double eps_exp) {
  const double s = check_energy_args(m, d, eps_exp);
  const double delta = m.delta > 0.0 ? m.delta : 1.0;
  std::vector<std::array<double, 2>> pos;
  for (const auto& a : m.atoms) pos.push_back(embed(a.site));
  double acc = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      const double dist = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]) * delta;
      row += m.atoms[j].mass * std::pow(dist, -s);
    }
    acc += m.atoms[i].mass * row;
  }
  return 2.0 * acc;
}

double energy_fft(const SiteMeasure& m, double d, double eps_exp) {
  const double s = check_energy_args(m, d, eps_exp);
  const double delta = m.delta > 0.0 ? m.delta : 1.0;
  int qmin = m.atoms[0].site.q, qmax = qmin, rmin = m.atoms[0].site.r, rmax = rmin;
  for (const auto& a : m.atoms) {
    qmin = std::min(qmin, a.site.q);
    qmax = std::max(qmax, a.site.q);
    rmin = std::min(rmin, a.site.r);
    rmax = std::max(rmax, a.site.r);
  }
  const auto wq = static_cast<std::size_t>(qmax - qmin + 1), wr = static_cast<std::size_t>(rmax - rmin + 1);
  const std::size_t nx = 2 * wq, ny = 2 * wr;
  std::vector<double> g(nx * ny, 0.0), kern(nx * ny, 0.0);
  for (const auto& a : m.atoms)
    g[static_cast<std::size_t>(a.site.q - qmin) * ny + static_cast<std::size_t>(a.site.r - rmin)] += a.mass;
  const int hq = static_cast<int>(wq), hr = static_cast<int>(wr);
  for (int dq = -hq + 1; dq < hq; ++dq)
    for (int dr = -hr + 1; dr < hr; ++dr) {
      if (dq == 0 && dr == 0) continue;
      const auto p = embed({dq, dr});
      const auto iq = static_cast<std::size_t>((dq + static_cast<int>(nx)) % static_cast<int>(nx));
      const auto ir = static_cast<std::size_t>((dr + static_cast<int>(ny)) % static_cast<int>(ny));
      kern[iq * ny + ir] = std::pow(std::hypot(p[0], p[1]) * delta, -s);
    }
  const auto conv = detail::convolve2d(g, kern, nx, ny);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * conv[i];
  return acc;
}

double energy_estimate(const SiteMeasure& m, double d, double eps_exp) {
  return m.atoms.size() > 4096 ? energy_fft(m, d, eps_exp) : energy_direct(m, d, eps_exp);
}

ScalingFit pivotal_scaling(const std::vector<int>& sides, std::size_t n_ref, double alpha4_hat, std::size_t trials,
                           std::uint64_t seed) {
  if (sides.size() < 3) throw ParameterError("pivotal_scaling needs at least three sides");
  if (!(alpha4_hat > 0.0)) throw ParameterError("alpha4_hat must be > 0");
  auto sorted = sides;
  std::sort(sorted.begin(), sorted.end());
  const double delta = 1.0 / static_cast<double>(n_ref);
  ScalingFit fit;
  for (int side : sorted) {
    if (side < 8) throw ParameterError("box side must be >= 8");
    std::vector<double> mass(trials);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t t = 0; t < trials; ++t) {
      const auto cfg = sample_config(static_cast<std::size_t>(side), Shape::box,
                                     derive_seed(scale_seed(seed, static_cast<std::uint64_t>(side)), t));
      mass[t] = static_cast<double>(box_pivotals(cfg).size()) * delta * delta / alpha4_hat;
    }
    const auto sm = stats::summarize(mass);
    fit.scales.push_back(side);
    fit.means.push_back(sm.mean);
    fit.stderrs.push_back(sm.stderr_);
  }
  return scaling_fit(fit.scales, fit.means, fit.stderrs);
}

ScalingFit area_scaling(const std::vector<int>& radii, std::size_t trials, std::uint64_t seed) {
  if (radii.size() < 3) throw ParameterError("area_scaling needs at least three radii");
  auto sorted = radii;
  std::sort(sorted.begin(), sorted.end());
  ScalingFit fit;
  for (int r : sorted) {
    if (r < 1) throw ParameterError("radius must be >= 1");
    get_ball(2 * r);
    std::vector<double> count(trials);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t t = 0; t < trials; ++t)
      count[t] = static_cast<double>(area_count(r, derive_seed(scale_seed(seed, static_cast<std::uint64_t>(r)), t)));
    const auto sm = stats::summarize(count);
    fit.scales.push_back(r);
    fit.means.push_back(sm.mean);
    fit.stderrs.push_back(sm.stderr_);
  }
  return scaling_fit(fit.scales, fit.means, fit.stderrs);
}

std::size_t area_count(int r, std::uint64_t key) {
  if (r < 1) throw ParameterError("radius must be >= 1");
  const auto g = get_ball(2 * r);
  auto open = [&](int i) { return site_bit(key, site_key(g->offsets[static_cast<std::size_t>(i)])); };
  std::vector<std::uint8_t> seen(g->offsets.size(), 0);
  std::vector<int> stack;
  for (int i = g->ring_start[static_cast<std::size_t>(2 * r)]; i < g->ring_start[static_cast<std::size_t>(2 * r) + 1]; ++i)
    if (open(i)) {
      seen[static_cast<std::size_t>(i)] = 1;
      stack.push_back(i);
    }
  std::size_t inner = 0;
  const int limit = g->ring_start[static_cast<std::size_t>(r) + 1];
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    if (i < limit) ++inner;
    for (int j : g->nbr[static_cast<std::size_t>(i)])
      if (j >= 0 && !seen[static_cast<std::size_t>(j)] && open(j)) {
        seen[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
  }
  return inner;
}

}  // namespace lqg::perc
