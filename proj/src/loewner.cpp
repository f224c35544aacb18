#include "lqg/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lqg/params.hpp"
#include "lqg/rng.hpp"

namespace lqg::loewner {

void validate_forces(std::span<const ForceSpec> forces) {
  double last_right = -1.0, last_left = 1.0;
  bool any_right = false, any_left = false;
  for (const auto& f : forces) {
    if (!(f.weight > -2.0)) {
      std::ostringstream os;
      os << "force weight rho = " << f.weight << " outside (-2, inf)";
      throw ParameterError(os.str());
    }
    if (f.side == Side::Right) {
      if (f.position < 0.0) throw ParameterError("right force point at negative position");
      if (any_right && !(f.position > last_right)) throw ParameterError("right force points must be strictly increasing");
      last_right = f.position;
      any_right = true;
    } else {
      if (f.position > 0.0) throw ParameterError("left force point at positive position");
      if (any_left && !(f.position < last_left)) throw ParameterError("left force points must be strictly decreasing");
      last_left = f.position;
      any_left = true;
    }
  }
}

DrivingPath simulate_driving_from_normals(double kappa, std::span<const ForceSpec> forces, double dt,
                                          std::span<const double> normals, const DrivingOptions& opts) {
  if (!(kappa >= 0.0)) throw ParameterError("kappa must be >= 0");
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  validate_forces(forces);

  const std::size_t steps = normals.size();
  const std::size_t nf = forces.size();
  const double thr = opts.collision_threshold < 0.0 ? 0.1 * std::sqrt(dt) : opts.collision_threshold;
  const double sk = std::sqrt(kappa), sdt = std::sqrt(dt);

  // Right side first, then left: the fixed collision-processing order.
  std::vector<std::size_t> order(nf);
  for (std::size_t i = 0; i < nf; ++i) order[i] = i;
  std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return forces[i].side == Side::Right; });

  DrivingPath d;
  d.kappa = kappa;
  d.dt = dt;
  d.forces.assign(forces.begin(), forces.end());
  d.w.resize(steps + 1);
  d.v.assign(nf, std::vector<double>(steps + 1));
  d.zero_gap_fraction.assign(nf, 0.0);
  d.w[0] = 0.0;
  for (std::size_t i = 0; i < nf; ++i) d.v[i][0] = forces[i].position;

  std::vector<std::size_t> zero_count(nf, 0);
  std::vector<double> vdrift(nf);
  for (std::size_t k = 0; k < steps; ++k) {
    const double w = d.w[k];
    double wdrift = 0.0;
    for (std::size_t i : order) {
      const double s = forces[i].side == Side::Right ? 1.0 : -1.0;
      const double g = std::max(s * (d.v[i][k] - w), 0.0);
      const double geff = std::max(g, thr);
      wdrift += -s * forces[i].weight / geff;
      vdrift[i] = 2.0 * s / geff;
    }
    const double w_det = w + wdrift * dt;
    const double w_next = w_det + sk * sdt * normals[k];
    for (std::size_t i : order) {
      const double s = forces[i].side == Side::Right ? 1.0 : -1.0;
      const double v = d.v[i][k];
      const double g = std::max(s * (v - w), 0.0);
      double v_next = v + vdrift[i] * dt;
      if (g >= thr && s * (v_next - w_det) < -g) {
        std::ostringstream os;
        os << "drift overshoots force point " << i << " at step " << k << " (gap " << g << "); reduce dt";
        throw StepSizeError(os.str());
      }
      if (s * (v_next - w_next) <= 0.0) {
        v_next = w_next;
        ++zero_count[i];
      }
      d.v[i][k + 1] = v_next;
    }
    d.w[k + 1] = w_next;
  }
  for (std::size_t i = 0; i < nf; ++i) {
    d.zero_gap_fraction[i] = steps ? static_cast<double>(zero_count[i]) / static_cast<double>(steps) : 0.0;
  }
  return d;
}

DrivingPath simulate_driving(double kappa, std::span<const ForceSpec> forces, double dt, double horizon,
                             std::uint64_t seed, const DrivingOptions& opts) {
  if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  CounterRng rng(seed);
  std::vector<double> normals(steps);
  for (auto& z : normals) z = rng.normal();
  auto d = simulate_driving_from_normals(kappa, forces, dt, normals, opts);
  d.seed = seed;
  return d;
}

namespace {

// Inverse of the vertical-slit map z -> u + sqrt((z - u)^2 + 4 dt), branch in the closed upper half-plane.
inline Complex unzip(Complex z, double u, double four_dt) {
  const Complex a = z - u;
  Complex s = std::sqrt(a * a - four_dt);
  if (s.imag() < 0.0 || (s.imag() == 0.0 && a.real() < 0.0 && s.real() > 0.0)) s = -s;
  return u + s;
}

}  // namespace

Complex tip_at_step(const DrivingPath& d, std::size_t step) {
  if (step > d.steps()) throw std::out_of_range("tip_at_step: step beyond path");
  const double four_dt = 4.0 * d.dt;
  Complex z(d.w[step], 0.0);
  for (std::size_t i = step; i-- > 0;) {
    z = unzip(z, d.w[i + 1], four_dt);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      std::ostringstream os;
      os << "zipper blow-up while tracing step " << step << " (at slit " << i << ")";
      throw TraceError(os.str(), step);
    }
  }
  return z;
}

CurveTrace trace_curve(const DrivingPath& d, std::size_t resolution) {
  if (resolution < 2) throw ParameterError("trace_curve: resolution must be >= 2");
  const std::size_t steps = d.steps();
  CurveTrace t;
  t.points.resize(resolution);
  t.capacity_times.resize(resolution);
  for (std::size_t j = 0; j < resolution; ++j) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(j) * static_cast<double>(steps) /
                                                         static_cast<double>(resolution - 1)));
    t.points[j] = tip_at_step(d, k);
    t.capacity_times[j] = static_cast<double>(k) * d.dt;
  }
  return t;
}

std::vector<std::size_t> hit_steps(const DrivingPath& d, double tolerance, double min_time) {
  std::vector<std::size_t> out;
  const auto it = std::find_if(d.forces.begin(), d.forces.end(), [](const ForceSpec& f) { return f.side == Side::Right; });
  if (it == d.forces.end()) return out;
  const auto& v = d.v[static_cast<std::size_t>(it - d.forces.begin())];
  for (std::size_t k = 0; k <= d.steps(); ++k) {
    if (static_cast<double>(k) * d.dt < min_time) continue;
    if (v[k] - d.w[k] <= tolerance) out.push_back(k);
  }
  return out;
}

std::vector<BoundaryHit> boundary_hits(const DrivingPath& d, double tolerance, double min_time) {
  const auto steps = hit_steps(d, tolerance, min_time);
  std::vector<BoundaryHit> hits;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0 && steps[i] == steps[i - 1] + 1) continue;
    hits.push_back({static_cast<double>(steps[i]) * d.dt, tip_at_step(d, steps[i]).real()});
  }
  return hits;
}

namespace {

struct SegmentHit {
  double distance;
  Complex nearest;
};

SegmentHit nearest_on_polyline(std::span<const Complex> poly, Complex z) {
  SegmentHit best{std::numeric_limits<double>::infinity(), poly.front()};
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Complex a = poly[i], b = poly[i + 1];
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0.0 ? ((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Complex p = a + t * ab;
    const double dist = std::abs(z - p);
    if (dist < best.distance) best = {dist, p};
  }
  return best;
}

}  // namespace

double halfplane_capacity(std::span<const Complex> polyline, const CapacityOptions& opts) {
  if (polyline.size() < 2) return 0.0;
  double radius = 0.0, top = 0.0;
  double xmin = polyline.front().real(), xmax = xmin, ymin = polyline.front().imag();
  for (const auto& z : polyline) {
    radius = std::max(radius, std::abs(z));
    top = std::max(top, z.imag());
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
  }
  if (top <= 0.0) return 0.0;
  const double r = 1.05 * radius;
  const double shell = opts.shell * r;
  const double far = 1e4 * r;

  CounterRng rng(opts.seed);
  double acc = 0.0;
  for (std::size_t walk = 0; walk < opts.walks; ++walk) {
    const double theta = std::acos(1.0 - 2.0 * rng.uniform());
    Complex z = std::polar(r, theta);
    double value = 0.0;
    for (;;) {
      const double to_line = z.imag();
      const double dx = std::max({xmin - z.real(), 0.0, z.real() - xmax});
      const double dy = std::max({ymin - z.imag(), 0.0, z.imag() - top});
      const double box = std::hypot(dx, dy);
      double step = to_line;
      SegmentHit hit{std::numeric_limits<double>::infinity(), {}};
      if (box < to_line) {
        hit = nearest_on_polyline(polyline, z);
        step = std::min(step, hit.distance);
      }
      if (step < shell) {
        value = hit.distance < to_line ? hit.nearest.imag() : 0.0;
        break;
      }
      if (std::abs(z) > far) break;
      z += std::polar(step, 2.0 * std::numbers::pi * rng.uniform());
    }
    acc += value;
  }
  return 4.0 * r / std::numbers::pi * acc / static_cast<double>(opts.walks);
}

namespace {

double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

bool on_segment(Complex a, Complex b, Complex p) {
  return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
         std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
}

bool segments_intersect(Complex p1, Complex p2, Complex q1, Complex q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace

bool polyline_self_intersects(std::span<const Complex> polyline) {
  const std::size_t n = polyline.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 2; j + 1 < n; ++j) {
      if (segments_intersect(polyline[i], polyline[i + 1], polyline[j], polyline[j + 1])) return true;
    }
  }
  return false;
}

}  // namespace lqg::loewner
