#pragma once

// Qubit specialization on the Bloch sphere: rho = (1 + r n.sigma) / 2,
// geodesic polygons, their signed solid angles and the closed-form phase and
// visibility of a transported qubit.
//
// Orientation: a polygon traversed counterclockwise as seen from outside the
// sphere encloses a positive solid angle. With that convention the "+"
// eigenstate picks up -Omega/2.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Geometry>

#include "mixphase/core.hpp"
#include "mixphase/interferometry.hpp"
#include "mixphase/transport.hpp"

namespace mixphase::bloch {

using Vec3 = Eigen::Vector3d;

inline Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix sigma_y() {
  Matrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

inline Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

/// n.sigma
inline Matrix pauli_dot(const Vec3& n) {
  return n.x() * sigma_x() + n.y() * sigma_y() + n.z() * sigma_z();
}

class BlochState {
 public:
  static BlochState create(double r, const Vec3& direction) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw Error(ErrorCode::InvalidBlochVector,
                  "purity radius " + num(r) + " outside [0, 1]");
    }
    if (!(std::abs(direction.norm() - 1.0) <= 1e-12)) {
      throw Error(ErrorCode::InvalidBlochVector,
                  "direction has norm " + num(direction.norm()));
    }
    return BlochState(r, direction);
  }

  double r() const noexcept { return r_; }
  const Vec3& direction() const noexcept { return direction_; }

 private:
  BlochState(double r, Vec3 d) : r_(r), direction_(std::move(d)) {}
  double r_;
  Vec3 direction_;
};

inline DensityOperator bloch_density(const BlochState& s) {
  return DensityOperator::from_matrix(
      0.5 * (Matrix::Identity(2, 2) + s.r() * pauli_dot(s.direction())));
}

/// Columns |+; n.sigma>, |-; n.sigma>, each with its largest component real
/// positive.
inline Matrix eigenframe(const Vec3& n) {
  const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  const double phi = std::atan2(n.y(), n.x());
  Matrix f(2, 2);
  f(0, 0) = std::cos(theta / 2.0);
  f(1, 0) = std::polar(std::sin(theta / 2.0), phi);
  f(0, 1) = -std::polar(std::sin(theta / 2.0), -phi);
  f(1, 1) = std::cos(theta / 2.0);
  apply_phase_convention(f.col(0));
  apply_phase_convention(f.col(1));
  return f;
}

inline bool antipodal(const Vec3& a, const Vec3& b) {
  return a.dot(b) < 0.0 && a.cross(b).norm() < 1e-9;
}

class SpherePath {
 public:
  static SpherePath create(std::vector<Vec3> waypoints, bool closed, int samples_per_arc = 2000) {
    if (waypoints.size() < 2) {
      throw Error(ErrorCode::InvalidBlochVector,
                  "sphere path needs >= 2 waypoints, got " + std::to_string(waypoints.size()));
    }
    if (samples_per_arc < 3) {
      throw Error(ErrorCode::PathTooShort,
                  "samples_per_arc must be >= 3, got " + std::to_string(samples_per_arc));
    }
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
      if (!(std::abs(waypoints[i].norm() - 1.0) <= 1e-12)) {
        throw Error(ErrorCode::InvalidBlochVector,
                    "waypoint " + std::to_string(i) + " has norm " +
                        num(waypoints[i].norm()));
      }
      if (i + 1 < waypoints.size() && antipodal(waypoints[i], waypoints[i + 1])) {
        throw Error(ErrorCode::AntipodalWaypoints,
                    "waypoints " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " are antipodal");
      }
    }
    if (closed && antipodal(waypoints.back(), waypoints.front())) {
      throw Error(ErrorCode::AntipodalWaypoints, "closing arc joins antipodal waypoints");
    }
    return SpherePath(std::move(waypoints), closed, samples_per_arc);
  }

  const std::vector<Vec3>& waypoints() const noexcept { return waypoints_; }
  bool closed() const noexcept { return closed_; }
  int samples_per_arc() const noexcept { return samples_per_arc_; }

  /// Arc endpoints in traversal order, including the closing arc when closed
  /// (unless the last waypoint already repeats the first).
  std::vector<std::array<Vec3, 2>> arcs() const {
    std::vector<std::array<Vec3, 2>> out;
    for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
      out.push_back({waypoints_[i], waypoints_[i + 1]});
    }
    if (closed_ && (waypoints_.back() - waypoints_.front()).norm() > 1e-12) {
      out.push_back({waypoints_.back(), waypoints_.front()});
    }
    return out;
  }

 private:
  SpherePath(std::vector<Vec3> w, bool c, int s)
      : waypoints_(std::move(w)), closed_(c), samples_per_arc_(s) {}
  std::vector<Vec3> waypoints_;
  bool closed_;
  int samples_per_arc_;
};

/// Signed solid angle of the geodesic triangle (a, b, c).
inline double triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 2.0 * std::atan2(a.dot(b.cross(c)), 1.0 + a.dot(b) + b.dot(c) + c.dot(a));
}

/// Signed solid angle enclosed by the geodesic polygon through the waypoints,
/// closed by the geodesic from the last waypoint back to the first. Summed as
/// a fan of triangles from an apex that lies on none of the edge great
/// circles; the result is reported on (-2 pi, 2 pi].
inline double solid_angle(const SpherePath& path) {
  std::vector<Vec3> v;
  for (const Vec3& p : path.waypoints()) {
    if (v.empty() || (p - v.back()).norm() > 1e-12) v.push_back(p);
  }
  while (v.size() > 1 && (v.back() - v.front()).norm() <= 1e-12) v.pop_back();
  if (v.size() < 3) return 0.0;
  if (antipodal(v.back(), v.front())) {
    throw Error(ErrorCode::AntipodalWaypoints, "geodesic closure joins antipodal waypoints");
  }
  std::vector<Vec3> normals;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec3 n = v[i].cross(v[(i + 1) % v.size()]);
    if (n.norm() > 1e-14) normals.push_back(n.normalized());
  }
  std::vector<Vec3> candidates;
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : v) centroid += p;
  if (centroid.norm() > 1e-6) candidates.push_back(centroid.normalized());
  for (int axis = 0; axis < 3; ++axis) {
    candidates.push_back(Vec3::Unit(axis));
    candidates.push_back(-Vec3::Unit(axis));
  }
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) candidates.push_back(Vec3(sx, sy, sz).normalized());
    }
  }
  Vec3 apex = candidates.front();
  double best = -1.0;
  for (const Vec3& c : candidates) {
    double score = std::numeric_limits<double>::infinity();
    for (const Vec3& n : normals) score = std::min(score, std::abs(c.dot(n)));
    for (const Vec3& p : v) score = std::min(score, 1.0 + c.dot(p));
    if (score > best + 1e-12) {
      best = score;
      apex = c;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    total += triangle_solid_angle(apex, v[i], v[(i + 1) % v.size()]);
  }
  double w = std::remainder(total, 4.0 * kPi);
  if (w <= -2.0 * kPi) w += 4.0 * kPi;
  return w;
}

/// arg[cos(Omega/2) - i r sin(Omega/2)] on (-pi, pi], the branch-resolved
/// form of -arctan(r tan(Omega/2)).
inline double qubit_phase_closed_form(double r, double omega,
                                      double phase_tol = tolerance::phase) {
  const Complex z(std::cos(omega / 2.0), -r * std::sin(omega / 2.0));
  if (std::abs(z) < phase_tol) {
    throw Error(ErrorCode::UndefinedPhase, "trace vanishes for r=" + num(r) +
                                               ", Omega=" + num(omega));
  }
  return principal_arg(z);
}

/// eta sqrt(cos^2(Omega/2) + r^2 sin^2(Omega/2)); eta = 1 for cyclic paths.
inline double qubit_visibility_closed_form(double r, double omega, double eta = 1.0) {
  const double c = std::cos(omega / 2.0);
  const double s = std::sin(omega / 2.0);
  return eta * std::sqrt(c * c + r * r * s * s);
}

/// Fringes of a maximally mixed qubit, (1 + cos(Omega/2) cos chi) / 2.
inline InterferenceProfile unpolarized_profile(double omega, std::span<const double> chi_grid,
                                               double phase_tol = tolerance::phase) {
  const double c = std::cos(omega / 2.0);
  InterferenceProfile p;
  p.visibility = std::abs(c);
  if (p.visibility >= phase_tol) p.phase = principal_arg(Complex(c, 0.0));
  p.chi.assign(chi_grid.begin(), chi_grid.end());
  for (double chi : chi_grid) p.intensity.push_back(0.5 * (1.0 + c * std::cos(chi)));
  return p;
}

struct GeodesicDrive {
  GeneratorPath generators;
  std::vector<Matrix> frames;    // eigenframe of r(t).sigma at every node
  std::vector<Vec3> directions;  // r(t)
  DensityOperator initial;       // (1 + r r(0).sigma) / 2
};

/// Constant generator (theta/2) n.sigma on every arc, n = a x b / |a x b|,
/// so that each arc of angle theta is traversed in unit time. Arc k spans
/// t in [k, k+1]; the junction time appears twice (a corner).
inline GeodesicDrive geodesic_generator_path(const SpherePath& path, double r) {
  const auto arcs = path.arcs();
  const int m = path.samples_per_arc();
  std::vector<double> times;
  std::vector<Matrix> gens;
  std::vector<Matrix> frames;
  std::vector<Vec3> dirs;
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const Vec3& a = arcs[k][0];
    const Vec3& b = arcs[k][1];
    if (antipodal(a, b)) {
      throw Error(ErrorCode::AntipodalWaypoints, "arc " + std::to_string(k) +
                                                     " joins antipodal waypoints");
    }
    const Vec3 cross = a.cross(b);
    const double theta = std::atan2(cross.norm(), a.dot(b));
    const Vec3 axis = cross.norm() > 0.0 ? Vec3(cross.normalized()) : Vec3(Vec3::UnitZ());
    const Matrix h = (theta / 2.0) * pauli_dot(axis);
    for (int s = 0; s <= m; ++s) {
      const double frac = static_cast<double>(s) / m;
      const Vec3 d = Eigen::AngleAxisd(theta * frac, axis) * a;
      times.push_back(static_cast<double>(k) + frac);
      gens.push_back(h);
      dirs.push_back(d.normalized());
      frames.push_back(eigenframe(dirs.back()));
    }
  }
  const BlochState start = BlochState::create(r, path.waypoints().front());
  return GeodesicDrive{GeneratorPath::create(std::move(times), std::move(gens)),
                       std::move(frames), std::move(dirs), bloch_density(start)};
}

}  // namespace mixphase::bloch
