#pragma once

// Scenario files (YAML), the end-to-end pipeline behind the command-line
// tool, and its two output formats: a fixed-order text report and a
// `chi,intensity` CSV profile.
//
// Scenario layout (every block except `state` and `path` is optional):
//
//   name: pure_octant
//   state:
//     bloch: {r: 1.0, direction: [0, 0, 1]}     # or {theta: 45deg, phi: 0}
//     # or: weights: [0.7, 0.3]
//     #     frame: [[1, 0], [0, 1]]               # columns are the |k>
//   path:
//     waypoints: [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
//     closed: true
//     # or: generators: {duration: 6.283185307179586, pauli: [0, 0, 0.5]}
//     #     generators: {knots: [{t: 0, h: [[...]]}, {t: 1, pauli: [...]}]}
//     # or: unitaries: [{t: 0, u: [[...]]}, ...]
//     evolution: projected                      # projected | frame | raw
//   resolution: {steps: 2000, substeps: 1}
//   tolerances: {transport: 1e-6, integral: 1e-5, phase: 1e-9}
//   reference: {solid_angle: 90deg}
//   output: {chi_samples: 64, radii: [0.25, 0.5, 1.0]}
//   seed: 1
//
// Matrix entries are numbers or [re, im] pairs. Angles are radians unless
// written with a `deg` suffix.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <yaml-cpp/yaml.h>

#include "mixphase/bloch.hpp"
#include "mixphase/core.hpp"
#include "mixphase/holonomy.hpp"
#include "mixphase/interferometry.hpp"
#include "mixphase/transport.hpp"

namespace mixphase::scenario {

using bloch::Vec3;

enum class PathKind { Generators, Waypoints, Unitaries };
enum class Evolution { Projected, Frame, Raw, Given };

inline const char* to_string(PathKind k) {
  switch (k) {
    case PathKind::Generators: return "generators";
    case PathKind::Waypoints: return "waypoints";
    case PathKind::Unitaries: return "unitaries";
  }
  return "?";
}

inline const char* to_string(Evolution e) {
  switch (e) {
    case Evolution::Projected: return "projected";
    case Evolution::Frame: return "frame";
    case Evolution::Raw: return "raw";
    case Evolution::Given: return "given";
  }
  return "?";
}

struct StateSpec {
  std::optional<std::vector<double>> weights;
  std::optional<Matrix> frame;
  std::optional<double> r;
  std::optional<Vec3> direction;
  bool is_bloch() const noexcept { return r.has_value(); }
};

struct PathSpec {
  PathKind kind = PathKind::Generators;
  Evolution evolution = Evolution::Projected;
  // generators: knots, piecewise linear in between
  std::vector<double> knot_times;
  std::vector<Matrix> knot_generators;
  // waypoints
  std::vector<Vec3> waypoints;
  bool closed = false;
  // unitaries
  std::vector<double> unitary_times;
  std::vector<Matrix> unitaries;
};

struct Scenario {
  std::string name = "scenario";
  StateSpec state;
  PathSpec path;
  int steps = 2000;  // per arc for waypoint paths, total otherwise
  int substeps = 1;
  HolonomyOptions tolerances;
  std::optional<double> reference_solid_angle;
  std::size_t chi_samples = 64;
  std::vector<double> radii;
  std::uint64_t seed = 1;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ScenarioParse, where + ": " + what);
}

inline std::string scalar_text(const YAML::Node& n) {
  return n.IsScalar() ? n.Scalar() : std::string("<") + (n.IsSequence() ? "list" : "map") + ">";
}

inline void check_keys(const YAML::Node& n, const std::string& where,
                       const std::set<std::string>& allowed) {
  if (!n.IsMap()) fail(where, "expected a mapping");
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

inline double parse_number(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    fail(where, "expected a number, got '" + text + "'");
  }
  return v;
}

inline double as_double(const YAML::Node& n, const std::string& where) {
  if (!n || !n.IsScalar()) fail(where, "expected a number, got " + scalar_text(n));
  return parse_number(n.Scalar(), where);
}

/// Radians, or degrees with an explicit `deg` suffix.
inline double as_angle(const YAML::Node& n, const std::string& where) {
  if (!n || !n.IsScalar()) fail(where, "expected an angle, got " + scalar_text(n));
  std::string s = n.Scalar();
  if (s.size() > 3 && s.compare(s.size() - 3, 3, "deg") == 0) {
    s.resize(s.size() - 3);
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return parse_number(s, where) * kPi / 180.0;
  }
  return parse_number(s, where);
}

inline int as_int(const YAML::Node& n, const std::string& where) {
  const double v = as_double(n, where);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(where, "expected an integer");
  return static_cast<int>(v);
}

inline bool as_bool(const YAML::Node& n, const std::string& where) {
  if (!n || !n.IsScalar()) fail(where, "expected true or false");
  const std::string& s = n.Scalar();
  if (s == "true") return true;
  if (s == "false") return false;
  fail(where, "expected true or false, got '" + s + "'");
}

inline Complex as_complex(const YAML::Node& n, const std::string& where) {
  if (n.IsSequence()) {
    if (n.size() != 2) fail(where, "complex entries are [re, im]");
    return {as_double(n[0], where + "[0]"), as_double(n[1], where + "[1]")};
  }
  return {as_double(n, where), 0.0};
}

inline Matrix as_matrix(const YAML::Node& n, const std::string& where) {
  if (!n || !n.IsSequence() || n.size() == 0) fail(where, "expected a list of rows");
  const auto rows = static_cast<Index>(n.size());
  Index cols = -1;
  Matrix m;
  for (Index i = 0; i < rows; ++i) {
    const YAML::Node row = n[static_cast<std::size_t>(i)];
    const std::string rw = where + "[" + std::to_string(i) + "]";
    if (!row.IsSequence()) fail(rw, "expected a row list");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      fail(rw, "row has " + std::to_string(row.size()) + " entries, expected " +
                   std::to_string(cols));
    }
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = as_complex(row[static_cast<std::size_t>(j)], rw + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

inline std::vector<double> as_doubles(const YAML::Node& n, const std::string& where) {
  if (!n || !n.IsSequence()) fail(where, "expected a list of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < n.size(); ++i) {
    v.push_back(as_double(n[i], where + "[" + std::to_string(i) + "]"));
  }
  return v;
}

/// [x, y, z] or {theta, phi} (polar angle from +z, azimuth from +x).
inline Vec3 as_direction(const YAML::Node& n, const std::string& where) {
  if (n.IsMap()) {
    check_keys(n, where, {"theta", "phi"});
    const double theta = as_angle(n["theta"], where + ".theta");
    const double phi = n["phi"] ? as_angle(n["phi"], where + ".phi") : 0.0;
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
  }
  const std::vector<double> v = as_doubles(n, where);
  if (v.size() != 3) fail(where, "expected 3 components");
  return {v[0], v[1], v[2]};
}

/// `h: matrix` or `pauli: [x, y, z]` inside one mapping.
inline Matrix as_generator(const YAML::Node& n, const std::string& where) {
  if (n["h"] && n["pauli"]) fail(where, "give either h or pauli, not both");
  if (n["h"]) return as_matrix(n["h"], where + ".h");
  if (n["pauli"]) {
    const std::vector<double> v = as_doubles(n["pauli"], where + ".pauli");
    if (v.size() != 3) fail(where + ".pauli", "expected 3 components");
    return bloch::pauli_dot(Vec3(v[0], v[1], v[2]));
  }
  fail(where, "missing h or pauli");
}

inline StateSpec parse_state(const YAML::Node& n) {
  check_keys(n, "state", {"bloch", "weights", "frame"});
  StateSpec s;
  if (n["bloch"] && n["weights"]) fail("state", "give either bloch or weights, not both");
  if (n["bloch"]) {
    if (n["frame"]) fail("state", "frame only goes with weights");
    const YAML::Node b = n["bloch"];
    check_keys(b, "state.bloch", {"r", "direction"});
    s.r = as_double(b["r"], "state.bloch.r");
    if (b["direction"]) s.direction = as_direction(b["direction"], "state.bloch.direction");
  } else if (n["weights"]) {
    s.weights = as_doubles(n["weights"], "state.weights");
    if (n["frame"]) s.frame = as_matrix(n["frame"], "state.frame");
  } else {
    fail("state", "needs bloch or weights");
  }
  return s;
}

inline PathSpec parse_path(const YAML::Node& n) {
  check_keys(n, "path", {"generators", "waypoints", "unitaries", "closed", "evolution"});
  PathSpec p;
  const int kinds = (n["generators"] ? 1 : 0) + (n["waypoints"] ? 1 : 0) + (n["unitaries"] ? 1 : 0);
  if (kinds != 1) fail("path", "needs exactly one of generators, waypoints, unitaries");
  if (n["closed"] && !n["waypoints"]) fail("path.closed", "only applies to waypoints");
  if (n["generators"]) {
    p.kind = PathKind::Generators;
    const YAML::Node g = n["generators"];
    check_keys(g, "path.generators", {"duration", "start", "h", "pauli", "knots"});
    if (g["knots"]) {
      if (g["h"] || g["pauli"] || g["duration"]) {
        fail("path.generators", "knots cannot be combined with h, pauli or duration");
      }
      const YAML::Node k = g["knots"];
      if (!k.IsSequence() || k.size() < 2) fail("path.generators.knots", "need at least 2 knots");
      for (std::size_t i = 0; i < k.size(); ++i) {
        const std::string w = "path.generators.knots[" + std::to_string(i) + "]";
        check_keys(k[i], w, {"t", "h", "pauli"});
        p.knot_times.push_back(as_double(k[i]["t"], w + ".t"));
        p.knot_generators.push_back(as_generator(k[i], w));
        if (i > 0 && !(p.knot_times[i] > p.knot_times[i - 1])) {
          fail(w + ".t", "knot times must increase");
        }
      }
    } else {
      const double start = g["start"] ? as_double(g["start"], "path.generators.start") : 0.0;
      const double duration = as_double(g["duration"], "path.generators.duration");
      if (!(duration > 0.0)) fail("path.generators.duration", "must be positive");
      const Matrix h = as_generator(g, "path.generators");
      p.knot_times = {start, start + duration};
      p.knot_generators = {h, h};
    }
  } else if (n["waypoints"]) {
    p.kind = PathKind::Waypoints;
    const YAML::Node w = n["waypoints"];
    if (!w.IsSequence()) fail("path.waypoints", "expected a list");
    for (std::size_t i = 0; i < w.size(); ++i) {
      p.waypoints.push_back(as_direction(w[i], "path.waypoints[" + std::to_string(i) + "]"));
    }
    p.closed = n["closed"] ? as_bool(n["closed"], "path.closed") : false;
  } else {
    p.kind = PathKind::Unitaries;
    p.evolution = Evolution::Given;
    const YAML::Node u = n["unitaries"];
    if (!u.IsSequence()) fail("path.unitaries", "expected a list");
    for (std::size_t i = 0; i < u.size(); ++i) {
      const std::string w = "path.unitaries[" + std::to_string(i) + "]";
      check_keys(u[i], w, {"t", "u"});
      p.unitary_times.push_back(as_double(u[i]["t"], w + ".t"));
      p.unitaries.push_back(as_matrix(u[i]["u"], w + ".u"));
    }
  }
  if (n["evolution"]) {
    if (p.kind == PathKind::Unitaries) fail("path.evolution", "unitary samples are used as given");
    const std::string e = n["evolution"].Scalar();
    if (e == "projected") p.evolution = Evolution::Projected;
    else if (e == "frame") p.evolution = Evolution::Frame;
    else if (e == "raw") p.evolution = Evolution::Raw;
    else fail("path.evolution", "expected projected, frame or raw, got '" + e + "'");
  }
  return p;
}

}  // namespace detail

/// Checks the scenario invariants that do not need the numerics.
inline void check_scenario(const Scenario& s) {
  if (s.steps < 16) {
    throw Error(ErrorCode::PathTooShort,
                "resolution.steps: " + std::to_string(s.steps) + " is below the minimum of 16");
  }
  if (s.substeps < 1) {
    throw Error(ErrorCode::PathTooShort,
                "resolution.substeps: must be >= 1, got " + std::to_string(s.substeps));
  }
  if (s.chi_samples < 3) {
    throw Error(ErrorCode::PathTooShort, "output.chi_samples: need at least 3, got " +
                                             std::to_string(s.chi_samples));
  }
}

inline Scenario parse_scenario(const YAML::Node& root, const std::string& default_name = "scenario") {
  using namespace detail;
  check_keys(root, "scenario",
             {"name", "state", "path", "resolution", "tolerances", "reference", "output", "seed"});
  Scenario s;
  s.name = root["name"] ? root["name"].Scalar() : default_name;
  if (!root["state"]) fail("state", "missing");
  if (!root["path"]) fail("path", "missing");
  s.state = parse_state(root["state"]);
  s.path = parse_path(root["path"]);
  if (const YAML::Node r = root["resolution"]) {
    check_keys(r, "resolution", {"steps", "substeps"});
    if (r["steps"]) s.steps = as_int(r["steps"], "resolution.steps");
    if (r["substeps"]) s.substeps = as_int(r["substeps"], "resolution.substeps");
  }
  if (const YAML::Node t = root["tolerances"]) {
    check_keys(t, "tolerances", {"transport", "integral", "phase", "degeneracy"});
    if (t["transport"]) s.tolerances.transport_tol = as_double(t["transport"], "tolerances.transport");
    if (t["integral"]) s.tolerances.integral_tol = as_double(t["integral"], "tolerances.integral");
    if (t["phase"]) s.tolerances.phase_tol = as_double(t["phase"], "tolerances.phase");
    if (t["degeneracy"]) {
      s.tolerances.degeneracy_tol = as_double(t["degeneracy"], "tolerances.degeneracy");
    }
  }
  if (const YAML::Node r = root["reference"]) {
    check_keys(r, "reference", {"solid_angle"});
    s.reference_solid_angle = as_angle(r["solid_angle"], "reference.solid_angle");
  }
  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"chi_samples", "radii"});
    if (o["chi_samples"]) {
      const int m = as_int(o["chi_samples"], "output.chi_samples");
      if (m < 0) fail("output.chi_samples", "must be positive");
      s.chi_samples = static_cast<std::size_t>(m);
    }
    if (o["radii"]) s.radii = as_doubles(o["radii"], "output.radii");
  }
  if (root["seed"]) {
    const int seed = as_int(root["seed"], "seed");
    if (seed < 0) fail("seed", "must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  return s;
}

inline Scenario parse_scenario_text(const std::string& text, const std::string& default_name = "scenario") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ScenarioParse, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return parse_scenario(root, default_name);
}

inline Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, file.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario_text(buf.str(), file.stem().string());
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.context());
  }
}

namespace detail {

/// Runs f, prefixing any library error with the scenario field it came from.
template <typename F>
auto located(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NodalPointError& e) {
    throw NodalPointError(e.index(), e.time(), where + ": " + e.context());
  } catch (const DegenerateSpectrumError& e) {
    throw DegenerateSpectrumError(e.groups(), where + ": " + e.context());
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.context());
  }
}

inline GeneratorPath sample_generators(const PathSpec& p, int steps) {
  const double t0 = p.knot_times.front();
  const double t1 = p.knot_times.back();
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  std::vector<Matrix> h(t.size());
  std::size_t k = 0;
  for (int j = 0; j <= steps; ++j) {
    const double x = j == steps ? t1 : t0 + (t1 - t0) * j / steps;
    while (k + 2 < p.knot_times.size() && x > p.knot_times[k + 1]) ++k;
    const double lam = (x - p.knot_times[k]) / (p.knot_times[k + 1] - p.knot_times[k]);
    t[static_cast<std::size_t>(j)] = x;
    h[static_cast<std::size_t>(j)] =
        (1.0 - lam) * p.knot_generators[k] + lam * p.knot_generators[k + 1];
  }
  return GeneratorPath::create(std::move(t), std::move(h));
}

}  // namespace detail

/// The evolved state and path handed to the holonomy routes.
struct Pipeline {
  DensityOperator rho0;
  UnitaryPath path;
  Matrix frame;  // reference frame of rho0 (eigenframe, or the given one)
  std::optional<double> solid_angle;
};

inline DensityOperator build_state(const Scenario& s, Matrix* frame_out = nullptr) {
  return detail::located("state", [&] {
    const StateSpec& st = s.state;
    if (st.is_bloch()) {
      Vec3 dir = st.direction.value_or(Vec3::UnitZ());
      if (!st.direction && s.path.kind == PathKind::Waypoints && !s.path.waypoints.empty()) {
        dir = s.path.waypoints.front();
      }
      const bloch::BlochState b = bloch::BlochState::create(*st.r, dir);
      if (frame_out) *frame_out = bloch::eigenframe(dir);
      return bloch::bloch_density(b);
    }
    const auto n = static_cast<Index>(st.weights->size());
    const Matrix frame = st.frame.value_or(Matrix::Identity(n, n));
    const DensityOperator rho = make_density(*st.weights, frame);
    if (frame_out) *frame_out = st.frame ? frame : eigen_decompose(rho, s.tolerances.degeneracy_tol).frame;
    return rho;
  });
}

inline Pipeline build_pipeline(const Scenario& s) {
  check_scenario(s);
  Matrix frame;
  DensityOperator rho0 = build_state(s, &frame);
  const PathSpec& p = s.path;
  std::optional<double> omega = s.reference_solid_angle;
  UnitaryPath path = detail::located("path", [&]() -> UnitaryPath {
    switch (p.kind) {
      case PathKind::Unitaries:
        return UnitaryPath::create(p.unitary_times, p.unitaries);
      case PathKind::Waypoints: {
        if (!s.state.is_bloch()) {
          throw Error(ErrorCode::DimensionMismatch, "waypoint paths need a bloch state");
        }
        if (s.state.direction && (*s.state.direction - p.waypoints.front()).norm() > 1e-9) {
          throw Error(ErrorCode::InvalidBlochVector,
                      "state direction differs from the first waypoint");
        }
        const bloch::SpherePath sp = bloch::SpherePath::create(p.waypoints, p.closed, s.steps);
        if (p.closed && !omega) omega = bloch::solid_angle(sp);
        const bloch::GeodesicDrive d = bloch::geodesic_generator_path(sp, *s.state.r);
        switch (p.evolution) {
          case Evolution::Frame: return frame_transport(d.frames, d.generators.times());
          case Evolution::Raw: return integrate(d.generators, s.substeps);
          default:
            return transport_evolution(rho0, d.generators, s.substeps,
                                       s.tolerances.degeneracy_tol);
        }
      }
      case PathKind::Generators: {
        const GeneratorPath gen = detail::sample_generators(p, s.steps);
        if (gen.dim() != rho0.dim()) {
          throw Error(ErrorCode::DimensionMismatch,
                      "generators are " + std::to_string(gen.dim()) + "x" +
                          std::to_string(gen.dim()) + ", state has dimension " +
                          std::to_string(rho0.dim()));
        }
        switch (p.evolution) {
          case Evolution::Frame: {
            const UnitaryPath raw = integrate(gen, s.substeps);
            std::vector<Matrix> frames;
            for (const Matrix& u : raw.unitaries()) frames.push_back(u * frame);
            return frame_transport(frames, gen.times());
          }
          case Evolution::Raw: return integrate(gen, s.substeps);
          default:
            return transport_evolution(rho0, gen, s.substeps, s.tolerances.degeneracy_tol);
        }
      }
    }
    throw Error(ErrorCode::ScenarioParse, "unknown path kind");
  });
  if (path.dim() != rho0.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "path: unitaries act on dimension " + std::to_string(path.dim()) +
                    ", state has dimension " + std::to_string(rho0.dim()));
  }
  return Pipeline{std::move(rho0), std::move(path), std::move(frame), omega};
}

struct ClosedForm {
  double solid_angle;
  double r;
  std::optional<double> phase;
  double visibility;
};

struct RunResult {
  PhaseReport report;
  std::optional<double> gamma_g;  // first available of trace, integral, connection
  std::string gamma_g_route = "none";
  std::optional<ClosedForm> closed_form;
  InterferenceProfile profile;  // closed-form fringes from Tr[rho0 U(tau)]
  double duration = 0.0;
  std::size_t samples = 0;
};

inline RunResult run_pipeline(const Scenario& s, const Pipeline& p) {
  RunResult r;
  r.report = phase_report(p.rho0, p.path, s.tolerances, p.frame);
  const std::pair<const char*, const RouteValue*> routes[] = {
      {"trace", &r.report.gamma_g_trace},
      {"integral", &r.report.gamma_g_integral},
      {"connection", &r.report.gamma_g_connection}};
  for (const auto& [name, route] : routes) {
    if (route->value) {
      r.gamma_g = route->value;
      r.gamma_g_route = name;
      break;
    }
  }
  if (p.solid_angle && s.state.is_bloch()) {
    ClosedForm c{*p.solid_angle, *s.state.r, std::nullopt,
                 bloch::qubit_visibility_closed_form(*s.state.r, *p.solid_angle)};
    if (c.visibility >= s.tolerances.phase_tol) {
      c.phase = bloch::qubit_phase_closed_form(*s.state.r, *p.solid_angle);
    }
    r.closed_form = c;
  }
  const Complex overlap = (p.rho0.matrix() * p.path.final()).trace();
  r.profile = fringe_profile(overlap, uniform_chi_grid(s.chi_samples), s.tolerances.phase_tol);
  r.duration = p.path.times().back() - p.path.times().front();
  r.samples = p.path.size();
  return r;
}

inline RunResult run_scenario(const Scenario& s) { return run_pipeline(s, build_pipeline(s)); }

// ---- output -------------------------------------------------------------

/// %.17g, with negative zero printed as 0.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : "null";
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

inline std::string format_report(const Scenario& s, const RunResult& r) {
  std::ostringstream o;
  const PhaseReport& p = r.report;
  auto route = [&](const char* name, const RouteValue& v) {
    o << name << ": " << format_optional(v.value) << "\n";
    o << name << "_status: " << (v.value ? std::string("ok") : quote(v.status)) << "\n";
  };
  o << "scenario: " << s.name << "\n";
  o << "dimension: " << p.per_eigenstate.size() << "\n";
  o << "path: " << to_string(s.path.kind) << "\n";
  o << "evolution: " << to_string(s.path.evolution) << "\n";
  o << "steps: " << s.steps << "\n";
  o << "substeps: " << s.substeps << "\n";
  o << "samples: " << r.samples << "\n";
  o << "duration: " << format_number(r.duration) << "\n";
  o << "total_phase: " << format_optional(p.total_phase) << "\n";
  o << "visibility: " << format_number(p.visibility) << "\n";
  o << "gamma_d: " << format_number(p.gamma_d) << "\n";
  o << "gamma_g: " << format_optional(r.gamma_g) << "\n";
  o << "gamma_g_route: " << r.gamma_g_route << "\n";
  route("gamma_g_trace", p.gamma_g_trace);
  route("gamma_g_integral", p.gamma_g_integral);
  route("gamma_g_connection", p.gamma_g_connection);
  o << "route_gap: " << format_optional(p.route_gap) << "\n";
  o << "route_agreement: "
    << (!p.route_gap ? "unavailable"
                     : (std::abs(*p.route_gap) < s.tolerances.integral_tol ? "ok" : "exceeded"))
    << "\n";
  o << "defect_global: " << format_number(p.defect.global_defect) << "\n";
  o << "defect_eigen: [";
  for (std::size_t k = 0; k < p.defect.eigen_defects.size(); ++k) {
    o << (k ? ", " : "") << format_number(p.defect.eigen_defects[k]);
  }
  o << "]\n";
  o << "transported: " << (p.defect.global_defect < s.tolerances.transport_tol ? "true" : "false")
    << "\n";
  o << "per_eigenstate:\n";
  for (const EigenstateFactor& e : p.per_eigenstate) {
    o << "  - {weight: " << format_number(e.weight) << ", visibility: "
      << format_number(e.visibility) << ", phase: " << format_optional(e.phase) << "}\n";
  }
  if (r.closed_form) {
    const ClosedForm& c = *r.closed_form;
    o << "solid_angle: " << format_number(c.solid_angle) << "\n";
    o << "closed_form_phase: " << format_optional(c.phase) << "\n";
    o << "closed_form_visibility: " << format_number(c.visibility) << "\n";
    const std::optional<double> err =
        (c.phase && r.gamma_g) ? std::optional<double>(std::abs(wrap_phase(*r.gamma_g - *c.phase)))
                               : std::nullopt;
    o << "closed_form_phase_error: " << format_optional(err) << "\n";
  }
  return o.str();
}

inline std::string format_profile_csv(const InterferenceProfile& p) {
  std::string out = "chi,intensity\n";
  for (std::size_t j = 0; j < p.chi.size(); ++j) {
    out += format_number(p.chi[j]) + "," + format_number(p.intensity[j]) + "\n";
  }
  return out;
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomically(const std::filesystem::path& file, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + file.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, file.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::Io, file.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, file.string() + ": rename failed (" + ec.message() + ")");
  }
}

/// 0 success, 2 invalid input, 3 unreadable scenario or output, 4 numerical abort.
inline int exit_code(ErrorCode code) {
  if (code == ErrorCode::ScenarioParse || code == ErrorCode::Io) return 3;
  if (is_numerical_abort(code)) return 4;
  return 2;
}

}  // namespace mixphase::scenario
