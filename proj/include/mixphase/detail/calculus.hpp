#pragma once

// Finite differences and quadrature on (possibly non-uniform) time grids.
// A time value repeated on two consecutive nodes marks a corner: the path is
// continuous there but its derivative may jump, so derivatives are taken
// one-sided within each smooth segment.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixphase/errors.hpp"

namespace mixphase::detail {

struct Segment {
  std::size_t begin;
  std::size_t end;  // one past the last node
};

/// Splits a non-decreasing grid at repeated nodes. Throws if the grid
/// decreases, repeats a node more than twice, or leaves a segment with
/// fewer than min_nodes nodes.
inline std::vector<Segment> smooth_segments(std::span<const double> times,
                                            std::size_t min_nodes = 3) {
  if (times.size() < min_nodes) {
    throw Error(ErrorCode::PathTooShort, "path has " + std::to_string(times.size()) +
                                             " samples, need at least " +
                                             std::to_string(min_nodes));
  }
  std::vector<Segment> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (times[i + 1] < times[i]) {
      throw Error(ErrorCode::DimensionMismatch,
                  "time grid decreases at index " + std::to_string(i + 1));
    }
    if (times[i + 1] == times[i]) {
      if (i + 2 < times.size() && times[i + 2] == times[i]) {
        throw Error(ErrorCode::DimensionMismatch,
                    "time " + num(times[i]) + " repeated more than twice");
      }
      out.push_back({start, i + 1});
      start = i + 1;
    }
  }
  out.push_back({start, times.size()});
  for (const Segment& s : out) {
    if (s.end - s.begin < min_nodes) {
      throw Error(ErrorCode::PathTooShort,
                  "smooth segment starting at t=" + num(times[s.begin]) +
                      " has " + std::to_string(s.end - s.begin) + " samples, need " +
                      std::to_string(min_nodes));
    }
  }
  return out;
}

/// Second-order three-point derivative at every node: central in segment
/// interiors, one-sided at segment ends.
template <typename T>
std::vector<T> differentiate(std::span<const double> t, std::span<const T> f) {
  if (t.size() != f.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(t.size()) + " times for " +
                                                  std::to_string(f.size()) + " samples");
  }
  std::vector<T> df(f.size());
  for (const Segment& seg : smooth_segments(t)) {
    const std::size_t a = seg.begin;
    const std::size_t z = seg.end - 1;
    {
      const double h1 = t[a + 1] - t[a];
      const double h2 = t[a + 2] - t[a + 1];
      df[a] = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * f[a] +
              ((h1 + h2) / (h1 * h2)) * f[a + 1] - (h1 / (h2 * (h1 + h2))) * f[a + 2];
    }
    for (std::size_t i = a + 1; i < z; ++i) {
      const double h1 = t[i] - t[i - 1];
      const double h2 = t[i + 1] - t[i];
      df[i] = (-h2 / (h1 * (h1 + h2))) * f[i - 1] + ((h2 - h1) / (h1 * h2)) * f[i] +
              (h1 / (h2 * (h1 + h2))) * f[i + 1];
    }
    {
      const double h1 = t[z - 1] - t[z - 2];
      const double h2 = t[z] - t[z - 1];
      df[z] = (h2 / (h1 * (h1 + h2))) * f[z - 2] - ((h1 + h2) / (h1 * h2)) * f[z - 1] +
              ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * f[z];
    }
  }
  return df;
}

/// Trapezoidal rule; zero-length intervals at corners contribute nothing.
template <typename T>
T trapezoid(std::span<const double> t, std::span<const T> f) {
  T sum = T{};
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    sum += (0.5 * (t[i + 1] - t[i])) * (f[i] + f[i + 1]);
  }
  return sum;
}

}  // namespace mixphase::detail
