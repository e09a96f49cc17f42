#include "latticegap/quadrature.hpp"

#include <algorithm>
#include <vector>

namespace latticegap {

RombergResult romberg_midpoint(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_levels, double abs_floor) {
  RombergResult out;
  std::vector<double> prev, row;
  for (int level = 0; level < max_levels; ++level) {
    const std::size_t n = std::size_t{1} << level;
    const double h = (b - a) / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += f(a + (static_cast<double>(j) + 0.5) * h);
    out.evaluations += n;

    row.assign(static_cast<std::size_t>(level) + 1, 0.0);
    row[0] = sum * h;
    double factor = 1.0;
    for (int m = 1; m <= level; ++m) {
      factor *= 4.0;
      row[m] = row[m - 1] + (row[m - 1] - prev[m - 1]) / (factor - 1.0);
    }
    if (level >= 3) {
      const double change = std::abs(row[level] - prev[level - 1]);
      if (change <= std::max(tol * std::abs(row[level]), abs_floor)) {
        out.value = row[level];
        out.error = change;
        return out;
      }
    }
    prev = row;
  }
  throw NonConvergence("midpoint Romberg did not converge",
                       std::abs(row.back() - prev[prev.size() - 2]));
}

RombergResult graded_integral(const std::function<double(double)>& f, double a, double b,
                              double tol, bool grade_left, bool grade_right) {
  constexpr int kGrades = 40;
  std::vector<double> cuts{a, b};
  const double len = b - a;
  const double inner_lo = grade_left ? a + 0.25 * len : a;
  const double inner_hi = grade_right ? b - 0.25 * len : b;
  cuts = {inner_lo, inner_hi};
  if (grade_left) {
    double width = 0.25 * len;
    for (int g = 0; g < kGrades; ++g) {
      width *= 0.5;
      cuts.push_back(a + width);
    }
    cuts.push_back(a);
  }
  if (grade_right) {
    double width = 0.25 * len;
    for (int g = 0; g < kGrades; ++g) {
      width *= 0.5;
      cuts.push_back(b - width);
    }
    cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // the middle piece sets the scale; pieces near a singular end only need
  // to be accurate relative to it, in proportion to their width
  const auto bulk = romberg_midpoint(f, inner_lo, inner_hi, tol);
  const double scale = std::abs(bulk.value);
  RombergResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i] == inner_lo && cuts[i + 1] == inner_hi) {
      total.value += bulk.value;
      total.error += bulk.error;
      total.evaluations += bulk.evaluations;
      continue;
    }
    const bool at_end = (grade_left && cuts[i] == a) || (grade_right && cuts[i + 1] == b);
    const double floor = at_end ? tol * scale : tol * scale * (cuts[i + 1] - cuts[i]) / len;
    const auto piece = romberg_midpoint(f, cuts[i], cuts[i + 1], tol, 22, floor);
    total.value += piece.value;
    total.error += piece.error;
    total.evaluations += piece.evaluations;
  }
  return total;
}

}  // namespace latticegap
