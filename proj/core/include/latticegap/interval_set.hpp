#pragma once

#include <limits>
#include <vector>

namespace latticegap {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x, double margin = 0.0) const {
    return x >= lo - margin && x <= hi + margin;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of closed intervals on the frequency axis, kept sorted and
/// pairwise disjoint.
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Normalizes `intervals`: drops empty ones, sorts, and merges any two whose
  /// separation is at most `merge_gap`.
  explicit IntervalSet(std::vector<Interval> intervals, double merge_gap = 0.0);

  static IntervalSet single(double lo, double hi) { return IntervalSet({{lo, hi}}); }

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  auto begin() const { return intervals_.begin(); }
  auto end() const { return intervals_.end(); }

  /// Infimum and supremum; NaN when empty.
  double lower() const;
  double upper() const;
  double measure() const;

  /// True if `x` is within `margin` of some interval.
  bool contains(double x, double margin = 0.0) const;

  /// Distance from `x` to the set (0 inside).
  double distance(double x) const;

  IntervalSet unite(const IntervalSet& other, double merge_gap = 0.0) const;

  /// Closures of the components of [lo, hi] minus this set. Components not
  /// wider than `min_width` are dropped.
  IntervalSet complement(double lo, double hi, double min_width = 0.0) const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace latticegap
