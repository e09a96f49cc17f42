#include "latticegap/interval_set.hpp"

#include <algorithm>
#include <cmath>

namespace latticegap {

IntervalSet::IntervalSet(std::vector<Interval> intervals, double merge_gap) {
  std::erase_if(intervals, [](const Interval& iv) {
    return !(iv.lo <= iv.hi) || std::isnan(iv.lo) || std::isnan(iv.hi);
  });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& iv : intervals) {
    if (!intervals_.empty() && iv.lo <= intervals_.back().hi + merge_gap) {
      intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
    } else {
      intervals_.push_back(iv);
    }
  }
}

double IntervalSet::lower() const {
  return empty() ? std::numeric_limits<double>::quiet_NaN() : intervals_.front().lo;
}

double IntervalSet::upper() const {
  return empty() ? std::numeric_limits<double>::quiet_NaN() : intervals_.back().hi;
}

double IntervalSet::measure() const {
  double total = 0.0;
  for (const auto& iv : intervals_) total += iv.width();
  return total;
}

bool IntervalSet::contains(double x, double margin) const {
  return std::any_of(intervals_.begin(), intervals_.end(),
                     [&](const Interval& iv) { return iv.contains(x, margin); });
}

double IntervalSet::distance(double x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& iv : intervals_) {
    if (iv.contains(x)) return 0.0;
    best = std::min(best, x < iv.lo ? iv.lo - x : x - iv.hi);
  }
  return best;
}

IntervalSet IntervalSet::unite(const IntervalSet& other, double merge_gap) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return IntervalSet(std::move(all), merge_gap);
}

IntervalSet IntervalSet::complement(double lo, double hi, double min_width) const {
  std::vector<Interval> out;
  double cursor = lo;
  for (const auto& iv : intervals_) {
    if (iv.hi < lo) continue;
    if (iv.lo > hi) break;
    if (iv.lo > cursor) out.push_back({cursor, iv.lo});
    cursor = std::max(cursor, iv.hi);
  }
  if (cursor < hi) out.push_back({cursor, hi});
  std::erase_if(out, [&](const Interval& iv) { return iv.width() <= min_width; });
  IntervalSet result;
  result.intervals_ = std::move(out);
  return result;
}

}  // namespace latticegap
