#pragma once

#include <cstddef>
#include <limits>

#include <Eigen/Dense>

namespace latticegap {

/// A guided or localized frequency, optionally with its real-space shape.
struct ModeResult {
  double omega = 0.0;
  std::size_t gap = 0;        ///< index into GapStructure::gaps (localized modes)
  double realness = 0.0;      ///< |Im D| / (1 + |Re D|) at the root

  /// Node amplitudes over the reconstruction window, indexed (x, y) with
  /// x = r1 * n1 + i1 and y = r2 * n2 + i2 offset so the defect cell sits in
  /// the middle. Empty until a reconstruction fills it.
  Eigen::MatrixXcd shape;
  int origin_x = 0;           ///< column of node (0, 0) of cell (0, 0)
  int origin_y = 0;

  double decay_rate_x = std::numeric_limits<double>::quiet_NaN();
  double decay_rate_y = std::numeric_limits<double>::quiet_NaN();
  double fit_r2_x = std::numeric_limits<double>::quiet_NaN();
  double fit_r2_y = std::numeric_limits<double>::quiet_NaN();
  /// Fit over the envelope a(d) = max |u| on the square shell of cells at
  /// Chebyshev distance d from the defect (localized) or on row d (guided).
  double decay_rate = std::numeric_limits<double>::quiet_NaN();
  double fit_r2 = std::numeric_limits<double>::quiet_NaN();
  double participation_ratio = std::numeric_limits<double>::quiet_NaN();
  std::size_t synthesis_points = 0;  ///< k samples per axis used for the shape
};

}  // namespace latticegap
