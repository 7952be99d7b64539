#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hapticdrone/core_model.hpp"

namespace hapticdrone::eval {

/// Rows are actual classes, columns predicted; entries are proportions.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;

  std::size_t size() const noexcept { return labels.size(); }
  double diagonal_mean() const;
  /// Throws InputError on a non-square matrix, entries outside [0, 1] or a
  /// row whose sum is off 1 by more than the tolerance.
  void validate(double row_sum_tolerance = 0.02) const;
};

struct ConfusionAggregate {
  ConfusionMatrix shape;
  ConfusionMatrix vibration;
  double full_diagonal_mean = 0.0;
  double shape_diagonal_mean = 0.0;
  double vibration_diagonal_mean = 0.0;
};

/// Parses "shape/vibration". Shape accepts cube|square, sphere|circle, cone.
HapticPattern parse_pattern_label(std::string_view label);

/**
 * Marginalizes a 9x9 (shape, vibration) confusion matrix.
 *
 * Shape entry (s, s') is the mean over actual vibration levels v of the sum
 * over predicted levels v' of full[(s, v), (s', v')]; the vibration matrix is
 * built the same way with the roles swapped. Output classes keep the order in
 * which they first appear in the input labels. Throws InputError unless the
 * labels are exactly the nine patterns.
 */
ConfusionAggregate aggregate_confusion(const ConfusionMatrix& full);

/// JSON {"labels": [...], "rows": [[...], ...]}; "-" or null entries read as 0.
ConfusionMatrix load_confusion(const std::filesystem::path& path);
ConfusionMatrix parse_confusion(std::string_view json_text);

std::string format_matrix(const ConfusionMatrix& m);

}  // namespace hapticdrone::eval
