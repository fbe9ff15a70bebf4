#pragma once

#include <Eigen/Dense>

namespace ba::codebook {

// Fixed sector codebook: m unit-norm beams over n antennas, beam k covering
// the k-th equal angular sector of [-pi/2, pi/2].
struct ConventionalCodebook {
  Eigen::MatrixXcd beams;  // n x m, one beam per column
  int m = 0;
  int n = 0;

  Eigen::VectorXcd beam(int k) const { return beams.col(k); }
};

// Least-squares synthesis against ideal flat-top sector targets on a
// 512-point angle grid, refined by alternating phase projections, then
// unit-normalized. Deterministic.
ConventionalCodebook conventional_codebook(int m, int n);

}  // namespace ba::codebook
