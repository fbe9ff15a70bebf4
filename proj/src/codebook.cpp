#include "ba/codebook.hpp"

#include <cmath>
#include <numbers>

#include "ba/channel.hpp"
#include "ba/errors.hpp"

namespace ba::codebook {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kGridPoints = 512;
constexpr int kPhaseIterations = 40;
}  // namespace

ConventionalCodebook conventional_codebook(int m, int n) {
  if (m < 1) throw ConfigError("conventional_codebook: need m >= 1 beams");
  if (n < 1) throw ConfigError("conventional_codebook: need n >= 1 antennas");

  // B row i = a(phi_i)^T, so that (B u)_i = v^H a(phi_i) for u = conj(v).
  Eigen::MatrixXcd b(kGridPoints, n);
  Eigen::VectorXd grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    grid[i] = -kPi / 2 + kPi * (i + 0.5) / kGridPoints;
    b.row(i) = channel::array_response(grid[i], n).transpose();
  }
  // The response spans spatial frequencies [0, pi] only over this angle
  // range, so b has weak directions (condition ~1e11). An unregularized
  // least-squares fit dumps most of its norm into those directions and the
  // unit-normalized beam then radiates almost nothing. Truncating singular
  // values below 10% of the largest keeps the fit in the well-observed
  // subspace; the flat-top match it gives up there is restored by the phase
  // relaxation iterations below.
  Eigen::JacobiSVD<Eigen::MatrixXcd> solver(
      b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  solver.setThreshold(0.1);

  ConventionalCodebook cb;
  cb.m = m;
  cb.n = n;
  cb.beams.resize(n, m);
  const double sector = kPi / m;
  for (int k = 0; k < m; ++k) {
    const double lo = -kPi / 2 + k * sector;
    const double hi = lo + sector;
    Eigen::VectorXd mag(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i) {
      mag[i] = (grid[i] >= lo && grid[i] < hi) ? 1.0 : 0.0;
    }
    Eigen::VectorXcd target = mag.cast<std::complex<double>>();
    Eigen::VectorXcd u = solver.solve(target);
    // Alternate between the LS fit and the free-phase magnitude target.
    for (int it = 0; it < kPhaseIterations; ++it) {
      const Eigen::VectorXcd p = b * u;
      for (int i = 0; i < kGridPoints; ++i) {
        const double a = std::abs(p[i]);
        target[i] = a > 1e-14 ? mag[i] * p[i] / a
                              : std::complex<double>(mag[i], 0.0);
      }
      u = solver.solve(target);
    }
    Eigen::VectorXcd v = u.conjugate();
    cb.beams.col(k) = v / v.norm();
  }
  return cb;
}

}  // namespace ba::codebook
