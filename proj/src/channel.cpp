#include "ba/channel.hpp"

#include <cmath>
#include <numbers>

#include "ba/errors.hpp"

namespace ba::channel {

namespace {
constexpr double kPi = std::numbers::pi;

void check_unit_norm(const char* which, const ad::ComplexTensor& v) {
  const double nrm =
      std::sqrt(v.re.values().square().sum() + v.im.values().square().sum());
  if (std::abs(nrm - 1.0) > 1e-4) {
    throw ContractError(std::string("propagate: ") + which +
                        " must be unit-norm, got " + std::to_string(nrm));
  }
}
}  // namespace

Eigen::VectorXcd array_response(double phi, int n) {
  if (n < 1) throw ContractError("array_response: need n >= 1 antennas");
  Eigen::VectorXcd a(n);
  const double c = std::cos(phi);
  for (int k = 0; k < n; ++k) {
    a[k] = std::polar(1.0, kPi * k * c);
  }
  return a;
}

std::vector<PathParams> sample_paths(int l, Rng& rng) {
  if (l < 1) throw ContractError("sample_paths: need l >= 1 paths");
  std::vector<PathParams> paths(l);
  const double s = std::sqrt(0.5);
  for (auto& p : paths) {
    p.alpha = {rng.normal(0.0, s), rng.normal(0.0, s)};
    p.phi_rx = rng.uniform(-kPi / 2, kPi / 2);
    p.phi_tx = rng.uniform(-kPi / 2, kPi / 2);
  }
  return paths;
}

Channel assemble_channel(const std::vector<PathParams>& paths, int n_rx,
                         int n_tx) {
  if (paths.empty()) throw ContractError("assemble_channel: empty path list");
  Channel ch;
  ch.paths = paths;
  ch.h = Eigen::MatrixXcd::Zero(n_rx, n_tx);
  for (const auto& p : paths) {
    const Eigen::VectorXcd a_rx = array_response(p.phi_rx, n_rx);
    const Eigen::VectorXcd a_tx = array_response(p.phi_tx, n_tx);
    ch.h += p.alpha * a_rx.conjugate() * a_tx.transpose();
  }
  ch.frob_norm = ch.h.norm();
  return ch;
}

Channel sample_channel(int l, int n_rx, int n_tx, Rng& rng) {
  return assemble_channel(sample_paths(l, rng), n_rx, n_tx);
}

ad::ComplexTensor propagate(const Channel& h, const ad::ComplexTensor& w,
                            const ad::ComplexTensor& f, double sigma_n,
                            Rng& rng) {
  if (sigma_n < 0) throw ContractError("propagate: sigma_n must be >= 0");
  const Eigen::Index n_rx = h.h.rows(), n_tx = h.h.cols();
  if (w.size() != n_rx || f.size() != n_tx) {
    throw DimensionError("propagate: beam sizes (" + std::to_string(w.size()) +
                         "," + std::to_string(f.size()) +
                         ") do not match channel " + std::to_string(n_rx) +
                         "x" + std::to_string(n_tx));
  }
  check_unit_norm("w", w);
  check_unit_norm("f", f);

  ad::ComplexTensor hc = ad::make_complex(h.h);
  ad::ComplexTensor u = ad::complex_matvec(hc, f);  // H f
  if (sigma_n > 0) {
    Eigen::VectorXcd n(n_rx);
    const double s = sigma_n * std::sqrt(0.5);
    for (Eigen::Index k = 0; k < n_rx; ++k) {
      n[k] = {rng.normal(0.0, s), rng.normal(0.0, s)};
    }
    u = ad::cadd(u, ad::make_complex(n));
  }
  return ad::cvdot(w, u);  // w^H (H f + n)
}

}  // namespace ba::channel
