#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ba/autodiff.hpp"
#include "ba/rng.hpp"

namespace ba::channel {

struct PathParams {
  std::complex<double> alpha;  // complex path gain, CN(0,1)
  double phi_rx = 0.0;         // angle of arrival, radians
  double phi_tx = 0.0;         // angle of departure, radians
};

// Geometric multipath channel: H = sum_l alpha_l conj(a_rx) a_tx^T.
struct Channel {
  Eigen::MatrixXcd h;  // N_RX x N_TX
  std::vector<PathParams> paths;
  double frob_norm = 0.0;
};

// ULA response for angle phi with half-wavelength spacing:
// element k is exp(j*pi*k*cos(phi)).
Eigen::VectorXcd array_response(double phi, int n);

// l paths with alpha ~ CN(0,1) and both angles uniform on [-pi/2, pi/2].
std::vector<PathParams> sample_paths(int l, Rng& rng);

Channel assemble_channel(const std::vector<PathParams>& paths, int n_rx,
                         int n_tx);

Channel sample_channel(int l, int n_rx, int n_tx, Rng& rng);

// One noisy pilot observation y = w^H H f + w^H n, differentiable in w and f.
// Noise is drawn fresh per call with n ~ CN(0, sigma_n^2 I).
ad::ComplexTensor propagate(const Channel& h, const ad::ComplexTensor& w,
                            const ad::ComplexTensor& f, double sigma_n,
                            Rng& rng);

}  // namespace ba::channel
