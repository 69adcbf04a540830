#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gdwave/semidisc.hpp"

namespace gdwave {

/// Dense matrix of the linear map (U, V) -> (dU/dt, dV/dt), probed column by
/// column through the element right-hand side.
Eigen::MatrixXd global_operator(Semidiscretization& sd);

/// Bloch matrix A(K) = (H/c) L(K) of the 1-D scheme on a periodic cell of
/// `cell_elements` elements (H = c = 1), for the phase K per element. Its
/// eigenvalues mu give Omega = i mu.
Eigen::MatrixXcd bloch_matrix(int degree, int cells, const FluxScheme& scheme, double K, int cell_elements = 1);

/// physical: best plane-wave match with Omega_r >= 0; mirror: the same wave
/// travelling left; stationary: |Omega| <= 1e-8 (element-wise constant
/// displacement); alias: a resolved wave K + 2 pi j / m, j != 0, within 1 %
/// in Omega_r and plane-wave correlation >= 0.99; spurious: the rest.
enum class ModeKind { physical, mirror, stationary, alias, spurious };

struct DispersionResult {
  std::vector<double> K;
  std::vector<double> exact;  // Omega = K
  std::vector<std::vector<std::complex<double>>> omega;  // per K, Omega_r + i Omega_i
  std::vector<int> physical;                             // index into omega[k]
  std::vector<double> correlation;                       // plane-wave match of the physical mode
  std::vector<int> mirror;
  std::vector<std::vector<ModeKind>> kind;

  bool spurious(std::size_t k, int i) const { return kind[k][i] == ModeKind::spurious; }
};

/// The physical mode is the eigenvector whose u part correlates best with
/// the sampled plane wave exp(i K x / H) among modes with Omega_r >= 0.
DispersionResult dispersion_sweep(int degree, int cells, const FluxScheme& scheme, const std::vector<double>& K,
                                  int cell_elements = 1);

/// Eigenvalues of the global 1-D operator on [0, 1] with n elements.
std::vector<std::complex<double>> operator_spectrum(int degree, int cells, int elements, const FluxScheme& scheme,
                                                    BcKind left, BcKind right);
double spectral_radius(int degree, int cells, int elements, const FluxScheme& scheme, BcKind left, BcKind right);

}  // namespace gdwave
