#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cqms/int_matrix.hpp"

namespace cqms {

/// Coefficients c_0..c_d of det(xI - T), monic (c_d = 1). Exact.
std::vector<BigInt> characteristic_polynomial(const IntMatrix& t);

struct Eigenvalue {
  std::complex<double> value;
  std::size_t multiplicity = 1;
};

struct Spectrum {
  std::vector<Eigenvalue> eigenvalues;
  /// | prod |lambda_i|^m_i - |det T| | / max(1, |det T|)
  double determinant_residual = 0;
  /// Whether the multiprecision root finder had to take over.
  bool used_multiprecision = false;
};

/// Eigenvalues of an integer matrix from its characteristic polynomial:
/// exact square-free decomposition, then companion-matrix roots of each
/// factor (balanced), Newton-polished, with a multiprecision fallback when the
/// determinant residual exceeds 1e-6. Throws NumericalError if both fail.
Spectrum spectrum(const IntMatrix& t);

/// sum over eigenvalues with |lambda| >= 1 of log|lambda|, with multiplicity.
double eigen_entropy(const IntMatrix& t);

struct HyperbolicityResult {
  bool hyperbolic = false;
  double max_modulus = 0;
};

/// Hyperbolic here means some eigenvalue has modulus >= 2.
HyperbolicityResult hyperbolicity_check(const IntMatrix& t);

}  // namespace cqms
