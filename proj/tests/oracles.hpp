#pragma once

// Reference computations written independently of the library code paths
// they check. Kept deliberately naive.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Reduced density matrix on the first `keep` qubits of an n-qubit pure state
// (big-endian), by direct summation over the traced index.
inline Mat reduce_leading(const Vec& psi, int n, int keep) {
  const std::int64_t dk = std::int64_t{1} << keep;
  const std::int64_t dr = std::int64_t{1} << (n - keep);
  Mat rho = Mat::Zero(dk, dk);
  for (std::int64_t i = 0; i < dk; ++i)
    for (std::int64_t j = 0; j < dk; ++j)
      for (std::int64_t r = 0; r < dr; ++r) rho(i, j) += psi[i * dr + r] * std::conj(psi[j * dr + r]);
  return rho;
}

inline double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Outcome chain for alternating measurements started from a block vector
// with overlap p: y0 = 1 and each later bit repeats the previous one with
// probability p. Returns Pr[y1 ... y_len].
inline double chain_probability(double p, std::uint64_t bits, int len) {
  double pr = 1.0;
  int prev = 1;
  for (int j = 0; j < len; ++j) {
    const int y = static_cast<int>((bits >> (len - 1 - j)) & 1U);
    pr *= (y == prev) ? p : 1.0 - p;
    prev = y;
  }
  return pr;
}

// Pr[last bit is 1 and at least `threshold` agreements among 2N steps] for
// a chain with repeat probability p. The last bit equals y0 = 1 exactly when
// the number of flips is even.
inline double good_probability(double p, long n_alt, long threshold) {
  const int len = static_cast<int>(2 * n_alt);
  double s = 0.0;
  for (int c = 0; c <= len; ++c) {
    if (c < threshold || (len - c) % 2 != 0) continue;
    s += binomial(len, c) * std::pow(p, c) * std::pow(1.0 - p, len - c);
  }
  return s;
}

}  // namespace oracles
