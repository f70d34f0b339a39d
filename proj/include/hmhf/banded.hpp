#pragma once

#include <span>
#include <vector>

#include "hmhf/assembly.hpp"

namespace hmhf {

/// Cholesky factor L (A = L L^T) in the same lower-band layout as the input.
/// No pivoting: the assembled forms are SPD by construction.
class CholeskyFactor {
  public:
    CholeskyFactor(int n, int bandwidth);

    int size() const { return n_; }
    int bandwidth() const { return bw_; }

    std::span<const double> band(int d) const { return bands_[d]; }
    std::span<double> band(int d) { return bands_[d]; }

  private:
    int n_;
    int bw_;
    std::vector<std::vector<double>> bands_;
};

/// Throws std::runtime_error if a pivot is not strictly positive.
CholeskyFactor factor(const BandedSpdMatrix& matrix);

/// Solves A x = rhs via the forward/backward triangular sweeps.
std::vector<double> solve(const CholeskyFactor& chol, std::span<const double> rhs);

}  // namespace hmhf
