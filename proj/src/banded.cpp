#include "hmhf/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmhf {

CholeskyFactor::CholeskyFactor(int n, int bandwidth) : n_(n), bw_(bandwidth) {
    bands_.resize(bw_ + 1);
    for (int d = 0; d <= bw_; ++d)
        bands_[d].assign(std::max(0, n_ - d), 0.0);
}

CholeskyFactor factor(const BandedSpdMatrix& matrix) {
    const int n = matrix.size();
    const int bw = matrix.bandwidth();
    CholeskyFactor chol(n, bw);

    for (int j = 0; j < n; ++j) {
        double diag = matrix.band(0)[j];
        for (int m = 1; m <= std::min(bw, j); ++m) {
            double l = chol.band(m)[j - m];
            diag -= l * l;
        }
        if (!(diag > 0.0))
            throw std::runtime_error("factor: matrix is not positive definite");
        const double ljj = std::sqrt(diag);
        chol.band(0)[j] = ljj;
        for (int d = 1; d <= bw && j + d < n; ++d) {
            double s = matrix.band(d)[j];
            for (int m = 1; m <= std::min(bw - d, j); ++m)
                s -= chol.band(d + m)[j - m] * chol.band(m)[j - m];
            chol.band(d)[j] = s / ljj;
        }
    }
    return chol;
}

std::vector<double> solve(const CholeskyFactor& chol, std::span<const double> rhs) {
    const int n = chol.size();
    const int bw = chol.bandwidth();
    if (static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("solve: rhs size mismatch");

    std::vector<double> x(rhs.begin(), rhs.end());
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int m = 1; m <= std::min(bw, i); ++m)
            s -= chol.band(m)[i - m] * x[i - m];
        x[i] = s / chol.band(0)[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int m = 1; m <= bw && i + m < n; ++m)
            s -= chol.band(m)[i] * x[i + m];
        x[i] = s / chol.band(0)[i];
    }
    return x;
}

}  // namespace hmhf
