#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mca {

// Householder QR of a tall dense matrix, kept around so least-squares
// solves against many right-hand sides cost two triangular-ish passes
// and no refactorization.
class QrFactor {
  public:
    QrFactor() = default;
    QrFactor(const double *a, std::size_t rows, std::size_t cols); // row-major

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    // argmin_x |A x - b|_2. Near-singular diagonal entries are truncated.
    std::vector<double> solve(std::span<const double> b) const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> qr_;  // packed reflectors + R
    std::vector<double> tau_; // reflector scales
};

} // namespace mca
