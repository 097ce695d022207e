#include <cmath>
#include <stdexcept>

#include "mca/instrument.hpp"
#include "mca/linalg.hpp"

namespace mca {

QrFactor::QrFactor(const double *a, std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), qr_(a, a + rows * cols), tau_(cols, 0.0)
{
    if (rows < cols || cols == 0) {
        throw std::invalid_argument("QrFactor: need rows >= cols >= 1");
    }
    instrument::counters().lsq_factorizations++;

    for (std::size_t k = 0; k < cols_; k++) {
        // Householder vector for column k, rows k..m-1.
        double norm = 0.0;
        for (std::size_t i = k; i < rows_; i++) {
            norm = std::hypot(norm, qr_[i * cols_ + k]);
        }
        if (norm == 0.0) {
            tau_[k] = 0.0;
            continue;
        }
        double alpha = qr_[k * cols_ + k];
        const double beta = alpha >= 0.0 ? -norm : norm;
        for (std::size_t i = k + 1; i < rows_; i++) {
            qr_[i * cols_ + k] /= (alpha - beta);
        }
        tau_[k] = (beta - alpha) / beta;
        qr_[k * cols_ + k] = beta;

        // Apply the reflector to the remaining columns.
        for (std::size_t j = k + 1; j < cols_; j++) {
            double s = qr_[k * cols_ + j];
            for (std::size_t i = k + 1; i < rows_; i++) {
                s += qr_[i * cols_ + k] * qr_[i * cols_ + j];
            }
            s *= tau_[k];
            qr_[k * cols_ + j] -= s;
            for (std::size_t i = k + 1; i < rows_; i++) {
                qr_[i * cols_ + j] -= s * qr_[i * cols_ + k];
            }
        }
    }
}

std::vector<double> QrFactor::solve(std::span<const double> b) const
{
    if (b.size() != rows_) {
        throw std::invalid_argument("QrFactor::solve: rhs length mismatch");
    }
    std::vector<double> y(b.begin(), b.end());

    // y <- Q^T y
    for (std::size_t k = 0; k < cols_; k++) {
        if (tau_[k] == 0.0) {
            continue;
        }
        double s = y[k];
        for (std::size_t i = k + 1; i < rows_; i++) {
            s += qr_[i * cols_ + k] * y[i];
        }
        s *= tau_[k];
        y[k] -= s;
        for (std::size_t i = k + 1; i < rows_; i++) {
            y[i] -= s * qr_[i * cols_ + k];
        }
    }

    // Back-substitute R x = y, truncating negligible pivots.
    const double pivot_floor = 1e-13 * std::abs(qr_[0]);
    std::vector<double> x(cols_, 0.0);
    for (std::size_t k = cols_; k-- > 0;) {
        double s = y[k];
        for (std::size_t j = k + 1; j < cols_; j++) {
            s -= qr_[k * cols_ + j] * x[j];
        }
        const double diag = qr_[k * cols_ + k];
        x[k] = std::abs(diag) <= pivot_floor ? 0.0 : s / diag;
    }
    return x;
}

} // namespace mca
