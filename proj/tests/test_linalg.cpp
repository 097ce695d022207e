#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "mca/linalg.hpp"
#include "mca/rng.hpp"

namespace {

// Brute-force normal equations (A^T A) x = A^T b via Gaussian elimination
// with partial pivoting — the independent oracle for the QR solver.
std::vector<double> normal_equations(const std::vector<double> &a,
                                     std::size_t rows, std::size_t cols,
                                     const std::vector<double> &b)
{
    std::vector<double> ata(cols * cols, 0.0);
    std::vector<double> atb(cols, 0.0);
    for (std::size_t i = 0; i < rows; i++) {
        for (std::size_t p = 0; p < cols; p++) {
            atb[p] += a[i * cols + p] * b[i];
            for (std::size_t q = 0; q < cols; q++) {
                ata[p * cols + q] += a[i * cols + p] * a[i * cols + q];
            }
        }
    }
    // Gaussian elimination.
    std::vector<double> m = ata;
    std::vector<double> x = atb;
    for (std::size_t k = 0; k < cols; k++) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < cols; r++) {
            if (std::abs(m[r * cols + k]) > std::abs(m[piv * cols + k])) {
                piv = r;
            }
        }
        for (std::size_t c = 0; c < cols; c++) {
            std::swap(m[k * cols + c], m[piv * cols + c]);
        }
        std::swap(x[k], x[piv]);
        for (std::size_t r = k + 1; r < cols; r++) {
            const double f = m[r * cols + k] / m[k * cols + k];
            for (std::size_t c = k; c < cols; c++) {
                m[r * cols + c] -= f * m[k * cols + c];
            }
            x[r] -= f * x[k];
        }
    }
    for (std::size_t k = cols; k-- > 0;) {
        for (std::size_t c = k + 1; c < cols; c++) {
            x[k] -= m[k * cols + c] * x[c];
        }
        x[k] /= m[k * cols + k];
    }
    return x;
}

} // namespace

TEST_CASE("QR solve matches brute-force normal equations on 20x4 systems")
{
    mca::Rng rng(17);
    for (int trial = 0; trial < 25; trial++) {
        const std::size_t rows = 20;
        const std::size_t cols = 4;
        std::vector<double> a(rows * cols);
        std::vector<double> b(rows);
        for (double &v : a) {
            v = rng.normal();
        }
        for (double &v : b) {
            v = rng.normal();
        }
        const mca::QrFactor qr(a.data(), rows, cols);
        const auto x = qr.solve(b);
        const auto x_ref = normal_equations(a, rows, cols, b);
        for (std::size_t k = 0; k < cols; k++) {
            CHECK(std::abs(x[k] - x_ref[k]) <= 1e-8);
        }
    }
}

TEST_CASE("QR reproduces exactly representable right-hand sides")
{
    mca::Rng rng(23);
    const std::size_t rows = 30;
    const std::size_t cols = 5;
    std::vector<double> a(rows * cols);
    for (double &v : a) {
        v = rng.uniform01();
    }
    std::vector<double> coef{1, 2, 3, 4, 5};
    std::vector<double> b(rows, 0.0);
    for (std::size_t i = 0; i < rows; i++) {
        for (std::size_t k = 0; k < cols; k++) {
            b[i] += a[i * cols + k] * coef[k];
        }
    }
    const mca::QrFactor qr(a.data(), rows, cols);
    const auto x = qr.solve(b);
    double residual = 0.0;
    for (std::size_t i = 0; i < rows; i++) {
        double pred = 0.0;
        for (std::size_t k = 0; k < cols; k++) {
            pred += a[i * cols + k] * x[k];
        }
        residual += (pred - b[i]) * (pred - b[i]);
    }
    CHECK(residual <= 1e-16);
}

TEST_CASE("QR handles a rank-deficient column without NaN")
{
    // Third column = first + second.
    const std::size_t rows = 6;
    const std::size_t cols = 3;
    std::vector<double> a(rows * cols);
    mca::Rng rng(31);
    for (std::size_t i = 0; i < rows; i++) {
        a[i * cols + 0] = rng.normal();
        a[i * cols + 1] = rng.normal();
        a[i * cols + 2] = a[i * cols + 0] + a[i * cols + 1];
    }
    std::vector<double> b(rows, 1.0);
    const mca::QrFactor qr(a.data(), rows, cols);
    const auto x = qr.solve(b);
    for (const double v : x) {
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("QR rejects wide systems")
{
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS(mca::QrFactor(a.data(), 2, 3), std::invalid_argument);
}
