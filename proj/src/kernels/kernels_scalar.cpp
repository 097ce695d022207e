#include "mca/kernels.hpp"

namespace mca::kernels::detail {

double sum_scalar(const double *x, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; i++) {
        acc += x[i];
    }
    return acc;
}

double dot_scalar(const double *x, const double *y, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; i++) {
        acc += x[i] * y[i];
    }
    return acc;
}

PearsonSums pearson_sums_scalar(const double *x, const double *y,
                                std::size_t n, double mean_x, double mean_y)
{
    PearsonSums s;
    for (std::size_t i = 0; i < n; i++) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        s.sxy += dx * dy;
        s.sxx += dx * dx;
        s.syy += dy * dy;
    }
    return s;
}

void dist_sq_scalar(const double *const *dims, std::size_t d, const double *q,
                    std::size_t n, double *out)
{
    for (std::size_t i = 0; i < n; i++) {
        out[i] = 0.0;
    }
    for (std::size_t j = 0; j < d; j++) {
        const double *col = dims[j];
        const double qj = q[j];
        for (std::size_t i = 0; i < n; i++) {
            const double diff = col[i] - qj;
            out[i] += diff * diff;
        }
    }
}

} // namespace mca::kernels::detail
