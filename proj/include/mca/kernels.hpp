#pragma once

#include <cstddef>
#include <cstdint>

// Arithmetic inner loops shared by the predictors and the scoring code.
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant; the active set is chosen once at runtime.
// The lane can be forced through set_lane() or the MCA_SIMD environment
// variable (values: auto, scalar, avx2).

namespace mca::kernels {

enum class Lane { scalar, avx2 };

Lane active_lane();
const char *lane_name(Lane lane);

// Force a specific lane. Returns false (and leaves the selection unchanged)
// if the host cannot run it.
bool set_lane(Lane lane);
bool lane_supported(Lane lane);

struct PearsonSums {
    double sxy = 0.0; // sum (x-mx)(y-my)
    double sxx = 0.0; // sum (x-mx)^2
    double syy = 0.0; // sum (y-my)^2
};

double sum(const double *x, std::size_t n);
double dot(const double *x, const double *y, std::size_t n);
PearsonSums pearson_sums(const double *x, const double *y, std::size_t n,
                         double mean_x, double mean_y);

// Squared Euclidean distances from one query point to n points stored
// dimension-major: dims[j][i] is coordinate j of point i.
// out[i] = sum_j (dims[j][i] - q[j])^2.
void dist_sq(const double *const *dims, std::size_t d, const double *q,
             std::size_t n, double *out);

namespace detail {

double sum_scalar(const double *x, std::size_t n);
double dot_scalar(const double *x, const double *y, std::size_t n);
PearsonSums pearson_sums_scalar(const double *x, const double *y,
                                std::size_t n, double mean_x, double mean_y);
void dist_sq_scalar(const double *const *dims, std::size_t d, const double *q,
                    std::size_t n, double *out);

#if defined(__x86_64__)
double sum_avx2(const double *x, std::size_t n);
double dot_avx2(const double *x, const double *y, std::size_t n);
PearsonSums pearson_sums_avx2(const double *x, const double *y, std::size_t n,
                              double mean_x, double mean_y);
void dist_sq_avx2(const double *const *dims, std::size_t d, const double *q,
                  std::size_t n, double *out);
#endif

} // namespace detail

} // namespace mca::kernels
