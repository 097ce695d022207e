#include <atomic>
#include <cstdlib>
#include <cstring>

#include "mca/kernels.hpp"

namespace mca::kernels {

namespace {

struct Ops {
    Lane lane;
    double (*sum)(const double *, std::size_t);
    double (*dot)(const double *, const double *, std::size_t);
    PearsonSums (*pearson_sums)(const double *, const double *, std::size_t,
                                double, double);
    void (*dist_sq)(const double *const *, std::size_t, const double *,
                    std::size_t, double *);
};

constexpr Ops kScalarOps = {
    Lane::scalar,          detail::sum_scalar,     detail::dot_scalar,
    detail::pearson_sums_scalar, detail::dist_sq_scalar,
};

#if defined(__x86_64__)
constexpr Ops kAvx2Ops = {
    Lane::avx2,          detail::sum_avx2,     detail::dot_avx2,
    detail::pearson_sums_avx2, detail::dist_sq_avx2,
};
#endif

bool host_has_avx2()
{
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops *pick_default()
{
    const char *env = std::getenv("MCA_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) {
            return &kScalarOps;
        }
#if defined(__x86_64__)
        if (std::strcmp(env, "avx2") == 0 && host_has_avx2()) {
            return &kAvx2Ops;
        }
#endif
        // "auto" or unusable request falls through to detection.
    }
#if defined(__x86_64__)
    if (host_has_avx2()) {
        return &kAvx2Ops;
    }
#endif
    return &kScalarOps;
}

std::atomic<const Ops *> &active()
{
    static std::atomic<const Ops *> ops{pick_default()};
    return ops;
}

} // namespace

Lane active_lane() { return active().load(std::memory_order_relaxed)->lane; }

const char *lane_name(Lane lane)
{
    switch (lane) {
    case Lane::scalar:
        return "scalar";
    case Lane::avx2:
        return "avx2";
    }
    return "?";
}

bool lane_supported(Lane lane)
{
    if (lane == Lane::scalar) {
        return true;
    }
    return host_has_avx2();
}

bool set_lane(Lane lane)
{
    if (!lane_supported(lane)) {
        return false;
    }
    switch (lane) {
    case Lane::scalar:
        active().store(&kScalarOps, std::memory_order_relaxed);
        return true;
    case Lane::avx2:
#if defined(__x86_64__)
        active().store(&kAvx2Ops, std::memory_order_relaxed);
        return true;
#else
        return false;
#endif
    }
    return false;
}

double sum(const double *x, std::size_t n)
{
    return active().load(std::memory_order_relaxed)->sum(x, n);
}

double dot(const double *x, const double *y, std::size_t n)
{
    return active().load(std::memory_order_relaxed)->dot(x, y, n);
}

PearsonSums pearson_sums(const double *x, const double *y, std::size_t n,
                         double mean_x, double mean_y)
{
    return active().load(std::memory_order_relaxed)
        ->pearson_sums(x, y, n, mean_x, mean_y);
}

void dist_sq(const double *const *dims, std::size_t d, const double *q,
             std::size_t n, double *out)
{
    active().load(std::memory_order_relaxed)->dist_sq(dims, d, q, n, out);
}

} // namespace mca::kernels
