#ifndef ABIP_BENCH_HPP
#define ABIP_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace abip::bench
{

inline constexpr double kTimeShift = 10.0;
inline constexpr double kFailureTime = 15000.0;

/// Shifted geometric mean  (prod (t_i + shift))^(1/n) - shift.
/// A missing entry counts as a failure. The product is formed directly and
/// falls back to a log sum only when it would overflow.
inline double shifted_geometric_mean(const std::vector<std::optional<double>>& times,
                                     double shift = kTimeShift, double failure_time = kFailureTime)
{
    if (times.empty()) throw std::invalid_argument("shifted_geometric_mean: no runtimes");
    double prod = 1.0;
    double log_sum = 0.0;
    for (const auto& t : times) {
        const double v = t ? *t : failure_time;
        if (!(v >= 0.0)) throw std::invalid_argument("shifted_geometric_mean: negative runtime");
        prod *= v + shift;
        log_sum += std::log(v + shift);
    }
    const double n = double(times.size());
    if (std::isfinite(prod) && prod > 0.0) return std::pow(prod, 1.0 / n) - shift;
    return std::exp(log_sum / n) - shift;
}

inline double shifted_geometric_mean(const std::vector<double>& times, double shift = kTimeShift)
{
    std::vector<std::optional<double>> opt(times.begin(), times.end());
    return shifted_geometric_mean(opt, shift);
}

/// Divides every SGM by the smallest one. All zeros stay zero.
inline std::vector<double> normalize_sgm(const std::vector<double>& sgm)
{
    if (sgm.empty()) return {};
    const double lo = *std::min_element(sgm.begin(), sgm.end());
    std::vector<double> out(sgm);
    if (lo > 0.0) {
        for (auto& v : out) v /= lo;
    }
    return out;
}

} // namespace abip::bench

#endif // ABIP_BENCH_HPP
