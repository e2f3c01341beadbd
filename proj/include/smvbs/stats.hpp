#ifndef SMVBS_STATS_HPP
#define SMVBS_STATS_HPP

// Small statistics toolbox for the audit harness: regularized incomplete
// gamma (chi-square tail probabilities), the asymptotic Kolmogorov-Smirnov
// distribution, and a one-sample KS statistic against an arbitrary CDF.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "smvbs/errors.hpp"

namespace smvbs {

namespace stats_detail {

// Lower regularized incomplete gamma P(a, x) by series expansion.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by continued fraction.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace stats_detail

// Lower regularized incomplete gamma P(a, x) = gamma(a, x)/Gamma(a).
inline double gamma_p(double a, double x) {
    if (!(a > 0) || x < 0) throw DomainError("gamma_p: need a > 0, x >= 0");
    if (x == 0) return 0.0;
    if (x < a + 1.0) return stats_detail::gamma_p_series(a, x);
    return 1.0 - stats_detail::gamma_q_cf(a, x);
}

// Upper tail of the chi-square distribution with dof degrees of freedom.
inline double chi_square_sf(double x, double dof) {
    if (x <= 0) return 1.0;
    return 1.0 - gamma_p(0.5 * dof, 0.5 * x);
}

// Survival function of the Kolmogorov distribution,
// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_sf(double x) {
    if (x <= 0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
        sum += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;  // sup |F_n - F|
    double p_value = 1.0;
};

// One-sample KS test of draws against cdf, using the finite-sample corrected
// asymptotic p-value p = Q((sqrt(n) + 0.12 + 0.11/sqrt(n)) D).
inline KsResult ks_test(std::vector<double> draws, const std::function<double(double)>& cdf) {
    if (draws.size() < 8) throw DomainError("ks_test: too few draws");
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double d = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double f = cdf(draws[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Pearson chi-square goodness of fit from observed counts vs expected counts.
// dof_reduction subtracts constraints (1 for a fixed total).
inline ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                                      const std::vector<double>& expected,
                                      int dof_reduction = 1) {
    if (observed.size() != expected.size() || observed.empty())
        throw DomainError("chi_square_gof: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0)) throw DomainError("chi_square_gof: nonpositive expected count");
        const double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    const int dof = static_cast<int>(observed.size()) - dof_reduction;
    if (dof < 1) throw DomainError("chi_square_gof: nonpositive degrees of freedom");
    return {stat, dof, chi_square_sf(stat, dof)};
}

// Percentile of a sample (nearest-rank), for campaign summaries.
inline double percentile(std::vector<double> xs, double pct) {
    if (xs.empty()) throw DomainError("percentile: empty sample");
    std::sort(xs.begin(), xs.end());
    const double idx = pct / 100.0 * (static_cast<double>(xs.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double w = idx - static_cast<double>(lo);
    return (1.0 - w) * xs[lo] + w * xs[hi];
}

}  // namespace smvbs

#endif  // SMVBS_STATS_HPP
