#ifndef SMVBS_QUADRATURE_HPP
#define SMVBS_QUADRATURE_HPP

// Adaptive Gauss-Kronrod 15(7) quadrature on finite and semi-infinite
// intervals, with a worst-interval-first subdivision strategy.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "smvbs/errors.hpp"

namespace smvbs {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

namespace quad_detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

template <typename F>
Interval gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = kWg[3] * fc;
    double resk = kWgk[7] * fc;
    double fv[7][2];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        fv[j][0] = f(c - dx);
        fv[j][1] = f(c + dx);
        const double fsum = fv[j][0] + fv[j][1];
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv[j][0] - reskh) + std::abs(fv[j][1] - reskh));
    resasc *= std::abs(h);
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return {a, b, resk * h, err};
}

}  // namespace quad_detail

// Integrate f over [a, b] to the requested tolerances.
inline QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol = 1e-10, double rel_tol = 1e-9,
                                  int max_intervals = 2000) {
    if (!(b > a)) return {0.0, 0.0, 0};
    std::priority_queue<quad_detail::Interval> heap;
    heap.push(quad_detail::gk15(f, a, b));
    double total = heap.top().value;
    double toterr = heap.top().error;
    int evals = 15;
    int count = 1;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
        quad_detail::Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            heap.push(worst);  // interval exhausted machine precision
            break;
        }
        auto left = quad_detail::gk15(f, worst.a, mid);
        auto right = quad_detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        toterr += left.error + right.error - worst.error;
        evals += 30;
        ++count;
        heap.push(left);
        heap.push(right);
    }
    if (toterr > std::max(abs_tol * 10.0, rel_tol * 10.0 * std::abs(total)))
        throw QuadratureFailure("integrate: did not converge, error estimate " + std::to_string(toterr));
    return {total, toterr, evals};
}

// Integrate f over [a, inf) via the rational map t = a + x/(1-x).
inline QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                              double abs_tol = 1e-10, double rel_tol = 1e-9,
                                              int max_intervals = 4000) {
    auto g = [&f, a](double x) {
        const double om = 1.0 - x;
        const double t = a + x / om;
        return f(t) / (om * om);
    };
    return integrate(g, 0.0, 1.0, abs_tol, rel_tol, max_intervals);
}

}  // namespace smvbs

#endif  // SMVBS_QUADRATURE_HPP
