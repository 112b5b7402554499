#include "admitlab/statfns.hpp"

#include "admitlab/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace admitlab::stat {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

// Acklam's rational approximation to the normal quantile, lower region split.
double acklam(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Mills ratio (1 - cdf(x)) / pdf(x) by backward evaluation of the continued fraction
// x + 1/(x + 2/(x + 3/(x + ...))). Converges fast for x > 7.
double mills_ratio_cf(double x) {
    double t = x;
    for (int k = 80; k >= 1; --k) t = x + k / t;
    return 1.0 / t;
}

}  // namespace

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ccdf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("quantile: p must lie in (0,1), got " + std::to_string(p));
    if (p == 0.5) return 0.0;
    // Work in the lower tail so the Newton residual is measured relative to a small number.
    bool upper = p > 0.5;
    double pl = upper ? 1.0 - p : p;
    double x = acklam(pl);
    for (int i = 0; i < 2; ++i) {
        double err = cdf(x) - pl;
        x -= err / pdf(x);
    }
    return upper ? -x : x;
}

double hazard(double x) {
    if (x > 7.0) return 1.0 / mills_ratio_cf(x);
    return pdf(x) / ccdf(x);
}

double hazard_derivative(double x) {
    double h = hazard(x);
    return h * (h - x);
}

double hazard_inv(double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw DomainError("hazard_inv: h must be positive and finite");

    // Starting point from the two asymptotic regimes: HR(x) ~ x + 1/x on the right,
    // HR(x) ~ pdf(x) on the left.
    double x;
    if (h >= 1.0) {
        x = h - 1.0 / h;
    } else if (h * std::sqrt(2.0 * std::numbers::pi) < 0.5) {
        x = -std::sqrt(-2.0 * std::log(h * std::sqrt(2.0 * std::numbers::pi)));
    } else {
        x = 0.0;
    }

    // Bracket [lo, hi] with HR(lo) < h < HR(hi).
    double lo = x - 1.0, hi = x + 1.0;
    while (hazard(lo) > h) lo -= 2.0 * (hi - lo);
    while (hazard(hi) < h) hi += 2.0 * (hi - lo);
    if (x <= lo || x >= hi) x = 0.5 * (lo + hi);

    for (int it = 0; it < 100; ++it) {
        double hx = hazard(x);
        double f = hx - h;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        double step = f / (hx * (hx - x));
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

double truncated_mean_above(double mu, double sigma, double a) {
    return mu + sigma * hazard((a - mu) / sigma);
}

double solve_monotone_root(const std::function<double(double)>& f, double lo, double hi,
                           double tol, int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw BracketError("solve_monotone_root: f(lo)=" + std::to_string(flo) +
                           ", f(hi)=" + std::to_string(fhi) + " do not straddle zero");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;

    int side = 0;  // Illinois: which endpoint was retained last time
    double width_before = hi - lo;
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        double x;
        if (it % 3 == 2 && hi - lo > 0.5 * width_before) {
            x = 0.5 * (lo + hi);
        } else {
            x = (lo * fhi - hi * flo) / (fhi - flo);
            if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        }
        if (it % 3 == 0) width_before = hi - lo;

        double fx = f(x);
        if (fx == 0.0) return x;
        if (fx < 0.0) {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace admitlab::stat
