#pragma once

// Reference computations for tests: deliberately simple and independent of the library's
// own solvers (plain bisection, composite Simpson on the raw densities).

#include "admitlab/model.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Root of an increasing function by plain bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Composite Simpson with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// log of prior(q) * prod_k N(theta_k; q + bias_k, var_k), up to a constant shared by groups
// with the same feature set.
inline double log_joint(const admitlab::Scenario& s, admitlab::Group g, const std::vector<std::size_t>& idx,
                        const std::vector<double>& theta, double q) {
    double l = -0.5 * (q - s.prior_mean) * (q - s.prior_mean) / s.prior_variance;
    const auto& fs = s.params(g).features;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& f = fs[idx[j]];
        double r = theta[j] - q - f.bias;
        l += -0.5 * r * r / f.variance - 0.5 * std::log(2.0 * M_PI * f.variance);
    }
    return l;
}

struct Moments {
    double mean, variance;
};

// Posterior moments of q given theta by quadrature over [mu - 12 sigma, mu + 12 sigma].
inline Moments posterior(const admitlab::Scenario& s, admitlab::Group g, const std::vector<std::size_t>& idx,
                         const std::vector<double>& theta) {
    const double sd = std::sqrt(s.prior_variance);
    const double a = s.prior_mean - 12.0 * sd, b = s.prior_mean + 12.0 * sd;
    double peak = -INFINITY;
    for (int i = 0; i <= 2000; ++i) peak = std::max(peak, log_joint(s, g, idx, theta, a + (b - a) * i / 2000));
    auto dens = [&](double q) { return std::exp(log_joint(s, g, idx, theta, q) - peak); };
    double z = simpson(dens, a, b);
    double m = simpson([&](double q) { return q * dens(q); }, a, b) / z;
    double v = simpson([&](double q) { return (q - m) * (q - m) * dens(q); }, a, b) / z;
    return {m, v};
}

// Mixture posterior mean with prior group weights w_a, w_b.
inline double mixture_mean(const admitlab::Scenario& s, const std::vector<std::size_t>& idx,
                           const std::vector<double>& theta, double w_a, double w_b) {
    const double sd = std::sqrt(s.prior_variance);
    const double a = s.prior_mean - 12.0 * sd, b = s.prior_mean + 12.0 * sd;
    double peak = -INFINITY;
    for (int i = 0; i <= 2000; ++i) {
        double q = a + (b - a) * i / 2000;
        peak = std::max({peak, log_joint(s, admitlab::Group::A, idx, theta, q),
                         log_joint(s, admitlab::Group::B, idx, theta, q)});
    }
    auto dens = [&](double q) {
        return w_a * std::exp(log_joint(s, admitlab::Group::A, idx, theta, q) - peak) +
               w_b * std::exp(log_joint(s, admitlab::Group::B, idx, theta, q) - peak);
    };
    return simpson([&](double q) { return q * dens(q); }, a, b) / simpson(dens, a, b);
}

}  // namespace oracle
