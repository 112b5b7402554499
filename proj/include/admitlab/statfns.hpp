#pragma once

#include <functional>

namespace admitlab::stat {

double pdf(double x);
double cdf(double x);
// Upper tail 1 - cdf(x) without cancellation.
double ccdf(double x);
// Inverse of cdf; throws DomainError outside (0,1).
double quantile(double p);

// HR(x) = pdf(x) / (1 - cdf(x)).
double hazard(double x);
// d/dx HR(x) = HR(x) (HR(x) - x).
double hazard_derivative(double x);
// Inverse of hazard on (0, inf); throws DomainError for h <= 0.
double hazard_inv(double h);

// E[X | X > a] for X ~ N(mu, sigma^2).
double truncated_mean_above(double mu, double sigma, double a);

inline constexpr double kRootTol = 1e-12;
inline constexpr int kRootMaxIter = 200;

// Root of an increasing function with f(lo) <= 0 <= f(hi).
// Regula falsi (Illinois) steps, bisection whenever the bracket fails to halve.
// Throws BracketError if the endpoints do not straddle zero.
double solve_monotone_root(const std::function<double(double)>& f, double lo, double hi,
                           double tol = kRootTol, int max_iter = kRootMaxIter);

}  // namespace admitlab::stat
