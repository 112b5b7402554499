#pragma once

#include "admitlab/model.hpp"

namespace fixture {

// Two-feature reference parameters: C=0.2, pi=0.5, q ~ N(0,1); group A features N(0,1), N(0,1);
// group B features N(-4,5), N(-4,1); the second feature is the test.
inline admitlab::Scenario two_feature(double access_b = 2.0 / 3.0) {
    admitlab::Scenario s;
    s.prior_mean = 0.0;
    s.prior_variance = 1.0;
    s.pi = 0.5;
    s.capacity = 0.2;
    s.a.features = {{0.0, 1.0}, {0.0, 1.0}};
    s.b.features = {{-4.0, 5.0}, {-4.0, 1.0}};
    s.a.access = 1.0;
    s.b.access = access_b;
    return s;
}

// Both groups share the same feature noise.
inline admitlab::Scenario symmetric(double var_other = 1.0, double var_test = 1.0, double capacity = 0.2) {
    admitlab::Scenario s;
    s.capacity = capacity;
    s.a.features = {{0.0, var_other}, {0.0, var_test}};
    s.b.features = s.a.features;
    return s;
}

// Single-feature scenario whose shrinkage factors are v_a and v_b (sigma^2 = 1).
inline admitlab::Scenario with_shrinkage(double v_a, double v_b, double capacity = 0.2, double pi = 0.5) {
    admitlab::Scenario s;
    s.pi = pi;
    s.capacity = capacity;
    // v = P / (1 + P)  =>  P = v / (1 - v), variance 1/P.
    s.a.features = {{0.0, (1.0 - v_a) / v_a}};
    s.b.features = {{0.0, (1.0 - v_b) / v_b}};
    return s;
}

}  // namespace fixture
