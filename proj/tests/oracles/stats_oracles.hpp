#pragma once

// Reference values for the statistics module, computed the slow way: plain
// Newton-Raphson with Gaussian elimination, and enumeration of every rank
// split for the Mann-Whitney null distribution.

#include <cstddef>
#include <vector>

namespace bptest::oracle {

/// Logistic coefficients (intercept first) for rows `x` and 0/1 outcomes `y`.
std::vector<double> logistic_newton(const std::vector<std::vector<double>>& x, const std::vector<int>& y);

/// Two-sided exact p for U = `u_obs` with sample sizes n1, n2 and no ties:
/// min(1, 2 min(P(U <= u), P(U >= u))) over all C(n1+n2, n1) splits.
double mann_whitney_enumerated(std::size_t n1, std::size_t n2, double u_obs);

}  // namespace bptest::oracle
