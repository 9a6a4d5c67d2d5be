#pragma once

#include <functional>
#include <vector>

namespace bloomlab {

/// Gauss-Legendre rule mapped to [0, 1]; weights sum to 1.
struct UnitRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Supported orders: 2, 3, 4, 7, 8, 16, 32.
const UnitRule& gauss_legendre(unsigned order);

/// Composite Gauss-Legendre of f over [a, b] with `pieces` equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b, unsigned order = 32,
                    unsigned pieces = 1);

}  // namespace bloomlab
