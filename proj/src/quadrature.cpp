#include "bloomlab/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <stdexcept>

namespace bloomlab {

namespace {

template <unsigned N>
UnitRule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    UnitRule r;
    // boost stores the nonnegative half of the symmetric rule
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(0.5 * (1.0 - x[i]));
        r.weights.push_back(0.5 * w[i]);
    }
    if (N % 2 == 1) {
        r.nodes.push_back(0.5);
        r.weights.push_back(0.5 * w[0]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(0.5 * (1.0 + x[i]));
        r.weights.push_back(0.5 * w[i]);
    }
    return r;
}

}  // namespace

const UnitRule& gauss_legendre(unsigned order) {
    static const UnitRule r2 = make_rule<2>();
    static const UnitRule r3 = make_rule<3>();
    static const UnitRule r4 = make_rule<4>();
    static const UnitRule r7 = make_rule<7>();
    static const UnitRule r8 = make_rule<8>();
    static const UnitRule r16 = make_rule<16>();
    static const UnitRule r32 = make_rule<32>();
    switch (order) {
        case 2: return r2;
        case 3: return r3;
        case 4: return r4;
        case 7: return r7;
        case 8: return r8;
        case 16: return r16;
        case 32: return r32;
        default: throw std::invalid_argument("unsupported Gauss-Legendre order");
    }
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, unsigned order,
                    unsigned pieces) {
    const UnitRule& rule = gauss_legendre(order);
    const double step = (b - a) / pieces;
    double total = 0.0;
    for (unsigned p = 0; p < pieces; ++p) {
        const double lo = a + p * step;
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(lo + step * rule.nodes[i]);
        total += s * step;
    }
    return total;
}

}  // namespace bloomlab
