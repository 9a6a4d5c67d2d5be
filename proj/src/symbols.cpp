#include "bloomlab/symbols.hpp"

#include "bloomlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bloomlab {

namespace {

double ramp(double t) { return t * t * (3.0 - 2.0 * t); }
double ramp_primitive(double t) { return t * t * t - 0.5 * t * t * t * t; }

}  // namespace

Symbol Symbol::analytic(Analytic a) {
    if (!a.value) throw ConfigError("analytic symbol needs a value callable");
    Symbol s;
    s.kind_ = Kind::analytic;
    s.name_ = a.name;
    s.analytic_ = std::make_shared<const Analytic>(std::move(a));
    return s;
}

Symbol Symbol::step(const CellBasis& basis, std::vector<double> values) {
    if (values.size() != basis.size()) throw ConfigError("step symbol size does not match basis");
    Symbol s;
    s.kind_ = Kind::step;
    s.name_ = "step";
    const double h = basis.cell_length();
    std::vector<double> prefix(values.size() + 1, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) prefix[i + 1] = prefix[i] + values[i] * h;
    s.basis_ = std::make_shared<const CellBasis>(basis);
    s.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    s.prefix_ = std::make_shared<const std::vector<double>>(std::move(prefix));
    return s;
}

Symbol Symbol::haar(std::vector<HaarTerm> terms) {
    Symbol s;
    s.kind_ = Kind::haar;
    s.name_ = "haar";
    s.terms_ = std::make_shared<const std::vector<HaarTerm>>(std::move(terms));
    return s;
}

Symbol Symbol::sin2pi(double frequency) {
    const double w = 2.0 * std::numbers::pi * frequency;
    return analytic({.name = frequency == 1.0 ? "sin2pi" : "sin2pi_x" + std::to_string(static_cast<int>(frequency)),
                     .value = [w](double x) { return std::sin(w * x); },
                     .antiderivative = [w](double x) { return -std::cos(w * x) / w; },
                     .lipschitz = w,
                     .support_lo = 0.0,
                     .support_hi = 1.0});
}

Symbol Symbol::parabola() {
    return analytic({.name = "parabola",
                     .value = [](double x) { return x * (1.0 - x); },
                     .antiderivative = [](double x) { return x * x / 2.0 - x * x * x / 3.0; },
                     .lipschitz = 1.0,
                     .support_lo = 0.0,
                     .support_hi = 1.0});
}

Symbol Symbol::cubic() {
    return analytic({.name = "cubic",
                     .value = [](double x) { return x * x * (1.0 - x); },
                     .antiderivative = [](double x) { return x * x * x / 3.0 - x * x * x * x / 4.0; },
                     .lipschitz = 1.0,
                     .support_lo = 0.0,
                     .support_hi = 1.0});
}

Symbol Symbol::ramp_bump() {
    const auto value = [](double x) {
        if (x < 0.0 || x >= 1.0) return 0.0;
        if (x < 1.0 / 3.0) return ramp(3.0 * x);
        if (x < 2.0 / 3.0) return 1.0;
        return ramp(3.0 * (1.0 - x));
    };
    const auto primitive = [](double x) {
        if (x <= 0.0) return 0.0;
        if (x < 1.0 / 3.0) return ramp_primitive(3.0 * x) / 3.0;
        if (x < 2.0 / 3.0) return 1.0 / 6.0 + (x - 1.0 / 3.0);
        if (x < 1.0) return 0.5 + (0.5 - ramp_primitive(3.0 * (1.0 - x))) / 3.0;
        return 2.0 / 3.0;
    };
    return analytic({.name = "ramp_bump",
                     .value = value,
                     .antiderivative = primitive,
                     .lipschitz = 4.5,
                     .support_lo = 0.0,
                     .support_hi = 1.0});
}

Symbol Symbol::identity(double lo, double hi) {
    return analytic({.name = "identity",
                     .value = [](double x) { return x; },
                     .antiderivative = [](double x) { return 0.5 * x * x; },
                     .lipschitz = 1.0,
                     .support_lo = lo,
                     .support_hi = hi});
}

Symbol Symbol::constant(double c) {
    return analytic({.name = "constant",
                     .value = [c](double) { return c; },
                     .antiderivative = [c](double x) { return c * x; },
                     .lipschitz = 0.0});
}

Symbol Symbol::scaled(double c) const {
    Symbol s = *this;
    s.scale_ *= c;
    s.offset_ *= c;
    return s;
}

Symbol Symbol::shifted(double c) const {
    Symbol s = *this;
    s.offset_ += c;
    return s;
}

bool Symbol::is_lipschitz() const { return kind_ == Kind::analytic && analytic_->lipschitz >= 0.0; }

double Symbol::lipschitz() const {
    if (!is_lipschitz()) throw ConfigError("symbol '" + name_ + "' is not Lipschitz");
    return std::abs(scale_) * analytic_->lipschitz;
}

double Symbol::raw_value(double x) const {
    switch (kind_) {
        case Kind::analytic:
            if (x < analytic_->support_lo || x >= analytic_->support_hi) return 0.0;
            return analytic_->value(x);
        case Kind::step: {
            const std::size_t i = basis_->locate(x);
            return i < values_->size() ? (*values_)[i] : 0.0;
        }
        case Kind::haar: {
            double v = 0.0;
            for (const auto& t : *terms_) v += t.coefficient * haar_eval(t.interval, x);
            return v;
        }
    }
    return 0.0;
}

double Symbol::raw_integral(double a, double b) const {
    switch (kind_) {
        case Kind::analytic: {
            const double s = std::max(a, analytic_->support_lo), e = std::min(b, analytic_->support_hi);
            if (!(s < e)) return 0.0;
            if (analytic_->antiderivative) return analytic_->antiderivative(e) - analytic_->antiderivative(s);
            const auto pieces = static_cast<unsigned>(std::clamp(std::ceil((e - s) * 16.0), 1.0, 4096.0));
            return integrate_gl(analytic_->value, s, e, 32, pieces);
        }
        case Kind::step: {
            const auto& v = *values_;
            const auto& P = *prefix_;
            const double h = basis_->cell_length();
            const double lo0 = basis_->cell_lo(0);
            const auto cumulative = [&](double x) {
                if (x <= lo0) return 0.0;
                const double u = (x - lo0) / h;
                if (u >= static_cast<double>(v.size())) return P.back();
                const auto k = static_cast<std::size_t>(u);
                return P[k] + v[k] * (x - basis_->cell_lo(k));
            };
            return cumulative(b) - cumulative(a);
        }
        case Kind::haar: {
            double v = 0.0;
            for (const auto& t : *terms_) v += t.coefficient * haar_integral(t.interval, a, b);
            return v;
        }
    }
    return 0.0;
}

double Symbol::operator()(double x) const { return scale_ * raw_value(x) + offset_; }

double Symbol::integral(double a, double b) const { return scale_ * raw_integral(a, b) + offset_ * (b - a); }

std::vector<double> Symbol::cell_averages(const CellBasis& basis) const {
    std::vector<double> out(basis.size());
    const double h = basis.cell_length();
    if (kind_ == Kind::step && basis_->grid() == basis.grid() && basis_->window() == basis.window()) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale_ * (*values_)[i] + offset_;
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& c = basis.cell(i);
        out[i] = integral(c.lo(), c.hi()) / h;
    }
    return out;
}

double Symbol::haar_coefficient(const DyadicInterval& I) const {
    const double lo = I.lo(), hi = I.hi(), mid = I.mid();
    return (integral(lo, mid) - integral(mid, hi)) / std::sqrt(hi - lo);
}

std::vector<HaarTerm> haar_coefficients(const Symbol& b, GridKind grid, const TruncationWindow& window) {
    std::vector<HaarTerm> out;
    for (const auto& I : enumerate_intervals(grid, window)) out.push_back({I, b.haar_coefficient(I)});
    return out;
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double median_value(const Symbol& b, const CellBasis& basis, const DyadicInterval& Q) {
    const auto [first, last] = basis.cell_range(Q);
    const auto avg = b.cell_averages(basis);
    return median_of({avg.begin() + static_cast<std::ptrdiff_t>(first), avg.begin() + static_cast<std::ptrdiff_t>(last)});
}

MedianSplit median_split(const Symbol& b, const CellBasis& basis, const DyadicInterval& Q, const DyadicInterval& Qhat) {
    const auto avg = b.cell_averages(basis);
    const auto [qf, ql] = basis.cell_range(Q);
    const auto [hf, hl] = basis.cell_range(Qhat);
    MedianSplit s;
    s.alpha = median_of({avg.begin() + static_cast<std::ptrdiff_t>(hf), avg.begin() + static_cast<std::ptrdiff_t>(hl)});
    for (std::size_t i = qf; i < ql; ++i) {
        if (avg[i] < s.alpha) s.e1.push_back(i);
        else if (avg[i] > s.alpha) s.e2.push_back(i);
    }
    for (std::size_t i = hf; i < hl; ++i) {
        if (avg[i] >= s.alpha) s.f1.push_back(i);
        if (avg[i] <= s.alpha) s.f2.push_back(i);
    }
    return s;
}

}  // namespace bloomlab
