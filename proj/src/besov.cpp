#include "bloomlab/besov.hpp"

#include "bloomlab/io.hpp"
#include "bloomlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace bloomlab {

namespace {

struct Brackets {
    explicit Brackets(const WeightPair& w)
        : nu(w.nu()), lambda(w.lambda), mu(w.mu), lambda_inv(w.lambda.inverse()), mu_inv(w.mu.inverse()) {}

    double operator()(const DyadicInterval& I, BesovForm form) const {
        const double a = I.lo(), b = I.hi(), len = b - a;
        switch (form) {
            case BesovForm::nu: return std::sqrt(len) / nu.integral(a, b);
            case BesovForm::lambda_mu_inverse:
                return std::sqrt(lambda.integral(a, b) * mu_inv.integral(a, b)) / std::pow(len, 1.5);
            case BesovForm::lambda_inverse_mu:
                return std::sqrt(len) / std::sqrt(lambda_inv.integral(a, b) * mu.integral(a, b));
        }
        return 0.0;
    }

    Weight nu, lambda, mu, lambda_inv, mu_inv;
};

NormReport sum_report(const std::vector<HaarTerm>& coeffs, const Brackets& br, double p, BesovForm form) {
    if (!(p > 0.0)) throw ConfigError("Besov exponent p must be positive");
    NormReport r;
    r.p = p;
    r.label = "dyadic_besov:" + to_string(form);
    r.contributions.reserve(coeffs.size());
    double total = 0.0;
    for (const auto& t : coeffs) {
        double c = 0.0;
        if (t.coefficient != 0.0) c = std::pow(std::abs(t.coefficient) * br(t.interval, form), p);
        total += c;
        r.contributions.push_back({t.interval.id(), c});
    }
    r.value = std::pow(total, 1.0 / p);
    return r;
}

// Average of (b(x)-b(y))^2/(x-y)^2 over [x0,x0+hx) x [y0,y0+hy) by a tensor rule.
template <class F>
double quotient_average(const F& b, double x0, double hx, const UnitRule& rx, double y0, double hy,
                        const UnitRule& ry) {
    double s = 0.0;
    for (std::size_t a = 0; a < rx.nodes.size(); ++a) {
        const double x = x0 + hx * rx.nodes[a];
        const double bx = b(x);
        double inner = 0.0;
        for (std::size_t c = 0; c < ry.nodes.size(); ++c) {
            const double y = y0 + hy * ry.nodes[c];
            const double q = (bx - b(y)) / (x - y);
            inner += ry.weights[c] * q * q;
        }
        s += rx.weights[a] * inner;
    }
    return s;
}

}  // namespace

std::string to_string(BesovForm f) {
    switch (f) {
        case BesovForm::nu: return "nu";
        case BesovForm::lambda_mu_inverse: return "lambda_mu_inverse";
        case BesovForm::lambda_inverse_mu: return "lambda_inverse_mu";
    }
    return "?";
}

void NormReport::write_csv(std::ostream& os) const {
    os << "interval_id,contribution,cumulative\n";
    double cum = 0.0;
    for (const auto& c : contributions) {
        cum += c.value;
        os << c.id << ',' << fmt12(c.value) << ',' << fmt12(cum) << '\n';
    }
}

double besov_bracket(const WeightPair& w, const DyadicInterval& I, BesovForm form) { return Brackets(w)(I, form); }

NormReport dyadic_besov_norm(const std::vector<HaarTerm>& coefficients, const WeightPair& w, double p,
                             BesovForm form) {
    return sum_report(coefficients, Brackets(w), p, form);
}

NormReport dyadic_besov_norm(const Symbol& b, const WeightPair& w, double p, GridKind grid,
                             const TruncationWindow& window, BesovForm form) {
    return dyadic_besov_norm(haar_coefficients(b, grid, window), w, p, form);
}

NormReport dyadic_besov_norm(const Symbol& b, const Weight& nu, double p, GridKind grid,
                             const TruncationWindow& window) {
    // nu = mu^1/2 lambda^-1/2 with mu = nu^2, lambda = 1
    return dyadic_besov_norm(b, WeightPair{nu.pow(2.0), Weight::constant(1.0)}, p, grid, window, BesovForm::nu);
}

NormReport continuous_besov_norm_p2(const Symbol& b, const WeightPair& w, const TruncationWindow& window) {
    if (!b.is_lipschitz())
        throw ConfigError("continuous Besov norm diverges for symbol '" + b.name() +
                          "': jumps give an infinite double integral");
    const CellBasis basis(GridKind::standard, window);
    const std::size_t n = basis.size();
    const double h = basis.cell_length();
    const Weight mu_inv = w.mu.inverse();

    std::vector<double> lam(n), minv(n), lam_half(2 * n), minv_half(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = basis.cell_lo(i), m = a + 0.5 * h, e = a + h;
        lam_half[2 * i] = w.lambda.integral(a, m);
        lam_half[2 * i + 1] = w.lambda.integral(m, e);
        minv_half[2 * i] = mu_inv.integral(a, m);
        minv_half[2 * i + 1] = mu_inv.integral(m, e);
        lam[i] = lam_half[2 * i] + lam_half[2 * i + 1];
        minv[i] = minv_half[2 * i] + minv_half[2 * i + 1];
    }

    const UnitRule& g4 = gauss_legendre(4);
    const UnitRule& g2 = gauss_legendre(2);
    std::vector<double> x4(4 * n), b4(4 * n), x2(2 * n), b2(2 * n);
    std::vector<char> zero(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < 4; ++a) {
            x4[4 * i + a] = basis.cell_lo(i) + h * g4.nodes[a];
            b4[4 * i + a] = b(x4[4 * i + a]);
            if (b4[4 * i + a] != 0.0) zero[i] = 0;
        }
        for (std::size_t a = 0; a < 2; ++a) {
            x2[2 * i + a] = basis.cell_lo(i) + h * g2.nodes[a];
            b2[2 * i + a] = b(x2[2 * i + a]);
        }
    }

    NormReport r;
    r.p = 2.0;
    r.label = "continuous_besov_p2";
    r.contributions.resize(n);
    double total = 0.0, err_far = 0.0, err_near = 0.0;
    const auto fb = [&b](double x) { return b(x); };

    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0, row_coarse = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t d = i > j ? i - j : j - i;
            if (d < 2) continue;
            if (zero[i] && zero[j]) continue;
            double s4 = 0.0;
            for (std::size_t a = 0; a < 4; ++a) {
                double inner = 0.0;
                for (std::size_t c = 0; c < 4; ++c) {
                    const double q = (b4[4 * i + a] - b4[4 * j + c]) / (x4[4 * i + a] - x4[4 * j + c]);
                    inner += g4.weights[c] * q * q;
                }
                s4 += g4.weights[a] * inner;
            }
            double s2 = 0.0;
            for (std::size_t a = 0; a < 2; ++a) {
                double inner = 0.0;
                for (std::size_t c = 0; c < 2; ++c) {
                    const double q = (b2[2 * i + a] - b2[2 * j + c]) / (x2[2 * i + a] - x2[2 * j + c]);
                    inner += g2.weights[c] * q * q;
                }
                s2 += g2.weights[a] * inner;
            }
            row += s4 * lam[i] * minv[j];
            row_coarse += s2 * lam[i] * minv[j];
        }
        err_far += std::abs(row - row_coarse);

        const std::size_t jlo = i == 0 ? 0 : i - 1, jhi = std::min(n - 1, i + 1);
        double near = 0.0, near_coarse = 0.0;
        for (std::size_t j = jlo; j <= jhi; ++j) {
            if (zero[i] && zero[j]) continue;
            near_coarse += quotient_average(fb, basis.cell_lo(i), h, g4, basis.cell_lo(j), h, gauss_legendre(3)) *
                           lam[i] * minv[j];
            for (std::size_t s = 0; s < 2; ++s)
                for (std::size_t t = 0; t < 2; ++t) {
                    const double xs = basis.cell_lo(i) + 0.5 * h * static_cast<double>(s);
                    const double yt = basis.cell_lo(j) + 0.5 * h * static_cast<double>(t);
                    near += quotient_average(fb, xs, 0.5 * h, gauss_legendre(8), yt, 0.5 * h, gauss_legendre(7)) *
                            lam_half[2 * i + s] * minv_half[2 * j + t];
                }
        }
        err_near += std::abs(near - near_coarse);
        row += near;
        r.contributions[i] = {"cell:" + std::to_string(i), row};
        total += row;
    }
    r.value = std::sqrt(std::max(total, 0.0));
    const double err_sq = err_far + err_near;
    r.error_estimate = r.value > 0.0 ? err_sq / (2.0 * r.value) : std::sqrt(err_sq);
    return r;
}

BmoReport weighted_bmo_dyadic(const Symbol& b, const WeightPair& w, GridKind grid, const TruncationWindow& window) {
    const CellBasis basis(grid, window);
    const auto avg = b.cell_averages(basis);
    const Brackets br(w);
    const double h = basis.cell_length();
    BmoReport rep;

    std::map<DyadicInterval, double> below;  // sum of square-form terms over I inside K
    const auto intervals = enumerate_intervals(grid, window);
    for (auto it = intervals.rbegin(); it != intervals.rend(); ++it) {
        const DyadicInterval& I = *it;
        const double lo = I.lo(), hi = I.hi(), len = hi - lo;

        const auto [first, last] = basis.cell_range(I);
        double mean = 0.0;
        for (std::size_t k = first; k < last; ++k) mean += avg[k];
        mean /= static_cast<double>(last - first);
        double osc = 0.0;
        for (std::size_t k = first; k < last; ++k) osc += std::abs(avg[k] - mean) * h;
        const double sa = osc / br.nu.integral(lo, hi);
        if (sa > rep.sup_average) {
            rep.sup_average = sa;
            rep.sup_average_at = I.id();
        }

        const double bh = b.haar_coefficient(I);
        double term = 0.0;
        const double mi = br.mu_inv.integral(lo, hi);
        if (bh != 0.0) term = bh * bh * mi * mi * br.lambda.integral(lo, hi) / (len * len * len);
        double sum = term;
        for (const auto& c : {I.left_child(), I.right_child()})
            if (auto f = below.find(c); f != below.end()) sum += f->second;
        below[I] = sum;
        const double sq = sum / mi;
        if (sq > rep.square_form) {
            rep.square_form = sq;
            rep.square_form_at = I.id();
        }
    }
    return rep;
}

std::vector<TailRow> vmo_tail_report(const Symbol& b, const WeightPair& w, GridKind grid,
                                     const TruncationWindow& window, std::optional<double> x0) {
    const double center = x0.value_or(0.5 * (window.lo + window.hi));
    const auto coeffs = haar_coefficients(b, grid, window);
    const Brackets br(w);
    std::vector<double> t(coeffs.size(), 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        if (coeffs[k].coefficient != 0.0) {
            const double v = coeffs[k].coefficient * br(coeffs[k].interval, BesovForm::nu);
            t[k] = v * v;
        }
    std::vector<TailRow> rows;
    for (int e = -(window.j_max + 1); e <= -window.j_min + 1; ++e) {
        TailRow row;
        row.a = std::ldexp(1.0, e);
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            const auto& I = coeffs[k].interval;
            const double len = I.length();
            if (len < row.a) row.small_scales += t[k];
            if (len > row.a) row.large_scales += t[k];
            if (I.hi() <= center - row.a || I.lo() >= center + row.a) row.far_field += t[k];
        }
        rows.push_back(row);
    }
    return rows;
}

NormReport intersection_norm(const Symbol& b, const WeightPair& w, const TruncationWindow& window, double p) {
    const NormReport d0 = dyadic_besov_norm(b, w, p, GridKind::standard, window);
    const NormReport d1 = dyadic_besov_norm(b, w, p, GridKind::third_shift, window);
    NormReport r;
    r.p = p;
    r.label = "intersection";
    r.value = d0.value + d1.value;
    r.contributions = d0.contributions;
    r.contributions.insert(r.contributions.end(), d1.contributions.begin(), d1.contributions.end());
    return r;
}

FormRatioReport besov_form_ratios(const WeightPair& w, GridKind grid, const TruncationWindow& window) {
    const Brackets br(w);
    const Weight nu_inv = br.nu.inverse();
    FormRatioReport rep;
    for (const auto& I : enumerate_intervals(grid, window)) {
        const double f1 = br(I, BesovForm::nu);
        const double f2 = br(I, BesovForm::lambda_mu_inverse);
        const double f3 = br(I, BesovForm::lambda_inverse_mu);
        const double ratio = std::max({f1, f2, f3}) / std::min({f1, f2, f3});
        ++rep.intervals;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.at = I.id();
        }
        const double lhs = nu_inv.integral(I.lo(), I.hi());
        const double rhs = std::sqrt(br.mu_inv.integral(I.lo(), I.hi()) * br.lambda.integral(I.lo(), I.hi()));
        if (lhs > rhs * (1.0 + 1e-10)) rep.cauchy_schwarz_holds = false;
    }
    return rep;
}

}  // namespace bloomlab
