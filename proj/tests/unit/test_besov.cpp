#include <doctest.h>

#include "bloomlab/besov.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace bloomlab;

namespace {

const WeightPair kFlat{Weight::constant(1.0), Weight::constant(1.0)};
const DyadicInterval kUnit{GridKind::standard, 0, 0};

Symbol random_haar_polynomial(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> scale(0, 5);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::vector<HaarTerm> t;
    for (int k = 0; k < 5; ++k) {
        const int j = scale(rng);
        std::uniform_int_distribution<std::int64_t> idx(0, (std::int64_t{1} << j) - 1);
        t.push_back({{GridKind::standard, j, idx(rng)}, c(rng)});
    }
    return Symbol::haar(std::move(t));
}

}  // namespace

TEST_CASE("dyadic norm of trivial symbols") {
    const TruncationWindow w{-2.0, 2.0, -1, 6};
    for (double p : {0.5, 1.0, 2.0, 3.0})
        for (BesovForm f : {BesovForm::nu, BesovForm::lambda_mu_inverse, BesovForm::lambda_inverse_mu})
            CHECK(dyadic_besov_norm(Symbol::constant(3.0), kFlat, p, GridKind::standard, w, f).value < 1e-13);
    const Symbol h = Symbol::haar({{kUnit, 1.0}});
    CHECK(dyadic_besov_norm(h, Weight::constant(1.0), 2.0, GridKind::standard, w).value ==
          doctest::Approx(1.0).epsilon(1e-14));
    for (BesovForm f : {BesovForm::lambda_mu_inverse, BesovForm::lambda_inverse_mu})
        CHECK(dyadic_besov_norm(h, kFlat, 2.0, GridKind::standard, w, f).value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dyadic norm matches a direct sum") {
    const TruncationWindow w{-1.0, 2.0, 0, 7};
    const WeightPair wp{Weight::power(0.25), Weight::power(-0.25)};
    const Symbol b = Symbol::sin2pi();
    for (double p : {1.5, 2.0, 3.0}) {
        double sum = 0.0;
        for (const auto& I : enumerate_intervals(GridKind::third_shift, w)) {
            const double nuI = nu_weight(wp.mu, wp.lambda).integral(I.lo(), I.hi());
            sum += std::pow(std::abs(b.haar_coefficient(I)) * std::sqrt(I.length()) / nuI, p);
        }
        CHECK(dyadic_besov_norm(b, wp, p, GridKind::third_shift, w).value == doctest::Approx(std::pow(sum, 1.0 / p)).epsilon(1e-12));
    }
}

TEST_CASE("three forms stay in a bounded band") {
    const TruncationWindow w{-4.0, 4.0, -2, 8};
    const WeightPair wp{Weight::power(0.25), Weight::power(-0.25)};
    const Symbol b = Symbol::sin2pi();
    const double f1 = dyadic_besov_norm(b, wp, 2.0, GridKind::standard, w, BesovForm::nu).value;
    const double f2 = dyadic_besov_norm(b, wp, 2.0, GridKind::standard, w, BesovForm::lambda_mu_inverse).value;
    const double f3 = dyadic_besov_norm(b, wp, 2.0, GridKind::standard, w, BesovForm::lambda_inverse_mu).value;
    const double hi = std::max({f1, f2, f3}), lo = std::min({f1, f2, f3});
    CHECK(lo > 0.0);
    CHECK(hi / lo < 2.0);
    // Cauchy-Schwarz orders the brackets: form 3 <= form 1 <= form 2
    CHECK(f3 <= f1 * (1 + 1e-12));
    CHECK(f1 <= f2 * (1 + 1e-12));
}

TEST_CASE("per-interval form ratios over the battery") {
    const TruncationWindow w{-4.0, 4.0, -2, 7};
    const std::vector<WeightPair> battery{kFlat,
                                          {Weight::power(0.25), Weight::power(0.25)},
                                          {Weight::power(0.5), Weight::constant(1.0)},
                                          {Weight::constant(1.0), Weight::power(-0.5)},
                                          {Weight::power(-0.25), Weight::power(0.25)},
                                          {Weight::pathological(2.0, 2, 9.0), Weight::constant(1.0)}};
    for (const auto& wp : battery)
        for (GridKind g : {GridKind::standard, GridKind::third_shift}) {
            const auto r = besov_form_ratios(wp, g, w);
            CHECK(std::isfinite(r.max_ratio));
            CHECK(r.max_ratio >= 1.0);
            CHECK(r.cauchy_schwarz_holds);
            CHECK(r.intervals == enumerate_intervals(g, w).size());
        }
    CHECK(besov_form_ratios(kFlat, GridKind::standard, w).max_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("continuous norm closed forms") {
    const TruncationWindow unit{0.0, 1.0, 0, 6};
    CHECK(continuous_besov_norm_p2(Symbol::constant(1.0), kFlat, unit).value == 0.0);
    // |x - y|^2 / |x - y|^2 integrates to the area of the unit square
    const auto id = continuous_besov_norm_p2(Symbol::identity(), kFlat, unit);
    CHECK(id.value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(id.error_estimate < 1e-8);
    CHECK_THROWS_AS(continuous_besov_norm_p2(Symbol::haar({{kUnit, 1.0}}), kFlat, unit), ConfigError);
}

TEST_CASE("continuous norm against Monte Carlo") {
    const TruncationWindow unit{0.0, 1.0, 0, 7};
    const Symbol b = Symbol::sin2pi();
    const double value = continuous_besov_norm_p2(b, kFlat, unit).value;
    std::mt19937_64 rng(20240101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 1000000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = u(rng), y = u(rng);
        if (x == y) continue;
        const double q = (b(x) - b(y)) / (x - y);
        sum += q * q;
    }
    CHECK(value == doctest::Approx(std::sqrt(sum / n)).epsilon(0.01));
}

TEST_CASE("weighted continuous norm converges under refinement") {
    const WeightPair wp{Weight::power(0.25), Weight::power(0.25)};
    const double coarse = continuous_besov_norm_p2(Symbol::parabola(), wp, {-1.0, 2.0, 0, 6}).value;
    const double fine = continuous_besov_norm_p2(Symbol::parabola(), wp, {-1.0, 2.0, 0, 7}).value;
    CHECK(fine == doctest::Approx(coarse).epsilon(1e-3));
}

TEST_CASE("homogeneity and translation") {
    const TruncationWindow w{-4.0, 4.0, -2, 7};
    const WeightPair wp{Weight::power(0.5), Weight::constant(1.0)};
    const Symbol b = Symbol::ramp_bump();
    const double base = dyadic_besov_norm(b, wp, 2.0, GridKind::standard, w).value;
    for (double c : {-2.0, 0.5, 3.0}) {
        CHECK(dyadic_besov_norm(b.scaled(c), wp, 2.0, GridKind::standard, w).value == doctest::Approx(std::abs(c) * base).epsilon(1e-12));
        CHECK(continuous_besov_norm_p2(b.scaled(c), kFlat, {0.0, 1.0, 0, 5}).value ==
              doctest::Approx(std::abs(c) * continuous_besov_norm_p2(b, kFlat, {0.0, 1.0, 0, 5}).value).epsilon(1e-12));
    }

    // shifting by a whole coarse period (4) with the weights shifted identically
    const TruncationWindow wide{-8.0, 8.0, -2, 6};
    const Symbol h0 = Symbol::haar({{{GridKind::standard, 1, 0}, 1.0}, {{GridKind::standard, 3, 5}, -0.5}});
    const Symbol h4 = Symbol::haar({{{GridKind::standard, 1, 8}, 1.0}, {{GridKind::standard, 3, 37}, -0.5}});
    const WeightPair w0{Weight::power(0.25, 1.0 / 3.0), Weight::power(-0.25, 0.1)};
    const WeightPair w4{Weight::power(0.25, 4.0 + 1.0 / 3.0), Weight::power(-0.25, 4.1)};
    CHECK(dyadic_besov_norm(h4, w4, 2.0, GridKind::standard, wide).value ==
          doctest::Approx(dyadic_besov_norm(h0, w0, 2.0, GridKind::standard, wide).value).epsilon(1e-12));
}

TEST_CASE("weighted BMO") {
    const TruncationWindow w{-2.0, 2.0, -1, 6};
    const auto zero = weighted_bmo_dyadic(Symbol::constant(2.0), kFlat, GridKind::standard, w);
    CHECK(zero.sup_average < 1e-13);
    CHECK(zero.square_form < 1e-13);

    // exhaustive oracle for h_[0,1) with w = 1
    const Symbol h = Symbol::haar({{kUnit, 1.0}});
    const CellBasis basis(GridKind::standard, w);
    const auto v = h.cell_averages(basis);
    double oracle = 0.0;
    for (const auto& I : enumerate_intervals(GridKind::standard, w)) {
        const auto [first, last] = basis.cell_range(I);
        double mean = 0.0;
        for (std::size_t i = first; i < last; ++i) mean += v[i];
        mean /= static_cast<double>(last - first);
        double dev = 0.0;
        for (std::size_t i = first; i < last; ++i) dev += std::abs(v[i] - mean) * basis.cell_length();
        oracle = std::max(oracle, dev / I.length());
    }
    CHECK(weighted_bmo_dyadic(h, kFlat, GridKind::standard, w).sup_average == doctest::Approx(oracle).epsilon(1e-12));

    // square form is dominated by the squared form-2 Besov norm
    std::mt19937_64 rng(23);
    const WeightPair wp{Weight::power(0.25), Weight::power(-0.25)};
    for (int t = 0; t < 20; ++t) {
        const Symbol b = random_haar_polynomial(rng);
        const double sq = weighted_bmo_dyadic(b, wp, GridKind::standard, w).square_form;
        const double besov = dyadic_besov_norm(b, wp, 2.0, GridKind::standard, w, BesovForm::lambda_mu_inverse).value;
        CHECK(sq <= besov * besov * (1 + 1e-12));
    }
}

TEST_CASE("VMO tail report") {
    const TruncationWindow w{-2.0, 2.0, -1, 8};
    const DyadicInterval I0{GridKind::standard, 2, 1};
    const auto single = vmo_tail_report(Symbol::haar({{I0, 1.0}}), kFlat, GridKind::standard, w);
    for (const auto& r : single) {
        if (r.a <= I0.length()) CHECK(r.small_scales == 0.0);
        if (r.a >= I0.length()) CHECK(r.large_scales == 0.0);
    }

    std::vector<HaarTerm> terms;
    for (int j = 1; j <= 6; ++j) terms.push_back({{GridKind::standard, j, 1}, 1.0 / j});
    const auto rows = vmo_tail_report(Symbol::haar(terms), kFlat, GridKind::standard, w);
    double expect = 0.0;  // form-1 terms with nu = 1: (c |I|^1/2 / |I|)^2
    for (const auto& t : terms)
        if (t.interval.length() < 0.125) expect += t.coefficient * t.coefficient / t.interval.length();
    bool seen = false;
    for (const auto& r : rows)
        if (r.a == 0.125) {
            seen = true;
            CHECK(r.small_scales == doctest::Approx(expect).epsilon(1e-10));
        }
    CHECK(seen);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(rows[k].a > rows[k - 1].a);
        CHECK(rows[k].small_scales >= rows[k - 1].small_scales);
        CHECK(rows[k].large_scales <= rows[k - 1].large_scales);
        CHECK(rows[k].far_field <= rows[k - 1].far_field);
    }
}

TEST_CASE("intersection norm") {
    const TruncationWindow w{-4.0, 4.0, -2, 7};
    const WeightPair wp{Weight::power(0.25), Weight::power(0.25)};
    CHECK(intersection_norm(Symbol::constant(1.0), wp, w).value < 1e-13);
    const Symbol b = Symbol::cubic();
    const double d0 = dyadic_besov_norm(b, wp, 2.0, GridKind::standard, w).value;
    const double d1 = dyadic_besov_norm(b, wp, 2.0, GridKind::third_shift, w).value;
    CHECK(intersection_norm(b, wp, w).value == doctest::Approx(d0 + d1).epsilon(1e-14));
    const double c = continuous_besov_norm_p2(b, wp, w).value;
    CHECK(d0 <= c);
    CHECK(d1 <= c);
}

TEST_CASE("norm report CSV") {
    const auto r = dyadic_besov_norm(Symbol::sin2pi(), kFlat, 2.0, GridKind::standard, {0.0, 1.0, 0, 2});
    std::ostringstream os;
    r.write_csv(os);
    const std::string s = os.str();
    CHECK(s.rfind("interval_id,contribution,cumulative\n", 0) == 0);
    CHECK(s.find('\r') == std::string::npos);
    std::size_t lines = 0;
    for (char ch : s) lines += ch == '\n';
    CHECK(lines == 1 + r.contributions.size());
}
