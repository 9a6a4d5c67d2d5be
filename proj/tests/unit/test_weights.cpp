#include <doctest.h>

#include "bloomlab/weights.hpp"

#include <cmath>
#include <random>

using namespace bloomlab;

namespace {

// closed form of the integral of |x - c|^alpha over [a, b)
double power_integral(double alpha, double c, double a, double b) {
    const auto F = [&](double x) {
        const double t = x - c;
        return (t >= 0 ? 1.0 : -1.0) * std::pow(std::abs(t), alpha + 1.0) / (alpha + 1.0);
    };
    return F(b) - F(a);
}

double midpoint_rule(const Weight& w, double a, double b, int n) {
    double s = 0.0;
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) s += w(a + (i + 0.5) * h);
    return s * h;
}

}  // namespace

TEST_CASE("power integrals agree with the closed form") {
    for (double alpha : {-0.5, -0.25, 0.25, 0.5, 1.5})
        for (auto [a, b] : {std::pair{-1.0, 1.0}, {0.5, 2.0}, {-3.0, -0.1}, {1.0 / 3.0, 1.0}}) {
            const Weight w = Weight::power(alpha, 0.0);
            CHECK(w.integral(a, b) == doctest::Approx(power_integral(alpha, 0.0, a, b)).epsilon(1e-12));
        }
    // away from the singularity an independent midpoint rule applies
    const Weight w = Weight::power(0.5);
    CHECK(w.integral(1.0, 2.0) == doctest::Approx(midpoint_rule(w, 1.0, 2.0, 200000)).epsilon(1e-9));
    const Weight two = Weight::power(0.5) * Weight::power(-0.25, 0.7);
    CHECK(two.integral(1.0, 2.0) == doctest::Approx(midpoint_rule(two, 1.0, 2.0, 200000)).epsilon(1e-9));
    CHECK(two.integral(-1.0, 0.2) == doctest::Approx(midpoint_rule(two, -1.0, 0.2, 200000)).epsilon(1e-9));
}

TEST_CASE("integrals are positive and additive") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const std::vector<Weight> ws{Weight::constant(2.0), Weight::power(0.25), Weight::power(-0.5),
                                 Weight::power(0.5) * Weight::power(-0.25, 0.7), Weight::pathological(2.0, 2, 9.0)};
    for (const auto& w : ws)
        for (int t = 0; t < 200; ++t) {
            double a = u(rng), c = u(rng);
            if (a > c) std::swap(a, c);
            if (c - a < 1e-6) continue;
            const double m = 0.5 * (a + c);
            const double whole = w.integral(a, c);
            CHECK(whole > 0.0);
            CHECK(w.integral(a, m) + w.integral(m, c) == doctest::Approx(whole).epsilon(1e-12));
        }
}

TEST_CASE("non-integrable singularities are reported") {
    CHECK_THROWS_AS((void)Weight::power(-1.0, 0.0).integral(-1.0, 1.0), DivergedIntegral);
    CHECK_THROWS_AS((void)Weight::power(0.5, 1.0 / 3.0).pow(-2.0).integral(0.0, 1.0), DivergedIntegral);
    CHECK_NOTHROW((void)Weight::power(-1.0, 0.0).integral(1.0, 2.0));
}

TEST_CASE("AM-GM lower bound and nu identity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Weight w = Weight::power(0.5) * Weight::power(-0.25, -1.0);
    for (int t = 0; t < 500; ++t) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-6) continue;
        CHECK(w.average(a, b) * w.inverse().average(a, b) >= 1.0 - 1e-10);
    }
    const Weight mu = Weight::power(0.25), lambda = Weight::power(-0.5, 0.6);
    const Weight nu = nu_weight(mu, lambda);
    for (int t = 0; t < 1000; ++t) {
        const double x = u(rng);
        CHECK(nu(x) * nu(x) * lambda(x) == doctest::Approx(mu(x)).epsilon(1e-12));
    }
}

TEST_CASE("A2 constant") {
    const TruncationWindow win{-1.0, 1.0, -1, 8};
    CHECK(a2_constant(Weight::constant(3.0), win).constant == doctest::Approx(1.0).epsilon(1e-14));

    // |x|^a over the same family, with closed-form integrals
    const double a = 0.5;
    IntervalFamily fam;
    fam.random_count = 10000;
    fam.seed = 99;
    const auto rep = a2_constant(Weight::power(a, 0.0), win, fam);
    auto family = random_intervals(win, fam.random_count, fam.seed);
    for (GridKind g : {GridKind::standard, GridKind::third_shift})
        for (const auto& I : enumerate_intervals(g, win)) family.emplace_back(I.lo(), I.hi());
    double brute = 0.0;
    for (const auto& [lo, hi] : family)
        brute = std::max(brute, power_integral(a, 0.0, lo, hi) * power_integral(-a, 0.0, lo, hi) / ((hi - lo) * (hi - lo)));
    CHECK(rep.constant == doctest::Approx(brute).epsilon(1e-10));
    CHECK(rep.family_size == family.size());

    const Weight q = Weight::power(0.25);
    CHECK(a2_constant(q, win).constant == doctest::Approx(a2_constant(q.inverse(), win).constant).epsilon(1e-12));
}

TEST_CASE("doubling ratio") {
    CHECK(doubling_ratio(Weight::constant(1.0), 0.3, 0.8, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    const double expect = std::pow(3.0, 1.5) / (3.0 * (std::pow(2.0, 1.5) - 1.0));
    CHECK(doubling_ratio(Weight::power(0.5, 0.0), 1.0, 2.0, 3.0) == doctest::Approx(expect).epsilon(1e-12));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> x(-2.0, 2.0), len(0.001, 1.0), s(1.0001, 8.0);
    for (double alpha : {-0.5, -0.25, 0.25, 0.5}) {
        const Weight w = Weight::power(alpha);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const double a = x(rng);
            worst = std::max(worst, doubling_ratio(w, a, a + len(rng), s(rng)));
        }
        // |x|^alpha is doubling: w(sI) <= C s^{1+|alpha|} w(I) up to s
        CHECK(worst < 4.0 * std::pow(8.0, std::abs(alpha)));
    }
}

TEST_CASE("pathological weight peaks") {
    const Weight w = Weight::pathological(2.0, 1, 9.0);
    const auto& prof = *w.profile();
    CHECK(prof.alpha() == 0.75);
    CHECK(prof.log2_height(1) == 9.0 * 2.0 * 0.75);
    const double x = prof.peak_start(1, 1) + 0.5 * prof.peak_width(1);
    CHECK(prof.level_at(x) == 1);
    CHECK(std::log2(w(x)) == doctest::Approx(13.5).epsilon(1e-12));
    CHECK(w(prof.peak_start(1, 1) - prof.period(1) / 4) == 1.0);

    // one period of phi_delta^r, rescaled to period 1, is at least delta^{1 - r alpha}
    const double r = 2.0, period = prof.period(1);
    const double per_unit = w.pow(r).integral(0.0, period) / period;
    const double delta = std::exp2(prof.log2_delta(1));
    CHECK(per_unit >= std::pow(delta, 1.0 - r * prof.alpha()));
    CHECK(per_unit == doctest::Approx(delta * std::pow(delta, -r * prof.alpha()) + (1.0 - delta)).epsilon(1e-10));
}

TEST_CASE("pathological weights have flat A2 and growing r-integral") {
    const TruncationWindow win{-4.0, 4.0, -2, 10};
    IntervalFamily fam;
    fam.random_count = 1000;
    double lo = 1e300, hi = 0.0, prev = 1.0;
    for (int J = 1; J <= 4; ++J) {
        const Weight w = Weight::pathological(2.0, J, 9.0);
        const double a2 = a2_constant(w, win, fam).constant;
        lo = std::min(lo, a2);
        hi = std::max(hi, a2);
        const double integral = w.pow(2.0).integral(0.0, 1.0);
        CHECK(integral >= 4.0 * prev);
        prev = integral;
    }
    CHECK(hi / lo <= 4.0);
}

TEST_CASE("reverse Holder sweep") {
    const TruncationWindow win{-4.0, 4.0, -2, 6};
    const auto flat = reverse_holder_exponent(Weight::constant(1.0), win);
    REQUIRE(flat.exponent);
    CHECK(*flat.exponent == 4.0);
    for (const auto& [r, v] : flat.ladder) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    const auto sq = reverse_holder_exponent(Weight::power(0.5), win);
    REQUIRE(sq.exponent);
    CHECK(sq.constant >= 1.0);

    const auto patho = reverse_holder_exponent(Weight::pathological(2.0, 3, 9.0), win);
    std::size_t flat_count = 0, patho_count = 0;
    for (const auto& [r, v] : flat.ladder) flat_count += v <= 10.0;
    for (const auto& [r, v] : patho.ladder) patho_count += v <= 10.0;
    CHECK(patho_count < flat_count);
}

TEST_CASE("cell averages") {
    const CellBasis basis(GridKind::standard, {0.0, 1.0, 0, 3});
    const auto avg = cell_averages(Weight::power(1.0, 0.0), basis);
    REQUIRE(avg.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(avg[i] == doctest::Approx((i + 0.5) / 8.0).epsilon(1e-14));
    CHECK_THROWS_AS(Weight::constant(0.0), ConfigError);
    CHECK_THROWS_AS(Weight::pathological(2.0, 1, 2.0), ConfigError);
}
