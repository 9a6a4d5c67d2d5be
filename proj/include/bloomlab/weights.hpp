#pragma once

#include "bloomlab/dyadic.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bloomlab {

/// An interval integral of a weight (or of its inverse) is infinite.
class DivergedIntegral : public std::runtime_error {
public:
    DivergedIntegral(const std::string& what, double a, double b);
    double a, b;
};

/// A cell average that vanished, so the weight cannot be inverted.
class DegenerateWeight : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Truncated max over levels j = 1..J of phi_delta(2^{n_j} x + 2^{-n_j-1}) with
// n_j = 2^j and delta_j = 2^{-A n_j}; phi_delta is delta^{-alpha} on the
// intervals (n, n + delta), n integer, and 1 elsewhere; alpha = (1 + 1/r) / 2.
struct PathologicalProfile {
    double r = 2.0;
    int levels = 1;
    double A = 9.0;

    void validate() const;
    [[nodiscard]] double alpha() const { return 0.5 * (1.0 + 1.0 / r); }
    [[nodiscard]] double log2_delta(int level) const;   // -A n_j
    [[nodiscard]] double log2_height(int level) const;  // A n_j alpha
    [[nodiscard]] double period(int level) const;       // 2^{-n_j}
    /// First point of the level-j peak with index n.
    [[nodiscard]] double peak_start(int level, std::int64_t n) const;
    [[nodiscard]] double peak_width(int level) const;
    /// Level whose peak contains x (0 when none).
    [[nodiscard]] int level_at(double x) const;
    /// Measure of the level-j peaks inside [a, b).
    [[nodiscard]] double peak_measure(int level, double a, double b) const;

    bool operator==(const PathologicalProfile&) const = default;
};

// w(x) = scale * prod_k |x - c_k|^{alpha_k} * P(x)^{e}, with P an optional
// pathological profile. Closed under products and real powers, which covers
// the nu-weight algebra.
class Weight {
public:
    struct PowerFactor {
        double center;
        double exponent;
    };

    Weight() = default;
    static Weight constant(double c);
    static Weight power(double exponent, double center = 1.0 / 3.0);
    static Weight pathological(double r, int levels, double A);

    [[nodiscard]] Weight pow(double e) const;
    [[nodiscard]] Weight inverse() const { return pow(-1.0); }
    [[nodiscard]] Weight operator*(const Weight& other) const;

    [[nodiscard]] double operator()(double x) const;
    /// Integral over [a, b); throws DivergedIntegral for non-integrable singularities.
    [[nodiscard]] double integral(double a, double b) const;
    [[nodiscard]] double average(double a, double b) const { return integral(a, b) / (b - a); }

    [[nodiscard]] bool is_constant() const { return powers_.empty() && !profile_; }
    [[nodiscard]] double scale() const { return scale_; }
    [[nodiscard]] const std::vector<PowerFactor>& powers() const { return powers_; }
    [[nodiscard]] const std::optional<PathologicalProfile>& profile() const { return profile_; }
    [[nodiscard]] double profile_exponent() const { return profile_exponent_; }
    [[nodiscard]] std::string describe() const;

private:
    [[nodiscard]] double base_value(double x) const;
    [[nodiscard]] double base_integral(double a, double b) const;
    [[nodiscard]] double graded_integral(double a, double b) const;

    double scale_ = 1.0;
    std::vector<PowerFactor> powers_;
    std::optional<PathologicalProfile> profile_;
    double profile_exponent_ = 0.0;
};

/// nu = mu^{1/2} lambda^{-1/2}.
Weight nu_weight(const Weight& mu, const Weight& lambda);

/// Cell averages of w on the basis cells; throws DegenerateWeight on zero.
std::vector<double> cell_averages(const Weight& w, const CellBasis& basis);

struct IntervalFamily {
    bool dyadic_standard = true;
    bool dyadic_third = true;
    std::size_t random_count = 1000;
    std::uint64_t seed = 20240101;
};

/// Seeded random subintervals of the window, log-uniform length between the
/// finest cell and the window length.
std::vector<std::pair<double, double>> random_intervals(const TruncationWindow& window, std::size_t count,
                                                        std::uint64_t seed);

struct A2Report {
    double constant = 1.0;
    double arg_lo = 0.0;
    double arg_hi = 0.0;
    std::size_t family_size = 0;
};

A2Report a2_constant(const Weight& w, const TruncationWindow& window, const IntervalFamily& family = {});

/// w(sI) / (s w(I)) with sI the concentric dilate.
double doubling_ratio(const Weight& w, double a, double b, double s);

struct ReverseHolderReport {
    std::optional<double> exponent;  // largest qualifying r, none when no r qualifies
    double constant = 0.0;           // observed sup at that r
    std::vector<std::pair<double, double>> ladder;  // (r, sup ratio); +inf when divergent
};

/// Tests r in {2.25, 2.5, 3, 4}: sup over standard dyadic intervals of the
/// window of [avg w^{r/2}]^{2/r} / avg w must stay <= threshold.
ReverseHolderReport reverse_holder_exponent(const Weight& w, const TruncationWindow& window,
                                            double threshold = 10.0);

}  // namespace bloomlab
