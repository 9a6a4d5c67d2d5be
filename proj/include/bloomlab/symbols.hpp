#pragma once

#include "bloomlab/dyadic.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace bloomlab {

struct HaarTerm {
    DyadicInterval interval;
    double coefficient;
};

// The symbol b, in one of three representations. Every kind can integrate
// itself exactly over an arbitrary interval (analytic symbols use their
// antiderivative when one is supplied, 32-node Gauss-Legendre otherwise), so
// Haar coefficients on either grid come out of the same primitive.
class Symbol {
public:
    enum class Kind { analytic, step, haar };

    struct Analytic {
        std::string name;
        std::function<double(double)> value;
        std::function<double(double)> antiderivative;  // may be empty
        double lipschitz = -1.0;                        // negative means unknown
        double support_lo = -1e300;
        double support_hi = 1e300;
    };

    static Symbol analytic(Analytic a);
    static Symbol step(const CellBasis& basis, std::vector<double> values);
    static Symbol haar(std::vector<HaarTerm> terms);

    // Named smooth symbols supported on [0, 1).
    static Symbol sin2pi(double frequency = 1.0);
    static Symbol parabola();   // x (1 - x)
    static Symbol ramp_bump();  // cubic ramp up on [0,1/3), plateau, ramp down on [2/3,1)
    static Symbol cubic();      // x^2 (1 - x)
    static Symbol identity(double lo = 0.0, double hi = 1.0);
    static Symbol constant(double c);

    [[nodiscard]] Symbol scaled(double c) const;
    [[nodiscard]] Symbol shifted(double c) const;

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] bool is_lipschitz() const;
    [[nodiscard]] double lipschitz() const;

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double integral(double a, double b) const;
    /// Exact cell averages on the basis cells.
    [[nodiscard]] std::vector<double> cell_averages(const CellBasis& basis) const;
    /// Haar coefficient <b, h_I>.
    [[nodiscard]] double haar_coefficient(const DyadicInterval& I) const;

private:
    Symbol() = default;
    [[nodiscard]] double raw_value(double x) const;
    [[nodiscard]] double raw_integral(double a, double b) const;

    Kind kind_ = Kind::analytic;
    std::string name_;
    double scale_ = 1.0;
    double offset_ = 0.0;
    std::shared_ptr<const Analytic> analytic_;
    // step kind
    std::shared_ptr<const CellBasis> basis_;
    std::shared_ptr<const std::vector<double>> values_;
    std::shared_ptr<const std::vector<double>> prefix_;
    // haar kind
    std::shared_ptr<const std::vector<HaarTerm>> terms_;
};

/// b-hat(I) for every enumerated interval, in enumeration order.
std::vector<HaarTerm> haar_coefficients(const Symbol& b, GridKind grid, const TruncationWindow& window);

/// Median of the step view of b over the cells of Q: the midpoint of the
/// admissible median interval (unique middle value for an odd cell count).
double median_value(const Symbol& b, const CellBasis& basis, const DyadicInterval& Q);
double median_of(std::vector<double> values);

struct MedianSplit {
    double alpha = 0.0;  // median over Q-hat
    std::vector<std::size_t> e1, e2;  // cells of Q with b < alpha, b > alpha
    std::vector<std::size_t> f1, f2;  // cells of Q-hat with b >= alpha, b <= alpha
};

MedianSplit median_split(const Symbol& b, const CellBasis& basis, const DyadicInterval& Q, const DyadicInterval& Qhat);

}  // namespace bloomlab
