#pragma once

#include "bloomlab/dyadic.hpp"
#include "bloomlab/symbols.hpp"
#include "bloomlab/weights.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace bloomlab {

struct WeightPair {
    Weight mu;
    Weight lambda;

    [[nodiscard]] Weight nu() const { return nu_weight(mu, lambda); }
};

struct Contribution {
    std::string id;
    double value = 0.0;
};

struct NormReport {
    double value = 0.0;
    double error_estimate = 0.0;
    double p = 2.0;
    std::string label;
    std::vector<Contribution> contributions;

    /// Columns id,contribution,cumulative; 12 significant digits.
    void write_csv(std::ostream& os) const;
};

// Per-interval expressions; all three are equivalent up to A2 constants.
//   nu:                 |b(I)| |I|^1/2 / nu(I)
//   lambda_mu_inverse:  |b(I)| lambda(I)^1/2 mu^-1(I)^1/2 / |I|^3/2
//   lambda_inverse_mu:  |b(I)| |I|^1/2 / (lambda^-1(I)^1/2 mu(I)^1/2)
enum class BesovForm { nu, lambda_mu_inverse, lambda_inverse_mu };

std::string to_string(BesovForm f);

/// The bracket multiplying |b(I)| in the given form.
double besov_bracket(const WeightPair& w, const DyadicInterval& I, BesovForm form);

NormReport dyadic_besov_norm(const Symbol& b, const WeightPair& w, double p, GridKind grid,
                             const TruncationWindow& window, BesovForm form = BesovForm::nu);
/// Form 1 given nu alone.
NormReport dyadic_besov_norm(const Symbol& b, const Weight& nu, double p, GridKind grid,
                             const TruncationWindow& window);
/// Same sum from precomputed coefficients.
NormReport dyadic_besov_norm(const std::vector<HaarTerm>& coefficients, const WeightPair& w, double p,
                             BesovForm form = BesovForm::nu);

/// (int int |b(x)-b(y)|^2 / |x-y|^2 lambda(x) mu^-1(y))^1/2 over window x window,
/// on the finest standard cells of the window. Contributions are per x-cell row
/// of the squared integral.
NormReport continuous_besov_norm_p2(const Symbol& b, const WeightPair& w, const TruncationWindow& window);

struct BmoReport {
    double sup_average = 0.0;  // sup_I nu(I)^-1 int_I |b - b_I|
    double square_form = 0.0;  // sup_K mu^-1(K)^-1 sum_{I in K} |b(I)|^2 mu^-1(I)^2 lambda(I) / |I|^3
    std::string sup_average_at;
    std::string square_form_at;
};

BmoReport weighted_bmo_dyadic(const Symbol& b, const WeightPair& w, GridKind grid, const TruncationWindow& window);

struct TailRow {
    double a = 0.0;
    double small_scales = 0.0;  // |I| < a
    double large_scales = 0.0;  // |I| > a
    double far_field = 0.0;     // I outside B(x0, a)
};

/// Partial sums of the squared form-1 contributions over a ladder a = 2^k
/// spanning the window's scales. x0 defaults to the window center.
std::vector<TailRow> vmo_tail_report(const Symbol& b, const WeightPair& w, GridKind grid,
                                     const TruncationWindow& window, std::optional<double> x0 = std::nullopt);

/// D0 plus D1 dyadic norms (form 1).
NormReport intersection_norm(const Symbol& b, const WeightPair& w, const TruncationWindow& window, double p = 2.0);

struct FormRatioReport {
    double max_ratio = 1.0;
    std::string at;
    std::size_t intervals = 0;
    bool cauchy_schwarz_holds = true;
};

/// Largest pairwise ratio of the three brackets over the enumerated intervals.
FormRatioReport besov_form_ratios(const WeightPair& w, GridKind grid, const TruncationWindow& window);

}  // namespace bloomlab
