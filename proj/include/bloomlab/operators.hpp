#pragma once

#include "bloomlab/dyadic.hpp"
#include "bloomlab/symbols.hpp"
#include "bloomlab/weights.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace bloomlab {

inline constexpr std::size_t kMaxCells = 8192;

// Dense matrix over e_i = |cell|^-1/2 1_cell; entry (i, j) = <T e_j, e_i>.
struct OperatorMatrix {
    Eigen::MatrixXd m;
    GridKind grid = GridKind::standard;
    TruncationWindow window;
    std::string label;
    std::string source_weight = "1";
    std::string target_weight = "1";

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(m.rows()); }
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return m * f; }
};

/// Haar sign pattern; values other than +-1 are accepted and used as given.
using SignPattern = std::function<double(const DyadicInterval&)>;

/// Throws ConfigError when the basis exceeds kMaxCells.
void check_feasible(const CellBasis& basis);

Eigen::VectorXd haar_column(const CellBasis& basis, const DyadicInterval& I);
/// k_I = h_{I+} - h_{I-}.
Eigen::VectorXd k_column(const CellBasis& basis, const DyadicInterval& I);

/// Pi_b f = sum_I b(I) <f>_I h_I over the given coefficients (cellwise-constant intervals only).
OperatorMatrix paraproduct_matrix(const std::vector<HaarTerm>& coefficients, const CellBasis& basis);
OperatorMatrix paraproduct_matrix(const Symbol& b, const CellBasis& basis);
/// Pi*_b f = sum_I b(I) f(I) 1_I / |I|.
OperatorMatrix paraproduct_adjoint_matrix(const std::vector<HaarTerm>& coefficients, const CellBasis& basis);

/// T_eps = eps_I on span{h_I : I in basis.haar_intervals()}, identity on the complement.
OperatorMatrix haar_multiplier_matrix(const SignPattern& eps, const CellBasis& basis);

/// Sh h_I = (h_{I-} - h_{I+}) / sqrt2 for I with children in the Haar span, zero elsewhere.
OperatorMatrix petermichl_shift_matrix(const CellBasis& basis);

/// int_a^b int_c^d dx dy / (x - y), principal value.
double cell_pair_kernel_integral(double a, double b, double c, double d);
/// Integral above for unit cells [m, m+1) x [0, 1); odd in m, F(0) = 0.
double hilbert_profile(std::int64_t m);

/// Kernel 1/(x - y), no 1/pi. Toeplitz with entries F(i - j).
OperatorMatrix hilbert_matrix(const CellBasis& basis);

OperatorMatrix multiplication_matrix(const std::vector<double>& cell_values, const CellBasis& basis);
OperatorMatrix multiplication_matrix(const Symbol& b, const CellBasis& basis);

/// D_{lambda^1/2} T D_{mu^-1/2} from cell averages of lambda and mu.
OperatorMatrix weight_conjugate(const OperatorMatrix& T, const std::vector<double>& lambda_cells,
                                const std::vector<double>& mu_cells);
OperatorMatrix weight_conjugate(const OperatorMatrix& T, const Weight& lambda, const Weight& mu);

/// AB - BA.
OperatorMatrix commutator(const OperatorMatrix& A, const OperatorMatrix& B);

/// [M_b, H] assembled entrywise as (b_i - b_j) F(i - j).
OperatorMatrix hilbert_commutator(const std::vector<double>& b_cells, const CellBasis& basis);

/// R_b = sum_I b(I) |I|^-1/2 k_I (x) h_I over intervals with children in the Haar span.
OperatorMatrix remainder_matrix(const std::vector<HaarTerm>& coefficients, const CellBasis& basis);
/// The remainder that closes the six-term expansion of [b, Sh]:
/// sum_I b(I) |I|^-1/2 (h_{I-} + h_{I+}) / sqrt2 (x) h_I.
OperatorMatrix remainder_matrix_exact(const std::vector<HaarTerm>& coefficients, const CellBasis& basis);

struct ResidualReport {
    double operator_norm = 0.0;
    double frobenius = 0.0;
    double exact_form_operator_norm = 0.0;  // shift only: residual with the closing remainder
    double exact_form_frobenius = 0.0;
    std::size_t test_functions = 0;
};

/// [b, T_eps] - (Pi_b T - T Pi_b + Pi*_b T - T Pi*_b) on interior Haar test functions.
ResidualReport expansion_residual(const std::vector<HaarTerm>& b, const SignPattern& eps, const CellBasis& basis);
/// [b, Sh] - (Pi_b Sh - Sh Pi_b + Pi*_b Sh - Sh Pi*_b + R_b) and the same with the closing remainder.
ResidualReport expansion_residual_shift(const std::vector<HaarTerm>& b, const CellBasis& basis);

/// Haar functions h_I with I inside [0, 1) and at least three scales above the cells.
std::vector<DyadicInterval> interior_test_intervals(const CellBasis& basis);

/// Header of four float64 (N, j_max, window lo, window hi), then row-major float64; little-endian.
void write_binary(const OperatorMatrix& T, std::ostream& os);
OperatorMatrix read_binary(std::istream& is, GridKind grid = GridKind::standard);
void write_csv(const OperatorMatrix& T, std::ostream& os);

}  // namespace bloomlab
