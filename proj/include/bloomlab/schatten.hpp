#pragma once

#include "bloomlab/operators.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bloomlab {

class InvalidMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SingularSpectrum {
    std::vector<double> sigma;  // nonincreasing
    std::string source;

    [[nodiscard]] std::size_t rank() const;
    void write_csv(std::ostream& os) const;  // index,sigma
};

/// Full SVD; values below 1e-12 sigma_1 are set to zero.
SingularSpectrum singular_values(const Eigen::MatrixXd& m, std::string source = {});
SingularSpectrum singular_values(const OperatorMatrix& T);

double schatten_norm(const SingularSpectrum& s, double p);
/// sup_j j^{1/p} sigma_j.
double weak_schatten(const SingularSpectrum& s, double p);
/// sum sigma^2 equals the squared Frobenius norm, so S^2 needs no SVD.
double hilbert_schmidt_norm(const Eigen::MatrixXd& m);

// A family {e_I} of interval-indexed step functions, stored as pointwise
// values on the cells of a basis.
struct FamilyMember {
    DyadicInterval interval;
    Eigen::VectorXd values;
};

struct StepFamily {
    GridKind grid = GridKind::standard;
    TruncationWindow window;
    std::vector<FamilyMember> members;
};

/// e_I = |I|^-1/2 1_I.
StepFamily normalized_indicators(const CellBasis& basis, const std::vector<DyadicInterval>& intervals);
/// Coefficient vector of a family member in the e_i basis.
Eigen::VectorXd basis_coefficients(const StepFamily& fam, const FamilyMember& m);

struct NwoReport {
    double sup_ratio = 0.0;  // sup_I ||e_I||_r / |I|^{1/r - 1/2}
    std::string at;
    std::vector<std::string> support_violations;
};

NwoReport nwo_r_criterion(const StepFamily& fam, double r);

/// sum_I |<A e_I, f_I>|^p.
double nwo_pairing_sum(const OperatorMatrix& A, const StepFamily& e, const StepFamily& f, double p);

/// Sup over a fixed seeded battery of 50 test functions of ||M f||_q / ||f||_q,
/// M f = sup_I 1_I |<f, e_I>| / |I|^1/2.
double nwo_maximal_norm(const StepFamily& fam, double q, std::uint64_t seed = 20240101);

struct MixedNormReport {
    double value = 0.0;
    double adjoint_value = 0.0;
    double weak_schatten = 0.0;
    double ratio = 0.0;  // weak_schatten / sqrt(value * adjoint_value)
    bool holds = false;
};

/// ||K||_{L^p, L^{p',inf}} of the kernel behind the matrix (K = entry / cell length),
/// the same for the transpose, and the weak-Schatten comparison. Requires p > 2.
MixedNormReport mixed_norm(const OperatorMatrix& K, double p);
/// Mixed norm alone, for a kernel sampled on cells of length h (rows x, columns y).
double kernel_mixed_norm(const Eigen::MatrixXd& kernel, double h, double p);

}  // namespace bloomlab
