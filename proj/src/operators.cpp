#include "bloomlab/operators.hpp"

#include "bloomlab/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

namespace bloomlab {

namespace {

OperatorMatrix blank(const CellBasis& basis, std::string label) {
    check_feasible(basis);
    OperatorMatrix T;
    const auto n = static_cast<Eigen::Index>(basis.size());
    T.m = Eigen::MatrixXd::Zero(n, n);
    T.grid = basis.grid();
    T.window = basis.window();
    T.label = std::move(label);
    return T;
}

bool resolved(const CellBasis& basis, const DyadicInterval& I) { return I.scale < basis.window().j_max; }

bool has_resolved_children(const CellBasis& basis, const DyadicInterval& I) { return I.scale + 1 < basis.window().j_max; }

double G(double t) { return t == 0.0 ? 0.0 : t * (std::log(std::abs(t)) - 1.0); }

void put_double(std::ostream& os, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
}

double get_double(std::istream& is) {
    char buf[8];
    if (!is.read(buf, 8)) throw ConfigError("truncated matrix file");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    return std::bit_cast<double>(bits);
}

double op_norm(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return svd.singularValues()(0);
}

}  // namespace

void check_feasible(const CellBasis& basis) {
    if (basis.size() > kMaxCells)
        throw ConfigError("infeasible size: " + std::to_string(basis.size()) + " cells exceeds the cap of " +
                          std::to_string(kMaxCells));
}

Eigen::VectorXd haar_column(const CellBasis& basis, const DyadicInterval& I) {
    const auto v = basis.haar_vector(I);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd k_column(const CellBasis& basis, const DyadicInterval& I) {
    return haar_column(basis, I.right_child()) - haar_column(basis, I.left_child());
}

OperatorMatrix paraproduct_matrix(const std::vector<HaarTerm>& coefficients, const CellBasis& basis) {
    OperatorMatrix T = blank(basis, "paraproduct");
    const double h = basis.cell_length();
    for (const auto& t : coefficients) {
        if (t.coefficient == 0.0) continue;
        if (!resolved(basis, t.interval)) throw ConfigError("coefficient below the cell scale: " + t.interval.id());
        const auto [first, last] = basis.cell_range(t.interval);
        const auto f = static_cast<Eigen::Index>(first);
        const auto len = static_cast<Eigen::Index>(last - first);
        const double I = t.interval.length();
        const double v = t.coefficient * h / I / std::sqrt(I);
        // rows carry h_I(c_i), columns the average over I
        T.m.block(f, f, len / 2, len).array() += v;
        T.m.block(f + len / 2, f, len / 2, len).array() -= v;
    }
    return T;
}

OperatorMatrix paraproduct_matrix(const Symbol& b, const CellBasis& basis) {
    std::vector<HaarTerm> c;
    for (const auto& I : basis.haar_intervals()) c.push_back({I, b.haar_coefficient(I)});
    return paraproduct_matrix(c, basis);
}

OperatorMatrix paraproduct_adjoint_matrix(const std::vector<HaarTerm>& coefficients, const CellBasis& basis) {
    OperatorMatrix T = paraproduct_matrix(coefficients, basis);
    T.m.transposeInPlace();
    T.label = "paraproduct_adjoint";
    return T;
}

OperatorMatrix haar_multiplier_matrix(const SignPattern& eps, const CellBasis& basis) {
    OperatorMatrix T = blank(basis, "haar_multiplier");
    T.m.setIdentity();
    for (const auto& I : basis.haar_intervals()) {
        const double e = eps(I);
        if (e == 1.0) continue;
        const Eigen::VectorXd h = haar_column(basis, I);
        T.m.noalias() += (e - 1.0) * h * h.transpose();
    }
    return T;
}

OperatorMatrix petermichl_shift_matrix(const CellBasis& basis) {
    OperatorMatrix T = blank(basis, "petermichl_shift");
    for (const auto& I : basis.haar_intervals()) {
        if (!has_resolved_children(basis, I)) continue;
        const Eigen::VectorXd out =
            (haar_column(basis, I.left_child()) - haar_column(basis, I.right_child())) / std::numbers::sqrt2;
        T.m.noalias() += out * haar_column(basis, I).transpose();
    }
    return T;
}

double cell_pair_kernel_integral(double a, double b, double c, double d) {
    return G(b - c) - G(a - c) - G(b - d) + G(a - d);
}

double hilbert_profile(std::int64_t m) {
    if (m == 0) return 0.0;
    if (m < 0) return -hilbert_profile(-m);
    if (m == 1) return 2.0 * std::numbers::ln2;
    const double x = static_cast<double>(m);
    // G(m+1) - 2G(m) + G(m-1) without the cancellation
    return x * std::log1p(-1.0 / (x * x)) + std::log1p(1.0 / x) - std::log1p(-1.0 / x);
}

OperatorMatrix hilbert_matrix(const CellBasis& basis) {
    OperatorMatrix T = blank(basis, "hilbert");
    const auto n = static_cast<Eigen::Index>(basis.size());
    std::vector<double> F(static_cast<std::size_t>(n));
    for (Eigen::Index d = 0; d < n; ++d) F[static_cast<std::size_t>(d)] = hilbert_profile(d);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index d = i - j;
            T.m(i, j) = d >= 0 ? F[static_cast<std::size_t>(d)] : -F[static_cast<std::size_t>(-d)];
        }
    return T;
}

OperatorMatrix multiplication_matrix(const std::vector<double>& cell_values, const CellBasis& basis) {
    if (cell_values.size() != basis.size()) throw ConfigError("cell vector does not match basis");
    OperatorMatrix T = blank(basis, "multiplication");
    for (std::size_t i = 0; i < cell_values.size(); ++i)
        T.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = cell_values[i];
    return T;
}

OperatorMatrix multiplication_matrix(const Symbol& b, const CellBasis& basis) {
    return multiplication_matrix(b.cell_averages(basis), basis);
}

OperatorMatrix weight_conjugate(const OperatorMatrix& T, const std::vector<double>& lambda_cells,
                                const std::vector<double>& mu_cells) {
    const auto n = static_cast<std::size_t>(T.m.rows());
    if (lambda_cells.size() != n || mu_cells.size() != n) throw ConfigError("weight vector does not match matrix");
    Eigen::VectorXd left(static_cast<Eigen::Index>(n)), right(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lambda_cells[i] > 0.0) || !(mu_cells[i] > 0.0))
            throw DegenerateWeight("degenerate weight: nonpositive cell average at cell " + std::to_string(i));
        left(static_cast<Eigen::Index>(i)) = std::sqrt(lambda_cells[i]);
        right(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(mu_cells[i]);
    }
    OperatorMatrix out = T;
    out.m = left.asDiagonal() * T.m * right.asDiagonal();
    return out;
}

OperatorMatrix weight_conjugate(const OperatorMatrix& T, const Weight& lambda, const Weight& mu) {
    const CellBasis basis(T.grid, T.window);
    OperatorMatrix out = weight_conjugate(T, cell_averages(lambda, basis), cell_averages(mu, basis));
    out.target_weight = lambda.describe();
    out.source_weight = mu.describe();
    return out;
}

OperatorMatrix commutator(const OperatorMatrix& A, const OperatorMatrix& B) {
    if (A.m.rows() != B.m.rows()) throw ConfigError("commutator of incompatible matrices");
    OperatorMatrix out = A;
    out.m = A.m * B.m - B.m * A.m;
    out.label = "[" + A.label + "," + B.label + "]";
    return out;
}

OperatorMatrix hilbert_commutator(const std::vector<double>& b_cells, const CellBasis& basis) {
    if (b_cells.size() != basis.size()) throw ConfigError("cell vector does not match basis");
    OperatorMatrix T = blank(basis, "[M_b,hilbert]");
    const auto n = static_cast<Eigen::Index>(basis.size());
    std::vector<double> F(static_cast<std::size_t>(n));
    for (Eigen::Index d = 0; d < n; ++d) F[static_cast<std::size_t>(d)] = hilbert_profile(d);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double bj = b_cells[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index d = i - j;
            const double f = d >= 0 ? F[static_cast<std::size_t>(d)] : -F[static_cast<std::size_t>(-d)];
            T.m(i, j) = (b_cells[static_cast<std::size_t>(i)] - bj) * f;
        }
    }
    return T;
}

OperatorMatrix remainder_matrix(const std::vector<HaarTerm>& coefficients, const CellBasis& basis) {
    OperatorMatrix T = blank(basis, "remainder");
    for (const auto& t : coefficients) {
        if (t.coefficient == 0.0 || !has_resolved_children(basis, t.interval)) continue;
        const double c = t.coefficient / std::sqrt(t.interval.length());
        T.m.noalias() += c * k_column(basis, t.interval) * haar_column(basis, t.interval).transpose();
    }
    return T;
}

OperatorMatrix remainder_matrix_exact(const std::vector<HaarTerm>& coefficients, const CellBasis& basis) {
    OperatorMatrix T = blank(basis, "remainder_exact");
    for (const auto& t : coefficients) {
        if (t.coefficient == 0.0 || !has_resolved_children(basis, t.interval)) continue;
        const double c = t.coefficient / std::sqrt(t.interval.length()) / std::numbers::sqrt2;
        const Eigen::VectorXd out = haar_column(basis, t.interval.left_child()) + haar_column(basis, t.interval.right_child());
        T.m.noalias() += c * out * haar_column(basis, t.interval).transpose();
    }
    return T;
}

std::vector<DyadicInterval> interior_test_intervals(const CellBasis& basis) {
    std::vector<DyadicInterval> out;
    for (const auto& I : basis.haar_intervals())
        if (I.lo() >= 0.0 && I.hi() <= 1.0 && I.scale + 3 <= basis.window().j_max) out.push_back(I);
    return out;
}

namespace {

Eigen::MatrixXd test_block(const CellBasis& basis) {
    const auto tests = interior_test_intervals(basis);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(tests.size()));
    for (std::size_t k = 0; k < tests.size(); ++k) X.col(static_cast<Eigen::Index>(k)) = haar_column(basis, tests[k]);
    return X;
}

std::vector<double> haar_sum_cells(const std::vector<HaarTerm>& b, const CellBasis& basis) {
    std::vector<double> v(basis.size(), 0.0);
    for (const auto& t : b) {
        if (t.coefficient == 0.0) continue;
        const auto h = basis.haar_vector(t.interval);
        const double s = t.coefficient / std::sqrt(basis.cell_length());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * h[i];
    }
    return v;
}

}  // namespace

ResidualReport expansion_residual(const std::vector<HaarTerm>& b, const SignPattern& eps, const CellBasis& basis) {
    const OperatorMatrix Mb = multiplication_matrix(haar_sum_cells(b, basis), basis);
    const OperatorMatrix T = haar_multiplier_matrix(eps, basis);
    const OperatorMatrix P = paraproduct_matrix(b, basis);
    const OperatorMatrix Ps = paraproduct_adjoint_matrix(b, basis);
    const Eigen::MatrixXd X = test_block(basis);
    const Eigen::MatrixXd TX = T.m * X;
    const Eigen::MatrixXd lhs = Mb.m * TX - T.m * (Mb.m * X);
    const Eigen::MatrixXd rhs = P.m * TX - T.m * (P.m * X) + Ps.m * TX - T.m * (Ps.m * X);
    const Eigen::MatrixXd d = lhs - rhs;
    ResidualReport r;
    r.test_functions = static_cast<std::size_t>(X.cols());
    r.operator_norm = op_norm(d);
    r.frobenius = d.norm();
    r.exact_form_operator_norm = r.operator_norm;
    r.exact_form_frobenius = r.frobenius;
    return r;
}

ResidualReport expansion_residual_shift(const std::vector<HaarTerm>& b, const CellBasis& basis) {
    const OperatorMatrix Mb = multiplication_matrix(haar_sum_cells(b, basis), basis);
    const OperatorMatrix S = petermichl_shift_matrix(basis);
    const OperatorMatrix P = paraproduct_matrix(b, basis);
    const OperatorMatrix Ps = paraproduct_adjoint_matrix(b, basis);
    const OperatorMatrix R = remainder_matrix(b, basis);
    const OperatorMatrix Re = remainder_matrix_exact(b, basis);
    const Eigen::MatrixXd X = test_block(basis);
    const Eigen::MatrixXd SX = S.m * X;
    const Eigen::MatrixXd lhs = Mb.m * SX - S.m * (Mb.m * X);
    const Eigen::MatrixXd four = P.m * SX - S.m * (P.m * X) + Ps.m * SX - S.m * (Ps.m * X);
    const Eigen::MatrixXd d = lhs - (four + R.m * X);
    const Eigen::MatrixXd de = lhs - (four + Re.m * X);
    ResidualReport r;
    r.test_functions = static_cast<std::size_t>(X.cols());
    r.operator_norm = op_norm(d);
    r.frobenius = d.norm();
    r.exact_form_operator_norm = op_norm(de);
    r.exact_form_frobenius = de.norm();
    return r;
}

void write_binary(const OperatorMatrix& T, std::ostream& os) {
    put_double(os, static_cast<double>(T.m.rows()));
    put_double(os, static_cast<double>(T.window.j_max));
    put_double(os, T.window.lo);
    put_double(os, T.window.hi);
    for (Eigen::Index i = 0; i < T.m.rows(); ++i)
        for (Eigen::Index j = 0; j < T.m.cols(); ++j) put_double(os, T.m(i, j));
}

OperatorMatrix read_binary(std::istream& is, GridKind grid) {
    OperatorMatrix T;
    const double n = get_double(is);
    const double jmax = get_double(is);
    T.window.lo = get_double(is);
    T.window.hi = get_double(is);
    if (!(n >= 0.0) || n > static_cast<double>(kMaxCells)) throw ConfigError("bad matrix header");
    T.window.j_max = static_cast<int>(jmax);
    T.window.j_min = std::min(T.window.j_min, T.window.j_max);
    T.grid = grid;
    const auto N = static_cast<Eigen::Index>(n);
    T.m.resize(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) T.m(i, j) = get_double(is);
    return T;
}

void write_csv(const OperatorMatrix& T, std::ostream& os) {
    for (Eigen::Index i = 0; i < T.m.rows(); ++i) {
        for (Eigen::Index j = 0; j < T.m.cols(); ++j) {
            if (j) os << ',';
            os << fmt12(T.m(i, j));
        }
        os << '\n';
    }
}

}  // namespace bloomlab
