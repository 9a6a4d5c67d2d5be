#include "bloomlab/schatten.hpp"

#include "bloomlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

namespace bloomlab {

namespace {

std::uint64_t next(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform(std::uint64_t& s) { return static_cast<double>(next(s) >> 11) * 0x1.0p-53; }

double lq_norm(const Eigen::VectorXd& v, double h, double q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), q);
    return std::pow(s * h, 1.0 / q);
}

std::vector<Eigen::VectorXd> battery(const CellBasis& basis, double q, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    std::vector<Eigen::VectorXd> out;
    std::uint64_t s = seed;
    for (int k = 0; k < 10; ++k) {  // indicators of random cell runs
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        auto a = static_cast<Eigen::Index>(uniform(s) * static_cast<double>(n));
        auto b = static_cast<Eigen::Index>(uniform(s) * static_cast<double>(n));
        if (a > b) std::swap(a, b);
        f.segment(a, b - a + 1).setOnes();
        out.push_back(f);
    }
    for (int k = 0; k < 10; ++k) {  // random Haar sums
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        const auto& H = basis.haar_intervals();
        if (!H.empty())
            for (int t = 0; t < 8; ++t) {
                const auto& I = H[static_cast<std::size_t>(uniform(s) * static_cast<double>(H.size()))];
                const double c = 2.0 * uniform(s) - 1.0;
                const auto v = basis.haar_vector(I);
                for (Eigen::Index i = 0; i < n; ++i) f(i) += c * v[static_cast<std::size_t>(i)];
            }
        out.push_back(f);
    }
    for (int k = 0; k < 15; ++k) {  // power singularities, locally in L^q
        Eigen::VectorXd f(n);
        const double c = basis.window().lo + uniform(s) * (basis.window().hi - basis.window().lo);
        const double a = 0.9 * uniform(s) / q;
        for (Eigen::Index i = 0; i < n; ++i)
            f(i) = std::pow(std::abs(basis.cell_mid(static_cast<std::size_t>(i)) - c), -a);
        out.push_back(f);
    }
    for (int k = 0; k < 15; ++k) {  // noise
        Eigen::VectorXd f(n);
        for (Eigen::Index i = 0; i < n; ++i) f(i) = 2.0 * uniform(s) - 1.0;
        out.push_back(f);
    }
    return out;
}

}  // namespace

std::size_t SingularSpectrum::rank() const {
    return static_cast<std::size_t>(std::count_if(sigma.begin(), sigma.end(), [](double v) { return v > 0.0; }));
}

void SingularSpectrum::write_csv(std::ostream& os) const {
    os << "index,sigma\n";
    for (std::size_t j = 0; j < sigma.size(); ++j) os << (j + 1) << ',' << fmt12(sigma[j]) << '\n';
}

SingularSpectrum singular_values(const Eigen::MatrixXd& m, std::string source) {
    if (!m.allFinite()) throw InvalidMatrix("matrix has non-finite entries" + (source.empty() ? "" : ": " + source));
    SingularSpectrum s;
    s.source = std::move(source);
    if (m.size() == 0) return s;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& v = svd.singularValues();
    s.sigma.assign(v.data(), v.data() + v.size());
    std::sort(s.sigma.begin(), s.sigma.end(), std::greater<>());
    const double cut = s.sigma.empty() ? 0.0 : 1e-12 * s.sigma.front();
    for (double& x : s.sigma)
        if (x < cut) x = 0.0;
    return s;
}

SingularSpectrum singular_values(const OperatorMatrix& T) { return singular_values(T.m, T.label); }

double schatten_norm(const SingularSpectrum& s, double p) {
    if (!(p > 0.0)) throw ConfigError("Schatten exponent must be positive");
    double t = 0.0;
    for (double x : s.sigma)
        if (x > 0.0) t += std::pow(x, p);
    return std::pow(t, 1.0 / p);
}

double weak_schatten(const SingularSpectrum& s, double p) {
    if (!(p > 0.0)) throw ConfigError("Schatten exponent must be positive");
    double w = 0.0;
    for (std::size_t j = 0; j < s.sigma.size(); ++j)
        w = std::max(w, std::pow(static_cast<double>(j + 1), 1.0 / p) * s.sigma[j]);
    return w;
}

double hilbert_schmidt_norm(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw InvalidMatrix("matrix has non-finite entries");
    return m.norm();
}

StepFamily normalized_indicators(const CellBasis& basis, const std::vector<DyadicInterval>& intervals) {
    StepFamily fam{basis.grid(), basis.window(), {}};
    for (const auto& I : intervals) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
        const auto [first, last] = basis.cell_range(I);
        v.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(last - first)).setConstant(1.0 / std::sqrt(I.length()));
        fam.members.push_back({I, std::move(v)});
    }
    return fam;
}

Eigen::VectorXd basis_coefficients(const StepFamily& fam, const FamilyMember& m) {
    return m.values * std::sqrt(fam.window.cell_length());
}

NwoReport nwo_r_criterion(const StepFamily& fam, double r) {
    if (!(r > 0.0)) throw ConfigError("exponent r must be positive");
    const CellBasis basis(fam.grid, fam.window);
    const double h = basis.cell_length();
    NwoReport rep;
    for (const auto& m : fam.members) {
        const double a = m.interval.lo(), b = m.interval.hi();
        bool outside = false;
        for (Eigen::Index i = 0; i < m.values.size(); ++i) {
            if (m.values(i) == 0.0) continue;
            const auto& c = basis.cell(static_cast<std::size_t>(i));
            if (c.lo() < a - 1e-12 || c.hi() > b + 1e-12) outside = true;
        }
        if (outside) rep.support_violations.push_back(m.interval.id());
        const double ratio = lq_norm(m.values, h, r) / std::pow(b - a, 1.0 / r - 0.5);
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.at = m.interval.id();
        }
    }
    return rep;
}

double nwo_pairing_sum(const OperatorMatrix& A, const StepFamily& e, const StepFamily& f, double p) {
    if (e.members.size() != f.members.size()) throw ConfigError("pairing families differ in size");
    double total = 0.0;
    for (std::size_t k = 0; k < e.members.size(); ++k) {
        if (e.members[k].interval != f.members[k].interval) throw ConfigError("pairing families are indexed differently");
        const double v = basis_coefficients(f, f.members[k]).dot(A.m * basis_coefficients(e, e.members[k]));
        total += std::pow(std::abs(v), p);
    }
    return total;
}

double nwo_maximal_norm(const StepFamily& fam, double q, std::uint64_t seed) {
    if (!(q > 1.0)) throw ConfigError("maximal norm needs q > 1");
    const CellBasis basis(fam.grid, fam.window);
    const double h = basis.cell_length();
    double best = 0.0;
    for (const auto& f : battery(basis, q, seed)) {
        Eigen::VectorXd M = Eigen::VectorXd::Zero(f.size());
        for (const auto& m : fam.members) {
            const double v = std::abs(h * f.dot(m.values)) / std::sqrt(m.interval.length());
            const auto [first, last] = basis.cell_range(m.interval);
            for (std::size_t i = first; i < last; ++i) M(static_cast<Eigen::Index>(i)) = std::max(M(static_cast<Eigen::Index>(i)), v);
        }
        const double nf = lq_norm(f, h, q);
        if (nf > 0.0) best = std::max(best, lq_norm(M, h, q) / nf);
    }
    return best;
}

double kernel_mixed_norm(const Eigen::MatrixXd& kernel, double h, double p) {
    if (!(p > 2.0)) throw ConfigError("mixed norm requires p > 2");
    const double pp = p / (p - 1.0);
    std::vector<double> g(static_cast<std::size_t>(kernel.cols()));
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < kernel.rows(); ++i) s += std::pow(std::abs(kernel(i, j)), p);
        g[static_cast<std::size_t>(j)] = std::pow(s * h, 1.0 / p);
    }
    std::sort(g.begin(), g.end(), std::greater<>());
    double w = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) w = std::max(w, g[k] * std::pow(static_cast<double>(k + 1) * h, 1.0 / pp));
    return w;
}

MixedNormReport mixed_norm(const OperatorMatrix& K, double p) {
    if (!(p > 2.0)) throw ConfigError("mixed norm requires p > 2");
    const double h = K.window.cell_length();
    const Eigen::MatrixXd kernel = K.m / h;
    MixedNormReport r;
    r.value = kernel_mixed_norm(kernel, h, p);
    r.adjoint_value = kernel_mixed_norm(kernel.transpose(), h, p);
    r.weak_schatten = weak_schatten(singular_values(K), p);
    const double bound = std::sqrt(r.value * r.adjoint_value);
    r.ratio = bound > 0.0 ? r.weak_schatten / bound : 0.0;
    r.holds = r.weak_schatten <= bound;
    return r;
}

}  // namespace bloomlab
