#include "bloomlab/weights.hpp"

#include "bloomlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace bloomlab {

namespace {

constexpr int kGradingLevels = 60;
constexpr std::size_t kPeakEnumerationLimit = 4096;

// Integral of |t|^alpha over [ta, tb] (center moved to the origin).
double power_integral(double alpha, double ta, double tb) {
    if (ta == tb) return 0.0;
    if (alpha <= -1.0 && ta <= 0.0 && tb >= 0.0) throw DivergedIntegral("power singularity not integrable", ta, tb);
    if (alpha == 0.0) return tb - ta;
    if (alpha == -1.0) {
        // ta and tb share a sign here
        return std::log(std::abs(tb) / std::abs(ta)) * (tb > 0 ? 1.0 : -1.0);
    }
    const double beta = alpha + 1.0;
    const auto prim = [beta](double t) { return std::copysign(std::pow(std::abs(t), beta), t) / beta; };
    if ((ta > 0 && tb > 0) || (ta < 0 && tb < 0)) {
        // same sign: avoid cancellation for short intervals far from the center
        const double near = std::min(std::abs(ta), std::abs(tb));
        const double far = std::max(std::abs(ta), std::abs(tb));
        const double diff = std::pow(near, beta) * std::expm1(beta * std::log1p((far - near) / near)) / beta;
        return diff;
    }
    return prim(tb) - prim(ta);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

DivergedIntegral::DivergedIntegral(const std::string& what, double a_, double b_)
    : std::runtime_error([&] {
          std::ostringstream os;
          os.precision(12);
          os << what << " on [" << a_ << ", " << b_ << ")";
          return os.str();
      }()),
      a(a_),
      b(b_) {}

void PathologicalProfile::validate() const {
    if (!(r > 1.0)) throw ConfigError("pathological weight needs r > 1");
    if (levels < 1 || levels > 5) throw ConfigError("pathological weight needs 1 <= J <= 5");
    if (!(A * (1.0 - alpha()) > 2.0)) throw ConfigError("pathological weight needs A (1 - alpha) > 2");
}

double PathologicalProfile::log2_delta(int level) const { return -A * std::ldexp(1.0, level); }

double PathologicalProfile::log2_height(int level) const { return A * std::ldexp(1.0, level) * alpha(); }

double PathologicalProfile::period(int level) const { return std::ldexp(1.0, -(1 << level)); }

double PathologicalProfile::peak_width(int level) const {
    return std::exp2(log2_delta(level) - static_cast<double>(1 << level));
}

double PathologicalProfile::peak_start(int level, std::int64_t n) const {
    const int nj = 1 << level;
    return std::ldexp(static_cast<double>(n), -nj) - std::ldexp(1.0, -2 * nj - 1);
}

int PathologicalProfile::level_at(double x) const {
    int found = 0;
    for (int j = 1; j <= levels; ++j) {
        const int nj = 1 << j;
        const double u = std::ldexp(x, nj) + std::ldexp(1.0, -nj - 1);
        const double frac = u - std::floor(u);
        if (frac > 0.0 && frac < std::exp2(log2_delta(j))) found = j;
    }
    return found;
}

double PathologicalProfile::peak_measure(int level, double a, double b) const {
    if (!(a < b)) return 0.0;
    const int nj = 1 << level;
    const double shift = std::ldexp(1.0, -nj - 1);
    const double delta = std::exp2(log2_delta(level));
    const double ua = std::ldexp(a, nj) + shift;
    const double ub = std::ldexp(b, nj) + shift;
    const double fa = std::floor(ua), fb = std::floor(ub);
    const double units = (fb - fa) * delta + std::min(ub - fb, delta) - std::min(ua - fa, delta);
    return std::ldexp(units, -nj);
}

Weight Weight::constant(double c) {
    if (!(c > 0.0)) throw ConfigError("constant weight must be positive");
    Weight w;
    w.scale_ = c;
    return w;
}

Weight Weight::power(double exponent, double center) {
    Weight w;
    if (exponent != 0.0) w.powers_.push_back({center, exponent});
    return w;
}

Weight Weight::pathological(double r, int levels, double A) {
    PathologicalProfile p{r, levels, A};
    p.validate();
    Weight w;
    w.profile_ = p;
    w.profile_exponent_ = 1.0;
    return w;
}

Weight Weight::pow(double e) const {
    Weight w;
    w.scale_ = std::pow(scale_, e);
    if (e != 0.0) {
        for (const auto& f : powers_) w.powers_.push_back({f.center, f.exponent * e});
        if (profile_) {
            w.profile_ = profile_;
            w.profile_exponent_ = profile_exponent_ * e;
        }
    }
    return w;
}

Weight Weight::operator*(const Weight& other) const {
    Weight w = *this;
    w.scale_ *= other.scale_;
    for (const auto& f : other.powers_) {
        auto it = std::find_if(w.powers_.begin(), w.powers_.end(), [&](const PowerFactor& g) { return g.center == f.center; });
        if (it == w.powers_.end()) w.powers_.push_back(f);
        else it->exponent += f.exponent;
    }
    std::erase_if(w.powers_, [](const PowerFactor& f) { return f.exponent == 0.0; });
    std::sort(w.powers_.begin(), w.powers_.end(), [](const PowerFactor& x, const PowerFactor& y) { return x.center < y.center; });
    if (other.profile_) {
        if (w.profile_ && !(*w.profile_ == *other.profile_))
            throw ConfigError("product of two different pathological profiles is not supported");
        w.profile_ = other.profile_;
        w.profile_exponent_ += other.profile_exponent_;
    }
    if (w.profile_ && w.profile_exponent_ == 0.0) w.profile_.reset();
    return w;
}

double Weight::base_value(double x) const {
    double v = scale_;
    for (const auto& f : powers_) v *= std::pow(std::abs(x - f.center), f.exponent);
    return v;
}

double Weight::operator()(double x) const {
    double v = base_value(x);
    if (profile_) {
        if (int level = profile_->level_at(x); level > 0) v *= std::exp2(profile_exponent_ * profile_->log2_height(level));
    }
    return v;
}

double Weight::graded_integral(double a, double b) const {
    // Breakpoints at the singular centers; each segment is split in half and
    // integrated on a geometric mesh toward its ends.
    std::vector<double> cuts{a};
    for (const auto& f : powers_) {
        if (f.center >= a && f.center <= b) {
            if (f.exponent <= -1.0) throw DivergedIntegral("power singularity not integrable", a, b);
            if (f.center > a && f.center < b) cuts.push_back(f.center);
        }
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    const auto fn = [this](double x) { return base_value(x); };
    const auto toward = [&](double end, double len, double dir) {
        // integral of base over [end, end + dir*len] graded toward `end`
        double total = 0.0;
        double outer = len;
        const double floor_len = 1e-13 * std::max(1.0, std::abs(end));
        for (int k = 0; k < kGradingLevels && outer > floor_len; ++k) {
            const double inner = 0.5 * outer;
            const double x0 = end + dir * inner, x1 = end + dir * outer;
            total += integrate_gl(fn, std::min(x0, x1), std::max(x0, x1), 16);
            outer = inner;
        }
        // tail [end, end + dir*outer]
        const PowerFactor* sing = nullptr;
        for (const auto& f : powers_)
            if (f.center == end) sing = &f;
        if (sing == nullptr) return total + integrate_gl(fn, std::min(end, end + dir * outer), std::max(end, end + dir * outer), 16);
        double rest = scale_;
        for (const auto& f : powers_)
            if (&f != sing) rest *= std::pow(std::abs(end - f.center), f.exponent);
        return total + rest * std::pow(outer, sing->exponent + 1.0) / (sing->exponent + 1.0);
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double s = cuts[i], e = cuts[i + 1];
        if (e <= s) continue;
        const double half = 0.5 * (e - s);
        total += toward(s, half, +1.0) + toward(e, half, -1.0);
    }
    return total;
}

double Weight::base_integral(double a, double b) const {
    if (powers_.empty()) return scale_ * (b - a);
    if (powers_.size() == 1) {
        const auto& f = powers_.front();
        try {
            return scale_ * power_integral(f.exponent, a - f.center, b - f.center);
        } catch (const DivergedIntegral&) {
            throw DivergedIntegral("power singularity not integrable", a, b);
        }
    }
    return graded_integral(a, b);
}

double Weight::integral(double a, double b) const {
    if (!(a < b)) return 0.0;
    double total = base_integral(a, b);
    if (!profile_) return total;
    const PathologicalProfile& p = *profile_;
    for (int j = 1; j <= p.levels; ++j) {
        const double log2_factor = profile_exponent_ * p.log2_height(j);
        if (log2_factor > 1000.0) throw ConfigError("pathological weight power overflows double range");
        const double excess = std::exp2(log2_factor) - 1.0;
        if (powers_.empty()) {
            total += scale_ * excess * p.peak_measure(j, a, b);
            continue;
        }
        const double period = p.period(j);
        const double width = p.peak_width(j);
        const auto n_first = static_cast<std::int64_t>(std::floor((a - width) / period));
        const auto n_last = static_cast<std::int64_t>(std::ceil(b / period)) + 1;
        if (static_cast<std::size_t>(n_last - n_first) <= kPeakEnumerationLimit) {
            for (std::int64_t n = n_first; n <= n_last; ++n) {
                const double s = std::max(a, p.peak_start(j, n));
                const double e = std::min(b, p.peak_start(j, n) + width);
                if (e > s) total += excess * (e - s) * base_value(0.5 * (s + e));
            }
        } else {
            total += excess * (width / period) * base_integral(a, b);
        }
    }
    return total;
}

std::string Weight::describe() const {
    std::ostringstream os;
    os.precision(6);
    bool any = false;
    if (scale_ != 1.0 || (powers_.empty() && !profile_)) {
        os << scale_;
        any = true;
    }
    for (const auto& f : powers_) {
        if (any) os << "*";
        os << "|x-" << f.center << "|^" << f.exponent;
        any = true;
    }
    if (profile_) {
        if (any) os << "*";
        os << "patho(r=" << profile_->r << ",J=" << profile_->levels << ",A=" << profile_->A << ")^" << profile_exponent_;
    }
    return os.str();
}

Weight nu_weight(const Weight& mu, const Weight& lambda) { return mu.pow(0.5) * lambda.pow(-0.5); }

std::vector<double> cell_averages(const Weight& w, const CellBasis& basis) {
    std::vector<double> out(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& c = basis.cell(i);
        out[i] = w.average(c.lo(), c.hi());
        if (!(out[i] > 0.0) || !std::isfinite(out[i]))
            throw DegenerateWeight("cell average of " + w.describe() + " is not positive on " + c.id());
    }
    return out;
}

std::vector<std::pair<double, double>> random_intervals(const TruncationWindow& window, std::size_t count,
                                                        std::uint64_t seed) {
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    std::uint64_t state = seed;
    const auto unit = [&state] { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; };
    const double span = window.hi - window.lo;
    const double octaves = std::log2(span / window.cell_length());
    for (std::size_t i = 0; i < count; ++i) {
        const double len = span * std::exp2(-unit() * octaves);
        const double a = window.lo + unit() * (span - len);
        out.emplace_back(a, std::min(a + len, window.hi));
    }
    return out;
}

A2Report a2_constant(const Weight& w, const TruncationWindow& window, const IntervalFamily& family) {
    window.validate();
    const Weight winv = w.inverse();
    A2Report rep;
    rep.constant = 0.0;
    const auto consider = [&](double a, double b) {
        const double v = w.average(a, b) * winv.average(a, b);
        ++rep.family_size;
        if (v > rep.constant) {
            rep.constant = v;
            rep.arg_lo = a;
            rep.arg_hi = b;
        }
    };
    if (family.dyadic_standard)
        for (const auto& I : enumerate_intervals(GridKind::standard, window)) consider(I.lo(), I.hi());
    if (family.dyadic_third)
        for (const auto& I : enumerate_intervals(GridKind::third_shift, window)) consider(I.lo(), I.hi());
    for (const auto& [a, b] : random_intervals(window, family.random_count, family.seed)) consider(a, b);
    if (rep.family_size == 0) throw ConfigError("A2 interval family is empty");
    return rep;
}

double doubling_ratio(const Weight& w, double a, double b, double s) {
    if (!(s > 1.0)) throw ConfigError("doubling ratio needs s > 1");
    const double c = 0.5 * (a + b), half = 0.5 * (b - a) * s;
    return w.integral(c - half, c + half) / (s * w.integral(a, b));
}

ReverseHolderReport reverse_holder_exponent(const Weight& w, const TruncationWindow& window, double threshold) {
    static constexpr double kLadder[] = {2.25, 2.5, 3.0, 4.0};
    const auto intervals = enumerate_intervals(GridKind::standard, window);
    ReverseHolderReport rep;
    for (double r : kLadder) {
        const Weight wr = w.pow(0.5 * r);
        double sup = 0.0;
        try {
            for (const auto& I : intervals) {
                const double a = I.lo(), b = I.hi();
                sup = std::max(sup, std::pow(wr.average(a, b), 2.0 / r) / w.average(a, b));
            }
        } catch (const DivergedIntegral&) {
            sup = std::numeric_limits<double>::infinity();
        }
        rep.ladder.emplace_back(r, sup);
        if (sup <= threshold) {
            rep.exponent = r;
            rep.constant = sup;
        }
    }
    return rep;
}

}  // namespace bloomlab
