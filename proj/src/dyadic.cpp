#include "bloomlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bloomlab {

namespace {

int parity_sign(int scale) { return (scale & 1) ? -1 : 1; }

}  // namespace

std::string to_string(GridKind g) { return g == GridKind::standard ? "standard" : "third_shift"; }

GridKind grid_from_string(const std::string& name) {
    if (name == "standard" || name == "D0") return GridKind::standard;
    if (name == "third_shift" || name == "D1") return GridKind::third_shift;
    throw ConfigError("unknown grid '" + name + "'");
}

double grid_offset(GridKind grid, int scale) {
    if (grid == GridKind::standard) return 0.0;
    return parity_sign(scale) / 3.0;
}

double DyadicInterval::length() const { return std::ldexp(1.0, -scale); }

double DyadicInterval::lo() const {
    if (grid == GridKind::standard) return std::ldexp(static_cast<double>(index), -scale);
    return std::ldexp((3.0 * static_cast<double>(index) + parity_sign(scale)) / 3.0, -scale);
}

double DyadicInterval::hi() const {
    if (grid == GridKind::standard) return std::ldexp(static_cast<double>(index + 1), -scale);
    return std::ldexp((3.0 * static_cast<double>(index + 1) + parity_sign(scale)) / 3.0, -scale);
}

DyadicInterval DyadicInterval::left_child() const {
    std::int64_t k = 2 * index;
    if (grid == GridKind::third_shift) k += parity_sign(scale);
    return {grid, scale + 1, k};
}

DyadicInterval DyadicInterval::right_child() const {
    DyadicInterval c = left_child();
    ++c.index;
    return c;
}

DyadicInterval DyadicInterval::parent() const {
    std::int64_t k = index;
    if (grid == GridKind::third_shift) k -= parity_sign(scale - 1);
    // arithmetic shift is floor division for negative values
    return {grid, scale - 1, k >> 1};
}

DyadicInterval DyadicInterval::sibling() const {
    DyadicInterval p = parent();
    DyadicInterval l = p.left_child();
    return l == *this ? p.right_child() : l;
}

bool DyadicInterval::contains(const DyadicInterval& other) const {
    if (other.grid != grid || other.scale < scale) return false;
    DyadicInterval a = other;
    while (a.scale > scale) a = a.parent();
    return a.index == index;
}

std::string DyadicInterval::id() const {
    std::ostringstream os;
    os << (grid == GridKind::standard ? "D0" : "D1") << ":j=" << scale << ":k=" << index;
    return os.str();
}

DyadicInterval interval_containing(GridKind grid, int scale, double x) {
    const double u = std::ldexp(x, scale) - grid_offset(grid, scale);
    DyadicInterval I{grid, scale, static_cast<std::int64_t>(std::floor(u))};
    // guard against rounding in u near an endpoint
    if (x < I.lo()) --I.index;
    else if (x >= I.hi()) ++I.index;
    return I;
}

void TruncationWindow::validate() const {
    if (!(lo < hi)) throw ConfigError("empty window");
    if (j_min > j_max) throw ConfigError("j_min > j_max");
    const double n = std::ldexp(hi - lo, j_max);
    if (n < 1.0 || n != std::floor(n))
        throw ConfigError("window length is not a whole number of cells at scale j_max");
}

double TruncationWindow::cell_length() const { return std::ldexp(1.0, -j_max); }

std::size_t TruncationWindow::cell_count() const {
    return static_cast<std::size_t>(std::ldexp(hi - lo, j_max));
}

TruncationWindow TruncationWindow::with_scales(int jmin, int jmax) const {
    TruncationWindow w = *this;
    w.j_min = jmin;
    w.j_max = jmax;
    return w;
}

std::vector<DyadicInterval> intervals_at_scale(GridKind grid, int scale, double lo, double hi) {
    std::vector<DyadicInterval> out;
    const double off = grid_offset(grid, scale);
    const auto kmin = static_cast<std::int64_t>(std::ceil(std::ldexp(lo, scale) - off)) - 1;
    const auto kmax = static_cast<std::int64_t>(std::floor(std::ldexp(hi, scale) - off)) + 1;
    for (std::int64_t k = kmin; k <= kmax; ++k) {
        DyadicInterval I{grid, scale, k};
        if (I.lo() >= lo && I.hi() <= hi) out.push_back(I);
    }
    return out;
}

std::vector<DyadicInterval> enumerate_intervals(GridKind grid, const TruncationWindow& window) {
    window.validate();
    std::vector<DyadicInterval> out;
    for (int j = window.j_min; j <= window.j_max; ++j) {
        auto level = intervals_at_scale(grid, j, window.lo, window.hi);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

double haar_eval(const DyadicInterval& I, double x) {
    const double a = I.lo(), b = I.hi();
    if (x < a || x >= b) return 0.0;
    const double v = 1.0 / std::sqrt(b - a);
    return x < I.mid() ? v : -v;
}

double haar_integral(const DyadicInterval& I, double a, double b) {
    const double lo = I.lo(), hi = I.hi(), m = I.mid();
    const double left = std::max(0.0, std::min(b, m) - std::max(a, lo));
    const double right = std::max(0.0, std::min(b, hi) - std::max(a, m));
    return (left - right) / std::sqrt(hi - lo);
}

std::optional<DyadicInterval> find_cover(double a, double b, double max_ratio) {
    const double n = b - a;
    if (!(n > 0.0)) throw ConfigError("find_cover: empty interval");
    const int finest = static_cast<int>(std::floor(-std::log2(n)));
    const int coarsest = static_cast<int>(std::ceil(-std::log2(max_ratio * n)));
    for (int j = finest; j >= coarsest; --j) {
        const double len = std::ldexp(1.0, -j);
        if (len < n || len > max_ratio * n) continue;
        for (GridKind g : {GridKind::standard, GridKind::third_shift}) {
            DyadicInterval Q = interval_containing(g, j, a);
            if (Q.lo() <= a && b <= Q.hi()) return Q;
        }
    }
    return std::nullopt;
}

CellBasis::CellBasis(GridKind grid, TruncationWindow window) : grid_(grid), window_(window) {
    window_.validate();
    h_ = window_.cell_length();
    cells_ = intervals_at_scale(grid_, window_.j_max, window_.lo, window_.hi);
    if (cells_.empty()) throw ConfigError("window holds no cells of the requested grid");
    first_index_ = cells_.front().index;
    if (window_.j_max - 1 >= window_.j_min)
        haar_ = enumerate_intervals(grid_, haar_window());
}

TruncationWindow CellBasis::haar_window() const {
    return window_.with_scales(window_.j_min, window_.j_max - 1);
}

std::pair<std::size_t, std::size_t> CellBasis::cell_range(const DyadicInterval& I) const {
    if (I.grid != grid_ || I.scale > window_.j_max) throw ConfigError("interval not resolved by basis: " + I.id());
    DyadicInterval c = I;
    while (c.scale < window_.j_max) c = c.left_child();
    const auto first = c.index - first_index_;
    const auto count = std::int64_t{1} << (window_.j_max - I.scale);
    if (first < 0 || first + count > static_cast<std::int64_t>(cells_.size()))
        throw ConfigError("interval outside basis window: " + I.id());
    return {static_cast<std::size_t>(first), static_cast<std::size_t>(first + count)};
}

std::size_t CellBasis::locate(double x) const {
    if (x < window_.lo || x >= window_.hi) return cells_.size();
    const auto k = interval_containing(grid_, window_.j_max, x).index - first_index_;
    if (k < 0 || k >= static_cast<std::int64_t>(cells_.size())) return cells_.size();
    return static_cast<std::size_t>(k);
}

std::vector<double> CellBasis::haar_vector(const DyadicInterval& I) const {
    if (I.scale >= window_.j_max) throw ConfigError("Haar function not cellwise constant: " + I.id());
    std::vector<double> v(cells_.size(), 0.0);
    const auto [first, last] = cell_range(I);
    const std::size_t half = (last - first) / 2;
    const double c = 1.0 / std::sqrt(static_cast<double>(last - first));
    for (std::size_t i = first; i < first + half; ++i) v[i] = c;
    for (std::size_t i = first + half; i < last; ++i) v[i] = -c;
    return v;
}

}  // namespace bloomlab
