#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bloomlab {

/// Raised for malformed windows, parameters and configurations.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class GridKind : std::uint8_t { standard = 0, third_shift = 1 };

std::string to_string(GridKind g);
GridKind grid_from_string(const std::string& name);

// Identity is (grid, scale, index). Endpoints are recomputed from integers on
// demand, never accumulated. For the third-shift grid the interval at scale j
// is 2^-j * ([0,1) + k + (-1)^j / 3).
struct DyadicInterval {
    GridKind grid = GridKind::standard;
    int scale = 0;
    std::int64_t index = 0;

    [[nodiscard]] double length() const;
    [[nodiscard]] double lo() const;
    [[nodiscard]] double hi() const;
    [[nodiscard]] double mid() const { return 0.5 * (lo() + hi()); }

    [[nodiscard]] DyadicInterval left_child() const;
    [[nodiscard]] DyadicInterval right_child() const;
    [[nodiscard]] DyadicInterval parent() const;
    [[nodiscard]] DyadicInterval sibling() const;

    [[nodiscard]] bool contains(double x) const { return lo() <= x && x < hi(); }
    /// Same-grid nesting test in exact integer arithmetic.
    [[nodiscard]] bool contains(const DyadicInterval& other) const;

    [[nodiscard]] std::string id() const;

    auto operator<=>(const DyadicInterval&) const = default;
};

/// Offset of the grid at the given scale, in units of 2^-scale.
double grid_offset(GridKind grid, int scale);

/// The unique interval of `grid` at `scale` containing x.
DyadicInterval interval_containing(GridKind grid, int scale, double x);

struct TruncationWindow {
    double lo = -4.0;
    double hi = 4.0;
    int j_min = -2;
    int j_max = 7;

    void validate() const;
    [[nodiscard]] double cell_length() const;
    /// Number of finest cells of the standard grid, (hi - lo) 2^j_max.
    [[nodiscard]] std::size_t cell_count() const;
    [[nodiscard]] TruncationWindow with_scales(int jmin, int jmax) const;
    [[nodiscard]] bool operator==(const TruncationWindow&) const = default;
};

/// Intervals of `grid` lying fully inside the window, scale-major then by
/// translation. Intervals protruding outside the window are dropped.
std::vector<DyadicInterval> enumerate_intervals(GridKind grid, const TruncationWindow& window);

/// Intervals of a single scale inside [lo, hi).
std::vector<DyadicInterval> intervals_at_scale(GridKind grid, int scale, double lo, double hi);

/// h_I: +|I|^-1/2 on the left child, -|I|^-1/2 on the right child.
double haar_eval(const DyadicInterval& interval, double x);

/// Integral of h_I over [a, b).
double haar_integral(const DyadicInterval& interval, double a, double b);

/// Smallest Q in the standard or third-shift grid with [a,b) inside Q and
/// |Q| <= max_ratio * (b - a).
std::optional<DyadicInterval> find_cover(double a, double b, double max_ratio = 6.0);

// Orthonormal basis e_i = |cell|^-1/2 1_cell over the finest cells of one grid
// inside a window. Haar functions of intervals down to scale j_max - 1 are
// constant on the cells and so exactly representable.
class CellBasis {
public:
    CellBasis(GridKind grid, TruncationWindow window);

    [[nodiscard]] GridKind grid() const { return grid_; }
    [[nodiscard]] const TruncationWindow& window() const { return window_; }
    [[nodiscard]] std::size_t size() const { return cells_.size(); }
    [[nodiscard]] double cell_length() const { return h_; }
    [[nodiscard]] const DyadicInterval& cell(std::size_t i) const { return cells_[i]; }
    [[nodiscard]] const std::vector<DyadicInterval>& cells() const { return cells_; }
    [[nodiscard]] double cell_lo(std::size_t i) const { return cells_[i].lo(); }
    [[nodiscard]] double cell_mid(std::size_t i) const { return cells_[i].mid(); }

    /// Half-open range [first, last) of cells covered by a same-grid interval.
    [[nodiscard]] std::pair<std::size_t, std::size_t> cell_range(const DyadicInterval& interval) const;
    /// Cell index containing x, or size() when outside.
    [[nodiscard]] std::size_t locate(double x) const;

    /// Window restricted to scales whose Haar functions are cellwise constant.
    [[nodiscard]] TruncationWindow haar_window() const;
    /// Enumerated intervals of scales j_min..j_max-1, in enumeration order.
    [[nodiscard]] const std::vector<DyadicInterval>& haar_intervals() const { return haar_; }

    /// Coefficients of h_I in the cell basis.
    [[nodiscard]] std::vector<double> haar_vector(const DyadicInterval& interval) const;

private:
    GridKind grid_;
    TruncationWindow window_;
    double h_;
    std::int64_t first_index_;
    std::vector<DyadicInterval> cells_;
    std::vector<DyadicInterval> haar_;
};

}  // namespace bloomlab
