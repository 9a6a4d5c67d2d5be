#pragma once

#include "bloomlab/besov.hpp"
#include "bloomlab/operators.hpp"
#include "bloomlab/schatten.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bloomlab {

std::string library_version();

struct WeightSpec {
    std::string kind = "constant";  // constant | power | pathological
    double value = 1.0;
    double exponent = 0.0;
    double center = 1.0 / 3.0;
    double r = 2.0;
    int levels = 1;
    double A = 9.0;

    [[nodiscard]] Weight build() const;
    bool operator==(const WeightSpec&) const = default;
};

struct WeightPairSpec {
    WeightSpec mu;
    WeightSpec lambda;

    [[nodiscard]] WeightPair build() const { return {mu.build(), lambda.build()}; }
    [[nodiscard]] std::string name() const;
    bool operator==(const WeightPairSpec&) const = default;
};

struct HaarTermSpec {
    std::string grid = "D0";
    int scale = 0;
    std::int64_t index = 0;
    double coefficient = 1.0;
    bool operator==(const HaarTermSpec&) const = default;
};

struct SymbolSpec {
    std::string kind = "sin2pi";  // sin2pi | parabola | ramp_bump | cubic | identity | constant | haar
    double frequency = 1.0;
    double value = 0.0;
    std::vector<HaarTermSpec> terms;

    [[nodiscard]] Symbol build() const;
    [[nodiscard]] std::string name() const;
    [[nodiscard]] bool smooth() const { return kind != "haar"; }
    bool operator==(const SymbolSpec&) const = default;
};

// Top-level keys: window, scales, grids, weights, symbols, p, experiment, seed, out.
struct ExperimentConfig {
    double window_lo = -4.0;
    double window_hi = 4.0;
    int j_min = -2;
    int j_max = 7;
    bool refine = false;
    std::vector<std::string> grids{"D0", "D1"};
    std::vector<WeightPairSpec> weights;
    std::vector<SymbolSpec> symbols;
    std::vector<double> p{2.0};
    std::string experiment = "E2";
    std::optional<std::uint64_t> seed;
    std::string out = "results";

    /// Documented defaults of each experiment E1..E8.
    static ExperimentConfig defaults_for(const std::string& experiment);
    static ExperimentConfig from_text(const std::string& text);
    static ExperimentConfig from_file(const std::filesystem::path& path);
    [[nodiscard]] std::string to_text() const;
    /// Throws ConfigError; seed is required for randomized experiments.
    void validate() const;
    [[nodiscard]] TruncationWindow window() const { return {window_lo, window_hi, j_min, j_max}; }
    [[nodiscard]] bool randomized() const;
    bool operator==(const ExperimentConfig&) const = default;
};

std::vector<WeightPairSpec> weight_battery();
std::vector<SymbolSpec> smooth_symbol_battery();

struct RatioRow {
    std::string case_id;
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
};

struct RatioTable {
    std::vector<RatioRow> rows;
    std::vector<std::string> skipped;  // "case: reason"

    /// Records a row; 0/0 cases are skipped as "zero symbol".
    void add(const std::string& case_id, double numerator, double denominator);
    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
    [[nodiscard]] double spread() const { return rows.empty() ? 1.0 : max() / min(); }
    void write_csv(std::ostream& os) const;
};

struct Artifact {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct ExperimentResult {
    std::string experiment;
    RatioTable table;
    std::vector<Artifact> artifacts;
    std::vector<std::string> summary;  // "key=value" lines
    bool passed = false;
};

/// Runs the experiment; independent cases are distributed over `threads`
/// workers and collected in declaration order.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

// Pinned constants for the one-sided predicates.
inline constexpr double kNwoConstant = 10.0;
inline constexpr double kDyadicContainmentConstant = 10.0;
inline constexpr double kMedianChainConstant = 100.0;

struct NondegeneracyReport {
    bool testable = false;
    double constant = 0.0;  // max over admissible (Q-hat, I0) of |sum| |I0|
    std::string q_hat;
    std::string i0;
};

/// Q-hat ranges over same-size intervals at distance <= |Q|, Q-hat != Q; I0
/// is their smallest common ancestor and must satisfy |I0| <= C |Q|.
NondegeneracyReport epsilon_nondegeneracy_check(const SignPattern& eps, GridKind grid, const TruncationWindow& window,
                                                const DyadicInterval& Q, double C = 8.0);

/// FNV-1a of the canonical config text.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Writes <out>/<experiment>_ratios.csv, its .meta.json sidecar, and one CSV per artifact.
std::vector<std::filesystem::path> emit_report(const ExperimentResult& result, const ExperimentConfig& cfg,
                                               const std::filesystem::path& dir);

}  // namespace bloomlab
