#include "bloomlab/lab.hpp"

#include "bloomlab/io.hpp"
#include "bloomlab/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#ifndef BLOOMLAB_VERSION
#define BLOOMLAB_VERSION "0.0.0"
#endif

namespace bloomlab {

using nlohmann::json;

std::string library_version() { return BLOOMLAB_VERSION; }

namespace {

// Continuous quadrature runs on at most 1024 cells of the window [-4, 4).
constexpr int kContinuousMaxScale = 7;

template <class F>
auto parallel_map(std::size_t n, unsigned threads, F&& fn) {
    using T = decltype(fn(std::size_t{0}));
    std::vector<T> out(n);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += threads) out[i] = fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::string num(double v) { return fmt12(v); }

std::string p_tag(double p) { return "p=" + num(p); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.contains(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

json to_json(const WeightSpec& w) {
    if (w.kind == "constant") return {{"kind", w.kind}, {"value", w.value}};
    if (w.kind == "power") return {{"kind", w.kind}, {"exponent", w.exponent}, {"center", w.center}};
    return {{"kind", w.kind}, {"r", w.r}, {"levels", w.levels}, {"A", w.A}};
}

WeightSpec weight_from_json(const json& j) {
    check_keys(j, {"kind", "value", "exponent", "center", "r", "levels", "A"}, "weight spec");
    WeightSpec w;
    w.kind = j.at("kind").get<std::string>();
    if (w.kind == "constant") {
        w.value = j.value("value", 1.0);
    } else if (w.kind == "power") {
        w.exponent = j.at("exponent").get<double>();
        w.center = j.value("center", 1.0 / 3.0);
    } else if (w.kind == "pathological") {
        w.r = j.value("r", 2.0);
        w.levels = j.value("levels", 1);
        w.A = j.value("A", 9.0);
    } else {
        throw ConfigError("unknown weight kind '" + w.kind + "'");
    }
    return w;
}

json to_json(const SymbolSpec& s) {
    json j{{"kind", s.kind}};
    if (s.kind == "sin2pi") j["frequency"] = s.frequency;
    if (s.kind == "constant") j["value"] = s.value;
    if (s.kind == "haar") {
        j["terms"] = json::array();
        for (const auto& t : s.terms)
            j["terms"].push_back({{"grid", t.grid}, {"scale", t.scale}, {"index", t.index}, {"coefficient", t.coefficient}});
    }
    return j;
}

SymbolSpec symbol_from_json(const json& j) {
    check_keys(j, {"kind", "frequency", "value", "terms"}, "symbol spec");
    SymbolSpec s;
    s.kind = j.at("kind").get<std::string>();
    static const std::set<std::string> kinds{"sin2pi", "parabola", "ramp_bump", "cubic", "identity", "constant", "haar"};
    if (!kinds.contains(s.kind)) throw ConfigError("unknown symbol kind '" + s.kind + "'");
    s.frequency = j.value("frequency", 1.0);
    s.value = j.value("value", 0.0);
    if (j.contains("terms"))
        for (const auto& t : j.at("terms")) {
            check_keys(t, {"grid", "scale", "index", "coefficient"}, "haar term");
            s.terms.push_back({t.value("grid", std::string("D0")), t.at("scale").get<int>(), t.at("index").get<std::int64_t>(),
                               t.at("coefficient").get<double>()});
        }
    if (s.kind == "haar" && s.terms.empty()) throw ConfigError("haar symbol needs terms");
    return s;
}

std::string weight_name(const WeightSpec& w) {
    if (w.kind == "constant") return "c" + num(w.value);
    if (w.kind == "power") return "pow" + num(w.exponent) + "@" + num(w.center);
    return "patho_r" + num(w.r) + "_J" + std::to_string(w.levels) + "_A" + num(w.A);
}

SymbolSpec sym(std::string kind, double frequency = 1.0) {
    SymbolSpec s;
    s.kind = std::move(kind);
    s.frequency = frequency;
    return s;
}

HaarTermSpec term(int scale, std::int64_t index, double c) { return {"D0", scale, index, c}; }

SymbolSpec haar_sum_a() { return {"haar", 1.0, 0.0, {term(0, 0, 1.0), term(2, 1, -0.5), term(3, 5, 0.25)}}; }
SymbolSpec haar_sum_b() { return {"haar", 1.0, 0.0, {term(1, 1, 1.0), term(4, 3, 0.7), term(5, 20, -0.4)}}; }

std::string case_name(const SymbolSpec& s, const WeightPairSpec& w) { return s.name() + "|" + w.name(); }

std::vector<HaarTerm> coefficients_on(const Symbol& b, const std::vector<DyadicInterval>& intervals) {
    std::vector<HaarTerm> out;
    out.reserve(intervals.size());
    for (const auto& I : intervals) out.push_back({I, b.haar_coefficient(I)});
    return out;
}

OperatorMatrix conjugated(const OperatorMatrix& T, const WeightPair& w, const CellBasis& basis) {
    return weight_conjugate(T, cell_averages(w.lambda, basis), cell_averages(w.mu, basis));
}

// ---------------------------------------------------------------- E1

struct E1Case {
    std::vector<double> schatten, besov;
};

E1Case e1_case(const Symbol& b, const WeightPair& w, const std::vector<double>& ps, const TruncationWindow& window) {
    const CellBasis basis(GridKind::standard, window);
    const auto coeffs = coefficients_on(b, basis.haar_intervals());
    const auto spec = singular_values(conjugated(paraproduct_matrix(coeffs, basis), w, basis));
    E1Case c;
    for (double p : ps) {
        c.schatten.push_back(schatten_norm(spec, p));
        c.besov.push_back(dyadic_besov_norm(coeffs, w, p).value);
    }
    return c;
}

ExperimentResult run_e1(const ExperimentConfig& cfg, unsigned threads) {
    ExperimentResult res;
    const auto window = cfg.window();
    check_feasible(CellBasis(GridKind::standard, window));
    std::vector<std::pair<SymbolSpec, WeightPairSpec>> cases;
    for (const auto& s : cfg.symbols)
        for (const auto& w : cfg.weights) cases.emplace_back(s, w);

    const auto base = parallel_map(cases.size(), threads, [&](std::size_t i) {
        return e1_case(cases[i].first.build(), cases[i].second.build(), cfg.p, window);
    });
    std::vector<E1Case> fine;
    if (cfg.refine)
        fine = parallel_map(cases.size(), threads, [&](std::size_t i) {
            if (!cases[i].first.smooth()) return E1Case{};
            return e1_case(cases[i].first.build(), cases[i].second.build(), cfg.p,
                           window.with_scales(window.j_min, window.j_max + 1));
        });

    bool ok = true;
    double worst_change = 0.0;
    Artifact spreads{"spread_by_p", {"p", "min", "max", "spread"}, {}};
    for (std::size_t k = 0; k < cfg.p.size(); ++k) {
        RatioTable per_p;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const std::string id = case_name(cases[i].first, cases[i].second) + "|" + p_tag(cfg.p[k]) + "|N=" +
                                   std::to_string(window.cell_count());
            res.table.add(id, base[i].schatten[k], base[i].besov[k]);
            per_p.add(id, base[i].schatten[k], base[i].besov[k]);
            if (cfg.refine && cases[i].first.smooth() && base[i].besov[k] > 0.0) {
                const double r0 = base[i].schatten[k] / base[i].besov[k];
                const double r1 = fine[i].schatten[k] / fine[i].besov[k];
                worst_change = std::max(worst_change, std::abs(r1 / r0 - 1.0));
            }
        }
        spreads.rows.push_back({num(cfg.p[k]), num(per_p.min()), num(per_p.max()), num(per_p.spread())});
        if (per_p.spread() > 10.0) ok = false;
        res.summary.push_back("spread_" + p_tag(cfg.p[k]) + "=" + num(per_p.spread()));
    }
    res.artifacts.push_back(spreads);

    // single Haar function, unweighted, p = 2: both sides are exactly 1
    if (window.j_min <= 0 && window.lo <= 0.0 && window.hi >= 1.0) {
        const WeightPair flat{Weight::constant(1.0), Weight::constant(1.0)};
        const Symbol h = Symbol::haar({{{GridKind::standard, 0, 0}, 1.0}});
        const auto c = e1_case(h, flat, {2.0}, window);
        const bool exact = std::abs(c.schatten[0] - 1.0) <= 1e-9 && std::abs(c.besov[0] - 1.0) <= 1e-9;
        res.summary.push_back("single_haar_schatten=" + num(c.schatten[0]));
        res.summary.push_back("single_haar_besov=" + num(c.besov[0]));
        ok = ok && exact;
    }
    if (cfg.refine) {
        res.summary.push_back("max_refinement_change=" + num(worst_change));
        ok = ok && worst_change < 0.10;
    }
    res.passed = ok && !res.table.rows.empty();
    return res;
}

// ---------------------------------------------------------------- E2

struct E2Case {
    double hs = 0.0, besov = 0.0, besov_err = 0.0;
};

E2Case e2_case(const Symbol& b, const WeightPair& w, const TruncationWindow& window) {
    const CellBasis basis(GridKind::standard, window);
    check_feasible(basis);
    const auto C = conjugated(hilbert_commutator(b.cell_averages(basis), basis), w, basis);
    const auto n = continuous_besov_norm_p2(b, w, window);
    return {hilbert_schmidt_norm(C.m), n.value, n.error_estimate};
}

ExperimentResult run_e2(const ExperimentConfig& cfg, unsigned threads) {
    ExperimentResult res;
    const auto window = cfg.window();
    std::vector<std::pair<SymbolSpec, WeightPairSpec>> cases;
    for (const auto& s : cfg.symbols) {
        if (!s.smooth()) {
            res.table.skipped.push_back(s.name() + ": jump symbol has no finite continuous norm");
            continue;
        }
        for (const auto& w : cfg.weights) cases.emplace_back(s, w);
    }
    const auto base = parallel_map(cases.size(), threads, [&](std::size_t i) {
        return e2_case(cases[i].first.build(), cases[i].second.build(), window);
    });
    std::vector<E2Case> fine;
    if (cfg.refine)
        fine = parallel_map(cases.size(), threads, [&](std::size_t i) {
            return e2_case(cases[i].first.build(), cases[i].second.build(),
                           window.with_scales(window.j_min, window.j_max + 1));
        });
    Artifact refine{"refinement", {"case", "ratio_N", "ratio_2N", "relative_change", "quadrature_error"}, {}};
    double worst = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const std::string id = case_name(cases[i].first, cases[i].second) + "|N=" + std::to_string(window.cell_count());
        res.table.add(id, base[i].hs, base[i].besov);
        if (cfg.refine && base[i].besov > 0.0) {
            const double r0 = base[i].hs / base[i].besov, r1 = fine[i].hs / fine[i].besov;
            const double change = std::abs(r1 / r0 - 1.0);
            worst = std::max(worst, change);
            refine.rows.push_back({id, num(r0), num(r1), num(change), num(base[i].besov_err)});
        }
    }
    if (cfg.refine) res.artifacts.push_back(refine);
    res.summary.push_back("spread=" + num(res.table.spread()));
    res.summary.push_back("cases=" + std::to_string(res.table.rows.size()));
    if (cfg.refine) res.summary.push_back("max_refinement_change=" + num(worst));
    res.passed = !res.table.rows.empty() && res.table.spread() <= 4.0 && (!cfg.refine || worst < 0.10);
    return res;
}

// ---------------------------------------------------------------- E3 / E4

ExperimentResult run_dyadic_vs_continuous(const ExperimentConfig& cfg, unsigned threads, bool intersection) {
    ExperimentResult res;
    const auto window = cfg.window();
    const auto cwindow = window.with_scales(window.j_min, std::min(window.j_max, kContinuousMaxScale));
    const double p = 2.0;
    std::vector<std::pair<SymbolSpec, WeightPairSpec>> cases;
    for (const auto& s : cfg.symbols)
        if (s.smooth())
            for (const auto& w : cfg.weights) cases.emplace_back(s, w);
    struct Row {
        std::vector<double> dyadic;
        double continuous = 0.0;
    };
    std::vector<GridKind> grids;
    for (const auto& g : cfg.grids) grids.push_back(grid_from_string(g));
    const auto rows = parallel_map(cases.size(), threads, [&](std::size_t i) {
        const Symbol b = cases[i].first.build();
        const WeightPair w = cases[i].second.build();
        Row r;
        for (GridKind g : grids) r.dyadic.push_back(dyadic_besov_norm(b, w, p, g, window).value);
        r.continuous = continuous_besov_norm_p2(b, w, cwindow).value;
        return r;
    });
    if (intersection) {
        if (grids.size() != 2 || grids[0] == grids[1]) throw ConfigError("E3 needs the two grids D0 and D1");
        for (std::size_t i = 0; i < cases.size(); ++i)
            res.table.add(case_name(cases[i].first, cases[i].second), rows[i].dyadic[0] + rows[i].dyadic[1],
                          rows[i].continuous);
        res.summary.push_back("spread=" + num(res.table.spread()));
        res.passed = !res.table.rows.empty() && res.table.spread() <= 4.0;
        return res;
    }
    for (std::size_t i = 0; i < cases.size(); ++i)
        for (std::size_t g = 0; g < grids.size(); ++g)
            res.table.add(case_name(cases[i].first, cases[i].second) + "|" + cfg.grids[g], rows[i].dyadic[g],
                          rows[i].continuous);
    // per-interval form comparison for every weight pair
    Artifact forms{"form_ratios", {"weights", "grid", "max_ratio", "at", "cauchy_schwarz"}, {}};
    bool forms_ok = true;
    for (const auto& w : cfg.weights)
        for (std::size_t g = 0; g < grids.size(); ++g) {
            const auto fr = besov_form_ratios(w.build(), grids[g], window.with_scales(window.j_min, std::min(window.j_max, 8)));
            forms.rows.push_back({w.name(), cfg.grids[g], num(fr.max_ratio), fr.at, fr.cauchy_schwarz_holds ? "1" : "0"});
            forms_ok = forms_ok && std::isfinite(fr.max_ratio) && fr.cauchy_schwarz_holds;
        }
    res.artifacts.push_back(forms);
    res.summary.push_back("recorded_C=" + num(res.table.max()));
    res.summary.push_back("pinned_C=" + num(kDyadicContainmentConstant));
    res.passed = !res.table.rows.empty() && res.table.max() <= kDyadicContainmentConstant && forms_ok;
    return res;
}

// ---------------------------------------------------------------- E5

struct NwoFamilies {
    StepFamily G, H;
};

NwoFamilies nwo_families(const WeightPair& w, const CellBasis& basis) {
    const auto mu = cell_averages(w.mu, basis);
    const auto lam = cell_averages(w.lambda, basis);
    const Weight lam_inv = w.lambda.inverse();
    NwoFamilies f{{basis.grid(), basis.window(), {}}, {basis.grid(), basis.window(), {}}};
    const auto n = static_cast<Eigen::Index>(basis.size());
    for (const auto& I : basis.haar_intervals()) {
        const auto [first, last] = basis.cell_range(I);
        const double muI = w.mu.integral(I.lo(), I.hi());
        const double liI = lam_inv.integral(I.lo(), I.hi());
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n), h = Eigen::VectorXd::Zero(n);
        const auto hv = basis.haar_vector(I);
        const double hs = 1.0 / std::sqrt(basis.cell_length());  // cell value of h_I per unit coefficient
        for (std::size_t i = first; i < last; ++i) {
            g(static_cast<Eigen::Index>(i)) = std::sqrt(mu[i] / muI);
            h(static_cast<Eigen::Index>(i)) = hv[i] * hs * std::sqrt(I.length() / liI) / std::sqrt(lam[i]);
        }
        f.G.members.push_back({I, std::move(g)});
        f.H.members.push_back({I, std::move(h)});
    }
    return f;
}

double random_sign(std::uint64_t seed, const DyadicInterval& I) {
    std::uint64_t z = seed ^ (static_cast<std::uint64_t>(I.index) * 0x9e3779b97f4a7c15ULL) ^
                      (static_cast<std::uint64_t>(I.scale + 64) << 56) ^ static_cast<std::uint64_t>(I.grid);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (z & 1) ? 1.0 : -1.0;
}

ExperimentResult run_e5(const ExperimentConfig& cfg, unsigned threads) {
    ExperimentResult res;
    const auto window = cfg.window();
    const CellBasis basis(GridKind::standard, window);
    check_feasible(basis);
    const std::uint64_t seed = *cfg.seed;
    struct Op {
        std::string id;
        SymbolSpec s;
        WeightPairSpec w;
        int kind;
    };
    static const char* kinds[] = {"paraproduct", "eps_commutator", "hilbert_commutator"};
    std::vector<Op> ops;
    for (int k = 0; k < 3; ++k)
        for (const auto& s : cfg.symbols)
            for (const auto& w : cfg.weights) ops.push_back({std::string(kinds[k]) + "|" + case_name(s, w), s, w, k});

    struct Out {
        std::vector<double> sums, schatten;
    };
    const auto outs = parallel_map(ops.size(), threads, [&](std::size_t i) {
        const Symbol b = ops[i].s.build();
        const WeightPair w = ops[i].w.build();
        OperatorMatrix T;
        if (ops[i].kind == 0) {
            T = paraproduct_matrix(coefficients_on(b, basis.haar_intervals()), basis);
        } else if (ops[i].kind == 1) {
            const auto eps = haar_multiplier_matrix([seed](const DyadicInterval& I) { return random_sign(seed, I); }, basis);
            T = commutator(multiplication_matrix(b, basis), eps);
        } else {
            T = hilbert_commutator(b.cell_averages(basis), basis);
        }
        const OperatorMatrix A = conjugated(T, w, basis);
        const auto spec = singular_values(A);
        const auto fam = nwo_families(w, basis);
        Out o;
        for (double p : cfg.p) {
            o.sums.push_back(nwo_pairing_sum(A, fam.G, fam.H, p));
            o.schatten.push_back(std::pow(schatten_norm(spec, p), p));
        }
        return o;
    });
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t k = 0; k < cfg.p.size(); ++k)
            res.table.add(ops[i].id + "|" + p_tag(cfg.p[k]), outs[i].sums[k], outs[i].schatten[k]);

    Artifact nwo{"nwo_families", {"weights", "family", "r", "sup_ratio", "support_violations", "maximal_norm_q2"}, {}};
    for (const auto& w : cfg.weights) {
        const WeightPair wp = w.build();
        const auto fam = nwo_families(wp, basis);
        const auto rh = reverse_holder_exponent(wp.lambda, window);
        const double r = rh.exponent.value_or(2.25);
        for (const auto* f : {&fam.G, &fam.H}) {
            const auto rep = nwo_r_criterion(*f, r);
            nwo.rows.push_back({w.name(), f == &fam.G ? "G" : "H", num(r), num(rep.sup_ratio),
                                std::to_string(rep.support_violations.size()), num(nwo_maximal_norm(*f, 2.0, seed))});
        }
    }
    res.artifacts.push_back(nwo);
    res.summary.push_back("operators=" + std::to_string(ops.size()));
    res.summary.push_back("recorded_C=" + num(res.table.max()));
    res.summary.push_back("pinned_C=" + num(kNwoConstant));
    res.passed = !res.table.rows.empty() && res.table.max() <= kNwoConstant;
    return res;
}

// ---------------------------------------------------------------- E6

ExperimentResult run_e6(const ExperimentConfig& cfg, unsigned threads) {
    ExperimentResult res;
    const auto window = cfg.window();
    std::vector<WeightSpec> specs;
    for (const auto& w : cfg.weights) {
        if (w.lambda.kind != "pathological") throw ConfigError("E6 expects pathological lambda weights");
        specs.push_back(w.lambda);
    }
    std::sort(specs.begin(), specs.end(), [](const WeightSpec& a, const WeightSpec& b) { return a.levels < b.levels; });
    IntervalFamily family;
    family.seed = *cfg.seed;
    struct Out {
        double a2 = 0.0, lo = 0.0, hi = 0.0, integral = 0.0;
    };
    const auto outs = parallel_map(specs.size(), threads, [&](std::size_t i) {
        const Weight lam = specs[i].build();
        const auto a2 = a2_constant(lam, window, family);
        return Out{a2.constant, a2.arg_lo, a2.arg_hi, lam.pow(specs[i].r).integral(0.0, 1.0)};
    });
    Artifact table{"levels", {"J", "a2_estimate", "a2_interval_lo", "a2_interval_hi", "integral_lambda_r", "log2_integral"}, {}};
    double a2min = 1e300, a2max = 0.0;
    bool growth_ok = true;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        table.rows.push_back({std::to_string(specs[i].levels), num(outs[i].a2), num(outs[i].lo), num(outs[i].hi),
                              num(outs[i].integral), num(std::log2(outs[i].integral))});
        a2min = std::min(a2min, outs[i].a2);
        a2max = std::max(a2max, outs[i].a2);
        const double prev = i == 0 ? 1.0 : outs[i - 1].integral;  // J = 0 is the flat weight
        res.table.add("J=" + std::to_string(specs[i].levels) + "|growth", outs[i].integral, prev);
        if (!(outs[i].integral >= 4.0 * prev)) growth_ok = false;
    }
    res.artifacts.push_back(table);
    if (!specs.empty()) {
        WeightSpec mid = specs[std::min<std::size_t>(2, specs.size() - 1)];
        const auto rh = reverse_holder_exponent(mid.build(), window.with_scales(window.j_min, std::min(window.j_max, 8)));
        const auto flat = reverse_holder_exponent(Weight::constant(1.0), window.with_scales(window.j_min, 4));
        Artifact ladder{"reverse_holder", {"weight", "r", "sup_ratio"}, {}};
        for (const auto& [r, v] : rh.ladder) ladder.rows.push_back({weight_name(mid), num(r), num(v)});
        for (const auto& [r, v] : flat.ladder) ladder.rows.push_back({"c1", num(r), num(v)});
        res.artifacts.push_back(ladder);
    }
    const double spread = specs.empty() ? 0.0 : a2max / a2min;
    res.summary.push_back("a2_spread=" + num(spread));
    res.summary.push_back("growth_at_least_4=" + std::string(growth_ok ? "1" : "0"));
    res.passed = !specs.empty() && spread <= 4.0 && growth_ok;
    return res;
}

// ---------------------------------------------------------------- E7

double peller_integral(const Symbol& b, const CellBasis& basis, double p) {
    const std::size_t n = basis.size();
    const double h = basis.cell_length();
    const UnitRule& g4 = gauss_legendre(4);
    std::vector<double> x(4 * n), v(4 * n);
    std::vector<char> zero(n, 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < 4; ++a) {
            x[4 * i + a] = basis.cell_lo(i) + h * g4.nodes[a];
            v[4 * i + a] = b(x[4 * i + a]);
            if (v[4 * i + a] != 0.0) zero[i] = 0;
        }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (zero[i] && zero[j]) continue;
            if (i == j) {
                const UnitRule& rx = gauss_legendre(8);
                const UnitRule& ry = gauss_legendre(7);
                double s = 0.0;
                for (std::size_t a = 0; a < rx.nodes.size(); ++a)
                    for (std::size_t c = 0; c < ry.nodes.size(); ++c) {
                        const double xa = basis.cell_lo(i) + h * rx.nodes[a], yc = basis.cell_lo(i) + h * ry.nodes[c];
                        s += rx.weights[a] * ry.weights[c] * std::pow(std::abs(b(xa) - b(yc)), p) / ((xa - yc) * (xa - yc));
                    }
                total += s * h * h;
                continue;
            }
            double s = 0.0;
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t c = 0; c < 4; ++c) {
                    const double d = x[4 * i + a] - x[4 * j + c];
                    s += g4.weights[a] * g4.weights[c] * std::pow(std::abs(v[4 * i + a] - v[4 * j + c]), p) / (d * d);
                }
            total += s * h * h;
        }
    return total;
}

ExperimentResult run_e7(const ExperimentConfig& cfg, unsigned threads) {
    ExperimentResult res;
    const auto window = cfg.window();
    const CellBasis basis(GridKind::standard, window);
    check_feasible(basis);
    std::vector<double> mixed_ps, peller_ps{1.5, 2.0, 3.0, 4.0};
    for (double p : cfg.p)
        if (p > 2.0) mixed_ps.push_back(p);
    if (mixed_ps.empty()) throw ConfigError("E7 needs at least one p > 2");
    std::vector<SymbolSpec> syms;
    for (const auto& s : cfg.symbols)
        if (s.smooth()) syms.push_back(s);
    struct Out {
        std::vector<MixedNormReport> mixed;
        std::vector<std::pair<double, double>> peller;
    };
    const auto outs = parallel_map(syms.size(), threads, [&](std::size_t i) {
        const Symbol b = syms[i].build();
        const auto C = hilbert_commutator(b.cell_averages(basis), basis);
        const auto spec = singular_values(C);
        const double h = basis.cell_length();
        const Eigen::MatrixXd K = C.m / h;
        Out o;
        for (double p : mixed_ps) {
            MixedNormReport r;
            r.value = kernel_mixed_norm(K, h, p);
            r.adjoint_value = kernel_mixed_norm(K.transpose(), h, p);
            r.weak_schatten = weak_schatten(spec, p);
            const double bound = std::sqrt(r.value * r.adjoint_value);
            r.ratio = bound > 0.0 ? r.weak_schatten / bound : 0.0;
            r.holds = r.weak_schatten <= bound;
            o.mixed.push_back(r);
        }
        for (double p : peller_ps) o.peller.emplace_back(std::pow(schatten_norm(spec, p), p), peller_integral(b, basis, p));
        return o;
    });
    Artifact mixed{"mixed_norm", {"case", "p", "mixed", "adjoint_mixed", "weak_schatten", "ratio"}, {}};
    Artifact peller{"peller_sweep", {"case", "p", "schatten_p_power", "double_integral", "ratio"}, {}};
    bool ok = true;
    for (std::size_t i = 0; i < syms.size(); ++i) {
        for (std::size_t k = 0; k < mixed_ps.size(); ++k) {
            const auto& r = outs[i].mixed[k];
            const std::string id = syms[i].name() + "|" + p_tag(mixed_ps[k]) + "|N=" + std::to_string(basis.size());
            res.table.add(id, r.weak_schatten, std::sqrt(r.value * r.adjoint_value));
            mixed.rows.push_back({id, num(mixed_ps[k]), num(r.value), num(r.adjoint_value), num(r.weak_schatten), num(r.ratio)});
            ok = ok && r.holds;
        }
        for (std::size_t k = 0; k < peller_ps.size(); ++k) {
            const auto [s, d] = outs[i].peller[k];
            peller.rows.push_back({syms[i].name(), num(peller_ps[k]), num(s), num(d), num(d > 0 ? s / d : 0.0)});
        }
    }
    res.artifacts.push_back(mixed);
    res.artifacts.push_back(peller);
    res.passed = ok && !res.table.rows.empty();
    return res;
}

// ---------------------------------------------------------------- E8

ExperimentResult run_e8(const ExperimentConfig& cfg, unsigned threads) {
    ExperimentResult res;
    const auto window = cfg.window();
    const CellBasis basis(GridKind::standard, window);
    check_feasible(basis);
    const double h = basis.cell_length();
    std::vector<DyadicInterval> Qs;
    for (int j = 2; j <= 5; ++j)
        for (const auto& Q : intervals_at_scale(GridKind::standard, j, 0.0, 1.0)) Qs.push_back(Q);
    std::vector<std::pair<SymbolSpec, WeightPairSpec>> cases;
    for (const auto& s : cfg.symbols)
        for (const auto& w : cfg.weights) cases.emplace_back(s, w);
    struct Out {
        std::vector<double> lhs, rhs;
    };
    const auto outs = parallel_map(cases.size(), threads, [&](std::size_t c) {
        const Symbol b = cases[c].first.build();
        const WeightPair w = cases[c].second.build();
        const Weight lam_inv = w.lambda.inverse();
        const auto bc = b.cell_averages(basis);
        Out o;
        for (const auto& Q : Qs) {
            const DyadicInterval Qh = Q.sibling();
            const double bh = b.haar_coefficient(Q);
            const double liQ = lam_inv.integral(Q.lo(), Q.hi());
            o.lhs.push_back(bh * bh * Q.length() / (liQ * w.mu.integral(Q.lo(), Q.hi())));
            const auto split = median_split(b, basis, Q, Qh);
            // lambda^1/2 and mu^-1/2 of the conjugation cancel against G and H
            const double norm = 1.0 / std::sqrt(w.mu.integral(Qh.lo(), Qh.hi()) * liQ);
            double rhs = 0.0;
            for (int s = 0; s < 2; ++s) {
                const auto& E = s == 0 ? split.e1 : split.e2;
                const auto& F = s == 0 ? split.f1 : split.f2;
                for (const auto& child : {Q.left_child(), Q.right_child()}) {
                    const auto [cf, cl] = basis.cell_range(child);
                    double acc = 0.0;
                    for (std::size_t i : E) {
                        if (i < cf || i >= cl) continue;
                        for (std::size_t k : F)
                            acc += (bc[i] - bc[k]) * hilbert_profile(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(k));
                    }
                    const double v = acc * h * norm;
                    rhs += v * v;
                }
            }
            o.rhs.push_back(rhs);
        }
        return o;
    });
    double worst = 0.0;
    bool ok = true;
    for (std::size_t c = 0; c < cases.size(); ++c)
        for (std::size_t q = 0; q < Qs.size(); ++q) {
            const double l = outs[c].lhs[q], r = outs[c].rhs[q];
            const std::string id = case_name(cases[c].first, cases[c].second) + "|Q=" + Qs[q].id();
            if (r <= 0.0) {
                if (l > 0.0) ok = false;
                res.table.skipped.push_back(id + ": empty split");
                continue;
            }
            res.table.add(id, l, r);
            worst = std::max(worst, l / r);
        }
    res.summary.push_back("recorded_C=" + num(worst));
    res.summary.push_back("pinned_C=" + num(kMedianChainConstant));
    res.passed = ok && !res.table.rows.empty() && worst <= kMedianChainConstant;
    return res;
}

}  // namespace

// ---------------------------------------------------------------- config

Weight WeightSpec::build() const {
    if (kind == "constant") return Weight::constant(value);
    if (kind == "power") return Weight::power(exponent, center);
    if (kind == "pathological") return Weight::pathological(r, levels, A);
    throw ConfigError("unknown weight kind '" + kind + "'");
}

std::string WeightPairSpec::name() const { return "mu=" + weight_name(mu) + ";lambda=" + weight_name(lambda); }

Symbol SymbolSpec::build() const {
    if (kind == "sin2pi") return Symbol::sin2pi(frequency);
    if (kind == "parabola") return Symbol::parabola();
    if (kind == "ramp_bump") return Symbol::ramp_bump();
    if (kind == "cubic") return Symbol::cubic();
    if (kind == "identity") return Symbol::identity();
    if (kind == "constant") return Symbol::constant(value);
    if (kind == "haar") {
        std::vector<HaarTerm> t;
        for (const auto& s : terms) t.push_back({{grid_from_string(s.grid), s.scale, s.index}, s.coefficient});
        return Symbol::haar(std::move(t));
    }
    throw ConfigError("unknown symbol kind '" + kind + "'");
}

std::string SymbolSpec::name() const {
    if (kind == "sin2pi") return frequency == 1.0 ? "sin2pi" : "sin2pi_f" + num(frequency);
    if (kind == "constant") return "constant" + num(value);
    if (kind == "haar") {
        std::string s = "haar";
        for (const auto& t : terms) s += "_" + t.grid + "j" + std::to_string(t.scale) + "k" + std::to_string(t.index);
        return s;
    }
    return kind;
}

std::vector<WeightPairSpec> weight_battery() {
    const auto c = WeightSpec{};
    const auto pw = [](double e) { return WeightSpec{"power", 1.0, e}; };
    WeightSpec patho{"pathological"};
    patho.levels = 2;
    return {{c, c}, {pw(0.25), pw(0.25)}, {pw(0.5), c}, {c, pw(-0.5)}, {pw(-0.25), pw(0.25)}, {patho, c}};
}

std::vector<SymbolSpec> smooth_symbol_battery() {
    return {sym("sin2pi"), sym("parabola"), sym("ramp_bump"), sym("cubic")};
}

ExperimentConfig ExperimentConfig::defaults_for(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.weights = weight_battery();
    c.symbols = smooth_symbol_battery();
    c.out = "results/" + experiment;
    if (experiment == "E1") {
        c.j_max = 6;
        c.p = {1.5, 2.0, 3.0};
        c.symbols.push_back(haar_sum_a());
        c.symbols.push_back(haar_sum_b());
    } else if (experiment == "E2") {
        c.j_max = 7;
        c.refine = true;
    } else if (experiment == "E3" || experiment == "E4") {
        c.j_max = 10;
    } else if (experiment == "E5") {
        c.j_max = 6;
        c.p = {1.5, 2.0, 3.0};
        c.symbols = {sym("sin2pi"), sym("ramp_bump")};
        c.weights = {weight_battery()[0], weight_battery()[1]};
        c.seed = 20240101;
    } else if (experiment == "E6") {
        c.j_max = 10;
        c.weights.clear();
        for (int J = 1; J <= 4; ++J) {
            WeightSpec p{"pathological"};
            p.levels = J;
            c.weights.push_back({WeightSpec{}, p});
        }
        c.symbols.clear();
        c.seed = 20240101;
    } else if (experiment == "E7") {
        c.j_max = 7;
        c.p = {4.0};
        c.symbols = {sym("sin2pi"), sym("sin2pi", 2.0), sym("parabola"), sym("ramp_bump"), sym("cubic")};
        c.weights = {weight_battery()[0]};
    } else if (experiment == "E8") {
        c.j_max = 10;
        c.symbols = {sym("sin2pi")};
    } else {
        throw ConfigError("unknown experiment '" + experiment + "' (expected E1..E8)");
    }
    return c;
}

bool ExperimentConfig::randomized() const { return experiment == "E5" || experiment == "E6"; }

void ExperimentConfig::validate() const {
    static const std::set<std::string> ids{"E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8"};
    if (!ids.contains(experiment)) throw ConfigError("unknown experiment '" + experiment + "'");
    window().validate();
    if (window().cell_count() > kMaxCells)
        throw ConfigError("infeasible size: " + std::to_string(window().cell_count()) + " cells exceeds the cap of " +
                          std::to_string(kMaxCells));
    if (randomized() && !seed) throw ConfigError("experiment " + experiment + " uses a randomized family and needs a seed");
    for (double p : this->p)
        if (!(p > 0.0)) throw ConfigError("p must be positive");
    for (const auto& g : grids) (void)grid_from_string(g);
    for (const auto& w : weights) {
        (void)w.mu.build();
        (void)w.lambda.build();
    }
    for (const auto& s : symbols) (void)s.build();
}

std::string ExperimentConfig::to_text() const {
    json j;
    j["window"] = {window_lo, window_hi};
    j["scales"] = {{"j_min", j_min}, {"j_max", j_max}, {"refine", refine}};
    j["grids"] = grids;
    j["weights"] = json::array();
    for (const auto& w : weights) j["weights"].push_back({{"mu", to_json(w.mu)}, {"lambda", to_json(w.lambda)}});
    j["symbols"] = json::array();
    for (const auto& s : symbols) j["symbols"].push_back(to_json(s));
    j["p"] = p;
    j["experiment"] = experiment;
    if (seed) j["seed"] = *seed;
    j["out"] = out;
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        check_keys(j, {"window", "scales", "grids", "weights", "symbols", "p", "experiment", "seed", "out"}, "config");
        ExperimentConfig c = defaults_for(j.at("experiment").get<std::string>());
        if (!j.contains("seed")) c.seed.reset();
        if (j.contains("window")) {
            const auto& w = j.at("window");
            if (!w.is_array() || w.size() != 2) throw ConfigError("window must be [lo, hi]");
            c.window_lo = w[0].get<double>();
            c.window_hi = w[1].get<double>();
        }
        if (j.contains("scales")) {
            const auto& s = j.at("scales");
            check_keys(s, {"j_min", "j_max", "refine"}, "scales");
            c.j_min = s.value("j_min", c.j_min);
            c.j_max = s.value("j_max", c.j_max);
            c.refine = s.value("refine", c.refine);
        }
        if (j.contains("grids")) c.grids = j.at("grids").get<std::vector<std::string>>();
        if (j.contains("weights")) {
            c.weights.clear();
            for (const auto& w : j.at("weights")) {
                check_keys(w, {"mu", "lambda"}, "weight pair");
                c.weights.push_back({weight_from_json(w.at("mu")), weight_from_json(w.at("lambda"))});
            }
        }
        if (j.contains("symbols")) {
            c.symbols.clear();
            for (const auto& s : j.at("symbols")) c.symbols.push_back(symbol_from_json(s));
        }
        if (j.contains("p")) c.p = j.at("p").get<std::vector<double>>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

// ---------------------------------------------------------------- tables

void RatioTable::add(const std::string& case_id, double numerator, double denominator) {
    if (numerator == 0.0 && denominator == 0.0) {
        skipped.push_back(case_id + ": zero symbol");
        return;
    }
    rows.push_back({case_id, numerator, denominator, denominator != 0.0 ? numerator / denominator : INFINITY});
}

double RatioTable::min() const {
    double m = INFINITY;
    for (const auto& r : rows) m = std::min(m, r.ratio);
    return m;
}

double RatioTable::max() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.ratio);
    return m;
}

void RatioTable::write_csv(std::ostream& os) const {
    os << "case,numerator,denominator,ratio\n";
    for (const auto& r : rows) os << r.case_id << ',' << fmt12(r.numerator) << ',' << fmt12(r.denominator) << ',' << fmt12(r.ratio) << '\n';
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
    cfg.validate();
    ExperimentResult r;
    const std::string& e = cfg.experiment;
    if (e == "E1") r = run_e1(cfg, threads);
    else if (e == "E2") r = run_e2(cfg, threads);
    else if (e == "E3") r = run_dyadic_vs_continuous(cfg, threads, true);
    else if (e == "E4") r = run_dyadic_vs_continuous(cfg, threads, false);
    else if (e == "E5") r = run_e5(cfg, threads);
    else if (e == "E6") r = run_e6(cfg, threads);
    else if (e == "E7") r = run_e7(cfg, threads);
    else r = run_e8(cfg, threads);
    r.experiment = e;
    r.summary.push_back("min_ratio=" + num(r.table.min()));
    r.summary.push_back("max_ratio=" + num(r.table.max()));
    r.summary.push_back("passed=" + std::string(r.passed ? "1" : "0"));
    return r;
}

NondegeneracyReport epsilon_nondegeneracy_check(const SignPattern& eps, GridKind grid, const TruncationWindow& window,
                                                const DyadicInterval& Q, double C) {
    window.validate();
    NondegeneracyReport rep;
    const auto inside = [&](const DyadicInterval& I) {
        return I.scale >= window.j_min && I.scale <= window.j_max && I.lo() >= window.lo && I.hi() <= window.hi;
    };
    if (!inside(Q) || Q.grid != grid) throw ConfigError("Q is not an enumerated interval: " + Q.id());
    for (std::int64_t shift : {-2, -1, 1, 2}) {
        const DyadicInterval Qh{grid, Q.scale, Q.index + shift};
        if (!inside(Qh)) continue;
        DyadicInterval I0 = Q.parent();
        while (!I0.contains(Qh) && I0.scale > window.j_min) I0 = I0.parent();
        if (!I0.contains(Qh) || !inside(I0) || I0.length() > C * Q.length()) continue;
        const double x = Q.mid(), y = Qh.mid();
        double sum = 0.0;
        for (DyadicInterval I = I0; inside(I); I = I.parent()) {
            sum += eps(I) * haar_eval(I, x) * haar_eval(I, y);
            if (I.scale == window.j_min) break;
        }
        const double v = std::abs(sum) * I0.length();
        if (!rep.testable || v > rep.constant) {
            rep.testable = true;
            rep.constant = v;
            rep.q_hat = Qh.id();
            rep.i0 = I0.id();
        }
    }
    return rep;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : cfg.to_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::filesystem::path> emit_report(const ExperimentResult& result, const ExperimentConfig& cfg,
                                               const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    const auto open = [&](const std::filesystem::path& p) {
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        written.push_back(p);
        return os;
    };
    const std::string stem = result.experiment + "_ratios";
    {
        auto os = open(dir / (stem + ".csv"));
        result.table.write_csv(os);
    }
    for (const auto& a : result.artifacts) {
        auto os = open(dir / (result.experiment + "_" + a.name + ".csv"));
        for (std::size_t k = 0; k < a.header.size(); ++k) os << (k ? "," : "") << a.header[k];
        os << '\n';
        for (const auto& row : a.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
            os << '\n';
        }
    }
    {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
        json meta{{"experiment", result.experiment},
                  {"config_hash", hex},
                  {"version", library_version()},
                  {"passed", result.passed},
                  {"summary", result.summary},
                  {"skipped", result.table.skipped}};
        meta["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
        auto os = open(dir / (stem + ".meta.json"));
        os << meta.dump(2) << '\n';
    }
    return written;
}

}  // namespace bloomlab
