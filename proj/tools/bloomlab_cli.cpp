#include "bloomlab/lab.hpp"
#include "bloomlab/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace bloomlab;

namespace {

// constant:V | power:E[@C] | patho:J
WeightSpec parse_weight(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    WeightSpec w;
    try {
        if (kind == "constant" || kind == "c") {
            w.value = arg.empty() ? 1.0 : std::stod(arg);
        } else if (kind == "power") {
            w.kind = "power";
            const auto at = arg.find('@');
            w.exponent = std::stod(arg.substr(0, at));
            if (at != std::string::npos) w.center = std::stod(arg.substr(at + 1));
        } else if (kind == "patho" || kind == "pathological") {
            w.kind = "pathological";
            w.levels = arg.empty() ? 1 : std::stoi(arg);
        } else {
            throw ConfigError("unknown weight '" + text + "'");
        }
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ConfigError*>(&e)) throw;
        throw ConfigError("malformed weight '" + text + "'");
    }
    return w;
}

SymbolSpec parse_symbol(const std::string& text) {
    SymbolSpec s;
    const auto colon = text.find(':');
    s.kind = text.substr(0, colon);
    if (colon != std::string::npos) {
        const double v = std::stod(text.substr(colon + 1));
        (s.kind == "constant" ? s.value : s.frequency) = v;
    }
    (void)s.build();
    return s;
}

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> j_min, j_max;
    std::vector<double> window;
    std::vector<double> p;
    bool refine = false;
    bool no_refine = false;
    unsigned threads = 1;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON config file");
        app->add_option("--out", out, "output directory");
        app->add_option("--seed", seed, "seed for randomized families");
        app->add_option("--jmin", j_min, "coarsest scale");
        app->add_option("--jmax", j_max, "finest scale (cells have length 2^-jmax)");
        app->add_option("--window", window, "window lo hi")->expected(2);
        app->add_option("--p", p, "exponents");
        app->add_flag("--refine", refine, "also run at jmax+1");
        app->add_flag("--no-refine", no_refine);
        app->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    }

    ExperimentConfig apply(ExperimentConfig c) const {
        if (!out.empty()) c.out = out;
        if (seed) c.seed = seed;
        if (j_min) c.j_min = *j_min;
        if (j_max) c.j_max = *j_max;
        if (window.size() == 2) {
            c.window_lo = window[0];
            c.window_hi = window[1];
        }
        if (!p.empty()) c.p = p;
        if (refine) c.refine = true;
        if (no_refine) c.refine = false;
        return c;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted Besov and Schatten-class laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    // besov
    auto* besov = app.add_subcommand("besov", "dyadic and continuous Besov norms of one symbol");
    std::string b_symbol = "sin2pi", b_mu = "constant:1", b_lambda = "constant:1", b_grid = "D0", b_form = "nu", b_csv;
    double b_p = 2.0, b_lo = 0.0, b_hi = 1.0;
    int b_jmin = 0, b_jmax = 8;
    bool b_continuous = false, b_bmo = false;
    besov->add_option("--symbol", b_symbol, "sin2pi[:f] | parabola | ramp_bump | cubic | identity | constant:v");
    besov->add_option("--mu", b_mu, "constant:v | power:e[@c] | patho:J");
    besov->add_option("--lambda", b_lambda);
    besov->add_option("--grid", b_grid, "D0 | D1");
    besov->add_option("--form", b_form, "nu | lambda_mu_inverse | lambda_inverse_mu");
    besov->add_option("--p", b_p);
    besov->add_option("--lo", b_lo);
    besov->add_option("--hi", b_hi);
    besov->add_option("--jmin", b_jmin);
    besov->add_option("--jmax", b_jmax);
    besov->add_flag("--continuous", b_continuous, "also the p=2 double integral");
    besov->add_flag("--bmo", b_bmo, "also the weighted dyadic BMO forms");
    besov->add_option("--csv", b_csv, "write per-interval contributions");

    // operator
    auto* op = app.add_subcommand("operator", "assemble an operator matrix");
    std::string o_kind = "hilbert_commutator", o_symbol = "sin2pi", o_mu = "constant:1", o_lambda = "constant:1", o_file,
                o_format = "binary";
    double o_lo = 0.0, o_hi = 1.0;
    int o_jmin = 0, o_jmax = 7;
    std::uint64_t o_seed = 20240101;
    op->add_option("--kind", o_kind, "paraproduct | hilbert | hilbert_commutator | multiplier | shift");
    op->add_option("--symbol", o_symbol);
    op->add_option("--mu", o_mu);
    op->add_option("--lambda", o_lambda);
    op->add_option("--lo", o_lo);
    op->add_option("--hi", o_hi);
    op->add_option("--jmin", o_jmin);
    op->add_option("--jmax", o_jmax);
    op->add_option("--seed", o_seed, "sign pattern seed for --kind multiplier");
    op->add_option("--format", o_format, "binary | csv")->check(CLI::IsMember({"binary", "csv"}));
    op->add_option("--out", o_file, "output file")->required();

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "singular values of a binary operator file");
    std::string s_in, s_csv;
    std::vector<double> s_p{1.0, 2.0, 4.0};
    spectrum->add_option("input", s_in)->required()->check(CLI::ExistingFile);
    spectrum->add_option("--p", s_p);
    spectrum->add_option("--csv", s_csv, "write index,sigma");

    // certify
    auto* certify = app.add_subcommand("certify", "run an experiment and check its predicate");
    std::string c_id;
    Overrides ov;
    certify->add_option("experiment", c_id, "E1..E8")->required();
    ov.attach(certify);
    bool c_dump = false;
    certify->add_flag("--print-config", c_dump, "print the effective config and exit");

    // report
    auto* report = app.add_subcommand("report", "summarize a ratio CSV");
    std::string r_in;
    report->add_option("input", r_in)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*besov) {
            const Symbol b = parse_symbol(b_symbol).build();
            const WeightPair w{parse_weight(b_mu).build(), parse_weight(b_lambda).build()};
            const TruncationWindow window{b_lo, b_hi, b_jmin, b_jmax};
            BesovForm form = BesovForm::nu;
            if (b_form == "lambda_mu_inverse") form = BesovForm::lambda_mu_inverse;
            else if (b_form == "lambda_inverse_mu") form = BesovForm::lambda_inverse_mu;
            else if (b_form != "nu") throw ConfigError("unknown form '" + b_form + "'");
            const auto rep = dyadic_besov_norm(b, w, b_p, grid_from_string(b_grid), window, form);
            std::cout << "dyadic " << rep.label << " = " << fmt12(rep.value) << '\n';
            if (b_continuous) {
                const auto c = continuous_besov_norm_p2(b, w, window);
                std::cout << "continuous = " << fmt12(c.value) << " (error estimate " << fmt12(c.error_estimate) << ")\n";
            }
            if (b_bmo) {
                const auto m = weighted_bmo_dyadic(b, w, grid_from_string(b_grid), window);
                std::cout << "bmo sup_average = " << fmt12(m.sup_average) << " at " << m.sup_average_at << '\n';
                std::cout << "bmo square_form = " << fmt12(m.square_form) << " at " << m.square_form_at << '\n';
            }
            if (!b_csv.empty()) {
                auto os = open_out(b_csv);
                rep.write_csv(os);
            }
            return 0;
        }
        if (*op) {
            const TruncationWindow window{o_lo, o_hi, o_jmin, o_jmax};
            const CellBasis basis(GridKind::standard, window);
            check_feasible(basis);
            const Symbol b = parse_symbol(o_symbol).build();
            OperatorMatrix T;
            if (o_kind == "paraproduct") T = paraproduct_matrix(b, basis);
            else if (o_kind == "hilbert") T = hilbert_matrix(basis);
            else if (o_kind == "hilbert_commutator") T = hilbert_commutator(b.cell_averages(basis), basis);
            else if (o_kind == "shift") T = petermichl_shift_matrix(basis);
            else if (o_kind == "multiplier") {
                T = haar_multiplier_matrix(
                    [o_seed](const DyadicInterval& I) {
                        std::uint64_t z = o_seed ^ (static_cast<std::uint64_t>(I.index) * 0x9e3779b97f4a7c15ULL) ^
                                          static_cast<std::uint64_t>(I.scale + 64);
                        z = (z ^ (z >> 31)) * 0xbf58476d1ce4e5b9ULL;
                        return ((z >> 17) & 1) ? 1.0 : -1.0;
                    },
                    basis);
            } else {
                throw ConfigError("unknown operator kind '" + o_kind + "'");
            }
            T = weight_conjugate(T, parse_weight(o_lambda).build(), parse_weight(o_mu).build());
            auto os = open_out(o_file);
            if (o_format == "binary") write_binary(T, os);
            else write_csv(T, os);
            std::cout << T.label << ": " << T.size() << "x" << T.size() << " -> " << o_file << '\n';
            return 0;
        }
        if (*spectrum) {
            std::ifstream is(s_in, std::ios::binary);
            const auto T = read_binary(is);
            const auto s = singular_values(T);
            std::cout << "rank " << s.rank() << ", sigma_1 " << fmt12(s.sigma.empty() ? 0.0 : s.sigma.front()) << '\n';
            for (double p : s_p) std::cout << "S^" << fmt12(p) << " = " << fmt12(schatten_norm(s, p)) << '\n';
            if (!s_csv.empty()) {
                auto os = open_out(s_csv);
                s.write_csv(os);
            }
            return 0;
        }
        if (*certify) {
            ExperimentConfig cfg = ov.config.empty() ? ExperimentConfig::defaults_for(c_id) : ExperimentConfig::from_file(ov.config);
            if (!ov.config.empty() && cfg.experiment != c_id)
                throw ConfigError("config is for " + cfg.experiment + ", not " + c_id);
            cfg = ov.apply(cfg);
            if (c_dump) {
                std::cout << cfg.to_text();
                return 0;
            }
            const auto result = run_experiment(cfg, ov.threads);
            for (const auto& path : emit_report(result, cfg, cfg.out)) std::cout << "wrote " << path.string() << '\n';
            for (const auto& line : result.summary) std::cout << line << '\n';
            for (const auto& s : result.table.skipped) std::cout << "skipped " << s << '\n';
            std::cout << cfg.experiment << (result.passed ? " PASS" : " FAIL") << '\n';
            return result.passed ? 0 : 1;
        }
        if (*report) {
            std::ifstream is(r_in);
            std::string line;
            std::getline(is, line);
            if (line != "case,numerator,denominator,ratio") throw ConfigError("not a ratio table: " + r_in);
            RatioTable t;
            while (std::getline(is, line)) {
                std::stringstream ss(line);
                std::string id, a, b, r;
                std::getline(ss, id, ',');
                std::getline(ss, a, ',');
                std::getline(ss, b, ',');
                std::getline(ss, r, ',');
                t.rows.push_back({id, std::stod(a), std::stod(b), std::stod(r)});
            }
            std::cout << "rows " << t.rows.size() << "\nmin " << fmt12(t.min()) << "\nmax " << fmt12(t.max()) << "\nspread "
                      << fmt12(t.spread()) << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
