#include <CLI11.hpp>

#include "subwalk/io.hpp"
#include "subwalk/kernel.hpp"
#include "subwalk/verify.hpp"

#include <clocale>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace subwalk;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& tok : split(text, ',')) {
        if (tok.empty()) continue;
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("cannot parse number: " + tok);
        out.push_back(v);
    }
    return out;
}

std::vector<long long> parse_longs(const std::string& text) {
    std::vector<long long> out;
    for (const auto& tok : split(text, ',')) {
        if (tok.empty()) continue;
        std::size_t pos = 0;
        long long v = std::stoll(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("cannot parse integer: " + tok);
        out.push_back(v);
    }
    return out;
}

// points and steps share one grammar: coordinates split by ',', entries by ';'
std::vector<std::vector<long long>> parse_points(const std::string& text) {
    std::vector<std::vector<long long>> out;
    for (const auto& grp : split(text, ';')) {
        if (grp.empty()) continue;
        out.push_back(parse_longs(grp));
    }
    return out;
}

std::string artifact_path(const run_config& c, const std::string& name) {
    if (c.out.empty()) return {};
    fs::create_directories(c.out);
    return (fs::path(c.out) / name).string();
}

void write_artifact(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot open output file: " + path);
    os << bytes;
}

json path_or_null(const std::string& path) {
    return path.empty() ? json(nullptr) : json(path);
}

void emit(const json& summary) { std::cout << summary.dump() << "\n"; }

int run_coeffs(const run_config& c) {
    auto spec = spec_from_config(c);
    auto table = coefficients(spec, c.K);
    std::string path = artifact_path(c, "coeffs.csv");
    if (!path.empty()) {
        std::ostringstream os;
        write_series_csv(os, "k", "c", table.c, 1);
        write_artifact(path, os.str());
    }
    json j;
    j["command"] = "coeffs";
    j["family"] = c.family;
    j["K"] = table.K;
    j["tail_mass"] = table.tail_mass;
    j["out"] = path_or_null(path);
    emit(j);
    return 0;
}

int run_tau(const run_config& c) {
    auto spec = spec_from_config(c);
    auto table = coefficients(spec, c.K);
    auto tt = tau_pmf(table, c.n);
    std::string path = artifact_path(c, "tau.csv");
    if (!path.empty()) {
        std::ostringstream os;
        write_series_csv(os, "k", "prob", tt.p, 0);
        write_artifact(path, os.str());
    }
    json j;
    j["command"] = "tau";
    j["family"] = c.family;
    j["n"] = tt.n;
    j["K"] = tt.K;
    j["tail_mass"] = tt.tail_mass;
    j["clamped"] = tt.clamps.clamped;
    emit(j);
    return 0;
}

int run_kernel(const run_config& c) {
    auto spec = spec_from_config(c);
    auto w = walk_from_config(c);
    if (c.route != "exact" && c.route != "fourier" && c.route != "both")
        throw std::invalid_argument("route must be exact, fourier, or both");
    long long window = 1;
    if (c.smoothed) window = analyze_walk(w).period;

    std::vector<kernel_result> ex, fr;
    if (c.route != "fourier") ex = kernel_exact(w, spec, c.xs, c.n, c.K, window);
    if (c.route != "exact") fr = kernel_fourier(w, spec, c.xs, c.n, c.M, window);

    std::ostringstream os;
    os << "x,n,p_psi,error_bound,route\n";
    auto rows = [&](const std::vector<kernel_result>& vals, const char* route) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            os << join_coords(c.xs[i]) << ',' << c.n << ',' << fmt_g17(vals[i].value) << ','
               << fmt_g17(vals[i].error_bound) << ',' << route << '\n';
    };
    if (!ex.empty()) rows(ex, "exact");
    if (!fr.empty()) rows(fr, "fourier");
    std::string path = artifact_path(c, "kernel.csv");
    if (!path.empty()) write_artifact(path, os.str());

    json pts = json::array();
    bool all_agree = true;
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
        json p;
        p["x"] = c.xs[i];
        if (!ex.empty()) {
            p["exact"] = ex[i].value;
            p["exact_bound"] = ex[i].error_bound;
        }
        if (!fr.empty()) {
            p["fourier"] = fr[i].value;
            p["fourier_bound"] = fr[i].error_bound;
        }
        if (!ex.empty() && !fr.empty()) {
            bool agree =
                std::abs(ex[i].value - fr[i].value) <= ex[i].error_bound + fr[i].error_bound + 1e-12;
            p["agree"] = agree;
            all_agree = all_agree && agree;
        }
        pts.push_back(std::move(p));
    }
    json j;
    j["command"] = "kernel";
    j["route"] = c.route;
    j["n"] = c.n;
    j["window"] = window;
    j["points"] = std::move(pts);
    if (c.route == "both") j["agree"] = all_agree;
    j["out"] = path_or_null(path);
    emit(j);
    return 0;
}

int run_simulate(const run_config& c) {
    auto spec = spec_from_config(c);
    auto w = walk_from_config(c);
    std::vector<double> marks = c.t_grid.empty() ? std::vector<double>{1.0} : c.t_grid;
    auto table = coefficients(spec, c.K);
    auto flat = simulate_endpoint(w, spec, table, c.n, marks, c.replicas, c.seed);

    std::string path = artifact_path(c, "samples.csv");
    if (!path.empty()) {
        std::ostringstream os;
        os << "replica,t,x\n";
        std::size_t idx = 0;
        for (long long r = 0; r < c.replicas; ++r) {
            for (double t : marks) {
                std::vector<long long> x(flat.begin() + idx, flat.begin() + idx + w.d);
                idx += w.d;
                os << r << ',' << fmt_g17(t) << ',' << join_coords(x) << '\n';
            }
        }
        write_artifact(path, os.str());
    }
    json j;
    j["command"] = "simulate";
    j["replicas"] = c.replicas;
    j["n"] = c.n;
    j["t_grid"] = marks;
    j["seed"] = c.seed;
    j["out"] = path_or_null(path);
    emit(j);
    return 0;
}

int run_constants(const run_config& c) {
    auto spec = spec_from_config(c);
    auto w = walk_from_config(c);
    auto an = analyze_walk(w);
    json j;
    j["command"] = "constants";
    j["family"] = c.family;
    j["alpha"] = spec.alpha;
    j["d"] = an.d;
    j["period"] = an.period;
    j["symmetric"] = an.symmetric;
    j["detQ"] = an.q.detQ;
    j["D"] = const_D(an.d, spec.alpha, an.q.Q);
    j["C"] = const_C(an.d, spec.alpha, an.q.Q);
    j["polya"] = const_polya(spec.alpha);
    j["n"] = c.n;
    j["scale_n"] = canonical_scale(spec, c.n);
    emit(j);
    return 0;
}

struct flag_seen {
    bool n = false, K = false, M = false, x = false, n_grid = false, t_grid = false;
    bool xi_grid = false, t = false, tol = false;
};

int run_verify(const std::string& study, run_config c, const flag_seen& seen) {
    auto spec = spec_from_config(c);
    double tol = c.tol;  // 0 picks the per-study default below
    asymptotic_report rep;
    if (study == "tail") {
        long long n = seen.n ? c.n : 4;
        double t = seen.t ? c.t : 1e6;
        std::vector<double> grid = seen.t_grid ? c.t_grid : std::vector<double>{t / 100.0, t};
        std::size_t cap = seen.K ? c.K : (1u << 23) - 1;
        rep = verify_tail(spec, n, grid, c.eps, cap, tol > 0 ? tol : 0.15);
    } else if (study == "onsite") {
        auto w = walk_from_config(c);
        std::vector<long long> grid = seen.n_grid ? c.n_grid : std::vector<long long>{100, 10000};
        std::size_t M = seen.M ? c.M : (1u << 20);
        rep = verify_onsite(w, spec, grid, M, tol > 0 ? tol : 0.05);
    } else if (study == "ratio") {
        auto w = walk_from_config(c);
        long long n = seen.n ? c.n : 10000;
        auto xs = seen.x ? c.xs : std::vector<std::vector<long long>>{{5}};
        std::size_t M = seen.M ? c.M : (1u << 20);
        rep = verify_ratio(w, spec, n, xs, M, tol > 0 ? tol : 0.01);
    } else if (study == "polya") {
        auto w = walk_from_config(c);
        long long n = seen.n ? c.n : 10;
        auto xs = seen.x ? c.xs : std::vector<std::vector<long long>>{{2000}};
        bool use_fourier = c.route != "exact";
        std::size_t size = use_fourier ? (seen.M ? c.M : (1u << 14))
                                       : (seen.K ? c.K : (1u << 22) - 1);
        rep = verify_polya(w, spec, xs, n, use_fourier, size, tol > 0 ? tol : 0.15);
    } else if (study == "doa") {
        auto w = walk_from_config(c);
        std::vector<long long> grid =
            seen.n_grid ? c.n_grid : std::vector<long long>{10000, 1000000};
        std::vector<double> xi = seen.xi_grid ? c.xi_grid : std::vector<double>{1.0};
        rep = verify_doa(w, spec, grid, xi, tol > 0 ? tol : 0.02);
    } else if (study == "flt") {
        auto w = walk_from_config(c);
        std::vector<long long> grid = seen.n_grid ? c.n_grid : std::vector<long long>{200, 2000};
        rep = verify_flt_marginal(w, spec, grid, c.t, c.replicas, c.seed,
                                  tol > 0 ? tol : 0.02, seen.K ? c.K : 4095);
    } else {
        throw std::invalid_argument("unknown verify study: " + study);
    }

    std::string path = artifact_path(c, "verify_" + rep.study + ".csv");
    if (!path.empty()) {
        std::ostringstream os;
        write_report_csv(os, rep);
        write_artifact(path, os.str());
    }
    json j = report_summary(rep);
    j["command"] = "verify";
    j["seed"] = c.seed;
    j["out"] = path_or_null(path);
    emit(j);
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_NUMERIC, "C");
    CLI::App app{"subordinated random walk transition kernels and limit checks"};
    app.require_subcommand(1);

    std::string config_path, walk_name, steps_str, prob_str, x_str;
    std::string ngrid_str, tgrid_str, xigrid_str, nodes_str, weights_str;
    run_config ovr;

    app.add_option("--config", config_path, "JSON config file; flags override its fields");
    app.add_option("--family", ovr.family, "psi family: stable | stable_log | levy");
    app.add_option("--alpha", ovr.alpha, "index of the induced limit, in (0,2)");
    app.add_option("--beta", ovr.beta, "log-correction exponent (stable_log)");
    app.add_option("--levy-nodes", nodes_str, "quadrature nodes, comma separated");
    app.add_option("--levy-weights", weights_str, "quadrature weights, comma separated");
    app.add_option("--levy-b", ovr.levy_b, "drift coefficient of the symbol");
    app.add_option("--d", ovr.d, "lattice dimension (simple walk)");
    app.add_option("--walk", walk_name, "named walk: simple-1d | simple-2d | simple-3d");
    app.add_option("--steps", steps_str, "step vectors, e.g. \"2;-1\" or \"1,0;0,1;-1,0;0,-1\"");
    app.add_option("--prob", prob_str, "step probabilities, decimals or rationals like 1/3");
    app.add_option("--n", ovr.n, "number of subordinated steps");
    app.add_option("--K,--k", ovr.K, "time-law truncation index");
    app.add_option("--M,--m", ovr.M, "fourier grid size per dimension");
    app.add_flag("--smoothed", ovr.smoothed, "window the kernel over one period");
    app.add_option("--route", ovr.route, "kernel route: exact | fourier | both");
    app.add_option("--x", x_str, "evaluation points, same grammar as --steps");
    app.add_option("--n-grid", ngrid_str, "time grid, comma separated");
    app.add_option("--t-grid", tgrid_str, "threshold/mark grid, comma separated");
    app.add_option("--xi-grid", xigrid_str, "frequency grid, comma separated");
    app.add_option("--t", ovr.t, "single threshold (verify tail) or mark (simulate, flt)");
    app.add_option("--replicas", ovr.replicas, "Monte Carlo replica count");
    app.add_option("--seed", ovr.seed, "random seed");
    app.add_option("--tol", ovr.tol, "tolerance override (0 keeps the study default)");
    app.add_option("--eps", ovr.eps, "tail resolution for automatic truncation");
    app.add_option("--threads", ovr.threads, "worker cap (runs are single-threaded)");
    app.add_option("--out", ovr.out, "artifact directory; no CSV is written without it");

    auto* cmd_coeffs = app.add_subcommand("coeffs", "subordinator step distribution c(psi, k)");
    auto* cmd_tau = app.add_subcommand("tau", "law of the subordinated time tau_n");
    auto* cmd_kernel = app.add_subcommand("kernel", "transition function p_psi(x, n)");
    auto* cmd_simulate = app.add_subcommand("simulate", "endpoint samples of the walk");
    auto* cmd_constants = app.add_subcommand("constants", "limit constants for a walk/psi pair");
    auto* cmd_verify = app.add_subcommand("verify", "finite-scale checks of the limit statements");
    cmd_verify->require_subcommand(1);
    std::vector<CLI::App*> studies;
    for (const char* name : {"tail", "onsite", "ratio", "polya", "doa", "flt"})
        studies.push_back(cmd_verify->add_subcommand(name));
    for (auto* sub : {cmd_coeffs, cmd_tau, cmd_kernel, cmd_simulate, cmd_constants, cmd_verify})
        sub->fallthrough();
    for (auto* sub : studies) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        run_config c;
        if (!config_path.empty()) c = load_config(config_path);

        if (app.count("--family")) c.family = ovr.family;
        if (app.count("--alpha")) c.alpha = ovr.alpha;
        if (app.count("--beta")) c.beta = ovr.beta;
        if (app.count("--levy-nodes")) c.levy_nodes = parse_doubles(nodes_str);
        if (app.count("--levy-weights")) c.levy_weights = parse_doubles(weights_str);
        if (app.count("--levy-b")) c.levy_b = ovr.levy_b;
        if (app.count("--d")) c.d = ovr.d;
        if (app.count("--walk")) {
            if (walk_name == "simple-1d") c.d = 1;
            else if (walk_name == "simple-2d") c.d = 2;
            else if (walk_name == "simple-3d") c.d = 3;
            else throw std::invalid_argument("unknown walk name: " + walk_name);
            c.steps.clear();
            c.prob_str.clear();
            c.prob_num.clear();
        }
        if (app.count("--steps")) c.steps = parse_points(steps_str);
        if (app.count("--prob")) {
            c.prob_str.clear();
            c.prob_num.clear();
            for (const auto& tok : split(prob_str, ','))
                if (!tok.empty()) c.prob_str.push_back(tok);
        }
        if (app.count("--n")) c.n = ovr.n;
        if (app.count("--K")) c.K = ovr.K;
        if (app.count("--M")) c.M = ovr.M;
        if (app.count("--smoothed")) c.smoothed = true;
        if (app.count("--route")) c.route = ovr.route;
        if (app.count("--x")) c.xs = parse_points(x_str);
        if (app.count("--n-grid")) {
            c.n_grid = parse_longs(ngrid_str);
        }
        if (app.count("--t-grid")) c.t_grid = parse_doubles(tgrid_str);
        if (app.count("--xi-grid")) c.xi_grid = parse_doubles(xigrid_str);
        if (app.count("--t")) c.t = ovr.t;
        if (app.count("--replicas")) c.replicas = ovr.replicas;
        if (app.count("--seed")) c.seed = ovr.seed;
        if (app.count("--tol")) c.tol = ovr.tol;
        if (app.count("--eps")) c.eps = ovr.eps;
        if (app.count("--threads")) {
            if (ovr.threads < 1) throw std::invalid_argument("threads must be >= 1");
            c.threads = ovr.threads;
        }
        if (app.count("--out")) c.out = ovr.out;

        if (cmd_coeffs->parsed()) return run_coeffs(c);
        if (cmd_tau->parsed()) return run_tau(c);
        if (cmd_kernel->parsed()) return run_kernel(c);
        if (cmd_simulate->parsed()) return run_simulate(c);
        if (cmd_constants->parsed()) return run_constants(c);
        if (cmd_verify->parsed()) {
            const run_config defaults;
            flag_seen seen;
            seen.n = app.count("--n") > 0 || c.n != defaults.n;
            seen.K = app.count("--K") > 0 || c.K != defaults.K;
            seen.M = app.count("--M") > 0 || c.M != defaults.M;
            seen.x = app.count("--x") > 0 || c.xs != defaults.xs;
            seen.n_grid = !c.n_grid.empty();
            seen.t_grid = !c.t_grid.empty();
            seen.xi_grid = !c.xi_grid.empty();
            seen.t = app.count("--t") > 0 || c.t != defaults.t;
            seen.tol = app.count("--tol") > 0;
            for (std::size_t i = 0; i < studies.size(); ++i)
                if (studies[i]->parsed()) return run_verify(studies[i]->get_name(), c, seen);
        }
        throw std::invalid_argument("no command given");
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
