#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "subwalk/bernstein.hpp"
#include "subwalk/common.hpp"
#include "subwalk/kernel.hpp"
#include "subwalk/verify.hpp"
#include "subwalk/walk.hpp"

namespace subwalk {

using json = nlohmann::ordered_json;

// All artifact numbers go through %.17g so doubles round-trip exactly and
// the files are byte-stable across runs.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- CSV artifacts (header row, LF endings) ----

inline void write_series_csv(std::ostream& os, const std::string& index_name,
                             const std::string& value_name, const std::vector<double>& v,
                             std::size_t first_index) {
    os << index_name << ',' << value_name << '\n';
    for (std::size_t k = first_index; k < v.size(); ++k)
        os << k << ',' << fmt_g17(v[k]) << '\n';
}

inline std::string join_coords(const std::vector<long long>& x) {
    std::string s;
    for (std::size_t a = 0; a < x.size(); ++a) {
        if (a) s += ';';
        s += std::to_string(x[a]);
    }
    return s;
}

inline void write_kernel_csv(std::ostream& os, const std::vector<std::vector<long long>>& xs,
                             long long n, const std::vector<kernel_result>& res,
                             const std::string& route) {
    os << "x,n,p_psi,error_bound,route\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << join_coords(xs[i]) << ',' << n << ',' << fmt_g17(res[i].value) << ','
           << fmt_g17(res[i].error_bound) << ',' << route << '\n';
}

inline void write_tail_csv(std::ostream& os, const std::vector<double>& t_grid,
                           const asymptotic_report& rep) {
    os << "t,empirical_tail,predictor,ratio\n";
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        os << fmt_g17(t_grid[i]) << ',' << fmt_g17(rep.measured[i]) << ','
           << fmt_g17(rep.predicted[i]) << ',' << fmt_g17(rep.ratio[i]) << '\n';
}

inline void write_report_csv(std::ostream& os, const asymptotic_report& rep) {
    os << "cell,measured,predicted,ratio\n";
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
        os << rep.grid[i] << ',' << fmt_g17(rep.measured[i]) << ',' << fmt_g17(rep.predicted[i])
           << ',' << fmt_g17(rep.ratio[i]) << '\n';
}

// One-line machine-readable verdict printed by the verify commands.
inline json report_summary(const asymptotic_report& rep) {
    json j;
    j["theorem"] = rep.study;
    j["pass"] = rep.pass;
    j["worst_ratio"] = rep.worst_ratio;
    j["tolerance"] = rep.tolerance;
    return j;
}

// ---- run configuration ----

// One flat configuration drives every command; each command reads the fields
// it needs.  Unknown fields are rejected by name so typos cannot silently
// fall back to defaults.
struct run_config {
    std::string family = "stable";  // stable | stable_log | levy
    double alpha = 1.0;
    double beta = 1.0;  // second stable_log parameter
    std::vector<double> levy_nodes, levy_weights;
    double levy_b = 0.0;

    int d = 1;
    std::vector<std::vector<long long>> steps;  // empty: simple walk
    std::vector<std::string> prob_str;          // exact rationals like "1/6"
    std::vector<double> prob_num;               // or plain doubles

    long long n = 1;
    std::size_t K = 4095;
    std::size_t M = 4096;
    bool smoothed = false;
    std::string route = "both";  // kernel route: exact | fourier | both
    std::vector<std::vector<long long>> xs{{0}};

    std::vector<long long> n_grid;
    std::vector<double> t_grid;
    std::vector<double> xi_grid;
    double t = 1.0;
    long long replicas = 10000;
    std::uint64_t seed = 1;
    double tol = 0.0;  // 0: the study default
    double eps = 1e-8;
    long long threads = 1;  // accepted for interface stability; runs are single-threaded
    std::string out;
};

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "family", "alpha", "beta",    "levy_nodes", "levy_weights", "levy_b", "d",
        "steps",  "prob",  "n",       "K",          "M",            "smoothed", "route",
        "x",      "n_grid", "t_grid", "xi_grid",    "t",            "replicas", "seed",
        "tol",    "eps",   "threads", "out"};
    return keys;
}

namespace detail {

// Nested sugar: {"walk": "simple-1d" | {...}, "psi": {...}} lifts onto the
// flat keys so both spellings load identically.
inline json flatten_config(json j) {
    if (j.is_object() && j.contains("psi")) {
        const json psi = j.at("psi");
        if (!psi.is_object()) throw std::invalid_argument("psi must be an object");
        for (auto it = psi.begin(); it != psi.end(); ++it) {
            std::string key = it.key();
            if (key == "nodes") key = "levy_nodes";
            else if (key == "weights") key = "levy_weights";
            else if (key == "b") key = "levy_b";
            else if (key != "family" && key != "alpha" && key != "beta" &&
                     key != "levy_nodes" && key != "levy_weights" && key != "levy_b")
                throw std::invalid_argument("unknown config field: psi." + it.key());
            j[key] = it.value();
        }
        j.erase("psi");
    }
    if (j.is_object() && j.contains("walk")) {
        const json wk = j.at("walk");
        if (wk.is_string()) {
            const std::string name = wk.get<std::string>();
            if (name == "simple-1d") j["d"] = 1;
            else if (name == "simple-2d") j["d"] = 2;
            else if (name == "simple-3d") j["d"] = 3;
            else throw std::invalid_argument("unknown walk name: " + name);
        } else if (wk.is_object()) {
            for (auto it = wk.begin(); it != wk.end(); ++it) {
                if (it.key() != "d" && it.key() != "steps" && it.key() != "prob")
                    throw std::invalid_argument("unknown config field: walk." + it.key());
                j[it.key()] = it.value();
            }
        } else {
            throw std::invalid_argument("walk must be a name or an object");
        }
        j.erase("walk");
    }
    return j;
}

}  // namespace detail

inline run_config config_from_json(const json& raw) {
    if (!raw.is_object()) throw std::invalid_argument("config must be a JSON object");
    const json j = detail::flatten_config(raw);
    const auto& keys = config_keys();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw std::invalid_argument("unknown config field: " + it.key());

    run_config c;
    auto grab = [&](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
    };
    grab("family", c.family);
    grab("alpha", c.alpha);
    grab("beta", c.beta);
    grab("levy_nodes", c.levy_nodes);
    grab("levy_weights", c.levy_weights);
    grab("levy_b", c.levy_b);
    grab("d", c.d);
    grab("steps", c.steps);
    if (j.contains("prob")) {
        const auto& arr = j.at("prob");
        if (!arr.is_array()) throw std::invalid_argument("prob must be an array");
        bool all_str = true, all_num = true;
        for (const auto& e : arr) {
            if (!e.is_string()) all_str = false;
            if (!e.is_number()) all_num = false;
        }
        if (all_str && !arr.empty())
            c.prob_str = arr.get<std::vector<std::string>>();
        else if (all_num)
            c.prob_num = arr.get<std::vector<double>>();
        else
            throw std::invalid_argument("prob entries must be all strings or all numbers");
    }
    grab("n", c.n);
    grab("K", c.K);
    grab("M", c.M);
    grab("smoothed", c.smoothed);
    grab("route", c.route);
    grab("x", c.xs);
    grab("n_grid", c.n_grid);
    grab("t_grid", c.t_grid);
    grab("xi_grid", c.xi_grid);
    grab("t", c.t);
    grab("replicas", c.replicas);
    grab("seed", c.seed);
    grab("tol", c.tol);
    grab("eps", c.eps);
    grab("threads", c.threads);
    grab("out", c.out);
    if (c.threads < 1) throw std::invalid_argument("threads must be >= 1");
    return c;
}

inline json config_to_json(const run_config& c) {
    json j;
    j["family"] = c.family;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["levy_nodes"] = c.levy_nodes;
    j["levy_weights"] = c.levy_weights;
    j["levy_b"] = c.levy_b;
    j["d"] = c.d;
    j["steps"] = c.steps;
    if (!c.prob_str.empty())
        j["prob"] = c.prob_str;
    else
        j["prob"] = c.prob_num;
    j["n"] = c.n;
    j["K"] = c.K;
    j["M"] = c.M;
    j["smoothed"] = c.smoothed;
    j["route"] = c.route;
    j["x"] = c.xs;
    j["n_grid"] = c.n_grid;
    j["t_grid"] = c.t_grid;
    j["xi_grid"] = c.xi_grid;
    j["t"] = c.t;
    j["replicas"] = c.replicas;
    j["seed"] = c.seed;
    j["tol"] = c.tol;
    j["eps"] = c.eps;
    j["threads"] = c.threads;
    j["out"] = c.out;
    return j;
}

inline run_config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j = json::parse(in);
    return config_from_json(j);
}

inline bernstein_spec spec_from_config(const run_config& c) {
    if (c.family == "stable") return make_stable(c.alpha);
    if (c.family == "stable_log") return make_stable_log(c.alpha, c.beta);
    if (c.family == "levy") {
        if (c.levy_nodes.empty()) return make_stable_quadrature(c.alpha);
        bernstein_spec s =
            make_levy_quadrature(c.levy_nodes, c.levy_weights, 0.0, c.levy_b);
        s.alpha = c.alpha;  // recorded index for envelopes and predictors
        return s;
    }
    throw std::invalid_argument("unknown family: " + c.family);
}

inline walk_spec walk_from_config(const run_config& c) {
    if (c.steps.empty()) return make_simple_walk(c.d);
    if (!c.prob_str.empty()) {
        std::vector<rational> pr;
        pr.reserve(c.prob_str.size());
        for (const std::string& s : c.prob_str) {
            rational r;
            if (!parse_rational(s, r))
                throw std::invalid_argument("cannot parse probability as a rational: " + s);
            pr.push_back(r);
        }
        return make_walk_rational(c.d, c.steps, std::move(pr));
    }
    return make_walk(c.d, c.steps, c.prob_num);
}

}  // namespace subwalk
