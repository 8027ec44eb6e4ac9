#include <catch2/catch_amalgamated.hpp>

#include "subwalk/io.hpp"

#include <sstream>

using namespace subwalk;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

TEST_CASE("series CSV bytes are pinned", "[io]") {
    auto table = coefficients(make_stable(1.0), 4);
    std::ostringstream os;
    write_series_csv(os, "k", "c", table.c, 1);
    REQUIRE(os.str() == "k,c\n1,0.5\n2,0.125\n3,0.0625\n4,0.0390625\n");
}

TEST_CASE("floats render with 17 significant digits", "[io]") {
    std::ostringstream os;
    write_series_csv(os, "i", "v", {0.1, 1.0 / 3.0}, 0);
    REQUIRE(os.str() == "i,v\n0,0.10000000000000001\n1,0.33333333333333331\n");
}

TEST_CASE("kernel and report CSV layouts", "[io]") {
    std::ostringstream os;
    std::vector<std::vector<long long>> xs{{0}, {3}};
    std::vector<kernel_result> vals{{0.5, 1e-10}, {0.25, 2e-10}};
    write_kernel_csv(os, xs, 7, vals, "exact");
    REQUIRE_THAT(os.str(), ContainsSubstring("x,n,p_psi,error_bound,route\n"));
    REQUIRE_THAT(os.str(), ContainsSubstring("0,7,0.5,"));
    REQUIRE_THAT(os.str(), ContainsSubstring("3,7,0.25,"));
    REQUIRE_THAT(os.str(), ContainsSubstring(",exact\n"));

    asymptotic_report rep;
    rep.study = "tail-asymptotic";
    rep.grid = {"t=1000"};
    rep.measured = {0.071};
    rep.predicted = {0.0713};
    rep.ratio = {0.071 / 0.0713};
    rep.tolerance = 0.15;
    rep.pass = true;
    rep.worst_ratio = rep.ratio[0];
    std::ostringstream ro;
    write_report_csv(ro, rep);
    REQUIRE_THAT(ro.str(), ContainsSubstring("cell,measured,predicted,ratio\n"));
    REQUIRE_THAT(ro.str(), ContainsSubstring("t=1000,"));

    json summary = report_summary(rep);
    REQUIRE(summary.at("theorem") == "tail-asymptotic");
    REQUIRE(summary.at("pass") == true);
    REQUIRE(summary.at("tolerance") == 0.15);
    REQUIRE(summary.contains("worst_ratio"));
}

TEST_CASE("config round-trips through JSON", "[io]") {
    run_config c;
    c.family = "stable_log";
    c.alpha = 0.7;
    c.beta = 0.3;
    c.n = 12;
    c.K = 1023;
    c.xs = {{0}, {2}};
    c.steps = {{1}, {-1}};
    c.prob_str = {"1/2", "1/2"};
    c.out = "/tmp/x";
    c.seed = 99;
    c.tol = 0.05;
    auto j = config_to_json(c);
    auto c2 = config_from_json(j);
    REQUIRE(config_to_json(c2) == j);
}

TEST_CASE("config validation", "[io]") {
    REQUIRE_THROWS_WITH(config_from_json(json{{"famly", "stable"}}),
                        ContainsSubstring("famly"));
    REQUIRE_THROWS_AS(config_from_json(json::array()), std::invalid_argument);
    REQUIRE_THROWS_WITH(config_from_json(json{{"prob", json::array({"1/2", 0.5})}}),
                        ContainsSubstring("prob"));
    REQUIRE_THROWS_AS(config_from_json(json{{"threads", 0}}), std::invalid_argument);
    REQUIRE_NOTHROW(config_from_json(json{{"threads", 4}}));
}

TEST_CASE("nested walk and psi spellings", "[io]") {
    auto j = json::parse(R"({"walk":"simple-1d","psi":{"family":"stable","alpha":1.0}})");
    auto c = config_from_json(j);
    REQUIRE(c.d == 1);
    REQUIRE(c.family == "stable");
    REQUIRE(c.alpha == 1.0);
    REQUIRE(c.steps.empty());

    auto j2 = json::parse(
        R"({"walk":{"d":1,"steps":[[2],[-1]],"prob":["1/3","2/3"]},"psi":{"family":"stable_log","alpha":1.2,"beta":0.4}})");
    auto c2 = config_from_json(j2);
    REQUIRE(c2.steps.size() == 2);
    REQUIRE(c2.prob_str.size() == 2);
    REQUIRE(c2.family == "stable_log");
    REQUIRE(c2.beta == 0.4);

    REQUIRE_THROWS_WITH(config_from_json(json::parse(R"({"walk":"simple-4d"})")),
                        ContainsSubstring("unknown walk name"));
    REQUIRE_THROWS_WITH(config_from_json(json::parse(R"({"psi":{"gamma":1}})")),
                        ContainsSubstring("psi.gamma"));
    REQUIRE_THROWS_WITH(config_from_json(json::parse(R"({"walk":{"period":2}})")),
                        ContainsSubstring("walk.period"));
}

TEST_CASE("specs and walks from config", "[io]") {
    run_config c;
    c.family = "stable";
    c.alpha = 1.0;
    auto s = spec_from_config(c);
    REQUIRE_THAT(eval_psi(s, 4.0), WithinRel(2.0, 1e-15));

    c.family = "levy";
    c.levy_nodes = {0.5, 2.0};
    c.levy_weights = {1.0, 0.5};
    c.levy_b = 0.1;
    auto sl = spec_from_config(c);
    REQUIRE(std::abs(eval_psi(sl, 1.0) - 1.0) < 1e-12);

    // levy with no nodes falls back to the quadrature fit of the stable symbol
    c.levy_nodes.clear();
    c.levy_weights.clear();
    c.levy_b = 0.0;
    auto sq = spec_from_config(c);
    REQUIRE(std::abs(eval_psi(sq, 2.0) - std::sqrt(2.0)) < 1e-6);
    REQUIRE(sq.alpha == 1.0);

    c.family = "cubic";
    REQUIRE_THROWS_WITH(spec_from_config(c), ContainsSubstring("unknown family"));

    run_config w;
    w.d = 2;
    auto simple2 = walk_from_config(w);
    REQUIRE(simple2.steps.size() == 4);

    w.d = 1;
    w.steps = {{2}, {-1}};
    w.prob_str = {"1/3", "2/3"};
    auto rat = walk_from_config(w);
    REQUIRE(rat.rational_probs);

    w.prob_str = {"1/3", "2/x"};
    REQUIRE_THROWS_WITH(walk_from_config(w), ContainsSubstring("cannot parse probability"));

    w.prob_str.clear();
    w.prob_num = {1.0 / 3.0, 2.0 / 3.0};
    REQUIRE_NOTHROW(walk_from_config(w));
}

TEST_CASE("config file loading", "[io]") {
    REQUIRE_THROWS_AS(load_config("/nonexistent/place/conf.json"), std::invalid_argument);
}
