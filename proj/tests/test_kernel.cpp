#include <catch2/catch_amalgamated.hpp>

#include "subwalk/kernel.hpp"

#include <cmath>

using namespace subwalk;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct golden {
    long long x, n;
    double want;
};

// 20-digit reference values for the simple walk, computed independently via
// high-precision series for sum_k P(tau_n = k) P(S_k = x)
const golden golden_05[] = {
    {0, 1, 0.09292066220585092115},  {1, 1, 0.18141586755882981577},
    {2, 1, 0.060471955852943271923}, {0, 2, 0.086157640568807911854},
    {0, 5, 0.021475010737233626299}, {3, 5, 0.018896837451676561633},
    {5, 20, 0.0019328816364607863435}, {0, 20, 0.0019488998356611509572}};
const golden golden_10[] = {
    {0, 1, 0.099683683842893930445},  {1, 1, 0.30010543871903535652},
    {2, 1, 0.060021087743807071304},  {0, 2, 0.19936736768578786089},
    {0, 5, 0.07352606265122910977},   {3, 5, 0.055863782965015239525},
    {5, 20, 0.019489884113728100015}, {0, 20, 0.021457448566794631843}};
const golden golden_15[] = {
    {0, 1, 0.064220374348989721962},  {1, 1, 0.40104841099329011916},
    {2, 1, 0.036458946453935465378},  {0, 2, 0.32886250357412087},
    {0, 5, 0.10144135047295833268},   {3, 5, 0.085439219002839364462},
    {5, 20, 0.039909088944756374724}, {0, 20, 0.053879438808725936529}};

}  // namespace

TEST_CASE("both routes hit the reference values within their own bounds", "[kernel]") {
    auto w = make_simple_walk(1);
    struct block {
        double alpha;
        const golden* g;
        std::size_t M;
    };
    const block blocks[] = {{0.5, golden_05, 1u << 20}, {1.0, golden_10, 1u << 16},
                            {1.5, golden_15, 1u << 16}};
    for (const auto& blk : blocks) {
        auto spec = make_stable(blk.alpha);
        exact_kernel eng(w, spec, (1u << 16) - 1);
        fourier_kernel feng(w, spec, blk.M);
        for (int i = 0; i < 8; ++i) {
            const golden& g = blk.g[i];
            CAPTURE(blk.alpha, g.x, g.n);
            eng.set_n(g.n);
            feng.set_n(g.n);
            auto ex = eng.at(g.x);
            auto fr = feng.at(g.x);
            REQUIRE_THAT(ex.value, WithinAbs(g.want, ex.error_bound + 1e-12));
            REQUIRE_THAT(fr.value, WithinAbs(g.want, fr.error_bound + 1e-12));
            // the two routes bracket each other as well
            REQUIRE_THAT(ex.value, WithinAbs(fr.value, ex.error_bound + fr.error_bound + 1e-12));
            // symmetry of the simple walk
            REQUIRE(eng.at(-g.x).value == ex.value);
        }
    }
}

TEST_CASE("zero steps of the subordinated walk", "[kernel]") {
    auto w = make_simple_walk(1);
    auto spec = make_stable(1.0);
    exact_kernel eng(w, spec, 255);
    eng.set_n(0);
    REQUIRE(eng.at(0).value == 1.0);
    REQUIRE(eng.at(0).error_bound == 0.0);
    REQUIRE(eng.at(2).value == 0.0);
    // window over j = 0, 1: adds P(S_1 = x)
    REQUIRE(eng.at_windowed(0, 2).value == 1.0);
    REQUIRE(eng.at_windowed(1, 2).value == 0.5);
    fourier_kernel feng(w, spec, 256);
    feng.set_n(0);
    REQUIRE_THAT(feng.at(0).value, WithinAbs(1.0, 1e-13));
    REQUIRE_THAT(feng.at(2).value, WithinAbs(0.0, 1e-13));
}

TEST_CASE("engine reuse across time indices", "[kernel]") {
    auto w = make_simple_walk(1);
    auto spec = make_stable(1.0);
    exact_kernel eng(w, spec, 4095);
    // jump forward, then back (forces a rebuild), values stay consistent
    eng.set_n(5);
    double a5 = eng.at(3).value;
    eng.set_n(17);
    eng.set_n(5);
    REQUIRE(eng.at(3).value == a5);
    exact_kernel fresh(w, spec, 4095);
    fresh.set_n(5);
    REQUIRE_THAT(fresh.at(3).value, WithinAbs(a5, 1e-15));
}

TEST_CASE("smoothed kernel identities", "[kernel]") {
    auto w = make_simple_walk(1);
    auto spec = make_stable(1.0);

    // spectrum multiplier: window sum over tau, tau+1 equals the stencil
    // p(x-1)/2 + p(x) + p(x+1)/2 exactly on the fourier route
    fourier_kernel feng(w, spec, 4096);
    feng.set_n(7);
    auto sf = feng.at_windowed(4, 2);
    double stencil = 0.5 * feng.at(3).value + feng.at(4).value + 0.5 * feng.at(5).value;
    REQUIRE_THAT(sf.value, WithinAbs(stencil, 1e-13));
    REQUIRE(sf.error_bound >= feng.at(4).error_bound);

    // exact route bookkeeps the truncation strip differently; agreement is
    // within the reported bounds
    exact_kernel eng(w, spec, 16383);
    eng.set_n(7);
    auto se = eng.at_windowed(4, 2);
    double stencil_e = 0.5 * eng.at(3).value + eng.at(4).value + 0.5 * eng.at(5).value;
    double budget = se.error_bound + eng.at(3).error_bound + eng.at(4).error_bound +
                    eng.at(5).error_bound + 1e-12;
    REQUIRE_THAT(se.value, WithinAbs(stencil_e, budget));

    // routes agree for windows 2 and 3
    for (long long window : {2LL, 3LL}) {
        auto a = eng.at_windowed(2, window);
        auto b = feng.at_windowed(2, window);
        REQUIRE_THAT(a.value, WithinAbs(b.value, a.error_bound + b.error_bound + 1e-12));
    }
}

TEST_CASE("general-walk route agrees with the specialized engine", "[kernel]") {
    auto w = make_simple_walk(1);
    auto spec = make_stable(1.0);
    auto tau = tau_pmf(coefficients(spec, 4095), 5);
    auto g = kernel_exact_general(w, tau, {{0}, {3}, {-44}});
    exact_kernel eng(w, spec, 4095);
    eng.set_n(5);
    REQUIRE_THAT(g[0].value, WithinAbs(eng.at(0).value, 1e-14));
    REQUIRE_THAT(g[1].value, WithinAbs(eng.at(3).value, 1e-14));
    REQUIRE_THAT(g[2].value, WithinAbs(eng.at(-44).value, 1e-14));
    REQUIRE(g[0].error_bound >= tau.tail_mass);
}

TEST_CASE("asymmetric walks run through both dispatchers", "[kernel]") {
    auto aw = make_walk_rational(1, {{2}, {-1}}, {rational{1, 3}, rational{2, 3}});
    auto spec = make_stable(1.0);
    auto ex = kernel_exact(aw, spec, {{0}, {1}, {-2}, {7}}, 4, 8191);
    auto fr = kernel_fourier(aw, spec, {{0}, {1}, {-2}, {7}}, 4, 1 << 14);
    for (std::size_t i = 0; i < ex.size(); ++i) {
        CAPTURE(i);
        REQUIRE_THAT(ex[i].value, WithinAbs(fr[i].value, ex[i].error_bound + fr[i].error_bound));
        REQUIRE(ex[i].value >= 0.0);
    }
}

TEST_CASE("two-dimensional grids are consistent across sizes", "[kernel]") {
    auto w2 = make_simple_walk(2);
    auto spec = make_stable(1.0);
    std::vector<std::vector<long long>> pts{{0, 0}, {1, 1}, {3, 0}};
    auto a = kernel_fourier(w2, spec, pts, 3, 32);
    auto b = kernel_fourier(w2, spec, pts, 3, 128);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CAPTURE(i);
        REQUIRE_THAT(a[i].value, WithinAbs(b[i].value, a[i].error_bound + b[i].error_bound));
        REQUIRE(a[i].error_bound > b[i].error_bound);
    }
    // exact route on a small box agrees inside the wide truncation bound
    auto tau = tau_pmf(coefficients(spec, 255), 3);
    auto g = kernel_exact_general(w2, tau, pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
        REQUIRE_THAT(g[i].value, WithinAbs(b[i].value, g[i].error_bound + b[i].error_bound));
}

TEST_CASE("truncation-tail integral shrinks the error bound honestly", "[kernel]") {
    auto w = make_simple_walk(1);
    auto spec = make_stable(0.5);  // heaviest time tail of the tested family
    exact_kernel small(w, spec, 4095), big(w, spec, (1u << 18) - 1);
    small.set_n(20);
    big.set_n(20);
    auto vs = small.at(0);
    auto vb = big.at(0);
    REQUIRE(vs.error_bound < 3e-6);   // far below the plain tail mass ~ 0.5
    REQUIRE(vb.error_bound < vs.error_bound);
    REQUIRE_THAT(vs.value, WithinAbs(vb.value, vs.error_bound + vb.error_bound));

    // the multi-n batch equals the one-shot integrals
    auto batch = stable_tail_integral_multi(0.25, {1, 4, 20}, 0, 4095);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        long long n = std::vector<long long>{1, 4, 20}[i];
        auto one = stable_tail_integral(0.25, n, 0, 4095);
        REQUIRE(batch[i].value == one.value);
        REQUIRE(batch[i].error_bound == one.error_bound);
        REQUIRE(batch[i].value > 0.0);
    }
}

TEST_CASE("aliasing envelope decreases with the grid size", "[kernel]") {
    auto w = make_simple_walk(1);
    auto an = analyze_walk(w);
    auto spec = make_stable(1.0);
    double b1 = aliasing_bound(spec, 1, an.period, an.q.Q, 5, 0, 1 << 10);
    double b2 = aliasing_bound(spec, 1, an.period, an.q.Q, 5, 0, 1 << 14);
    REQUIRE(b1 > b2);
    REQUIRE(b2 > 0.0);
    REQUIRE(aliasing_bound(spec, 1, an.period, an.q.Q, 0, 0, 1 << 10) == 0.0);
}

TEST_CASE("kernel error paths", "[kernel]") {
    auto w = make_simple_walk(1);
    auto spec = make_stable(1.0);

    exact_kernel eng(w, spec, 255);
    eng.set_n(2);
    REQUIRE_THROWS_WITH(eng.at(400), ContainsSubstring("increase K"));

    fourier_kernel feng(w, spec, 64);
    feng.set_n(2);
    REQUIRE_THROWS_WITH(feng.at(40), ContainsSubstring("fourier grid needs M > 2|x|"));

    // the specialized engine only serves the simple 1d walk
    auto aw = make_walk_rational(1, {{2}, {-1}}, {rational{1, 3}, rational{2, 3}});
    REQUIRE_THROWS_AS(exact_kernel(aw, spec, 255), std::invalid_argument);

    // sublattice walk: the characteristic function returns to 1 on the grid
    auto even = make_walk(1, {{2}, {-2}}, {0.5, 0.5});
    REQUIRE_THROWS_WITH(kernel_fourier(even, spec, {{0}}, 3, 64),
                        ContainsSubstring("periodic"));

    // dense state space guard on the general route (d = 2 box over 2^26 cells)
    auto tau = tau_pmf(coefficients(spec, 4096), 3);
    REQUIRE_THROWS_WITH(kernel_exact_general(make_simple_walk(2), tau, {{0, 0}}),
                        ContainsSubstring("state space too large"));

    REQUIRE_THROWS_AS(fourier_kernel(w, spec, 3), std::invalid_argument);   // odd M
    REQUIRE_THROWS_AS(kernel_fourier(make_simple_walk(2), spec, {{0, 0}}, 1, 1 << 13),
                      std::invalid_argument);  // M^d cells over the cap
}
