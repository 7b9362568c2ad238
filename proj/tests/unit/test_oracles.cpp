#include <sstream>

#include "doctest.h"

#include "dflsim/oracles.hpp"
#include "dflsim/param_vector.hpp"

using namespace dflsim;

TEST_SUITE("oracles") {

TEST_CASE("matrix oracle: complete graph averages in one round") {
    TopologyOptions opts;
    opts.generator = TopologyGenerator::Complete;
    const TopologySchedule sched(opts, 3, 1);

    const std::vector<ParamVector> x0{ParamVector{3.0}, ParamVector{0.0}, ParamVector{-1.5}};
    const std::vector<double> w0(3, 1.0);
    const auto states = matrix_power_consensus_oracle(sched, x0, w0, 1);
    REQUIRE(states.size() == 2);
    const double mean = (3.0 + 0.0 - 1.5) / 3.0;
    for (int i = 0; i < 3; ++i) {
        CHECK(states[1].z[static_cast<std::size_t>(i)][0] == doctest::Approx(mean).epsilon(1e-15));
    }
}

TEST_CASE("momentum oracle hand expansions") {
    LocalTrace trace;
    LocalTraceEntry e1, e2;
    e1.grad_perturbed = ParamVector{2.0, -1.0};
    e2.grad_perturbed = ParamVector{0.5, 3.0};
    trace.push_back(e1);

    SUBCASE("K=1 is a single scaled gradient") {
        const auto d = momentum_closed_form_oracle(trace, 0.1, 0.5, 1);
        CHECK(d[0] == doctest::Approx(-0.2));
        CHECK(d[1] == doctest::Approx(0.1));
    }
    SUBCASE("K=2 at alpha 0.5 weights the first gradient 1.5x") {
        trace.push_back(e2);
        const auto d = momentum_closed_form_oracle(trace, 0.1, 0.5, 2);
        CHECK(d[0] == doctest::Approx(-0.1 * (1.5 * 2.0 + 0.5)));
        CHECK(d[1] == doctest::Approx(-0.1 * (1.5 * -1.0 + 3.0)));
    }
    SUBCASE("alpha 0 collapses to the plain SGD sum") {
        trace.push_back(e2);
        const auto d = momentum_closed_form_oracle(trace, 0.1, 0.0, 2);
        CHECK(d[0] == doctest::Approx(-0.1 * (2.0 + 0.5)));
        CHECK(d[1] == doctest::Approx(-0.1 * (-1.0 + 3.0)));
    }
}

TEST_CASE("tilde-alpha values and bound") {
    SUBCASE("alpha 0 sits exactly on the bound") {
        const auto r = tilde_alpha_bound_check(0.0, 4);
        CHECK(r.tilde_alpha == 4.0);
        CHECK(r.bound == 4.0);
        CHECK(r.ok); // non-strict at the boundary
    }
    SUBCASE("alpha 0.5, K 2") {
        const auto r = tilde_alpha_bound_check(0.5, 2);
        CHECK(r.tilde_alpha == doctest::Approx(2.5));
        CHECK(r.bound == doctest::Approx(4.0));
        CHECK(r.ok);
    }
    SUBCASE("alpha 0.9, K 5 stays under 50") {
        const auto r = tilde_alpha_bound_check(0.9, 5);
        CHECK(r.tilde_alpha < 50.0);
        CHECK(r.ok);
    }
}

TEST_CASE("the full verify suite passes") {
    std::ostringstream out;
    const auto reports = run_verify_suite(out, 1);
    for (const auto& r : reports) {
        INFO(r.check_name, ": ", r.witness);
        CHECK(r.pass);
    }
    CHECK(all_passed(reports));
    CHECK(reports.size() >= 10);
    // one printed line per check
    int lines = 0;
    std::istringstream in(out.str());
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == static_cast<int>(reports.size()));
}

} // TEST_SUITE
