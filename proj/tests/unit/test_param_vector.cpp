#include <cmath>

#include "doctest.h"

#include "dflsim/errors.hpp"
#include "dflsim/grad_check.hpp"
#include "dflsim/param_vector.hpp"
#include "dflsim/rng.hpp"

using namespace dflsim;

TEST_SUITE("param_vector") {

TEST_CASE("axpy basics") {
    CHECK(axpy(0.0, ParamVector{5.0, -3.0}, ParamVector{1.0, 2.0}) == ParamVector{1.0, 2.0});
    CHECK(axpy(1.0, ParamVector{1.0, 1.0}, ParamVector{2.0, 3.0}) == ParamVector{3.0, 4.0});

    const ParamVector r = axpy(-0.1, ParamVector{10.0, 20.0}, ParamVector{1.0, 2.0});
    CHECK(r[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("axpy dimension mismatch names both dims") {
    try {
        axpy(1.0, ParamVector{1.0}, ParamVector{1.0, 2.0});
        FAIL("expected DimMismatchError");
    } catch (const DimMismatchError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
    }
}

TEST_CASE("axpy is exact on integer-representable inputs") {
    SeededRng rng(42, StreamPurpose::Test);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 1 + rng.uniform_int(64);
        ParamVector x(dim), y(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            x[k] = static_cast<double>(static_cast<int>(rng.uniform_int(2001)) - 1000);
            y[k] = static_cast<double>(static_cast<int>(rng.uniform_int(2001)) - 1000);
        }
        const double a = static_cast<double>(static_cast<int>(rng.uniform_int(21)) - 10);
        const ParamVector r = axpy(a, x, y);
        for (std::size_t k = 0; k < dim; ++k) {
            CHECK(r[k] == a * x[k] + y[k]); // exact, no reordering
        }
    }
}

TEST_CASE("l2_norm examples") {
    CHECK(l2_norm(ParamVector{0.0, 0.0, 0.0}) == 0.0);
    CHECK(l2_norm(ParamVector{3.0, 4.0}) == 5.0);
    CHECK(l2_norm(ParamVector{1.0, 1.0, 1.0, 1.0}) == 2.0);
}

TEST_CASE("norm squared matches dot within a few ulps") {
    SeededRng rng(7, StreamPurpose::Test);
    for (std::size_t dim : {std::size_t{3}, std::size_t{100}, std::size_t{10000}, std::size_t{200000}}) {
        ParamVector x(dim);
        for (std::size_t k = 0; k < dim; ++k) x[k] = rng.normal();
        const double n = l2_norm(x);
        const double d = dot(x, x);
        const double ulps = std::abs(n * n - d) / std::max(1e-300, d * 2.220446049250313e-16);
        CHECK(ulps <= 4.0);
    }
}

TEST_CASE("finite_diff_grad on quadratic matches x") {
    const auto f = [](const ParamVector& v) { return 0.5 * dot(v, v); };
    const ParamVector x{2.0, -1.0};
    const ParamVector g = finite_diff_grad(f, x, 1e-5);
    CHECK(max_abs_diff(g, x) < 1e-8);
}

TEST_CASE("finite_diff_grad on a constant is zero") {
    const auto f = [](const ParamVector&) { return 3.75; };
    const ParamVector g = finite_diff_grad(f, ParamVector{0.4, -2.0, 9.9});
    CHECK(l2_norm(g) < 1e-10);
}

TEST_CASE("finite_diff_grad converges at second order on a cubic") {
    // truncation error ~ h^2 f''' / 6, so halving h shrinks the error 4x;
    // for degree <= 2 the scheme is exact up to roundoff (checked above)
    const auto f = [](const ParamVector& v) { return v[0] * v[0] * v[0] + 2.0 * v[1] * v[1] * v[1]; };
    const ParamVector x{1.3, -0.8};
    const ParamVector exact{3.0 * 1.3 * 1.3, 6.0 * 0.8 * 0.8};

    const double err_h = max_abs_diff(finite_diff_grad(f, x, 1e-2), exact);
    const double err_half = max_abs_diff(finite_diff_grad(f, x, 5e-3), exact);
    CHECK(err_h / err_half >= 3.0);
}

TEST_CASE("finite_diff_grad reports the offending coordinate") {
    const auto f = [](const ParamVector& v) { return v[1] > 0.5 ? std::nan("") : 0.0; };
    try {
        finite_diff_grad(f, ParamVector{0.0, 0.5});
        FAIL("expected SimError");
    } catch (const SimError& e) {
        CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
    }
}

} // TEST_SUITE
