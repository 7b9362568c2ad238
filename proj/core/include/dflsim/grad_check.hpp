#pragma once

#include <functional>

#include "dflsim/param_vector.hpp"

namespace dflsim {

inline constexpr double kDefaultFdStep = 1e-5;

// Central-difference gradient (f(x + h e_k) - f(x - h e_k)) / (2h) per
// coordinate. This is the reference every analytic gradient in the library
// is validated against. Throws SimError naming the coordinate if f returns
// a non-finite value.
ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& f,
                             const ParamVector& x, double h = kDefaultFdStep);

double max_abs_diff(const ParamVector& a, const ParamVector& b);

// ||approx - exact|| / max(||exact||, floor)
double rel_error(const ParamVector& approx, const ParamVector& exact, double floor = 1e-12);

} // namespace dflsim
