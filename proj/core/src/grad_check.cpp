#include "dflsim/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dflsim/errors.hpp"

namespace dflsim {

ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& f,
                             const ParamVector& x, double h) {
    if (!(h > 0.0)) throw SimError("finite_diff_grad: step must be positive");
    ParamVector grad(x.dim());
    ParamVector probe = x;
    for (std::size_t k = 0; k < x.dim(); ++k) {
        const double xk = probe[k];
        probe[k] = xk + h;
        const double fp = f(probe);
        probe[k] = xk - h;
        const double fm = f(probe);
        probe[k] = xk;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw SimError("finite_diff_grad: non-finite objective value at coordinate " +
                           std::to_string(k));
        }
        grad[k] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
    require_same_dim(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) {
        m = std::max(m, std::abs(a[k] - b[k]));
    }
    return m;
}

double rel_error(const ParamVector& approx, const ParamVector& exact, double floor) {
    return l2_distance(approx, exact) / std::max(l2_norm(exact), floor);
}

} // namespace dflsim
