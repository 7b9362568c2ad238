#include "dflsim/param_vector.hpp"

#include <cmath>
#include <string>

#include "dflsim/errors.hpp"

namespace dflsim {

bool ParamVector::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_same_dim(const ParamVector& x, const ParamVector& y, const char* op) {
    if (x.dim() != y.dim()) {
        throw DimMismatchError(std::string(op) + ": dimension mismatch, " +
                               std::to_string(x.dim()) + " vs " + std::to_string(y.dim()));
    }
}

ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y, "axpy");
    ParamVector out(x.dim());
    const double* px = x.data();
    const double* py = y.data();
    double* po = out.data();
    const std::size_t n = x.dim();
    for (std::size_t k = 0; k < n; ++k) {
        po[k] = a * px[k] + py[k];
    }
    return out;
}

void axpy_inplace(double a, const ParamVector& x, ParamVector& y) {
    require_same_dim(x, y, "axpy_inplace");
    const double* px = x.data();
    double* py = y.data();
    const std::size_t n = x.dim();
    for (std::size_t k = 0; k < n; ++k) {
        py[k] += a * px[k];
    }
}

double dot(const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y, "dot");
    const double* px = x.data();
    const double* py = y.data();
    double acc = 0.0;
    const std::size_t n = x.dim();
    for (std::size_t k = 0; k < n; ++k) {
        acc += px[k] * py[k];
    }
    return acc;
}

double l2_norm(const ParamVector& x) {
    return std::sqrt(dot(x, x));
}

double l2_distance(const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y, "l2_distance");
    const double* px = x.data();
    const double* py = y.data();
    double acc = 0.0;
    const std::size_t n = x.dim();
    for (std::size_t k = 0; k < n; ++k) {
        const double d = px[k] - py[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void scale_inplace(double a, ParamVector& x) {
    double* px = x.data();
    const std::size_t n = x.dim();
    for (std::size_t k = 0; k < n; ++k) {
        px[k] *= a;
    }
}

} // namespace dflsim
