#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dflsim {

// Flat vector of model parameters. All protocol state (x, z, v, gradients)
// is stored in this type. The dimension is fixed at construction.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
    explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}
    ParamVector(std::initializer_list<double> values) : values_(values) {}

    static ParamVector zeros(std::size_t dim) { return ParamVector(dim, 0.0); }

    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }

    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }
    std::span<const double> span() const { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> values_;
};

// Throws DimMismatchError naming both dimensions and the operation.
void require_same_dim(const ParamVector& x, const ParamVector& y, const char* op);

// result[k] = a * x[k] + y[k]
ParamVector axpy(double a, const ParamVector& x, const ParamVector& y);

// y[k] += a * x[k]
void axpy_inplace(double a, const ParamVector& x, ParamVector& y);

double dot(const ParamVector& x, const ParamVector& y);
double l2_norm(const ParamVector& x);
double l2_distance(const ParamVector& x, const ParamVector& y);
void scale_inplace(double a, ParamVector& x);

} // namespace dflsim
