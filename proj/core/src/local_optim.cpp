#include "dflsim/local_optim.hpp"

#include <cmath>
#include <string>

#include "dflsim/errors.hpp"

namespace dflsim {

ParamVector debias(const ParamVector& x, double w) {
    if (!std::isfinite(w) || w <= 0.0) {
        throw ProtocolError("debias: push-sum weight must be positive and finite, got " +
                            std::to_string(w));
    }
    ParamVector z(x.dim());
    const double inv = 1.0 / w;
    for (std::size_t k = 0; k < x.dim(); ++k) z[k] = x[k] * inv;
    return z;
}

ParamVector sam_gradient(const LocalObjective& obj, const ParamVector& z,
                         std::span<const int> batch, double rho, LocalTraceEntry* trace) {
    if (rho < 0.0) throw SimError("sam_gradient: rho must be >= 0");
    ParamVector g1 = obj.gradient(z, batch);
    const double norm = l2_norm(g1);

    if (rho == 0.0 || norm <= kSamGradFloor) {
        if (trace) {
            trace->z = z;
            trace->z_perturbed = z;
            trace->grad_at_z = g1;
            trace->grad_perturbed = g1;
        }
        return g1;
    }

    ParamVector ascent = axpy(rho / norm, g1, z); // z + rho * g1/||g1||
    ParamVector g = obj.gradient(ascent, batch);
    if (trace) {
        trace->z = z;
        trace->z_perturbed = std::move(ascent);
        trace->grad_at_z = std::move(g1);
        trace->grad_perturbed = g;
    }
    return g;
}

int resolve_local_iters(const LocalHyper& hyper, int shard_size) {
    if (hyper.local_epochs > 0) {
        const int batch = std::min(hyper.batch_size, shard_size);
        const int per_epoch = (shard_size + batch - 1) / batch;
        return hyper.local_epochs * per_epoch;
    }
    if (hyper.local_iters < 1) {
        throw ConfigError("local iterations: set local_iters >= 1 or local_epochs >= 1");
    }
    return hyper.local_iters;
}

ParamVector local_round(const LocalObjective& obj, const ParamVector& x_in, double w,
                        const LocalHyper& hyper, const MinibatchSampler& sampler,
                        long iter_offset, LocalTrace* trace) {
    if (!(hyper.eta_l >= 0.0)) throw ConfigError("local_round: eta_l must be >= 0");
    if (hyper.alpha < 0.0 || hyper.alpha >= 1.0) {
        throw ConfigError("local_round: alpha must lie in [0, 1)");
    }
    const int iters = resolve_local_iters(hyper, obj.shard_size());

    ParamVector x = x_in;
    ParamVector v(x.dim(), 0.0); // momentum restarts every round
    for (int k = 0; k < iters; ++k) {
        const ParamVector z = debias(x, w);
        const Minibatch mb = sampler.batch_for(iter_offset + k);

        LocalTraceEntry entry;
        LocalTraceEntry* sink = trace ? &entry : nullptr;
        const ParamVector g = sam_gradient(obj, z, mb.sample_indices, hyper.rho, sink);

        // v <- alpha v + g ; x <- x - eta v
        for (std::size_t d = 0; d < v.dim(); ++d) v[d] = hyper.alpha * v[d] + g[d];
        axpy_inplace(-hyper.eta_l, v, x);

        if (trace) {
            entry.momentum = v;
            entry.x = x;
            entry.batch = mb.sample_indices;
            trace->push_back(std::move(entry));
        }
    }
    return x;
}

} // namespace dflsim
