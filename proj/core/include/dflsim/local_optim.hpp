#pragma once

#include <span>
#include <vector>

#include "dflsim/objective.hpp"

namespace dflsim {

// Hyper-parameters for one client's K local iterations. eta_l is the
// already-decayed rate for the current round.
struct LocalHyper {
    double eta_l = 0.1;
    double rho = 0.0;   // ascent radius; 0 disables the perturbation
    double alpha = 0.0; // momentum coefficient in [0, 1)
    int local_iters = 0;  // K; used when local_epochs == 0
    int local_epochs = 0; // when > 0, K = epochs * ceil(shard / batch)
    int batch_size = 1;
};

// Below this gradient norm the ascent direction is numerically undefined
// and the perturbation is skipped.
inline constexpr double kSamGradFloor = 1e-12;

// Per-iteration record for oracle replay; populated only when a trace sink
// is passed in.
struct LocalTraceEntry {
    ParamVector z;               // de-biased params at iteration start
    ParamVector z_perturbed;     // ascent point (equals z when skipped)
    ParamVector grad_at_z;       // first gradient
    ParamVector grad_perturbed;  // gradient fed to the momentum update
    ParamVector momentum;        // v after the update
    ParamVector x;               // x after the descent step
    std::vector<int> batch;      // shard indices shared by both gradients
};

using LocalTrace = std::vector<LocalTraceEntry>;

// x / w. Throws ProtocolError when w is non-positive or non-finite, which
// can only happen if the gossip state was corrupted.
ParamVector debias(const ParamVector& x, double w);

// Two-point gradient: g1 at z, then the gradient at z + rho * g1/||g1||
// computed on the SAME batch. rho == 0 or a vanishing g1 short-circuits to
// g1 itself.
ParamVector sam_gradient(const LocalObjective& obj, const ParamVector& z,
                         std::span<const int> batch, double rho,
                         LocalTraceEntry* trace = nullptr);

// K iterations for the number of local steps a shard/batch combination
// implies (explicit iterations, or epochs * batches-per-epoch).
int resolve_local_iters(const LocalHyper& hyper, int shard_size);

// The K-iteration local update: for each k, de-bias the current x by the
// round-constant w, take the two-point gradient on a fresh batch, fold it
// into the momentum buffer (reset to zero at every call), and descend.
// Returns x after K steps. iter_offset positions the sampler's global
// iteration counter (round * K for round-based callers).
ParamVector local_round(const LocalObjective& obj, const ParamVector& x_in, double w,
                        const LocalHyper& hyper, const MinibatchSampler& sampler,
                        long iter_offset, LocalTrace* trace = nullptr);

} // namespace dflsim
