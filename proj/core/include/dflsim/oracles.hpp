#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dflsim/local_optim.hpp"
#include "dflsim/param_vector.hpp"
#include "dflsim/topology.hpp"

namespace dflsim {

// Result of one independent check. A failing report carries a witness
// string (seed + configuration) that reproduces the failure.
struct OracleReport {
    std::string check_name;
    bool pass = false;
    double max_error = 0.0;
    std::string witness;
};

struct MixingState {
    std::vector<ParamVector> x;
    std::vector<double> w;
    std::vector<ParamVector> z;
};

// Pure-mixing reference: x^{t+1} = P(t) x^t and w^{t+1} = P(t) w^t computed
// as dense matrix-vector products over all (i, j) pairs. Shares no code with
// the message-passing engine it is used to check. Returns states for
// t = 0..rounds inclusive.
std::vector<MixingState> matrix_power_consensus_oracle(const TopologySchedule& sched,
                                                       const std::vector<ParamVector>& x0,
                                                       const std::vector<double>& w0, int rounds);

// Direct evaluation of the local-update closed form
//   -eta_l * sum_{k=1..K} sum_{s=1..k} alpha^{k-s} g_s
// from a recorded trace, term by term rather than via the momentum
// recursion.
ParamVector momentum_closed_form_oracle(const LocalTrace& trace, double eta_l, double alpha, int K);

struct TildeAlphaResult {
    bool ok = false;
    double tilde_alpha = 0.0;
    double bound = 0.0;
};

// tilde_alpha = sum_{k=1..K} sum_{s=1..k} alpha^{k-s} by direct summation;
// verifies 0 < tilde_alpha < K/(1-alpha). At alpha == 0 the sum equals the
// bound exactly, so the comparison is non-strict there.
TildeAlphaResult tilde_alpha_bound_check(double alpha, int K);

// All oracle checks at their default sizes; one line per check on `out`.
std::vector<OracleReport> run_verify_suite(std::ostream& out, std::uint64_t seed = 1);

bool all_passed(const std::vector<OracleReport>& reports);

} // namespace dflsim
