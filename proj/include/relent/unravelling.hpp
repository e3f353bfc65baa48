#pragma once

// Unravelling freedom: mixing the Kraus vector of a step by a unitary leaves the
// channel untouched but changes the measurement outcomes, and so the ensemble of
// conditional pure states. Observers of independent reservoirs are restricted to
// mixings of the form U_A (x) U_B.

#include <string>
#include <vector>

#include "relent/channels.hpp"
#include "relent/linalg.hpp"

namespace relent {

// Angles of a 2x2 unitary, global phase dropped:
//   [[cos t, -e^{i l} sin t], [e^{i p} sin t, e^{i (p + l)} cos t]]
struct MixingAngles {
    double theta = 0.0;
    double phi = 0.0;
    double lambda = 0.0;

    bool operator==(const MixingAngles&) const = default;
};

enum class Feedback { none, phase_flip };

std::string to_string(Feedback feedback);

struct UnravellingParams {
    MixingAngles mix_a;
    MixingAngles mix_b;
    // Dimensionless noise amplitude per observer, in units of sqrt(gamma dt). Empty means
    // a pure jump unravelling; one entry is shared by both observers.
    std::vector<Complex> omega;
    // Homodyne-like limit of infinite noise amplitude, stepped with D_J operators.
    bool diffusion_limit = false;
    // Coherent superposition of the two observers' jumps (nonlocal).
    bool correlated_jumps = false;
    Feedback feedback = Feedback::none;

    // Throws ConfigError on non-finite values or unsupported combinations.
    void validate() const;

    bool noisy() const noexcept { return !omega.empty(); }
    Complex omega_for(int site) const;
};

struct OutcomeDistribution {
    std::vector<double> probabilities;
    std::vector<std::string> labels;
};

Matrix u2_from_angles(double theta, double phi, double lambda);
inline Matrix u2_from_angles(const MixingAngles& a) { return u2_from_angles(a.theta, a.phi, a.lambda); }

// G_i = sum_j u[i, j] K_j
KrausChannel mix_kraus(const KrausChannel& channel, const Matrix& u);

// two_qubit_step(mix_kraus(A, U_A), mix_kraus(B, U_B))
KrausChannel local_mixing(const UnravellingParams& params, const KrausChannel& channel_a,
                          const KrausChannel& channel_b);

// {A0 (x) B0, (A1 (x) 1 + 1 (x) B1)/sqrt2, (A1 (x) 1 - 1 (x) B1)/sqrt2}
KrausChannel correlated_jump_ops(const KrausChannel& channel_a, const KrausChannel& channel_b);

enum class NoJumpForm {
    // G0 = 1 - 1/2 sum (G+^dag G+ + G-^dag G-), complete to O(dt^2).
    first_order,
    // G0 = sqrt(1 - sum (G+^dag G+ + G-^dag G-)), complete exactly.
    exact_completion,
    // Isometric mixing of the original pair: G0 = sqrt(1 - |Omega|^2) K0 and
    // G+- = (Omega K0 +- U K_*) / sqrt2. Same channel exactly; agrees with the forms above
    // to first order. Needs |Omega| <= 1 and a single jump operator.
    isometric,
};

// Noisy jump operators G_{i+-} = (Omega_i 1 +- (U K_*)_i) / sqrt2, with Omega_i =
// omega_tilde_i * sqrt(gamma_dt). Operator 0 of `channel` is the no-jump operator and the
// rest form the jump block K_*; `jump_unitary` mixes the jump block only.
KrausChannel diffusive_ops(const KrausChannel& channel, const Matrix& jump_unitary,
                           const std::vector<Complex>& omega_tilde, double gamma_dt,
                           NoJumpForm form = NoJumpForm::first_order);

// Per-step two-qubit channel for a local (or correlated) unravelling of the given reservoirs.
// Not defined for the diffusion limit, which is not a finite Kraus set.
KrausChannel unravelled_step(const UnravellingParams& params, const ChannelSpec& spec_a,
                             const ChannelSpec& spec_b);

// Outcome probabilities on a pure state, renormalized against the completeness residual.
OutcomeDistribution outcome_distribution(const KrausChannel& channel, const PureState& state);
// Unconditional outcome probabilities tr(G_i rho G_i^dag) for a mixed state.
OutcomeDistribution outcome_distribution(const KrausChannel& channel, const Matrix& rho);

// Shannon entropy in bits, 0 log 0 = 0.
double outcome_entropy(const OutcomeDistribution& distribution);

}  // namespace relent
