#pragma once

// Kraus channels for local dephasing and spontaneous emission.
//
// Short-time operators are the first-order expansions of the master equation
// with jump operator Z (dephasing) or |0><1| (damping):
//   dephasing: A0 = (1 - g dt / 2) 1,        A1 = sqrt(g dt) Z
//   damping:   A0 = 1 - (g dt / 2) L^dag L,  A1 = sqrt(g dt) L
// The closed-form finite-time channels integrate the same generator exactly, so
// that composing n short steps converges to them as dt -> 0.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "relent/linalg.hpp"

namespace relent {

enum class ChannelKind { dephasing, damping };

enum class Locality { single_qubit, product_two_qubit, nonlocal };

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& name);

// Upper bound on g*dt for the first-order expansion.
inline constexpr double kMaxGammaDt = 0.1;

// How a time step of length dt is discretized. first_order uses the expansions above;
// exact uses the finite-time channel at t = dt, which agrees with them to first order
// and composes without bias.
enum class StepForm { first_order, exact };

std::string to_string(StepForm form);
StepForm step_form_from_string(const std::string& name);

struct ChannelSpec {
    ChannelKind kind = ChannelKind::dephasing;
    double gamma = 1.0;
    double dt = 0.01;
    StepForm form = StepForm::first_order;

    // Throws ConfigError when gamma <= 0, dt <= 0 or gamma*dt > kMaxGammaDt.
    void validate() const;
};

struct KrausChannel {
    std::vector<Matrix> operators;
    Locality locality = Locality::single_qubit;
    std::vector<std::string> labels;
    // Per-site outcome index for each operator of a product channel (index 0 is the
    // no-click outcome). Empty for single-qubit and nonlocal channels.
    std::vector<std::array<int, 2>> site_outcomes;
    // Physical source of the noise, when all operators share one.
    std::optional<ChannelKind> kind;

    std::size_t size() const noexcept { return operators.size(); }
    std::size_t dimension() const noexcept { return operators.empty() ? 0 : operators.front().rows(); }

    // sum_i K_i^dag K_i
    Matrix completeness() const;
    // Largest entry of |sum_i K_i^dag K_i - 1|.
    double completeness_residual() const;
};

KrausChannel identity_channel(std::size_t dimension);

KrausChannel dephasing_step(double gamma, double dt);
KrausChannel damping_step(double gamma, double dt);
// Validates spec, then builds the step in the requested form.
KrausChannel short_time_step(const ChannelSpec& spec);

// Exact channel after time t >= 0 (DomainError for negative t).
KrausChannel finite_time_channel(ChannelKind kind, double gamma, double t);

// Product channel {A_i (x) B_j}, outcomes in lexicographic (i, j) order.
KrausChannel two_qubit_step(const KrausChannel& channel_a, const KrausChannel& channel_b);

// sum_i K_i rho K_i^dag
Matrix apply_channel(const Matrix& rho, const KrausChannel& channel);

}  // namespace relent
