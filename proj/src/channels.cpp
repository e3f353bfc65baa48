#include "relent/channels.hpp"

#include <cmath>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

std::string to_string(ChannelKind kind) {
    return kind == ChannelKind::dephasing ? "dephasing" : "damping";
}

ChannelKind channel_kind_from_string(const std::string& name) {
    if (name == "dephasing") return ChannelKind::dephasing;
    if (name == "damping") return ChannelKind::damping;
    throw ConfigError("unknown channel '" + name + "' (expected dephasing or damping)");
}

std::string to_string(StepForm form) { return form == StepForm::exact ? "exact" : "first_order"; }

StepForm step_form_from_string(const std::string& name) {
    if (name == "exact") return StepForm::exact;
    if (name == "first_order") return StepForm::first_order;
    throw ConfigError("unknown step form '" + name + "' (expected exact or first_order)");
}

void ChannelSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (gamma * dt > kMaxGammaDt) {
        std::ostringstream msg;
        msg << "gamma*dt = " << gamma * dt << " exceeds the short-time limit " << kMaxGammaDt;
        throw ConfigError(msg.str());
    }
}

Matrix KrausChannel::completeness() const {
    Matrix sum(dimension(), dimension());
    for (const auto& k : operators) sum += k.adjoint() * k;
    return sum;
}

double KrausChannel::completeness_residual() const {
    return max_abs_diff(completeness(), Matrix::identity(dimension()));
}

KrausChannel identity_channel(std::size_t dimension) {
    KrausChannel ch;
    ch.operators = {Matrix::identity(dimension)};
    ch.labels = {"0"};
    ch.locality = dimension == 2 ? Locality::single_qubit : Locality::product_two_qubit;
    if (dimension == 4) ch.site_outcomes = {{0, 0}};
    return ch;
}

KrausChannel dephasing_step(double gamma, double dt) {
    ChannelSpec{ChannelKind::dephasing, gamma, dt}.validate();
    KrausChannel ch;
    ch.operators = {(1.0 - gamma * dt / 2.0) * ops::identity2(), std::sqrt(gamma * dt) * ops::pauli_z()};
    ch.labels = {"0", "1"};
    ch.kind = ChannelKind::dephasing;
    return ch;
}

KrausChannel damping_step(double gamma, double dt) {
    ChannelSpec{ChannelKind::damping, gamma, dt}.validate();
    const Matrix l = ops::lowering();
    KrausChannel ch;
    ch.operators = {ops::identity2() - (gamma * dt / 2.0) * (l.adjoint() * l), std::sqrt(gamma * dt) * l};
    ch.labels = {"0", "1"};
    ch.kind = ChannelKind::damping;
    return ch;
}

KrausChannel short_time_step(const ChannelSpec& spec) {
    spec.validate();
    if (spec.form == StepForm::exact) return finite_time_channel(spec.kind, spec.gamma, spec.dt);
    return spec.kind == ChannelKind::dephasing ? dephasing_step(spec.gamma, spec.dt)
                                               : damping_step(spec.gamma, spec.dt);
}

KrausChannel finite_time_channel(ChannelKind kind, double gamma, double t) {
    if (!(t >= 0.0)) throw DomainError("finite_time_channel: t must be non-negative");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    KrausChannel ch;
    ch.labels = {"0", "1"};
    ch.kind = kind;
    if (kind == ChannelKind::dephasing) {
        // Off-diagonals decay as exp(-2 g t) under the generator g (Z rho Z - rho).
        const double decay = std::exp(-2.0 * gamma * t);
        ch.operators = {std::sqrt((1.0 + decay) / 2.0) * ops::identity2(),
                        std::sqrt((1.0 - decay) / 2.0) * ops::pauli_z()};
    } else {
        const double survive = std::exp(-gamma * t);
        ch.operators = {Matrix(2, 2, {1.0, 0.0, 0.0, std::sqrt(survive)}),
                        std::sqrt(1.0 - survive) * ops::lowering()};
    }
    return ch;
}

KrausChannel two_qubit_step(const KrausChannel& channel_a, const KrausChannel& channel_b) {
    if (channel_a.dimension() != 2 || channel_b.dimension() != 2 ||
        channel_a.locality != Locality::single_qubit || channel_b.locality != Locality::single_qubit)
        throw DimensionError("two_qubit_step expects two single-qubit channels");
    KrausChannel ch;
    ch.locality = Locality::product_two_qubit;
    for (std::size_t i = 0; i < channel_a.size(); ++i) {
        for (std::size_t j = 0; j < channel_b.size(); ++j) {
            ch.operators.push_back(tensor_product(channel_a.operators[i], channel_b.operators[j]));
            ch.labels.push_back(channel_a.labels[i] + "," + channel_b.labels[j]);
            ch.site_outcomes.push_back({static_cast<int>(i), static_cast<int>(j)});
        }
    }
    if (channel_a.kind && channel_a.kind == channel_b.kind) ch.kind = channel_a.kind;
    return ch;
}

Matrix apply_channel(const Matrix& rho, const KrausChannel& channel) {
    if (!rho.square() || rho.rows() != channel.dimension())
        throw DimensionError("apply_channel: state dimension " + std::to_string(rho.rows()) +
                             " does not match channel dimension " + std::to_string(channel.dimension()));
    Matrix out(rho.rows(), rho.cols());
    for (const auto& k : channel.operators) out += k * rho * k.adjoint();
    return out;
}

}  // namespace relent
