#include "relent/unravelling.hpp"

#include <cmath>

#include "relent/errors.hpp"

namespace relent {

namespace {

bool finite(const MixingAngles& a) {
    return std::isfinite(a.theta) && std::isfinite(a.phi) && std::isfinite(a.lambda);
}

bool trivial(const MixingAngles& a) { return std::abs(std::sin(a.theta)) < 1e-12 && std::cos(a.theta) > 0; }

// Phase picked up by the jump operator when the mixing does not couple jump and no-jump.
Complex jump_phase(const MixingAngles& a) {
    const Matrix u = u2_from_angles(a);
    return u(1, 1) / std::abs(u(1, 1));
}

}  // namespace

std::string to_string(Feedback feedback) { return feedback == Feedback::none ? "none" : "phase_flip"; }

void UnravellingParams::validate() const {
    if (!finite(mix_a) || !finite(mix_b)) throw ConfigError("mixing angles must be finite");
    for (const auto& w : omega)
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) throw ConfigError("omega must be finite");
    if (omega.size() > 2) throw ConfigError("omega takes one or two entries (one per observer)");
    const bool mixes = !trivial(mix_a) || !trivial(mix_b);
    if (correlated_jumps && (mixes || noisy() || diffusion_limit))
        throw ConfigError("correlated_jumps cannot be combined with local mixing or noise");
    if ((noisy() || diffusion_limit) &&
        (std::abs(std::sin(mix_a.theta)) > 1e-12 || std::abs(std::sin(mix_b.theta)) > 1e-12))
        throw ConfigError("noisy and diffusive unravellings only admit a phase on the jump (theta = 0)");
    if (noisy() && diffusion_limit) throw ConfigError("choose either a finite omega or the diffusion limit");
}

Complex UnravellingParams::omega_for(int site) const {
    if (omega.empty()) return 0.0;
    if (omega.size() == 1) return omega.front();
    return omega[static_cast<std::size_t>(site)];
}

Matrix u2_from_angles(double theta, double phi, double lambda) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex eil = std::polar(1.0, lambda);
    const Complex eip = std::polar(1.0, phi);
    return Matrix(2, 2, {c, -eil * s, eip * s, eip * eil * c});
}

KrausChannel mix_kraus(const KrausChannel& channel, const Matrix& u) {
    if (!u.square() || u.rows() != channel.size())
        throw DimensionError("mix_kraus: unitary dimension " + std::to_string(u.rows()) +
                             " does not match " + std::to_string(channel.size()) + " operators");
    if (max_abs_diff(u.adjoint() * u, Matrix::identity(u.rows())) > 1e-8)
        throw PreconditionError("mix_kraus: mixing matrix is not unitary");
    KrausChannel out = channel;
    for (std::size_t i = 0; i < channel.size(); ++i) {
        Matrix g(channel.dimension(), channel.dimension());
        for (std::size_t j = 0; j < channel.size(); ++j)
            if (u(i, j) != Complex{}) g += u(i, j) * channel.operators[j];
        out.operators[i] = std::move(g);
    }
    return out;
}

KrausChannel local_mixing(const UnravellingParams& params, const KrausChannel& channel_a,
                          const KrausChannel& channel_b) {
    if (channel_a.size() != 2 || channel_b.size() != 2)
        throw DimensionError("local_mixing expects two-outcome channels on each qubit");
    return two_qubit_step(mix_kraus(channel_a, u2_from_angles(params.mix_a)),
                          mix_kraus(channel_b, u2_from_angles(params.mix_b)));
}

KrausChannel correlated_jump_ops(const KrausChannel& channel_a, const KrausChannel& channel_b) {
    if (channel_a.size() != 2 || channel_b.size() != 2 || channel_a.dimension() != 2 ||
        channel_b.dimension() != 2)
        throw DimensionError("correlated_jump_ops expects two-outcome single-qubit channels");
    const Matrix id = ops::identity2();
    const double r = 1.0 / std::sqrt(2.0);
    const Matrix jump_a = tensor_product(channel_a.operators[1], id);
    const Matrix jump_b = tensor_product(id, channel_b.operators[1]);
    KrausChannel ch;
    ch.operators = {tensor_product(channel_a.operators[0], channel_b.operators[0]), r * (jump_a + jump_b),
                    r * (jump_a - jump_b)};
    ch.labels = {"0", "+", "-"};
    ch.locality = Locality::nonlocal;
    if (channel_a.kind && channel_a.kind == channel_b.kind) ch.kind = channel_a.kind;
    return ch;
}

KrausChannel diffusive_ops(const KrausChannel& channel, const Matrix& jump_unitary,
                           const std::vector<Complex>& omega_tilde, double gamma_dt, NoJumpForm form) {
    if (channel.size() < 2) throw DimensionError("diffusive_ops needs at least one jump operator");
    const std::size_t jumps = channel.size() - 1;
    if (omega_tilde.size() != jumps)
        throw DimensionError("diffusive_ops: omega has " + std::to_string(omega_tilde.size()) +
                             " entries for " + std::to_string(jumps) + " jump operators");
    if (!(gamma_dt > 0.0)) throw ConfigError("diffusive_ops: gamma*dt must be positive");

    KrausChannel jump_block;
    jump_block.operators.assign(channel.operators.begin() + 1, channel.operators.end());
    jump_block.labels.assign(channel.labels.begin() + 1, channel.labels.end());
    jump_block = mix_kraus(jump_block, jump_unitary);

    const std::size_t dim = channel.dimension();
    const Matrix id = Matrix::identity(dim);
    const double r = 1.0 / std::sqrt(2.0);
    const double unit = std::sqrt(gamma_dt);

    if (form == NoJumpForm::isometric) {
        if (jumps != 1) throw DimensionError("isometric noisy operators need exactly one jump operator");
        const Complex amplitude = omega_tilde.front() * unit;
        if (std::abs(amplitude) > 1.0)
            throw ConfigError("noise amplitude too large for this time step (omega^2 gamma dt must stay below 1)");
        const Matrix& k0 = channel.operators.front();
        const Matrix& kj = jump_block.operators.front();
        KrausChannel out;
        out.locality = channel.locality;
        out.kind = channel.kind;
        out.operators = {std::sqrt(1.0 - std::norm(amplitude)) * k0, r * (amplitude * k0 + kj),
                         r * (amplitude * k0 - kj)};
        out.labels = {channel.labels.front(), jump_block.labels.front() + "+", jump_block.labels.front() + "-"};
        return out;
    }

    KrausChannel out;
    out.locality = channel.locality;
    out.kind = channel.kind;
    out.operators.emplace_back(dim, dim);
    out.labels.push_back(channel.labels.front());
    Matrix clicks(dim, dim);
    for (std::size_t i = 0; i < jumps; ++i) {
        const Complex amplitude = omega_tilde[i] * unit;
        Matrix plus = r * (amplitude * id + jump_block.operators[i]);
        Matrix minus = r * (amplitude * id - jump_block.operators[i]);
        clicks += plus.adjoint() * plus;
        clicks += minus.adjoint() * minus;
        out.operators.push_back(std::move(plus));
        out.operators.push_back(std::move(minus));
        out.labels.push_back(jump_block.labels[i] + "+");
        out.labels.push_back(jump_block.labels[i] + "-");
    }
    if (form == NoJumpForm::first_order) {
        out.operators.front() = id - 0.5 * clicks;
    } else {
        const auto eig = hermitian_eig(id - clicks);
        if (eig.values.front() < -1e-12)
            throw ConfigError("noise amplitude too large for this time step (omega^2 gamma dt must stay below 1)");
        out.operators.front() = psd_sqrt(id - clicks);
    }
    return out;
}

KrausChannel unravelled_step(const UnravellingParams& params, const ChannelSpec& spec_a,
                             const ChannelSpec& spec_b) {
    params.validate();
    if (params.diffusion_limit)
        throw ConfigError("the diffusion limit has no finite Kraus set; use the diffusive trajectory engine");
    const KrausChannel a = short_time_step(spec_a);
    const KrausChannel b = short_time_step(spec_b);
    if (params.correlated_jumps) return correlated_jump_ops(a, b);
    if (!params.noisy()) return local_mixing(params, a, b);

    auto noisy_site = [&](const KrausChannel& ch, const ChannelSpec& spec, const MixingAngles& mix, int site) {
        const Matrix phase(1, 1, {jump_phase(mix)});
        return diffusive_ops(ch, phase, {params.omega_for(site)}, spec.gamma * spec.dt, NoJumpForm::isometric);
    };
    return two_qubit_step(noisy_site(a, spec_a, params.mix_a, 0), noisy_site(b, spec_b, params.mix_b, 1));
}

OutcomeDistribution outcome_distribution(const KrausChannel& channel, const PureState& state) {
    if (channel.dimension() != 4) throw DimensionError("outcome_distribution expects a two-qubit channel");
    OutcomeDistribution dist{std::vector<double>(channel.size()), channel.labels};
    double total = 0.0;
    for (std::size_t i = 0; i < channel.size(); ++i) {
        dist.probabilities[i] = apply(channel.operators[i], state).weight();
        total += dist.probabilities[i];
    }
    if (!(total > 1e-300)) throw DegenerateError("all outcomes have zero probability");
    for (auto& p : dist.probabilities) p /= total;
    return dist;
}

OutcomeDistribution outcome_distribution(const KrausChannel& channel, const Matrix& rho) {
    if (rho.rows() != channel.dimension()) throw DimensionError("outcome_distribution: dimension mismatch");
    OutcomeDistribution dist{std::vector<double>(channel.size()), channel.labels};
    double total = 0.0;
    for (std::size_t i = 0; i < channel.size(); ++i) {
        const auto& k = channel.operators[i];
        dist.probabilities[i] = std::max(0.0, (k * rho * k.adjoint()).trace().real());
        total += dist.probabilities[i];
    }
    if (!(total > 1e-300)) throw DegenerateError("all outcomes have zero probability");
    for (auto& p : dist.probabilities) p /= total;
    return dist;
}

double outcome_entropy(const OutcomeDistribution& distribution) {
    double s = 0.0;
    for (double p : distribution.probabilities)
        if (p > 0.0) s -= p * std::log2(p);
    return s;
}

}  // namespace relent
