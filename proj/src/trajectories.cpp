#include "relent/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>

#include "relent/entanglement.hpp"
#include "relent/errors.hpp"

namespace relent {

namespace {

// Outcome buffers live on the stack; no channel here has more than 9 outcomes.
constexpr std::size_t kMaxOutcomes = 16;
// Branches lighter than this are dropped from the enumeration.
constexpr double kPruneWeight = 1e-20;
constexpr std::size_t kBlock = 32;

int clicked_sites(const KrausChannel& channel, std::size_t outcome, bool& a, bool& b) {
    a = b = false;
    if (channel.site_outcomes.empty()) return 0;
    const auto& s = channel.site_outcomes[outcome];
    a = s[0] != 0;
    b = s[1] != 0;
    return 1;
}

PureState z_on(const PureState& state, bool a, bool b) {
    PureState out = state;
    for (std::size_t i = 0; i < 4; ++i) {
        const bool flip_a = a && (i & 2);
        const bool flip_b = b && (i & 1);
        if (flip_a != flip_b) out[i] = -out[i];
    }
    return out;
}

// Phase-invariant bucket key: populations rounded to a 1e-7 grid.
std::uint64_t bucket_key(const PureState& s) {
    const double w = s.weight();
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto q = static_cast<std::uint64_t>(std::llround(std::norm(s[i]) / w * 1e7));
        h = splitmix64(h ^ q);
    }
    return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(splitmix64(splitmix64(seed) ^ stream_id)) {}

double NoiseStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double NoiseStream::gaussian() { return normal_(engine_); }

double WeightedEnsemble::total_weight() const {
    double w = 0.0;
    for (const auto& m : members) w += m.weight();
    return w;
}

JumpOutcome jump_step(const PureState& state, const KrausChannel& channel, NoiseStream& noise) {
    const std::size_t n = channel.size();
    if (n == 0 || n > kMaxOutcomes) throw DimensionError("jump_step: unsupported number of outcomes");
    if (channel.dimension() != 4) throw DimensionError("jump_step expects a two-qubit channel");
    std::array<PureState, kMaxOutcomes> branch;
    std::array<double, kMaxOutcomes> weight{};
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        branch[i] = apply(channel.operators[i], state);
        weight[i] = branch[i].weight();
        total += weight[i];
    }
    if (!(total > 1e-300)) throw DegenerateError("jump_step: all outcomes have zero probability");
    double r = noise.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (r < weight[i]) {
            pick = i;
            break;
        }
        r -= weight[i];
    }
    // Roundoff can leave r just past the last positive weight.
    while (weight[pick] <= 0.0 && pick > 0) --pick;
    return {pick, branch[pick].scaled(1.0 / std::sqrt(weight[pick]))};
}

void check_feedback(const KrausChannel& channel, Feedback feedback) {
    if (feedback == Feedback::none) return;
    if (channel.kind != ChannelKind::dephasing)
        throw ConfigError("phase-flip feedback needs a dephasing channel on both qubits (a phase flip cannot undo a decay)");
    if (channel.site_outcomes.empty())
        throw ConfigError("phase-flip feedback needs local detectors (product channel)");
}

PureState apply_feedback(const PureState& state, const KrausChannel& channel, std::size_t outcome,
                         Feedback feedback) {
    if (feedback == Feedback::none) return state;
    check_feedback(channel, feedback);
    if (outcome >= channel.size()) throw PreconditionError("apply_feedback: outcome out of range");
    bool a = false, b = false;
    clicked_sites(channel, outcome, a, b);
    return z_on(state, a, b);
}

TrajectoryRecord run_jump_trajectory(const PureState& initial, const KrausChannel& channel, std::size_t n_steps,
                                     double dt, Feedback feedback, NoiseStream& noise) {
    check_feedback(channel, feedback);
    TrajectoryRecord rec;
    rec.times.reserve(n_steps + 1);
    rec.states.reserve(n_steps + 1);
    rec.outcomes.reserve(n_steps);
    PureState psi = initial.normalized();
    rec.times.push_back(0.0);
    rec.states.push_back(psi);
    for (std::size_t k = 0; k < n_steps; ++k) {
        auto out = jump_step(psi, channel, noise);
        psi = apply_feedback(out.state, channel, out.index, feedback);
        rec.times.push_back(static_cast<double>(k + 1) * dt);
        rec.states.push_back(psi);
        rec.outcomes.push_back(channel.labels.empty() ? std::to_string(out.index) : channel.labels[out.index]);
    }
    rec.entanglement.reserve(rec.states.size());
    for (const auto& s : rec.states) rec.entanglement.push_back(entropy_of_entanglement(s));
    return rec;
}

void step_ensemble(WeightedEnsemble& ensemble, const KrausChannel& channel, double dt,
                   const EnsembleOptions& options) {
    check_feedback(channel, options.feedback);
    if (channel.dimension() != 4) throw DimensionError("step_ensemble expects a two-qubit channel");
    std::vector<PureState> next;
    next.reserve(std::min(options.cap, ensemble.members.size() * channel.size()));
    std::unordered_multimap<std::uint64_t, std::size_t> buckets;
    const double keep = 1.0 - options.merge_tol;

    for (const auto& member : ensemble.members) {
        for (std::size_t i = 0; i < channel.size(); ++i) {
            PureState child = apply(channel.operators[i], member);
            const double w = child.weight();
            if (!(w > kPruneWeight)) continue;
            if (options.feedback != Feedback::none) {
                bool a = false, b = false;
                clicked_sites(channel, i, a, b);
                child = z_on(child, a, b);
            }
            const std::uint64_t key = bucket_key(child);
            bool merged = false;
            auto range = buckets.equal_range(key);
            for (auto it = range.first; it != range.second; ++it) {
                PureState& other = next[it->second];
                const double wo = other.weight();
                if (std::abs(inner(other, child)) >= keep * std::sqrt(w * wo)) {
                    other = other.scaled(std::sqrt((w + wo) / wo));
                    merged = true;
                    break;
                }
            }
            if (merged) continue;
            if (next.size() >= options.cap)
                throw BlowUpError("ensemble exceeded " + std::to_string(options.cap) +
                                  " members; use the Monte Carlo engine for this unravelling");
            buckets.emplace(key, next.size());
            next.push_back(child);
        }
    }
    if (next.empty()) throw DegenerateError("step_ensemble: every branch vanished");
    // Renormalize against the completeness residual of first-order steps.
    double total = 0.0;
    for (const auto& m : next) total += m.weight();
    const double scale = 1.0 / std::sqrt(total);
    for (auto& m : next) m = m.scaled(scale);
    ensemble.members = std::move(next);
    ensemble.time += dt;
}

WeightedEnsemble ensemble_propagate(const PureState& initial, const KrausChannel& channel, std::size_t n_steps,
                                    double dt, const EnsembleOptions& options) {
    WeightedEnsemble e{{initial.normalized()}, 0.0};
    for (std::size_t k = 0; k < n_steps; ++k) step_ensemble(e, channel, dt, options);
    e.time = static_cast<double>(n_steps) * dt;
    return e;
}

std::vector<WeightedEnsemble> ensemble_snapshots(const PureState& initial, const KrausChannel& channel,
                                                 double dt, const std::vector<std::size_t>& record_steps,
                                                 const EnsembleOptions& options) {
    if (!std::is_sorted(record_steps.begin(), record_steps.end()))
        throw PreconditionError("record steps must be non-decreasing");
    std::vector<WeightedEnsemble> out;
    out.reserve(record_steps.size());
    WeightedEnsemble e{{initial.normalized()}, 0.0};
    std::size_t done = 0;
    for (std::size_t target : record_steps) {
        for (; done < target; ++done) step_ensemble(e, channel, dt, options);
        e.time = static_cast<double>(done) * dt;
        out.push_back(e);
    }
    return out;
}

Matrix reconstruct_rho(const WeightedEnsemble& ensemble) {
    if (ensemble.members.empty()) throw PreconditionError("reconstruct_rho: empty ensemble");
    Matrix rho(4, 4);
    for (const auto& m : ensemble.members) rho += m.projector();
    return rho * (1.0 / rho.trace().real());
}

EntanglementAverage average_entanglement(const WeightedEnsemble& ensemble) {
    double total = 0.0, acc = 0.0;
    for (const auto& m : ensemble.members) {
        const double w = m.weight();
        if (!(w > 0.0)) continue;
        total += w;
        acc += w * entropy_of_entanglement(m);
    }
    if (!(total > 0.0)) throw DegenerateError("average_entanglement: ensemble has no weight");
    return {acc / total, 0.0};
}

EntanglementAverage average_entanglement(const std::vector<PureState>& samples) {
    if (samples.empty()) throw PreconditionError("average_entanglement: no samples");
    double sum = 0.0, sq = 0.0;
    for (const auto& s : samples) {
        const double e = entropy_of_entanglement(s);
        sum += e;
        sq += e * e;
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum / n;
    const double var = samples.size() > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

DiffusiveModel diffusive_model(const UnravellingParams& params, const ChannelSpec& spec_a,
                               const ChannelSpec& spec_b) {
    params.validate();
    spec_a.validate();
    spec_b.validate();
    if (spec_a.dt != spec_b.dt) throw ConfigError("both reservoirs must share the time step");
    const Matrix id = ops::identity2();
    auto jump = [](ChannelKind kind) { return kind == ChannelKind::dephasing ? ops::pauli_z() : ops::lowering(); };
    auto phase = [](const MixingAngles& m) {
        const Matrix u = u2_from_angles(m);
        return u(1, 1) / std::abs(u(1, 1));
    };
    DiffusiveModel model;
    model.dt = spec_a.dt;
    model.rates[0] = (std::sqrt(spec_a.gamma) * phase(params.mix_a)) * tensor_product(jump(spec_a.kind), id);
    model.rates[1] = (std::sqrt(spec_b.gamma) * phase(params.mix_b)) * tensor_product(id, jump(spec_b.kind));
    Matrix decay(4, 4);
    for (const auto& g : model.rates) decay += g.adjoint() * g;
    model.drift = Matrix::identity(4) - (0.5 * model.dt) * decay;
    return model;
}

Matrix diffusive_operator(const DiffusiveModel& model, const std::array<double, 2>& record) {
    Matrix d = model.drift;
    for (std::size_t s = 0; s < 2; ++s) d += (record[s] * model.dt) * model.rates[s];
    return d;
}

std::array<double, 2> record_drift(const DiffusiveModel& model, const PureState& state) {
    const PureState psi = state.normalized();
    std::array<double, 2> m{};
    for (std::size_t s = 0; s < 2; ++s) m[s] = 2.0 * inner(psi, apply(model.rates[s], psi)).real();
    return m;
}

PureState diffusive_step(const PureState& state, const DiffusiveModel& model, NoiseStream& noise) {
    const PureState psi = state.normalized();
    // Accumulate D_J |psi> directly instead of forming D_J.
    PureState out = apply(model.drift, psi);
    const double root = std::sqrt(model.dt);
    for (std::size_t s = 0; s < 2; ++s) {
        const PureState g = apply(model.rates[s], psi);
        const double mean = 2.0 * inner(psi, g).real();
        const double increment = mean * model.dt + root * noise.gaussian();
        for (std::size_t i = 0; i < 4; ++i) out[i] += increment * g[i];
    }
    const double w = out.weight();
    if (!(w > 1e-300) || !std::isfinite(w)) throw StepRejectedError("diffusive step produced a vanishing state");
    return out.scaled(1.0 / std::sqrt(w));
}

PureState TrajectoryModel::step(const PureState& state, NoiseStream& noise) const {
    if (diffusive) return diffusive_step(state, *diffusive, noise);
    const auto out = jump_step(state, channel, noise);
    return feedback == Feedback::none ? out.state : apply_feedback(out.state, channel, out.index, feedback);
}

TrajectoryModel make_trajectory_model(const UnravellingParams& params, const ChannelSpec& spec_a,
                                      const ChannelSpec& spec_b) {
    TrajectoryModel model;
    model.dt = spec_a.dt;
    model.feedback = params.feedback;
    if (params.diffusion_limit) {
        if (params.feedback != Feedback::none) throw ConfigError("feedback is defined for jump unravellings only");
        model.diffusive = diffusive_model(params, spec_a, spec_b);
    } else {
        model.channel = unravelled_step(params, spec_a, spec_b);
        check_feedback(model.channel, params.feedback);
    }
    return model;
}

unsigned worker_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("REL_ENT_THREADS"); env && *env) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (*end != '\0' || cap < 1) throw ConfigError("REL_ENT_THREADS must be a positive integer");
        n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

namespace {

struct BlockSums {
    std::vector<double> sum;
    std::vector<double> sq;
    std::vector<Matrix> rho;
};

void add_into(BlockSums& into, const BlockSums& from) {
    for (std::size_t k = 0; k < into.sum.size(); ++k) {
        into.sum[k] += from.sum[k];
        into.sq[k] += from.sq[k];
    }
    for (std::size_t k = 0; k < into.rho.size(); ++k) into.rho[k] += from.rho[k];
}

}  // namespace

BatchResult run_batch(const PureState& initial, const TrajectoryModel& model, const BatchOptions& options) {
    if (options.n_traj == 0) throw ConfigError("number of trajectories must be positive");
    const auto& steps = options.record_steps;
    if (!std::is_sorted(steps.begin(), steps.end())) throw PreconditionError("record steps must be non-decreasing");
    if (!model.diffusive) check_feedback(model.channel, model.feedback);
    const PureState start = initial.normalized();
    const std::size_t n_rec = steps.size();
    const std::size_t n_blocks = (options.n_traj + kBlock - 1) / kBlock;

    std::vector<BlockSums> blocks(n_blocks);
    std::atomic<std::size_t> next_block{0};
    std::vector<std::exception_ptr> failures;
    std::mutex failure_lock;

    auto worker = [&]() {
        try {
            for (std::size_t b = next_block++; b < n_blocks; b = next_block++) {
                BlockSums sums{std::vector<double>(n_rec, 0.0), std::vector<double>(n_rec, 0.0), {}};
                if (options.accumulate_rho) sums.rho.assign(n_rec, Matrix(4, 4));
                const std::size_t lo = b * kBlock, hi = std::min(options.n_traj, lo + kBlock);
                for (std::size_t traj = lo; traj < hi; ++traj) {
                    NoiseStream noise(options.seed, traj);
                    PureState psi = start;
                    std::size_t done = 0;
                    for (std::size_t k = 0; k < n_rec; ++k) {
                        for (; done < steps[k]; ++done) psi = model.step(psi, noise);
                        const double e = entropy_of_entanglement(psi);
                        sums.sum[k] += e;
                        sums.sq[k] += e * e;
                        if (options.accumulate_rho) sums.rho[k] += psi.projector();
                    }
                }
                blocks[b] = std::move(sums);
            }
        } catch (...) {
            std::lock_guard<std::mutex> guard(failure_lock);
            failures.push_back(std::current_exception());
            next_block = n_blocks;
        }
    };

    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(options.threads ? options.threads : worker_threads(), n_blocks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!failures.empty()) std::rethrow_exception(failures.front());

    // Pairwise reduction over block index.
    for (std::size_t stride = 1; stride < n_blocks; stride *= 2)
        for (std::size_t b = 0; b + stride < n_blocks; b += 2 * stride) add_into(blocks[b], blocks[b + stride]);

    BatchResult result;
    result.n_traj = options.n_traj;
    const double n = static_cast<double>(options.n_traj);
    for (std::size_t k = 0; k < n_rec; ++k) {
        result.times.push_back(static_cast<double>(steps[k]) * model.dt);
        const double mean = blocks[0].sum[k] / n;
        const double var = n > 1 ? std::max(0.0, (blocks[0].sq[k] - n * mean * mean) / (n - 1.0)) : 0.0;
        result.mean.push_back(mean);
        result.std_error.push_back(std::sqrt(var / n));
        if (options.accumulate_rho) result.rho.push_back(blocks[0].rho[k] * (1.0 / n));
    }
    return result;
}

}  // namespace relent
