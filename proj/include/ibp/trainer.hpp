#pragma once

// Tabular adversarial trainer: a stochastic encoder q(t|x) and two decoders
// q(y|t), q(x|t), all parameterized by unconstrained logits under row-wise
// softmax. The encoder descends lambda * L_MT - (1-lambda) * L_Adv; the MT
// decoder descends lambda * L_MT; the adversarial decoder is fit on its own
// K-fraction of steps with the encoder frozen.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ibp/partition.hpp"
#include "ibp/prob.hpp"
#include "ibp/world_gen.hpp"

namespace ibp {

inline constexpr double kProbClamp = 1e-300; // clamp before log at the support boundary

/// A logit matrix whose rows define distributions via softmax.
struct LogitTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> logits;

    static LogitTable zeros(std::size_t r, std::size_t c) {
        return LogitTable{r, c, std::vector<double>(r * c, 0.0)};
    }

    double at(std::size_t r, std::size_t c) const { return logits[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return logits[r * cols + c]; }

    /// Row-wise softmax of the logits.
    std::vector<double> probs() const {
        std::vector<double> p(logits.size());
        for (std::size_t r = 0; r < rows; ++r) {
            double mx = logits[r * cols];
            for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, at(r, c));
            double sum = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                p[r * cols + c] = std::exp(at(r, c) - mx);
                sum += p[r * cols + c];
            }
            for (std::size_t c = 0; c < cols; ++c) p[r * cols + c] /= sum;
        }
        return p;
    }

    bool operator==(const LogitTable& o) const = default;
};

struct TrainerConfig {
    double lambda = 0.73;
    double k_frac = 0.7;
    double lr = 0.1;
    std::size_t steps = 10000;
    std::size_t n_clusters = 0; // 0 means |X|
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    enum class Mode { Exact, Sampled };
    Mode mode = Mode::Exact;

    void validate() const {
        if (!(lambda > 0.0 && lambda <= 1.0))
            throw std::invalid_argument("TrainerConfig: lambda must be in (0, 1]");
        if (!(k_frac >= 0.0 && k_frac < 1.0))
            throw std::invalid_argument("TrainerConfig: K must be in [0, 1)");
        if (lr < 0.0) throw std::invalid_argument("TrainerConfig: lr must be >= 0");
        if (batch_size < 1) throw std::invalid_argument("TrainerConfig: batch_size must be >= 1");
    }
};

struct TraceRow {
    std::size_t step;
    double l_mt;
    double l_adv;
    double objective;
};

struct TrainState {
    LogitTable encoder;    // |X| x |T|
    LogitTable mt_decoder; // |T| x |Y|
    LogitTable adv_decoder; // |T| x |X|
    std::size_t step = 0;
    std::size_t adv_steps = 0; // steps that took the adversarial-decoder branch
    std::vector<TraceRow> trace;
};

struct Losses {
    double l_mt;
    double l_adv;
    double objective;
};

struct TrainerGradients {
    LogitTable encoder;    // d(lambda L_MT - (1-lambda) L_Adv) / d encoder logits
    LogitTable mt_decoder; // d L_MT / d MT-decoder logits
    LogitTable adv_decoder; // d L_Adv / d adversarial-decoder logits
};

/// Seeded random-normal initialization; |T| defaults to |X|.
inline TrainState init_state(const World& world, const TrainerConfig& config) {
    config.validate();
    std::size_t nx = world.joint.nx();
    std::size_t ny = world.joint.ny();
    std::size_t nt = config.n_clusters == 0 ? nx : config.n_clusters;
    if (nt < 1) throw std::invalid_argument("init_state: n_clusters must be >= 1");
    TrainState st;
    st.encoder = LogitTable::zeros(nx, nt);
    st.mt_decoder = LogitTable::zeros(nt, ny);
    st.adv_decoder = LogitTable::zeros(nt, nx);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (double& v : st.encoder.logits) v = noise(rng);
    for (double& v : st.mt_decoder.logits) v = noise(rng);
    for (double& v : st.adv_decoder.logits) v = noise(rng);
    return st;
}

namespace detail {

// Expectation weights: pxy is a (possibly empirical) joint weight matrix over
// X x Y summing to one; px its row marginal.
struct DataView {
    std::size_t nx, ny;
    std::vector<double> pxy;
    std::vector<double> px;
};

inline DataView exact_view(const World& world) {
    DataView d;
    d.nx = world.joint.nx();
    d.ny = world.joint.ny();
    d.pxy = world.joint.mass;
    d.px.assign(d.nx, 0.0);
    for (std::size_t i = 0; i < d.nx; ++i)
        for (std::size_t j = 0; j < d.ny; ++j) d.px[i] += d.pxy[i * d.ny + j];
    return d;
}

inline DataView batch_view(const World& world, const ParallelCorpus& corpus,
                           std::size_t batch_size, std::mt19937_64& rng) {
    DataView d;
    d.nx = world.joint.nx();
    d.ny = world.joint.ny();
    d.pxy.assign(d.nx * d.ny, 0.0);
    d.px.assign(d.nx, 0.0);
    double w = 1.0 / static_cast<double>(batch_size);
    for (std::size_t k = 0; k < batch_size; ++k) {
        std::size_t pick = static_cast<std::size_t>(ibp::detail::uniform01(rng) * corpus.pairs.size());
        pick = std::min(pick, corpus.pairs.size() - 1);
        auto [x, y] = corpus.pairs[pick];
        d.pxy[x * d.ny + y] += w;
        d.px[x] += w;
    }
    return d;
}

inline double clamped_log(double v) { return std::log(std::max(v, kProbClamp)); }

inline Losses losses_on(const DataView& d, const TrainState& st, double lambda) {
    std::size_t nt = st.encoder.cols;
    std::vector<double> qt = st.encoder.probs();
    std::vector<double> qm = st.mt_decoder.probs();
    std::vector<double> qa = st.adv_decoder.probs();

    double l_mt = 0.0, l_adv = 0.0;
    for (std::size_t x = 0; x < d.nx; ++x) {
        for (std::size_t y = 0; y < d.ny; ++y) {
            double p = d.pxy[x * d.ny + y];
            if (p <= 0.0) continue;
            double m = 0.0;
            for (std::size_t t = 0; t < nt; ++t) m += qt[x * nt + t] * qm[t * d.ny + y];
            l_mt -= p * clamped_log(m);
        }
        if (d.px[x] > 0.0) {
            double a = 0.0;
            for (std::size_t t = 0; t < nt; ++t) a += qt[x * nt + t] * qa[t * d.nx + x];
            l_adv -= d.px[x] * clamped_log(a);
        }
    }
    return Losses{l_mt, l_adv, lambda * l_mt - (1.0 - lambda) * l_adv};
}

inline TrainerGradients gradients_on(const DataView& d, const TrainState& st, double lambda) {
    std::size_t nt = st.encoder.cols;
    std::vector<double> qt = st.encoder.probs();
    std::vector<double> qm = st.mt_decoder.probs();
    std::vector<double> qa = st.adv_decoder.probs();

    // Marginalized model probabilities m(x,y) and a(x).
    std::vector<double> m(d.nx * d.ny, 0.0);
    std::vector<double> a(d.nx, 0.0);
    for (std::size_t x = 0; x < d.nx; ++x) {
        for (std::size_t t = 0; t < nt; ++t) {
            double q = qt[x * nt + t];
            for (std::size_t y = 0; y < d.ny; ++y) m[x * d.ny + y] += q * qm[t * d.ny + y];
            a[x] += q * qa[t * d.nx + x];
        }
    }
    for (double& v : m) v = std::max(v, kProbClamp);
    for (double& v : a) v = std::max(v, kProbClamp);

    TrainerGradients g;
    g.encoder = LogitTable::zeros(st.encoder.rows, st.encoder.cols);
    g.mt_decoder = LogitTable::zeros(st.mt_decoder.rows, st.mt_decoder.cols);
    g.adv_decoder = LogitTable::zeros(st.adv_decoder.rows, st.adv_decoder.cols);

    for (std::size_t x = 0; x < d.nx; ++x) {
        for (std::size_t t = 0; t < nt; ++t) {
            // dL_MT / dE[x][t] = -q(t|x) (sum_y P(x,y) q(y|t)/m(x,y) - P(x))
            double s = 0.0;
            for (std::size_t y = 0; y < d.ny; ++y) {
                double p = d.pxy[x * d.ny + y];
                if (p > 0.0) s += p * qm[t * d.ny + y] / m[x * d.ny + y];
            }
            double d_mt = -qt[x * nt + t] * (s - d.px[x]);
            // dL_Adv / dE[x][t] = -q(t|x) P(x) (q(x|t)/a(x) - 1)
            double d_adv = -qt[x * nt + t] * d.px[x] * (qa[t * d.nx + x] / a[x] - 1.0);
            g.encoder.at(x, t) = lambda * d_mt - (1.0 - lambda) * d_adv;
        }
    }

    for (std::size_t t = 0; t < nt; ++t) {
        // Shared inner terms r(x) = sum_y P(x,y) q(y|t) / m(x,y).
        std::vector<double> r(d.nx, 0.0);
        for (std::size_t x = 0; x < d.nx; ++x)
            for (std::size_t y = 0; y < d.ny; ++y) {
                double p = d.pxy[x * d.ny + y];
                if (p > 0.0) r[x] += p * qm[t * d.ny + y] / m[x * d.ny + y];
            }
        for (std::size_t yp = 0; yp < d.ny; ++yp) {
            double grad = 0.0;
            for (std::size_t x = 0; x < d.nx; ++x) {
                double direct = d.pxy[x * d.ny + yp] > 0.0
                                    ? d.pxy[x * d.ny + yp] / m[x * d.ny + yp]
                                    : 0.0;
                grad += qt[x * nt + t] * (direct - r[x]);
            }
            g.mt_decoder.at(t, yp) = -qm[t * d.ny + yp] * grad;
        }
        for (std::size_t xp = 0; xp < d.nx; ++xp) {
            double cross = 0.0;
            for (std::size_t x = 0; x < d.nx; ++x)
                cross += d.px[x] * qt[x * nt + t] * qa[t * d.nx + x] / a[x];
            double direct = d.px[xp] * qt[xp * nt + t] / a[xp];
            g.adv_decoder.at(t, xp) = -qa[t * d.nx + xp] * (direct - cross);
        }
    }
    return g;
}

} // namespace detail

/// Losses in Exact mode: full expectations under the world's joint.
inline Losses objective(const World& world, const TrainState& state, double lambda) {
    return detail::losses_on(detail::exact_view(world), state, lambda);
}

/// Analytic gradients in Exact mode. The encoder gradient is for the full
/// objective; the MT-decoder gradient is for L_MT alone; the adversarial
/// decoder gradient is for L_Adv alone (its update path is separate).
inline TrainerGradients gradient(const World& world, const TrainState& state, double lambda) {
    return detail::gradients_on(detail::exact_view(world), state, lambda);
}

/// One alternating training step. With probability K the adversarial decoder
/// alone descends L_Adv (encoder frozen); otherwise the encoder descends the
/// full objective and the MT decoder descends lambda * L_MT.
inline void train_step(const World& world, TrainState& state, const TrainerConfig& config,
                       std::mt19937_64& rng, const ParallelCorpus* corpus = nullptr) {
    detail::DataView view =
        config.mode == TrainerConfig::Mode::Sampled && corpus
            ? detail::batch_view(world, *corpus, config.batch_size, rng)
            : detail::exact_view(world);
    bool adv_branch = detail::uniform01(rng) < config.k_frac;
    TrainerGradients g = detail::gradients_on(view, state, config.lambda);
    if (adv_branch) {
        for (std::size_t i = 0; i < state.adv_decoder.logits.size(); ++i)
            state.adv_decoder.logits[i] -= config.lr * g.adv_decoder.logits[i];
        ++state.adv_steps;
    } else {
        for (std::size_t i = 0; i < state.encoder.logits.size(); ++i)
            state.encoder.logits[i] -= config.lr * g.encoder.logits[i];
        for (std::size_t i = 0; i < state.mt_decoder.logits.size(); ++i)
            state.mt_decoder.logits[i] -= config.lr * config.lambda * g.mt_decoder.logits[i];
    }
    ++state.step;
}

/// Full training run. Deterministic given the config; throws if the
/// objective diverges to NaN, reporting the step.
inline TrainState train(const World& world, const TrainerConfig& config,
                        const ParallelCorpus* corpus = nullptr) {
    config.validate();
    if (config.mode == TrainerConfig::Mode::Sampled && (!corpus || corpus->pairs.empty()))
        throw std::invalid_argument("train: Sampled mode requires a non-empty corpus");
    TrainState state = init_state(world, config);
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t s = 0; s < config.steps; ++s) {
        Losses l = objective(world, state, config.lambda);
        if (!std::isfinite(l.objective))
            throw std::runtime_error("train: objective diverged at step " + std::to_string(state.step));
        state.trace.push_back(TraceRow{state.step, l.l_mt, l.l_adv, l.objective});
        train_step(world, state, config, rng, corpus);
    }
    Losses l = objective(world, state, config.lambda);
    if (!std::isfinite(l.objective))
        throw std::runtime_error("train: objective diverged at step " + std::to_string(state.step));
    state.trace.push_back(TraceRow{state.step, l.l_mt, l.l_adv, l.objective});
    return state;
}

/// Exact I(X,T) and I(T,Y) of the stochastic encoder against the true joint.
inline std::pair<double, double> mi_report(const World& world, const TrainState& state) {
    const JointTable& j = world.joint;
    std::size_t nt = state.encoder.cols;
    std::vector<double> qt = state.encoder.probs();
    ProbVector px = x_marginal(j);

    JointTable xt;
    xt.x_labels = j.x_labels;
    for (std::size_t t = 0; t < nt; ++t) xt.y_labels.push_back("t" + std::to_string(t));
    xt.mass.assign(j.nx() * nt, 0.0);
    for (std::size_t x = 0; x < j.nx(); ++x)
        for (std::size_t t = 0; t < nt; ++t) xt.at(x, t) = px.weights[x] * qt[x * nt + t];

    JointTable ty;
    for (std::size_t t = 0; t < nt; ++t) ty.x_labels.push_back("t" + std::to_string(t));
    ty.y_labels = j.y_labels;
    ty.mass.assign(nt * j.ny(), 0.0);
    for (std::size_t x = 0; x < j.nx(); ++x)
        for (std::size_t y = 0; y < j.ny(); ++y)
            for (std::size_t t = 0; t < nt; ++t)
                ty.at(t, y) += j.at(x, y) * qt[x * nt + t];

    return {mutual_information(xt), mutual_information(ty)};
}

/// Deterministic partition from the encoder: argmax_t q(t|x), ties to the
/// lowest t, then re-canonicalized.
inline Partition harden_encoder(const TrainState& state) {
    std::size_t nt = state.encoder.cols;
    std::vector<double> qt = state.encoder.probs();
    std::vector<std::size_t> raw(state.encoder.rows);
    for (std::size_t x = 0; x < state.encoder.rows; ++x) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < nt; ++t)
            if (qt[x * nt + t] > qt[x * nt + best]) best = t;
        raw[x] = best;
    }
    return Partition::canonicalize(raw);
}

/// Soft paraphrase distribution sum_t q(t|x_s) q_adv(x_p|t).
inline ProbVector paraphrase_dist_soft(const World& world, const TrainState& state,
                                       const std::string& x_s) {
    const JointTable& j = world.joint;
    std::size_t xs = j.x_index(x_s);
    std::size_t nt = state.encoder.cols;
    std::vector<double> qt = state.encoder.probs();
    std::vector<double> qa = state.adv_decoder.probs();
    std::vector<double> w(j.nx(), 0.0);
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t xp = 0; xp < j.nx(); ++xp)
            w[xp] += qt[xs * nt + t] * qa[t * j.nx() + xp];
    ProbVector out{j.x_labels, std::move(w)};
    out.validate();
    return out;
}

} // namespace ibp
