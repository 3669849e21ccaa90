#include "uwise/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "uwise/estimators.hpp"
#include "uwise/subsets.hpp"

namespace uwise {

GradientEstimatorKind gradient_kind_from_string(const std::string& s) {
    if (s == "standard") return GradientEstimatorKind::Standard;
    if (s == "complete") return GradientEstimatorKind::Complete;
    if (s == "permuted") return GradientEstimatorKind::Permuted;
    if (s == "random") return GradientEstimatorKind::Random;
    if (s == "surrogate1") return GradientEstimatorKind::Surrogate1;
    if (s == "surrogate2") return GradientEstimatorKind::Surrogate2;
    throw std::invalid_argument("unknown gradient estimator kind: " + s);
}

std::string gradient_kind_name(GradientEstimatorKind k) {
    switch (k) {
        case GradientEstimatorKind::Standard: return "standard";
        case GradientEstimatorKind::Complete: return "complete";
        case GradientEstimatorKind::Permuted: return "permuted";
        case GradientEstimatorKind::Random: return "random";
        case GradientEstimatorKind::Surrogate1: return "surrogate1";
        case GradientEstimatorKind::Surrogate2: return "surrogate2";
    }
    return "unknown";
}

namespace {

Vec training_gradient(const RunConfig& cfg, const SampleBatch& batch, RngStream& sets) {
    switch (cfg.grad_kind) {
        case GradientEstimatorKind::Standard:
            return u_statistic_gradient(batch, IndexSetCollection::disjoint_blocks(cfg.n, cfg.m), cfg.base);
        case GradientEstimatorKind::Complete:
            return u_statistic_gradient(batch, IndexSetCollection::all_subsets(cfg.n, cfg.m, cfg.cap),
                                        cfg.base);
        case GradientEstimatorKind::Permuted:
            return u_statistic_gradient(
                batch, IndexSetCollection::permuted_blocks(cfg.n, cfg.m, cfg.ell, sets), cfg.base);
        case GradientEstimatorKind::Random: {
            const int k = cfg.k > 0 ? cfg.k : cfg.ell * cfg.n / cfg.m;
            return u_statistic_gradient(batch, IndexSetCollection::random_subsets(cfg.n, cfg.m, k, sets),
                                        cfg.base);
        }
        case GradientEstimatorKind::Surrogate1: return surrogate_gradient(batch, cfg.m, 1);
        case GradientEstimatorKind::Surrogate2: return surrogate_gradient(batch, cfg.m, 2);
    }
    throw std::logic_error("training_gradient: unknown kind");
}

}  // namespace

Trace sgd_optimize(const RunConfig& cfg, int lr_index, std::uint64_t seed) {
    const double lr = cfg.learning_rates.at(lr_index);
    RngStream root = RngStream::from_seed(seed).derive("lr").derive(static_cast<std::uint64_t>(lr_index));
    RngStream init = root.derive("init");
    RngStream train = root.derive("train");
    RngStream eval = root.derive("eval");
    RngStream sets = root.derive("sets");

    Vec phi = cfg.family.random_init(init);
    Trace trace;
    trace.objective.reserve(cfg.iterations);
    const auto eval_blocks = IndexSetCollection::disjoint_blocks(cfg.eval_n, cfg.eval_m);

    for (int t = 0; t < cfg.iterations; ++t) {
        double obj = std::numeric_limits<double>::quiet_NaN();
        Vec g;
        try {
            const LogWeights eval_v{
                log_weight_values(cfg.model, cfg.family, phi, draw_noise(cfg.eval_n, cfg.model.dim, eval))};
            obj = u_statistic(eval_v, eval_blocks).value;
            const SampleBatch batch =
                log_weight_batch(cfg.model, cfg.family, phi, draw_noise(cfg.n, cfg.model.dim, train));
            g = training_gradient(cfg, batch, sets);
        } catch (const std::invalid_argument&) {
            // non-finite log-weights: the run has left the stable region
            trace.diverged = true;
            trace.diverged_at = t;
            break;
        }
        if (!std::isfinite(obj) || !g.allFinite()) {
            trace.diverged = true;
            trace.diverged_at = t;
            break;
        }
        trace.objective.push_back(obj);
        phi += lr * g;
        if (!phi.allFinite()) {
            trace.diverged = true;
            trace.diverged_at = t + 1;
            break;
        }
    }
    trace.final_params = phi;
    return trace;
}

std::vector<double> padded_objective(const Trace& t, int len) {
    std::vector<double> out(t.objective);
    out.resize(len, -std::numeric_limits<double>::infinity());
    return out;
}

std::vector<double> envelope(const std::vector<std::vector<double>>& traces) {
    if (traces.empty()) throw std::invalid_argument("envelope: no traces");
    const std::size_t len = traces.front().size();
    for (const auto& t : traces)
        if (t.size() != len) throw std::invalid_argument("envelope: unequal trace lengths");
    std::vector<double> env(len, -std::numeric_limits<double>::infinity());
    for (const auto& t : traces)
        for (std::size_t i = 0; i < len; ++i) env[i] = std::max(env[i], t[i]);
    return env;
}

std::vector<double> median_envelope(const std::vector<std::vector<double>>& envelopes) {
    if (envelopes.empty()) throw std::invalid_argument("median_envelope: no envelopes");
    const std::size_t len = envelopes.front().size();
    for (const auto& e : envelopes)
        if (e.size() != len) throw std::invalid_argument("median_envelope: unequal lengths");
    std::vector<double> out(len);
    std::vector<double> col(envelopes.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t s = 0; s < envelopes.size(); ++s) col[s] = envelopes[s][i];
        std::sort(col.begin(), col.end());
        out[i] = col[(col.size() - 1) / 2];  // lower median
    }
    return out;
}

double average_objective(const std::vector<double>& env, int burn_in, int horizon) {
    if (horizon <= burn_in) throw std::invalid_argument("average_objective: need horizon > burn_in");
    if (horizon > static_cast<int>(env.size()))
        throw std::invalid_argument("average_objective: horizon exceeds trace length");
    double sum = 0.0;
    for (int i = burn_in; i < horizon; ++i) sum += env[i];
    return sum / (horizon - burn_in);
}

GridRun run_grid(const RunConfig& cfg, int threads) {
    if (cfg.learning_rates.empty()) throw std::invalid_argument("run_grid: no learning rates");
    if (cfg.seeds.empty()) throw std::invalid_argument("run_grid: no seeds");
    const int S = static_cast<int>(cfg.seeds.size());
    const int L = static_cast<int>(cfg.learning_rates.size());

    GridRun out;
    out.traces.assign(S, std::vector<Trace>(L));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int cell = next.fetch_add(1);
            if (cell >= S * L) return;
            const int s = cell / L;
            const int l = cell % L;
            out.traces[s][l] = sgd_optimize(cfg, l, cfg.seeds[s]);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::future<void>> fut;
        for (int t = 0; t < threads; ++t) fut.push_back(std::async(std::launch::async, worker));
        for (auto& f : fut) f.get();
    }

    out.envelopes.resize(S);
    for (int s = 0; s < S; ++s) {
        std::vector<std::vector<double>> padded;
        padded.reserve(L);
        for (int l = 0; l < L; ++l) padded.push_back(padded_objective(out.traces[s][l], cfg.iterations));
        out.envelopes[s] = envelope(padded);
    }
    out.median_env = median_envelope(out.envelopes);
    return out;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    if (count < 1 || lo <= 0.0 || hi < lo) throw std::invalid_argument("log_spaced: bad arguments");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < count; ++i) out[i] = std::exp(la + (lb - la) * i / (count - 1));
    return out;
}

}  // namespace uwise
