#ifndef UWISE_HARNESS_HPP
#define UWISE_HARNESS_HPP

#include <cstdint>
#include <vector>

#include "uwise/analysis.hpp"
#include "uwise/gradients.hpp"
#include "uwise/models.hpp"

namespace uwise {

enum class GradientEstimatorKind { Standard, Complete, Permuted, Random, Surrogate1, Surrogate2 };

GradientEstimatorKind gradient_kind_from_string(const std::string& s);
std::string gradient_kind_name(GradientEstimatorKind k);

struct RunConfig {
    TargetModel model;
    GaussianVariational family{FamilyKind::Diagonal, 1};
    GradientEstimatorKind grad_kind = GradientEstimatorKind::Standard;
    BaseGradientKind base = BaseGradientKind::Reparam;
    int n = 16;
    int m = 8;
    int ell = 20;       // Permuted
    int k = 0;          // Random; 0 = ell * n / m
    double cap = kDefaultSetCap;
    std::vector<double> learning_rates;
    int iterations = 2000;
    std::vector<std::uint64_t> seeds;
    // Evaluation: standard IW-ELBO on a decoupled, larger batch.
    int eval_n = 64;
    int eval_m = 8;
};

struct Trace {
    std::vector<double> objective;  // finite entries up to divergence, then truncated
    Vec final_params;
    bool diverged = false;
    int diverged_at = -1;
};

// Plain fixed-step SGD ascent, phi <- phi + lr * g, fresh noise batch per
// iteration. Divergence (non-finite objective or parameter) truncates the
// trace and sets the flag; it is data, not an error.
Trace sgd_optimize(const RunConfig& config, int lr_index, std::uint64_t seed);

// Trace padded to `len` with -inf past the divergence point.
std::vector<double> padded_objective(const Trace& t, int len);

// Per-iteration maximum across learning rates.
std::vector<double> envelope(const std::vector<std::vector<double>>& traces);

// Per-iteration lower median across seeds.
std::vector<double> median_envelope(const std::vector<std::vector<double>>& envelopes);

// Mean of entries (burn_in, horizon], the summary optimization metric.
double average_objective(const std::vector<double>& env, int burn_in, int horizon);

struct GridRun {
    std::vector<std::vector<Trace>> traces;  // [seed][lr]
    std::vector<std::vector<double>> envelopes;
    std::vector<double> median_env;
};

GridRun run_grid(const RunConfig& config, int threads = 1);

std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace uwise

#endif
