// uwise: variance benchmarks, approximation audits, optimization grids and
// zeta tables for U-statistic importance-weighted objectives.
//
// Exit codes: 0 = all assertions passed, 1 = an assertion failed,
// 2 = usage or configuration error.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uwise/analysis.hpp"
#include "uwise/estimators.hpp"
#include "uwise/gradients.hpp"
#include "uwise/harness.hpp"
#include "uwise/models.hpp"
#include "uwise/rng.hpp"
#include "uwise/subsets.hpp"

using json = nlohmann::ordered_json;
using namespace uwise;

namespace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal representation, so output diffs are meaningful.
std::string fmt(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void reject_unknown(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) ok = true;
        if (!ok) throw ConfigError(ctx + ": unknown field \"" + item.key() + "\"");
    }
}

template <typename T>
T get_req(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) throw ConfigError(ctx + ": missing required field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(ctx + ": field \"" + key + "\": " + e.what());
    }
}

template <typename T>
T get_opt(const json& j, const char* key, T fallback, const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(ctx + ": field \"" + key + "\": " + e.what());
    }
}

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::string threads = "";
    bool dump_sets = false;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
}

std::uint64_t resolve_seed(const GlobalArgs& args, const json& cfg) {
    if (args.seed) return *args.seed;
    if (cfg.contains("seed")) return get_req<std::uint64_t>(cfg, "seed", "config");
    throw ConfigError("seed is required: pass --seed or set \"seed\" in the config");
}

std::filesystem::path resolve_out_dir(const GlobalArgs& args, const json& cfg) {
    std::string dir = ".";
    if (cfg.contains("out_dir")) dir = get_req<std::string>(cfg, "out_dir", "config");
    if (args.out_dir) dir = *args.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

int resolve_threads(const GlobalArgs& args, const json& cfg) {
    std::string spec = "1";
    if (cfg.contains("threads")) {
        const json& t = cfg.at("threads");
        spec = t.is_string() ? t.get<std::string>() : std::to_string(get_req<int>(cfg, "threads", "config"));
    }
    if (!args.threads.empty()) spec = args.threads;
    if (spec == "auto") return std::max(1u, std::thread::hardware_concurrency());
    int k = 0;
    const auto res = std::from_chars(spec.data(), spec.data() + spec.size(), k);
    if (res.ec != std::errc{} || res.ptr != spec.data() + spec.size() || k < 1)
        throw ConfigError("threads must be a positive integer or \"auto\", got \"" + spec + "\"");
    return k;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

// ---------------------------------------------------------------------------
// Models from config

struct BuiltModel {
    TargetModel model;
    std::string name;
};

BuiltModel build_model(const json& j, RngStream rng, const std::filesystem::path& out_dir) {
    const std::string ctx = "model";
    const std::string type = get_req<std::string>(j, "type", ctx);
    if (type == "linear_gaussian") {
        reject_unknown(j, ctx, {"type", "d_z", "d_x", "noise_sd"});
        const int dz = get_req<int>(j, "d_z", ctx);
        const int dx = get_opt<int>(j, "d_x", dz + 1, ctx);
        const double noise_sd = get_opt<double>(j, "noise_sd", 0.6, ctx);
        if (dz < 1 || dx < 1) throw ConfigError(ctx + ": dimensions must be positive");
        Mat A(dx, dz);
        for (int i = 0; i < dx; ++i)
            for (int c = 0; c < dz; ++c) A(i, c) = rng.next_normal();
        // draw x from the generative model itself
        Vec z(dz);
        for (int i = 0; i < dz; ++i) z[i] = rng.next_normal();
        Vec x = A * z;
        for (int i = 0; i < dx; ++i) x[i] += noise_sd * rng.next_normal();
        return {linear_gaussian_model(A, noise_sd, x), "linear_gaussian"};
    }
    if (type == "logistic") {
        reject_unknown(j, ctx, {"type", "N", "d", "prior_sd"});
        const int N = get_req<int>(j, "N", ctx);
        const int d = get_req<int>(j, "d", ctx);
        const double prior_sd = get_opt<double>(j, "prior_sd", 1.0, ctx);
        if (N < 1 || d < 1) throw ConfigError(ctx + ": N and d must be positive");
        Mat X;
        Vec y;
        make_synthetic_logistic_data(N, d, rng, X, y);
        std::ostringstream xs, ys;
        for (int c = 0; c < d; ++c) xs << (c ? "," : "") << "x" << (c + 1);
        xs << "\n";
        ys << "y\n";
        for (int i = 0; i < N; ++i) {
            for (int c = 0; c < d; ++c) xs << (c ? "," : "") << fmt(X(i, c));
            xs << "\n";
            ys << fmt(y[i]) << "\n";
        }
        write_file(out_dir / "X.csv", xs.str());
        write_file(out_dir / "y.csv", ys.str());
        return {logistic_regression_model(X, y, prior_sd), "logistic"};
    }
    throw ConfigError(ctx + ": unknown type \"" + type + "\" (expected linear_gaussian or logistic)");
}

FamilyKind family_from_string(const std::string& s) {
    if (s == "diagonal") return FamilyKind::Diagonal;
    if (s == "fullrank") return FamilyKind::FullRank;
    throw ConfigError("family must be \"diagonal\" or \"fullrank\", got \"" + s + "\"");
}

BaseGradientKind base_from_string(const std::string& s) {
    if (s == "reparam") return BaseGradientKind::Reparam;
    if (s == "dreg") return BaseGradientKind::DReG;
    throw ConfigError("base must be \"reparam\" or \"dreg\", got \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// Report serialization

json check_to_json(const CheckResult& c) {
    return json{{"name", c.name},
                {"value", c.value},
                {"band", c.band},
                {"form", c.residual ? "residual" : "slack"},
                {"pass", c.pass}};
}

json report_to_json(const VarianceReport& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back(json{{"estimator", e.estimator},
                               {"n", e.n},
                               {"m", e.m},
                               {"ell_or_k", e.ell_or_k},
                               {"R", e.R},
                               {"variance", e.variance},
                               {"std_error", e.std_error}});
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back(check_to_json(c));
    json out{{"entries", entries}, {"checks", checks}, {"all_pass", rep.all_pass()}};
    if (rep.fraction_target != 0.0) {
        out["fraction_of_variance_reduction"] = rep.fraction;
        out["fraction_std_error"] = rep.fraction_se;
        out["fraction_target"] = rep.fraction_target;
    }
    return out;
}

void append_report_csv(std::ostringstream& csv, const VarianceReport& rep, const std::string& note_for,
                       const std::string& note) {
    for (const auto& e : rep.entries) {
        csv << e.estimator << "," << e.n << "," << e.m << "," << e.ell_or_k << "," << e.R << ","
            << fmt(e.variance) << "," << fmt(e.std_error) << ",\n";
    }
    if (!note_for.empty()) csv << note_for << ",,,,,,," << note << "\n";
}

void print_checks(const VarianceReport& rep) {
    for (const auto& c : rep.checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  value=" << fmt(c.value)
                  << " band=" << fmt(c.band) << "\n";
    }
}

// ---------------------------------------------------------------------------
// variance

int cmd_variance(const GlobalArgs& args) {
    const json cfg = load_config(args.config_path);
    reject_unknown(cfg, "config", {"seed", "out_dir", "threads", "n", "m", "ell", "R", "R_complete",
                                   "sigma", "cap", "hoeffding", "gradient"});
    const std::uint64_t seed = resolve_seed(args, cfg);
    const auto out_dir = resolve_out_dir(args, cfg);

    const int n = get_req<int>(cfg, "n", "config");
    const int m = get_req<int>(cfg, "m", "config");
    const int ell = get_req<int>(cfg, "ell", "config");
    const int R = get_req<int>(cfg, "R", "config");
    const int R_complete = get_opt<int>(cfg, "R_complete", 0, "config");
    const double sigma = get_opt<double>(cfg, "sigma", 1.0, "config");
    const double cap = get_opt<double>(cfg, "cap", kDefaultSetCap, "config");
    const bool hoeffding = get_opt<bool>(cfg, "hoeffding", true, "config");

    RngStream root = RngStream::from_seed(seed);
    const LogWeightSampler sampler = lognormal_sampler(sigma);
    const bool complete_ok = binomial(n, m) <= cap;

    json out;
    out["config"] = cfg;
    std::ostringstream csv;
    csv << "estimator,n,m,ell_or_k,R,variance,std_error,note\n";
    bool all_pass = true;

    const VarianceReport ordering =
        check_ordering_and_fraction(sampler, n, m, ell, R, root.derive("ordering"), R_complete, cap);
    std::cout << "== ordering and fraction ==\n";
    print_checks(ordering);
    out["ordering"] = report_to_json(ordering);
    if (!complete_ok) out["ordering"]["complete"] = "skipped (cap)";
    append_report_csv(csv, ordering, complete_ok ? "" : "complete", "skipped (cap)");
    all_pass = all_pass && ordering.all_pass();

    if (hoeffding) {
        if (!complete_ok) throw ConfigError(
            "hoeffding check requires the complete U-statistic; C(" + std::to_string(n) + "," +
            std::to_string(m) + ") = " + fmt(binomial(n, m)) + " exceeds cap " + fmt(cap));
        const VarianceReport hrep =
            check_hoeffding(sampler, n, m, R, root.derive("hoeffding"), R_complete);
        std::cout << "== hoeffding bounds ==\n";
        print_checks(hrep);
        out["hoeffding"] = report_to_json(hrep);
        append_report_csv(csv, hrep, "", "");
        all_pass = all_pass && hrep.all_pass();
    }

    if (cfg.contains("gradient")) {
        const json& g = cfg.at("gradient");
        reject_unknown(g, "gradient", {"model", "family", "base", "R"});
        RngStream grng = root.derive("gradient");
        const BuiltModel built = build_model(
            g.contains("model") ? g.at("model") : json{{"type", "linear_gaussian"}, {"d_z", 2}},
            grng.derive("model"), out_dir);
        GaussianVariational family(
            family_from_string(get_opt<std::string>(g, "family", "diagonal", "gradient")),
            built.model.dim);
        const BaseGradientKind base =
            base_from_string(get_opt<std::string>(g, "base", "reparam", "gradient"));
        const int gR = get_req<int>(g, "R", "gradient");
        RngStream init = grng.derive("init");
        const Vec phi = family.random_init(init);
        const VarianceReport grep = gradient_variance_report(built.model, family, phi, base, n, m,
                                                             ell, gR, grng.derive("run"), cap);
        std::cout << "== gradient variance (" << built.name << ") ==\n";
        print_checks(grep);
        out["gradient"] = report_to_json(grep);
        append_report_csv(csv, grep, "", "");
        all_pass = all_pass && grep.all_pass();
    }

    if (args.dump_sets) {
        RngStream dump = root.derive("dump");
        write_file(out_dir / "sets_standard.json", IndexSetCollection::disjoint_blocks(n, m).to_json());
        write_file(out_dir / "sets_permuted.json",
                   IndexSetCollection::permuted_blocks(n, m, ell, dump).to_json());
        write_file(out_dir / "sets_random.json",
                   IndexSetCollection::random_subsets(n, m, ell * n / m, dump).to_json());
        if (complete_ok)
            write_file(out_dir / "sets_complete.json", IndexSetCollection::all_subsets(n, m, cap).to_json());
    }

    out["all_pass"] = all_pass;
    write_file(out_dir / "variance_report.json", out.dump(2) + "\n");
    write_file(out_dir / "variance_report.csv", csv.str());
    std::cout << (all_pass ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT") << "\n";
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// zeta

int cmd_zeta(const GlobalArgs& args) {
    const json cfg = load_config(args.config_path);
    reject_unknown(cfg, "config", {"seed", "out_dir", "threads", "m", "R", "sigma", "sampler"});
    const std::uint64_t seed = resolve_seed(args, cfg);
    const auto out_dir = resolve_out_dir(args, cfg);
    const int m = get_req<int>(cfg, "m", "config");
    const int R = get_req<int>(cfg, "R", "config");
    const double sigma = get_opt<double>(cfg, "sigma", 1.0, "config");
    const std::string which = get_opt<std::string>(cfg, "sampler", "lognormal", "config");

    LogWeightSampler sampler;
    if (which == "lognormal") {
        sampler = lognormal_sampler(sigma);
    } else if (which == "constant") {
        sampler = [](int k, RngStream&) { return Vec::Zero(k); };
    } else {
        throw ConfigError("sampler must be \"lognormal\" or \"constant\", got \"" + which + "\"");
    }

    RngStream root = RngStream::from_seed(seed).derive("zeta");
    std::vector<ZetaEstimate> zs;
    for (int c = 0; c <= m; ++c)
        zs.push_back(estimate_zeta(sampler, m, c, R, root.derive(static_cast<std::uint64_t>(c))));

    std::ostringstream csv;
    csv << "c,zeta,std_error,R\n";
    json rows = json::array();
    for (const auto& z : zs) {
        csv << z.c << "," << fmt(z.value) << "," << fmt(z.std_error) << "," << z.R << "\n";
        rows.push_back(json{{"c", z.c}, {"zeta", z.value}, {"std_error", z.std_error}, {"R", z.R}});
        std::cout << "zeta_" << z.c << " = " << fmt(z.value) << " +/- " << fmt(z.std_error) << "\n";
    }

    // m * zeta_1 <= zeta_m within a 4-combined-SE band
    const ZetaEstimate& z1 = zs[1];
    const ZetaEstimate& zm = zs[m];
    const double slack = zm.value - m * z1.value;
    const double band = 4.0 * std::hypot(zm.std_error, m * z1.std_error);
    const CheckResult check{"m*zeta1 <= zeta_m", slack, band, false, slack >= -band};
    std::cout << (check.pass ? "PASS" : "FAIL") << "  " << check.name << "  value=" << fmt(slack)
              << " band=" << fmt(band) << "\n";

    json out{{"config", cfg}, {"zeta", rows}, {"checks", json::array({check_to_json(check)})},
             {"all_pass", check.pass}};
    write_file(out_dir / "zeta.json", out.dump(2) + "\n");
    write_file(out_dir / "zeta.csv", csv.str());
    return check.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// approx-audit

int cmd_approx_audit(const GlobalArgs& args) {
    const json cfg = load_config(args.config_path);
    reject_unknown(cfg, "config", {"seed", "out_dir", "threads", "cases", "trajectory"});
    const std::uint64_t seed = resolve_seed(args, cfg);
    const auto out_dir = resolve_out_dir(args, cfg);
    const int cases = get_opt<int>(cfg, "cases", 10000, "config");

    bool all_pass = true;
    json out;
    out["config"] = cfg;

    // (a) built-in reference example: four log-weights, all pairs (m = 2)
    const LogWeights v{std::vector<double>{-6034.091, -4351.335, -4157.236, -5419.201}};
    const std::vector<double> expected_kernels{-4352.028, -4157.930, -5419.895,
                                               -4157.930, -4352.028, -4157.930};
    const double expected_mean = -4432.956;
    const auto pairs = IndexSetCollection::all_subsets(4, 2);
    json table = json::array();
    bool example_ok = true;
    for (int j = 0; j < pairs.num_sets(); ++j) {
        Vec pair(2);
        pair << v[pairs.set(j)[0]], v[pairs.set(j)[1]];
        const double h = kernel_h(pair);
        // reference rows are quoted to three decimals; allow their rounding
        const bool row_ok = std::abs(h - expected_kernels[j]) < 2e-3;
        example_ok = example_ok && row_ok;
        table.push_back(json{{"i", pairs.set(j)[0] + 1},
                             {"j", pairs.set(j)[1] + 1},
                             {"kernel", h},
                             {"expected", expected_kernels[j]},
                             {"pass", row_ok}});
    }
    const double mean = u_statistic(v, pairs).value;
    example_ok = example_ok && std::abs(mean - expected_mean) < 5e-4;
    std::cout << (example_ok ? "PASS" : "FAIL") << "  reference example mean = " << fmt(mean)
              << " (expected " << fmt(expected_mean) << " +/- 5e-4)\n";
    out["example"] = json{{"table", table}, {"mean", mean}, {"expected_mean", expected_mean},
                          {"pass", example_ok}};
    all_pass = all_pass && example_ok;
    if (args.dump_sets) write_file(out_dir / "sets_example.json", pairs.to_json());

    // (b) bound-chain property sweep: A1 < A2 <= U <= A1 + ln m
    RngStream sweep = RngStream::from_seed(seed).derive("sweep");
    int violations = 0;
    for (int t = 0; t < cases; ++t) {
        RngStream s = sweep.derive(static_cast<std::uint64_t>(t));
        const int n = 2 + static_cast<int>(s.next_below(11));
        const int m = 2 + static_cast<int>(s.next_below(static_cast<std::uint64_t>(n - 1)));
        Vec raw(n);
        for (int i = 0; i < n; ++i) raw[i] = 5.0 * s.next_normal();
        const LogWeights w{raw};
        const double a1 = approx_first_order(w, m).value;
        const double a2 = approx_second_order(w, m).value;
        const double cu = complete_u(w, m).value;
        if (!(a1 < a2 + 1e-12 && a2 <= cu + 1e-12 && cu <= a1 + std::log(static_cast<double>(m)) + 1e-12))
            ++violations;
    }
    std::cout << (violations == 0 ? "PASS" : "FAIL") << "  bound-chain sweep: " << violations
              << " violations in " << cases << " cases\n";
    out["sweep"] = json{{"cases", cases}, {"violations", violations}, {"pass", violations == 0}};
    all_pass = all_pass && violations == 0;

    // (c) approximation gap along an optimization trajectory (observational)
    if (cfg.contains("trajectory")) {
        const json& tj = cfg.at("trajectory");
        reject_unknown(tj, "trajectory", {"model", "family", "n", "m", "lr", "iterations",
                                          "checkpoints", "eval_n"});
        RngStream trng = RngStream::from_seed(seed).derive("trajectory");
        const BuiltModel built = build_model(tj.at("model"), trng.derive("model"), out_dir);
        const int n = get_opt<int>(tj, "n", 16, "trajectory");
        const int m = get_opt<int>(tj, "m", 8, "trajectory");
        const int eval_n = get_opt<int>(tj, "eval_n", n, "trajectory");
        const int iterations = get_opt<int>(tj, "iterations", 2000, "trajectory");
        const int checkpoints = get_opt<int>(tj, "checkpoints", 5, "trajectory");
        const double lr = get_opt<double>(tj, "lr", 0.05, "trajectory");

        RunConfig rc;
        rc.model = built.model;
        rc.family = GaussianVariational(
            family_from_string(get_opt<std::string>(tj, "family", "diagonal", "trajectory")),
            built.model.dim);
        rc.grad_kind = GradientEstimatorKind::Complete;
        rc.n = n;
        rc.m = m;
        rc.eval_n = std::max(eval_n, m);
        rc.eval_m = m;
        rc.iterations = 0;  // we step manually below to capture checkpoints
        rc.learning_rates = {lr};

        // manual SGD so parameters are visible at each checkpoint
        RngStream root = RngStream::from_seed(seed).derive("lr").derive(std::uint64_t{0});
        RngStream init = root.derive("init");
        RngStream train = root.derive("train");
        RngStream eval = root.derive("eval");
        Vec phi = rc.family.random_init(init);
        std::ostringstream csv;
        csv << "checkpoint,iter,u_minus_a1,u_minus_a2,ln_m\n";
        json rows = json::array();
        const double lnm = std::log(static_cast<double>(m));
        int next_cp = 0;
        for (int t = 0; t <= iterations; ++t) {
            if (next_cp < checkpoints && t == next_cp * iterations / std::max(1, checkpoints - 1)) {
                const LogWeights ev{log_weight_values(built.model, rc.family, phi,
                                                      draw_noise(eval_n, built.model.dim, eval))};
                const double cu = complete_u(ev, m).value;
                const double g1 = cu - approx_first_order(ev, m).value;
                const double g2 = cu - approx_second_order(ev, m).value;
                csv << next_cp << "," << t << "," << fmt(g1) << "," << fmt(g2) << "," << fmt(lnm) << "\n";
                rows.push_back(json{{"checkpoint", next_cp}, {"iter", t}, {"u_minus_a1", g1},
                                    {"u_minus_a2", g2}, {"ln_m", lnm}});
                ++next_cp;
            }
            if (t == iterations) break;
            const SampleBatch batch = log_weight_batch(built.model, rc.family, phi,
                                                       draw_noise(n, built.model.dim, train));
            phi += lr * u_statistic_gradient(batch, IndexSetCollection::all_subsets(n, m, rc.cap),
                                             BaseGradientKind::Reparam);
        }
        write_file(out_dir / "approx_audit.csv", csv.str());
        out["trajectory"] = json{{"model", built.name}, {"rows", rows}};
    }

    out["all_pass"] = all_pass;
    write_file(out_dir / "approx_audit.json", out.dump(2) + "\n");
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// optimize

int cmd_optimize(const GlobalArgs& args) {
    const json cfg = load_config(args.config_path);
    reject_unknown(cfg, "config",
                   {"seed", "out_dir", "threads", "model", "family", "base", "estimators", "n", "m",
                    "ell", "k", "cap", "learning_rates", "iterations", "seeds", "eval_n", "eval_m",
                    "burn_in", "horizon"});
    const std::uint64_t seed = resolve_seed(args, cfg);
    const auto out_dir = resolve_out_dir(args, cfg);
    const int threads = resolve_threads(args, cfg);

    RngStream root = RngStream::from_seed(seed);
    const BuiltModel built = build_model(get_req<json>(cfg, "model", "config"),
                                         root.derive("model"), out_dir);

    RunConfig rc;
    rc.model = built.model;
    rc.family = GaussianVariational(
        family_from_string(get_opt<std::string>(cfg, "family", "diagonal", "config")),
        built.model.dim);
    rc.base = base_from_string(get_opt<std::string>(cfg, "base", "reparam", "config"));
    rc.n = get_opt<int>(cfg, "n", 16, "config");
    rc.ell = get_opt<int>(cfg, "ell", 20, "config");
    rc.k = get_opt<int>(cfg, "k", 0, "config");
    rc.cap = get_opt<double>(cfg, "cap", kDefaultSetCap, "config");
    rc.iterations = get_opt<int>(cfg, "iterations", 2000, "config");
    rc.eval_n = get_opt<int>(cfg, "eval_n", 64, "config");
    rc.eval_m = get_opt<int>(cfg, "eval_m", 8, "config");

    // learning rates: explicit array or {lo, hi, count}
    if (cfg.contains("learning_rates") && cfg.at("learning_rates").is_array()) {
        rc.learning_rates = get_req<std::vector<double>>(cfg, "learning_rates", "config");
    } else {
        json lrj = cfg.contains("learning_rates") ? cfg.at("learning_rates") : json::object();
        reject_unknown(lrj, "learning_rates", {"lo", "hi", "count"});
        rc.learning_rates = log_spaced(get_opt<double>(lrj, "lo", 1e-4, "learning_rates"),
                                       get_opt<double>(lrj, "hi", 1.0, "learning_rates"),
                                       get_opt<int>(lrj, "count", 15, "learning_rates"));
    }

    // seeds: explicit array or a count (derived deterministically from seed)
    if (cfg.contains("seeds") && cfg.at("seeds").is_array()) {
        rc.seeds = get_req<std::vector<std::uint64_t>>(cfg, "seeds", "config");
    } else {
        const int count = cfg.contains("seeds") ? get_req<int>(cfg, "seeds", "config") : 10;
        RngStream s = root.derive("seeds");
        for (int i = 0; i < count; ++i) rc.seeds.push_back(s.next_u64());
    }

    std::vector<int> ms;
    if (cfg.contains("m") && cfg.at("m").is_array()) {
        ms = get_req<std::vector<int>>(cfg, "m", "config");
    } else {
        ms.push_back(get_opt<int>(cfg, "m", 8, "config"));
    }

    std::vector<std::string> estimators =
        get_opt<std::vector<std::string>>(cfg, "estimators", {"standard", "permuted"}, "config");
    const int burn_in = get_opt<int>(cfg, "burn_in", 50, "config");
    const int horizon = get_opt<int>(cfg, "horizon", rc.iterations, "config");

    json summary;
    summary["model"] = built.name;
    summary["average_objective"] = json::object();
    for (const std::string& est : estimators) {
        const GradientEstimatorKind kind = gradient_kind_from_string(est);
        json per_m = json::object();
        for (int m : ms) {
            RunConfig cell = rc;
            cell.grad_kind = kind;
            cell.m = m;
            const GridRun grid = run_grid(cell, threads);
            for (std::size_t s = 0; s < cell.seeds.size(); ++s) {
                for (std::size_t l = 0; l < cell.learning_rates.size(); ++l) {
                    const Trace& t = grid.traces[s][l];
                    std::ostringstream csv;
                    csv << "iter,objective\n";
                    for (std::size_t i = 0; i < t.objective.size(); ++i)
                        csv << i << "," << fmt(t.objective[i]) << "\n";
                    const std::string fname = "trace_" + built.name + "_" + est + "_m" +
                                              std::to_string(m) + "_" + fmt(cell.learning_rates[l]) +
                                              "_" + std::to_string(cell.seeds[s]) + ".csv";
                    write_file(out_dir / fname, csv.str());
                }
            }
            const double avg = average_objective(grid.median_env, burn_in, horizon);
            per_m[std::to_string(m)] = avg;
        }
        summary["average_objective"][est] = per_m;
    }

    // difference matrix against the standard estimator, per m
    if (summary["average_objective"].contains("standard")) {
        json diffs = json::object();
        std::cout << "average-objective difference vs standard (positive favors the row estimator)\n";
        std::cout << "estimator";
        for (int m : ms) std::cout << ",m=" << m;
        std::cout << "\n";
        for (const std::string& est : estimators) {
            if (est == "standard") continue;
            json row = json::object();
            std::cout << est;
            for (int m : ms) {
                const double d = summary["average_objective"][est][std::to_string(m)].get<double>() -
                                 summary["average_objective"]["standard"][std::to_string(m)].get<double>();
                row[std::to_string(m)] = d;
                std::cout << "," << fmt(d);
            }
            std::cout << "\n";
            diffs[est] = row;
        }
        summary["difference_vs_standard"] = diffs;
    }

    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"U-statistic variance reduction for importance-weighted variational inference"};
    app.require_subcommand(1);

    GlobalArgs args;
    int (*handler)(const GlobalArgs&) = nullptr;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON config file")->required();
        sub->add_option("--seed", args.seed, "root seed (overrides config)");
        sub->add_option("--out", args.out_dir, "output directory (overrides config)");
        sub->add_option("--threads", args.threads, "worker threads (positive integer or auto)");
        sub->add_flag("--dump-sets", args.dump_sets, "dump index-set collections as JSON");
    };

    CLI::App* variance = app.add_subcommand("variance", "variance orderings, identities and bounds");
    CLI::App* audit = app.add_subcommand("approx-audit", "sort-based approximation audit");
    CLI::App* optimize = app.add_subcommand("optimize", "SGD grid over learning rates and seeds");
    CLI::App* zeta = app.add_subcommand("zeta", "shared-sample kernel covariances");
    for (CLI::App* sub : {variance, audit, optimize, zeta}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (variance->parsed()) handler = cmd_variance;
    if (audit->parsed()) handler = cmd_approx_audit;
    if (optimize->parsed()) handler = cmd_optimize;
    if (zeta->parsed()) handler = cmd_zeta;

    try {
        return handler(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const EnumerationCapError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
