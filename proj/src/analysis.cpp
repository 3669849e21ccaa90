#include "uwise/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace uwise {

namespace {

double column_variance(double S, double S2, int R) { return (S2 - S * S / R) / (R - 1); }

double loo_variance(double S, double S2, int R, double x) {
    const double Sp = S - x;
    const double S2p = S2 - x * x;
    return (S2p - Sp * Sp / (R - 1)) / (R - 2);
}

VarStat variance_with_jackknife(const std::vector<double>& vals) {
    const int R = static_cast<int>(vals.size());
    if (R < 2) throw std::invalid_argument("variance estimate needs R >= 2");
    double S = 0.0, S2 = 0.0;
    for (double x : vals) {
        S += x;
        S2 += x * x;
    }
    VarStat out;
    out.value = column_variance(S, S2, R);
    if (R < 3) {
        out.std_error = std::abs(out.value);
        return out;
    }
    double mean_loo = 0.0;
    for (double x : vals) mean_loo += loo_variance(S, S2, R, x);
    mean_loo /= R;
    double ss = 0.0;
    for (double x : vals) {
        const double d = loo_variance(S, S2, R, x) - mean_loo;
        ss += d * d;
    }
    out.std_error = std::sqrt(ss * (R - 1) / R);
    return out;
}

VarStat covariance_with_jackknife(const std::vector<double>& a, const std::vector<double>& b) {
    const int R = static_cast<int>(a.size());
    if (R < 2) throw std::invalid_argument("covariance estimate needs R >= 2");
    double Sa = 0.0, Sb = 0.0, Sab = 0.0;
    for (int i = 0; i < R; ++i) {
        Sa += a[i];
        Sb += b[i];
        Sab += a[i] * b[i];
    }
    auto loo = [&](int i) {
        const double Sap = Sa - a[i], Sbp = Sb - b[i], Sabp = Sab - a[i] * b[i];
        return (Sabp - Sap * Sbp / (R - 1)) / (R - 2);
    };
    VarStat out;
    out.value = (Sab - Sa * Sb / R) / (R - 1);
    if (R < 3) {
        out.std_error = std::abs(out.value);
        return out;
    }
    double mean_loo = 0.0;
    for (int i = 0; i < R; ++i) mean_loo += loo(i);
    mean_loo /= R;
    double ss = 0.0;
    for (int i = 0; i < R; ++i) {
        const double d = loo(i) - mean_loo;
        ss += d * d;
    }
    out.std_error = std::sqrt(ss * (R - 1) / R);
    return out;
}

CheckResult slack_check(std::string name, double slack, double band) {
    return {std::move(name), slack, band, false, slack >= -band};
}

CheckResult residual_check(std::string name, double residual, double band) {
    return {std::move(name), residual, band, true, std::abs(residual) <= band};
}

}  // namespace

bool VarianceReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string spec_name(ObjectiveEstimatorSpec::Kind kind) {
    using K = ObjectiveEstimatorSpec::Kind;
    switch (kind) {
        case K::Standard: return "standard";
        case K::Complete: return "complete";
        case K::Permuted: return "permuted";
        case K::Random: return "random";
        case K::Approx1: return "approx1";
        case K::Approx2: return "approx2";
    }
    return "unknown";
}

LogWeightSampler lognormal_sampler(double sigma) {
    return [sigma](int n, RngStream& rng) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = -0.5 * sigma * sigma + sigma * rng.next_normal();
        return v;
    };
}

ZetaEstimate estimate_zeta(const LogWeightSampler& sampler, int m, int c, int R, RngStream rng) {
    if (c < 0 || c > m) throw std::invalid_argument("estimate_zeta: need 0 <= c <= m");
    if (R < 2) throw std::invalid_argument("estimate_zeta: need R >= 2");
    std::vector<double> a(R), b(R);
    for (int r = 0; r < R; ++r) {
        RngStream s = rng.derive(static_cast<std::uint64_t>(r));
        const Vec v = sampler(2 * m - c, s);
        a[r] = kernel_h(v.head(m));
        b[r] = c == m ? a[r] : kernel_h(v.tail(m));
    }
    const VarStat cv = c == m ? variance_with_jackknife(a) : covariance_with_jackknife(a, b);
    return {c, cv.value, cv.std_error, R};
}

double evaluate_objective(const ObjectiveEstimatorSpec& spec, const LogWeights& v, RngStream& rng) {
    using K = ObjectiveEstimatorSpec::Kind;
    const int n = v.size();
    switch (spec.kind) {
        case K::Standard: return u_statistic(v, IndexSetCollection::disjoint_blocks(n, spec.m)).value;
        case K::Complete: return complete_u(v, spec.m, spec.cap).value;
        case K::Permuted: {
            const auto S = IndexSetCollection::permuted_blocks(n, spec.m, spec.ell, rng);
            return u_statistic(v, S).value;
        }
        case K::Random: {
            const int k = spec.k > 0 ? spec.k : spec.ell * n / spec.m;
            const auto S = IndexSetCollection::random_subsets(n, spec.m, k, rng);
            return u_statistic(v, S).value;
        }
        case K::Approx1: return approx_first_order(v, spec.m).value;
        case K::Approx2: return approx_second_order(v, spec.m).value;
    }
    throw std::logic_error("evaluate_objective: unknown kind");
}

namespace {
std::vector<double> replicate_values(const ObjectiveEstimatorSpec& spec,
                                     const LogWeightSampler& sampler, int n, int R, RngStream& rng) {
    std::vector<double> vals(R);
    for (int r = 0; r < R; ++r) {
        RngStream s = rng.derive(static_cast<std::uint64_t>(r));
        RngStream sets = s.derive("sets");
        const LogWeights v{sampler(n, s)};
        vals[r] = evaluate_objective(spec, v, sets);
    }
    return vals;
}
}  // namespace

VarStat empirical_variance(const ObjectiveEstimatorSpec& spec, const LogWeightSampler& sampler,
                           int n, int R, RngStream rng) {
    return variance_with_jackknife(replicate_values(spec, sampler, n, R, rng));
}

VarStat empirical_mean(const ObjectiveEstimatorSpec& spec, const LogWeightSampler& sampler,
                       int n, int R, RngStream rng) {
    const std::vector<double> vals = replicate_values(spec, sampler, n, R, rng);
    double S = 0.0;
    for (double x : vals) S += x;
    const double mean = S / R;
    double ss = 0.0;
    for (double x : vals) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (R - 1) / R)};
}

VarianceReport check_hoeffding(const LogWeightSampler& sampler, int n, int m, int R, RngStream rng,
                               int R_complete) {
    if (n % m != 0) throw std::invalid_argument("check_hoeffding: m must divide n");
    if (R_complete <= 0) R_complete = R;
    const ZetaEstimate z1 = estimate_zeta(sampler, m, 1, R, rng.derive("zeta1"));
    const ZetaEstimate zm = estimate_zeta(sampler, m, m, R, rng.derive("zetam"));
    ObjectiveEstimatorSpec complete{ObjectiveEstimatorSpec::Kind::Complete, m};
    const VarStat vu = empirical_variance(complete, sampler, n, R_complete, rng.derive("varU"));
    ObjectiveEstimatorSpec standard{ObjectiveEstimatorSpec::Kind::Standard, m};
    const VarStat vs = empirical_variance(standard, sampler, n, R, rng.derive("varStd"));

    VarianceReport rep;
    rep.entries.push_back({"zeta1", n, m, 0, z1.R, z1.value, z1.std_error});
    rep.entries.push_back({"zeta_m", n, m, 0, zm.R, zm.value, zm.std_error});
    rep.entries.push_back({"complete", n, m, 0, R_complete, vu.value, vu.std_error});
    rep.entries.push_back({"standard", n, m, 0, R, vs.value, vs.std_error});

    const double mm = static_cast<double>(m);
    const double lower = mm * mm * z1.value / n;
    const double lower_se = mm * mm * z1.std_error / n;
    const double upper = mm * zm.value / n;
    const double upper_se = mm * zm.std_error / n;
    rep.checks.push_back(slack_check("m^2*zeta1/n <= var(complete)", vu.value - lower,
                                     4.0 * std::hypot(vu.std_error, lower_se)));
    rep.checks.push_back(slack_check("var(complete) <= m*zeta_m/n", upper - vu.value,
                                     4.0 * std::hypot(vu.std_error, upper_se)));
    rep.checks.push_back(slack_check("m*zeta1 <= zeta_m", zm.value - mm * z1.value,
                                     4.0 * std::hypot(zm.std_error, mm * z1.std_error)));
    return rep;
}

VarianceReport check_ordering_and_fraction(const LogWeightSampler& sampler, int n, int m, int ell,
                                           int R, RngStream rng, int R_complete, double cap) {
    if (n % m != 0) throw std::invalid_argument("check_ordering_and_fraction: m must divide n");
    if (ell < 1) throw std::invalid_argument("check_ordering_and_fraction: need ell >= 1");
    if (R_complete <= 0) R_complete = R;
    R_complete = std::min(R_complete, R);
    const bool with_complete = binomial(n, m) <= cap;
    const int k = ell * n / m;

    // Common log-weight draws across estimators; fresh collections per
    // replicate for the randomized kinds.
    std::vector<double> vs(R), vp(R), vr(R);
    std::vector<double> vc(with_complete ? R_complete : 0);
    const auto disjoint = IndexSetCollection::disjoint_blocks(n, m);
    for (int r = 0; r < R; ++r) {
        RngStream s = rng.derive(static_cast<std::uint64_t>(r));
        const LogWeights v{sampler(n, s)};
        RngStream sets = s.derive("sets");
        vs[r] = u_statistic(v, disjoint).value;
        vp[r] = u_statistic(v, IndexSetCollection::permuted_blocks(n, m, ell, sets)).value;
        vr[r] = u_statistic(v, IndexSetCollection::random_subsets(n, m, k, sets)).value;
        if (with_complete && r < R_complete) vc[r] = complete_u(v, m, cap).value;
    }
    const VarStat S = variance_with_jackknife(vs);
    const VarStat P = variance_with_jackknife(vp);
    const VarStat Rv = variance_with_jackknife(vr);
    VarStat C;
    if (with_complete) C = variance_with_jackknife(vc);

    VarianceReport rep;
    rep.entries.push_back({"standard", n, m, 0, R, S.value, S.std_error});
    rep.entries.push_back({"permuted", n, m, ell, R, P.value, P.std_error});
    rep.entries.push_back({"random", n, m, k, R, Rv.value, Rv.std_error});
    if (with_complete) rep.entries.push_back({"complete", n, m, 0, R_complete, C.value, C.std_error});

    if (with_complete) {
        rep.checks.push_back(slack_check("var(complete) <= var(permuted)", P.value - C.value,
                                         4.0 * std::hypot(P.std_error, C.std_error)));
    }
    rep.checks.push_back(slack_check("var(permuted) <= var(standard)", S.value - P.value,
                                     4.0 * std::hypot(S.std_error, P.std_error)));
    rep.checks.push_back(slack_check("var(standard) <= var(random)", Rv.value - S.value,
                                     4.0 * std::hypot(Rv.std_error, S.std_error)));
    if (with_complete) {
        const double inv_ell = 1.0 / ell;
        const double residual = P.value - (inv_ell * S.value + (1.0 - inv_ell) * C.value);
        const double band = 4.0 * std::sqrt(P.std_error * P.std_error +
                                            inv_ell * inv_ell * S.std_error * S.std_error +
                                            (1.0 - inv_ell) * (1.0 - inv_ell) * C.std_error * C.std_error);
        rep.checks.push_back(residual_check("permuted identity residual", residual, band));

        const double D = S.value - C.value;
        rep.fraction = (S.value - P.value) / D;
        const double dfS = (P.value - C.value) / (D * D);
        const double dfP = -1.0 / D;
        const double dfC = (S.value - P.value) / (D * D);
        rep.fraction_se = std::sqrt(dfS * dfS * S.std_error * S.std_error +
                                    dfP * dfP * P.std_error * P.std_error +
                                    dfC * dfC * C.std_error * C.std_error);
        rep.fraction_target = 1.0 - inv_ell;
        rep.checks.push_back(residual_check("fraction vs 1-1/ell", rep.fraction - rep.fraction_target,
                                            4.0 * rep.fraction_se));
    }
    return rep;
}

VarianceReport gradient_variance_report(const TargetModel& model, const GaussianVariational& family,
                                        const Vec& phi, BaseGradientKind base, int n, int m, int ell,
                                        int R, RngStream rng, double cap) {
    if (n % m != 0) throw std::invalid_argument("gradient_variance_report: m must divide n");
    const bool with_complete = binomial(n, m) <= cap;
    const int k = ell * n / m;
    const int dp = family.num_params();

    struct Kindset {
        std::string name;
        Mat grads;  // R x dp
    };
    std::vector<Kindset> kinds;
    kinds.push_back({"standard", Mat(R, dp)});
    if (with_complete) kinds.push_back({"complete", Mat(R, dp)});
    kinds.push_back({"permuted", Mat(R, dp)});
    kinds.push_back({"random", Mat(R, dp)});

    const auto disjoint = IndexSetCollection::disjoint_blocks(n, m);
    const auto complete =
        with_complete ? IndexSetCollection::all_subsets(n, m, cap) : disjoint;
    for (int r = 0; r < R; ++r) {
        RngStream s = rng.derive(static_cast<std::uint64_t>(r));
        const SampleBatch batch = log_weight_batch(model, family, phi, draw_noise(n, model.dim, s));
        RngStream sets = s.derive("sets");
        int idx = 0;
        kinds[idx++].grads.row(r) = u_statistic_gradient(batch, disjoint, base).transpose();
        if (with_complete) {
            kinds[idx++].grads.row(r) = u_statistic_gradient(batch, complete, base).transpose();
        }
        kinds[idx++].grads.row(r) =
            u_statistic_gradient(batch, IndexSetCollection::permuted_blocks(n, m, ell, sets), base).transpose();
        kinds[idx++].grads.row(r) =
            u_statistic_gradient(batch, IndexSetCollection::random_subsets(n, m, k, sets), base).transpose();
    }

    VarianceReport rep;
    struct Metric {
        VarStat trvar;
        VarStat esqnorm;
    };
    std::vector<Metric> metrics(kinds.size());
    for (std::size_t q = 0; q < kinds.size(); ++q) {
        const Mat& G = kinds[q].grads;
        // tr(var) with jackknife SE over replicates
        const Vec S1 = G.colwise().sum().transpose();
        const Vec S2 = G.array().square().matrix().colwise().sum().transpose();
        double trvar = 0.0;
        for (int j = 0; j < dp; ++j) trvar += column_variance(S1[j], S2[j], R);
        std::vector<double> loo(R);
        for (int r = 0; r < R; ++r) {
            double t = 0.0;
            for (int j = 0; j < dp; ++j) t += loo_variance(S1[j], S2[j], R, G(r, j));
            loo[r] = t;
        }
        double mean_loo = 0.0;
        for (double t : loo) mean_loo += t;
        mean_loo /= R;
        double ss = 0.0;
        for (double t : loo) ss += (t - mean_loo) * (t - mean_loo);
        metrics[q].trvar = {trvar, std::sqrt(ss * (R - 1) / R)};

        double Sn = 0.0, Sn2 = 0.0;
        for (int r = 0; r < R; ++r) {
            const double x = G.row(r).squaredNorm();
            Sn += x;
            Sn2 += x * x;
        }
        const double mean = Sn / R;
        metrics[q].esqnorm = {mean, std::sqrt(column_variance(Sn, Sn2, R) / R)};

        rep.entries.push_back({kinds[q].name + ".trvar", n, m, kinds[q].name == "permuted" ? ell : 0, R,
                               metrics[q].trvar.value, metrics[q].trvar.std_error});
        rep.entries.push_back({kinds[q].name + ".esqnorm", n, m, 0, R, metrics[q].esqnorm.value,
                               metrics[q].esqnorm.std_error});
    }
    if (with_complete) {
        const Metric& std_m = metrics[0];
        const Metric& com_m = metrics[1];
        rep.checks.push_back(slack_check("tr(var complete) <= tr(var standard)",
                                         std_m.trvar.value - com_m.trvar.value,
                                         4.0 * std::hypot(std_m.trvar.std_error, com_m.trvar.std_error)));
        rep.checks.push_back(slack_check("E|G_complete|^2 <= E|G_standard|^2",
                                         std_m.esqnorm.value - com_m.esqnorm.value,
                                         4.0 * std::hypot(std_m.esqnorm.std_error, com_m.esqnorm.std_error)));
    }
    return rep;
}

}  // namespace uwise
