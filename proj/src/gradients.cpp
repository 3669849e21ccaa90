#include "uwise/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace uwise {

namespace {

// Rows reordered by descending log-weight (ties by ascending row index),
// plus the stable softmax weights in that order.
void sorted_softmax(const SampleBatch& batch, std::span<const int> rows, std::vector<int>& order,
                    std::vector<double>& wts) {
    const int m = static_cast<int>(rows.size());
    order.assign(rows.begin(), rows.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return batch.v[a] > batch.v[b]; });
    wts.resize(m);
    const double mx = batch.v[order[0]];
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        wts[i] = std::exp(batch.v[order[i]] - mx);
        sum += wts[i];
    }
    for (int i = 0; i < m; ++i) wts[i] /= sum;
}

}  // namespace

Vec base_reparam_gradient(const SampleBatch& batch, std::span<const int> rows) {
    if (rows.empty()) throw std::invalid_argument("base_reparam_gradient: empty row set");
    std::vector<int> order;
    std::vector<double> wts;
    sorted_softmax(batch, rows, order, wts);
    Vec g = Vec::Zero(batch.grad_v.cols());
    for (std::size_t i = 0; i < order.size(); ++i) g += wts[i] * batch.grad_v.row(order[i]).transpose();
    return g;
}

Vec base_dreg_gradient(const SampleBatch& batch, std::span<const int> rows) {
    if (rows.empty()) throw std::invalid_argument("base_dreg_gradient: empty row set");
    std::vector<int> order;
    std::vector<double> wts;
    sorted_softmax(batch, rows, order, wts);
    Vec g = Vec::Zero(batch.path_grad.cols());
    for (std::size_t i = 0; i < order.size(); ++i)
        g += wts[i] * wts[i] * batch.path_grad.row(order[i]).transpose();
    return g;
}

Vec base_gradient(const SampleBatch& batch, std::span<const int> rows, BaseGradientKind kind) {
    return kind == BaseGradientKind::Reparam ? base_reparam_gradient(batch, rows)
                                             : base_dreg_gradient(batch, rows);
}

Vec u_statistic_gradient(const SampleBatch& batch, const IndexSetCollection& S, BaseGradientKind kind) {
    if (S.n() != batch.v.size()) throw std::invalid_argument("u_statistic_gradient: collection n != batch size");
    const int k = S.num_sets();
    const int m = S.m();
    const int n = S.n();
    if (k == 1) return base_gradient(batch, std::span<const int>(S.set(0), m), kind);
    // The U-statistic is linear in the per-row gradients, so accumulate one
    // coefficient per row and finish with a single matvec. Coefficients are
    // accumulated in set order (deterministic reduction).
    Vec coef = Vec::Zero(n);
    std::vector<double> e(m);
    for (int j = 0; j < k; ++j) {
        const int* s = S.set(j);
        double mx = batch.v[s[0]];
        for (int t = 1; t < m; ++t) mx = std::max(mx, batch.v[s[t]]);
        double sum = 0.0;
        for (int t = 0; t < m; ++t) {
            e[t] = std::exp(batch.v[s[t]] - mx);
            sum += e[t];
        }
        if (kind == BaseGradientKind::Reparam) {
            for (int t = 0; t < m; ++t) coef[s[t]] += e[t] / sum;
        } else {
            for (int t = 0; t < m; ++t) coef[s[t]] += (e[t] / sum) * (e[t] / sum);
        }
    }
    const Mat& rows = kind == BaseGradientKind::Reparam ? batch.grad_v : batch.path_grad;
    return rows.transpose() * coef / k;
}

Vec surrogate_gradient(const SampleBatch& batch, int m, int order) {
    const int n = batch.v.size();
    if (order != 1 && order != 2) throw std::invalid_argument("surrogate_gradient: order must be 1 or 2");
    if (m < (order == 2 ? 2 : 1) || m > n) throw std::invalid_argument("surrogate_gradient: bad m");
    const SortedLogWeights s = sort_descending(batch.v);
    const WeightProfile p = weight_profile(n, m);
    Vec g = Vec::Zero(batch.grad_v.cols());
    for (int i = 0; i <= n - m; ++i) g += p.w[i] * batch.grad_v.row(s.perm[i]).transpose();
    if (order == 2) {
        for (int i = 0; i <= n - m; ++i) {
            const double dv = s.sorted[i + 1] - s.sorted[i];  // <= 0
            const double sig = std::exp(dv) / (1.0 + std::exp(dv));
            g += p.w2[i] * sig *
                 (batch.grad_v.row(s.perm[i + 1]) - batch.grad_v.row(s.perm[i])).transpose();
        }
    }
    return g;
}

Vec finite_difference_gradient(const std::function<double(const Vec&)>& objective, const Vec& phi,
                               double step) {
    if (step <= 0.0) throw std::invalid_argument("finite_difference_gradient: step must be positive");
    Vec g(phi.size());
    Vec p = phi;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        p[i] = phi[i] + step;
        const double up = objective(p);
        p[i] = phi[i] - step;
        const double down = objective(p);
        p[i] = phi[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

}  // namespace uwise
