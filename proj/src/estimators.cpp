#include "uwise/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace uwise {

namespace {

struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// Sum of h over all C(n, m) subsets of the descending-sorted values.
// The first (largest) element of each subset is its max, so every
// exponent is <= 0; partial sums are carried down the lexicographic
// recursion so each subset costs O(1) beyond enumeration.
double complete_u_sum(const Vec& sorted, int m) {
    const int n = static_cast<int>(sorted.size());
    const double lnm = std::log(static_cast<double>(m));
    KahanSum acc;
    std::vector<double> rel(n);
    // rec over positions: depth values still to choose from [start, n).
    auto rec = [&](auto&& self, int start, int depth, double sum, double base) -> void {
        if (depth == 0) {
            acc.add(base + std::log(sum) - lnm);
            return;
        }
        for (int j = start; j <= n - depth; ++j) self(self, j + 1, depth - 1, sum + rel[j], base);
    };
    for (int i = 0; i <= n - m; ++i) {
        for (int j = i + 1; j < n; ++j) rel[j] = std::exp(sorted[j] - sorted[i]);
        rec(rec, i + 1, m - 1, 1.0, sorted[i]);
    }
    return acc.sum;
}

}  // namespace

std::string estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::Standard: return "standard";
        case EstimatorId::CompleteU: return "complete";
        case EstimatorId::Incomplete: return "incomplete";
        case EstimatorId::Approx1: return "approx1";
        case EstimatorId::Approx2: return "approx2";
        case EstimatorId::Jackknife: return "jackknife";
    }
    return "unknown";
}

ObjectiveEstimate complete_u(const LogWeights& v, int m, double cap) {
    const int n = v.size();
    if (m < 1 || m > n) throw std::invalid_argument("complete_u: need 1 <= m <= n");
    const double count = binomial(n, m);
    if (count > cap) {
        throw EnumerationCapError(count, cap,
                                  "complete_u: C(n,m) = " + std::to_string(count) +
                                      " exceeds cap; consider the permuted-block estimator");
    }
    const SortedLogWeights s = sort_descending(v);
    return {complete_u_sum(s.sorted, m) / count, EstimatorId::CompleteU, n, m, count};
}

ObjectiveEstimate u_statistic(const LogWeights& v, const IndexSetCollection& S) {
    if (S.n() != v.size()) throw std::invalid_argument("u_statistic: collection n != |v|");
    if (S.kind() == SetKind::Complete) {
        // Streamed path; exactly permutation-invariant in v.
        ObjectiveEstimate e = complete_u(v, S.m(), std::numeric_limits<double>::infinity());
        e.id = EstimatorId::CompleteU;
        return e;
    }
    const int m = S.m();
    const int k = S.num_sets();
    KahanSum acc;
    Vec sub(m);
    for (int j = 0; j < k; ++j) {
        const int* s = S.set(j);
        for (int t = 0; t < m; ++t) sub[t] = v[s[t]];
        acc.add(kernel_h(sub));
    }
    const EstimatorId id = S.kind() == SetKind::Disjoint ? EstimatorId::Standard : EstimatorId::Incomplete;
    return {acc.sum / k, id, v.size(), m, static_cast<double>(k)};
}

ObjectiveEstimate approx_first_order(const LogWeights& v, int m) {
    const int n = v.size();
    if (m < 1 || m > n) throw std::invalid_argument("approx_first_order: need 1 <= m <= n");
    const SortedLogWeights s = sort_descending(v);
    const WeightProfile p = weight_profile(n, m);
    const double value = p.w.dot(s.sorted) - std::log(static_cast<double>(m));
    return {value, EstimatorId::Approx1, n, m, binomial(n, m)};
}

ObjectiveEstimate approx_first_order_naive(const LogWeights& v, int m, double cap) {
    const int n = v.size();
    if (m < 1 || m > n) throw std::invalid_argument("approx_first_order_naive: need 1 <= m <= n");
    const double count = binomial(n, m);
    if (count > cap) throw EnumerationCapError(count, cap, "approx_first_order_naive: C(n,m) exceeds cap");
    KahanSum acc;
    for_each_subset(n, m, [&](const int* s) {
        double mx = v[s[0]];
        for (int t = 1; t < m; ++t) mx = std::max(mx, v[s[t]]);
        acc.add(mx);
    });
    return {acc.sum / count - std::log(static_cast<double>(m)), EstimatorId::Approx1, n, m, count};
}

ObjectiveEstimate approx_second_order(const LogWeights& v, int m) {
    const int n = v.size();
    if (m < 2 || m > n) throw std::invalid_argument("approx_second_order: need 2 <= m <= n");
    const SortedLogWeights s = sort_descending(v);
    const WeightProfile p = weight_profile(n, m);
    double value = p.w.dot(s.sorted) - std::log(static_cast<double>(m));
    for (int i = 0; i <= n - m; ++i) {
        const double dv = s.sorted[i + 1] - s.sorted[i];  // <= 0 by sorting
        value += p.w2[i] * std::log1p(std::exp(dv));
    }
    return {value, EstimatorId::Approx2, n, m, binomial(n, m)};
}

ObjectiveEstimate jackknife_first_order(const LogWeights& v, int m, double cap) {
    const int n = v.size();
    if (m < 2 || m > n) throw std::invalid_argument("jackknife_first_order: need 2 <= m <= n");
    const ObjectiveEstimate hi = complete_u(v, m, cap);
    const ObjectiveEstimate lo = complete_u(v, m - 1, cap);
    return {m * hi.value - (m - 1) * lo.value, EstimatorId::Jackknife, n, m, hi.num_sets + lo.num_sets};
}

}  // namespace uwise
