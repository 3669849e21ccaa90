#include "uwise/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uwise {

namespace {
void require_finite(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw std::invalid_argument("log-weight entry is not finite");
    }
}
}  // namespace

LogWeights::LogWeights(Vec values) : values_(std::move(values)) {
    if (values_.size() == 0) throw std::invalid_argument("log-weights must be non-empty");
    require_finite(values_);
}

LogWeights::LogWeights(const std::vector<double>& values)
    : LogWeights(Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()))) {}

double log_sum_exp(const Vec& v) {
    if (v.size() == 0) throw std::invalid_argument("log_sum_exp: empty input");
    require_finite(v);
    if (v.size() == 1) return v[0];
    const double mx = v.maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) sum += std::exp(v[i] - mx);
    return mx + std::log(sum);
}

double kernel_h(const Vec& v) {
    if (v.size() == 0) throw std::invalid_argument("kernel_h: empty input");
    require_finite(v);
    if (v.size() == 1) return v[0];
    // Descending-order reduction: max first, then decreasing contributions.
    std::vector<double> s(v.data(), v.data() + v.size());
    std::sort(s.begin(), s.end(), std::greater<double>());
    double sum = 1.0;
    for (std::size_t i = 1; i < s.size(); ++i) sum += std::exp(s[i] - s[0]);
    return s[0] + std::log(sum) - std::log(static_cast<double>(v.size()));
}

SortedLogWeights sort_descending(const LogWeights& v) {
    const int n = v.size();
    SortedLogWeights out;
    out.perm.resize(n);
    std::iota(out.perm.begin(), out.perm.end(), 0);
    std::stable_sort(out.perm.begin(), out.perm.end(),
                     [&](int a, int b) { return v[a] > v[b]; });
    out.sorted.resize(n);
    for (int i = 0; i < n; ++i) out.sorted[i] = v[out.perm[i]];
    return out;
}

WeightProfile weight_profile(int n, int m) {
    if (m < 1 || m > n) throw std::invalid_argument("weight_profile: need 1 <= m <= n");
    WeightProfile p;
    p.n = n;
    p.m = m;
    p.w = Vec::Zero(n);
    // w[0] = C(n-1, m-1)/C(n, m) = m/n; ratio of consecutive terms is
    // (n-i-m)/(n-1-i) for 0-based i.
    double cur = static_cast<double>(m) / n;
    for (int i = 0; i <= n - m; ++i) {
        p.w[i] = cur;
        cur *= static_cast<double>(n - i - m) / (n - 1 - i);
    }
    if (m >= 2) {
        p.w2 = Vec::Zero(n - m + 1);
        // w2[0] = C(n-2, m-2)/C(n, m) = m(m-1) / (n(n-1)); consecutive ratio
        // (n-i-m)/(n-2-i) for 0-based i.
        double cur2 = static_cast<double>(m) * (m - 1) / (static_cast<double>(n) * (n - 1));
        for (int i = 0; i <= n - m; ++i) {
            p.w2[i] = cur2;
            if (i < n - m) cur2 *= static_cast<double>(n - i - m) / (n - 2 - i);
        }
    }
    return p;
}

}  // namespace uwise
