#ifndef UWISE_CORE_HPP
#define UWISE_CORE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace uwise {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Log importance weights V_i = ln p(Z_i, x) - ln q(Z_i), in nats.
// Non-finite entries signal an upstream model bug and are rejected here so
// they cannot poison downstream variance statistics.
class LogWeights {
public:
    explicit LogWeights(Vec values);
    explicit LogWeights(const std::vector<double>& values);

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }
    const Vec& values() const { return values_; }

private:
    Vec values_;
};

// Non-increasing view of the log-weights plus the sort permutation:
// sorted[i] = values[perm[i]]. Ties break by ascending original index.
struct SortedLogWeights {
    Vec sorted;             // non-increasing
    std::vector<int> perm;  // 0-based bijection on {0..n-1}
};

// Normalized binomial coefficients for the sort-based approximations:
//   w[i]  = C(n-1-i, m-1) / C(n, m)   for 0-based i <= n-m, else 0
//   w2[i] = C(n-2-i, m-2) / C(n, m)   length n-m+1, only for m >= 2
// Computed by a multiplicative recurrence, never as raw integers, so very
// large n never overflows.
struct WeightProfile {
    int n = 0;
    int m = 0;
    Vec w;
    Vec w2;
};

// ln sum exp(v_i), stabilized by the max shift. Errors on empty or
// non-finite input.
double log_sum_exp(const Vec& v);

// The m-sample IW-ELBO kernel h(v_{1:m}) = ln((1/m) sum exp(v_i)).
// Reduces over inputs in descending sorted order so the result is
// reproducible under permutations of the arguments.
double kernel_h(const Vec& v);

SortedLogWeights sort_descending(const LogWeights& v);

WeightProfile weight_profile(int n, int m);

}  // namespace uwise

#endif
