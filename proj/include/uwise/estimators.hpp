#ifndef UWISE_ESTIMATORS_HPP
#define UWISE_ESTIMATORS_HPP

#include <string>

#include "uwise/core.hpp"
#include "uwise/subsets.hpp"

namespace uwise {

enum class EstimatorId { Standard, CompleteU, Incomplete, Approx1, Approx2, Jackknife };

struct ObjectiveEstimate {
    double value = 0.0;
    EstimatorId id = EstimatorId::Standard;
    int n = 0;
    int m = 0;
    // |S| for set-based estimators; C(n, m) (implicit) for the approximations.
    double num_sets = 0.0;
};

// Generic U-statistic over a collection: (1/|S|) sum_s h(v[s]).
// With disjoint blocks this is the standard r-replicate IW-ELBO estimate.
ObjectiveEstimate u_statistic(const LogWeights& v, const IndexSetCollection& S);

// Complete U-statistic over all C(n, m) subsets, streamed from the
// lexicographic iterator over descending-sorted values (memory O(m), and
// exactly permutation-invariant in v). Refuses above cap.
ObjectiveEstimate complete_u(const LogWeights& v, int m, double cap = kDefaultSetCap);

// First-order sort-based approximation: sum_i w[i] v_[i] - ln m, via the
// weight profile. Equals the average of subset maxima minus ln m.
ObjectiveEstimate approx_first_order(const LogWeights& v, int m);

// Brute-force definition of the first-order approximation (average subset
// maximum); test oracle for the fast path.
ObjectiveEstimate approx_first_order_naive(const LogWeights& v, int m, double cap = kDefaultSetCap);

// Second-order approximation: adds sum_i w2[i] ln(1 + exp(dv_i)) with
// dv_i = v_[i+1] - v_[i] <= 0. Strictly between the first-order value and
// the complete U-statistic (equal to the latter only at m = n = 2).
ObjectiveEstimate approx_second_order(const LogWeights& v, int m);

// First-order jackknife bias correction: m * complete_u(v, m) -
// (m-1) * complete_u(v, m-1).
ObjectiveEstimate jackknife_first_order(const LogWeights& v, int m, double cap = kDefaultSetCap);

std::string estimator_name(EstimatorId id);

}  // namespace uwise

#endif
