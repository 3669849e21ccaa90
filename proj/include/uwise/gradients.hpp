#ifndef UWISE_GRADIENTS_HPP
#define UWISE_GRADIENTS_HPP

#include <functional>
#include <span>

#include "uwise/models.hpp"
#include "uwise/subsets.hpp"

namespace uwise {

enum class BaseGradientKind { Reparam, DReG };

// Reparameterization gradient of h on the selected rows:
// sum_i softmax(v)_i * dV_i/dphi, accumulated in descending log-weight
// order so the result is invariant under permutations of the rows.
Vec base_reparam_gradient(const SampleBatch& batch, std::span<const int> rows);

// DReG: squared normalized weights on the path term only.
Vec base_dreg_gradient(const SampleBatch& batch, std::span<const int> rows);

Vec base_gradient(const SampleBatch& batch, std::span<const int> rows, BaseGradientKind kind);

// (1/|S|) sum_{s in S} base(rows s).
Vec u_statistic_gradient(const SampleBatch& batch, const IndexSetCollection& S, BaseGradientKind kind);

// Reparameterization gradient of the first- or second-order sort-based
// surrogate objective (the -ln m constant has zero gradient).
Vec surrogate_gradient(const SampleBatch& batch, int m, int order);

// Central differences per coordinate; test oracle for the analytic paths.
Vec finite_difference_gradient(const std::function<double(const Vec&)>& objective, const Vec& phi,
                               double step);

}  // namespace uwise

#endif
