#ifndef UWISE_MODELS_HPP
#define UWISE_MODELS_HPP

#include <functional>
#include <optional>

#include "uwise/core.hpp"
#include "uwise/rng.hpp"

namespace uwise {

// Target with x baked in: log_joint(z) = ln p(z, x).
struct TargetModel {
    int dim = 0;
    std::function<double(const Vec&)> log_joint;
    std::function<Vec(const Vec&)> grad_log_joint;
    std::optional<double> exact_log_evidence;
};

enum class FamilyKind { Diagonal, FullRank };

// Gaussian variational family q_phi.
//   Diagonal: phi = (mu, omega), scale = exp(omega) per coordinate.
//   FullRank: phi = (mu, tril row-major), diagonal through softplus.
class GaussianVariational {
public:
    GaussianVariational(FamilyKind kind, int dim) : kind_(kind), dim_(dim) {}

    FamilyKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int num_params() const {
        return kind_ == FamilyKind::Diagonal ? 2 * dim_ : dim_ + dim_ * (dim_ + 1) / 2;
    }

    // Scale factor L (diagonal or lower-triangular, strictly positive diag).
    Mat scale_factor(const Vec& phi) const;

    // z = mu + L * eps for one noise row.
    Vec transform(const Vec& phi, const Vec& eps) const;

    double log_density(const Vec& phi, const Vec& eps) const;  // ln q(z) at z = T(eps)
    Vec grad_z_log_density(const Vec& phi, const Vec& eps) const;

    // J^T u where J = d z / d phi at fixed eps.
    Vec jacobian_transpose_apply(const Vec& phi, const Vec& eps, const Vec& u) const;

    // d ln q_phi(z) / d phi at fixed z (z expressed via eps = L^{-1}(z - mu)).
    Vec grad_phi_log_density(const Vec& phi, const Vec& eps) const;

    // Unconstrained parameters ~ iid N(0, 1).
    Vec random_init(RngStream& rng) const;

    // Exact posterior-matching parameters for a Gaussian posterior
    // N(mu, Sigma); FullRank only (used by tests).
    Vec params_for(const Vec& mu, const Mat& sigma) const;

private:
    FamilyKind kind_;
    int dim_;
};

// Everything the gradient estimators need from one batch of n draws.
struct SampleBatch {
    Mat eps;        // n x d_z
    Mat z;          // n x d_z
    LogWeights v;   // length n
    Mat grad_v;     // n x d_phi; dV_i/dphi at fixed eps (full reparameterization)
    Mat path_grad;  // n x d_phi; J^T (grad_z ln p - grad_z ln q), the DReG path term
};

// z ~ N(0, I), x | z ~ N(Az, noise_sd^2 I); exact evidence in closed form.
TargetModel linear_gaussian_model(const Mat& A, double noise_sd, const Vec& x);

// Bayesian logistic regression with N(0, prior_sd^2 I) prior; labels in {-1,+1}.
TargetModel logistic_regression_model(const Mat& X, const Vec& y, double prior_sd);

// Synthetic design matrix and labels from a ground-truth weight vector
// drawn N(0, I). Entries of X are iid standard normal.
void make_synthetic_logistic_data(int N, int d, RngStream& rng, Mat& X, Vec& y);

SampleBatch log_weight_batch(const TargetModel& model, const GaussianVariational& family,
                             const Vec& phi, Mat eps);

// Log-weights only (no gradient assembly); for evaluation-only batches.
Vec log_weight_values(const TargetModel& model, const GaussianVariational& family, const Vec& phi,
                      const Mat& eps);

// Convenience: fresh standard-normal noise matrix n x d.
Mat draw_noise(int n, int d, RngStream& rng);

}  // namespace uwise

#endif
