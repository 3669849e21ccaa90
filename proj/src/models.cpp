#include "uwise/models.hpp"

#include <cmath>
#include <stdexcept>

namespace uwise {

namespace {

constexpr double kLn2Pi = 1.8378770664093454835606594728112;

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x > 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
double softplus_inv(double y) { return y + std::log(-std::expm1(-y)); }

int tril_index(int i, int j) { return i * (i + 1) / 2 + j; }

}  // namespace

Mat GaussianVariational::scale_factor(const Vec& phi) const {
    if (phi.size() != num_params()) throw std::invalid_argument("family: bad parameter length");
    Mat L = Mat::Zero(dim_, dim_);
    if (kind_ == FamilyKind::Diagonal) {
        for (int i = 0; i < dim_; ++i) L(i, i) = std::exp(phi[dim_ + i]);
    } else {
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < i; ++j) L(i, j) = phi[dim_ + tril_index(i, j)];
            L(i, i) = softplus(phi[dim_ + tril_index(i, i)]);
        }
    }
    return L;
}

Vec GaussianVariational::transform(const Vec& phi, const Vec& eps) const {
    if (eps.size() != dim_) throw std::invalid_argument("family: bad noise length");
    return phi.head(dim_) + scale_factor(phi) * eps;
}

double GaussianVariational::log_density(const Vec& phi, const Vec& eps) const {
    double log_det = 0.0;
    if (kind_ == FamilyKind::Diagonal) {
        log_det = phi.segment(dim_, dim_).sum();
    } else {
        for (int i = 0; i < dim_; ++i) log_det += std::log(softplus(phi[dim_ + tril_index(i, i)]));
    }
    return -0.5 * eps.squaredNorm() - log_det - 0.5 * dim_ * kLn2Pi;
}

Vec GaussianVariational::grad_z_log_density(const Vec& phi, const Vec& eps) const {
    if (kind_ == FamilyKind::Diagonal) {
        Vec g(dim_);
        for (int i = 0; i < dim_; ++i) g[i] = -eps[i] * std::exp(-phi[dim_ + i]);
        return g;
    }
    const Mat L = scale_factor(phi);
    return -L.transpose().triangularView<Eigen::Upper>().solve(eps);
}

Vec GaussianVariational::jacobian_transpose_apply(const Vec& phi, const Vec& eps, const Vec& u) const {
    if (u.size() != dim_) throw std::invalid_argument("family: bad cotangent length");
    Vec out = Vec::Zero(num_params());
    out.head(dim_) = u;
    if (kind_ == FamilyKind::Diagonal) {
        for (int i = 0; i < dim_; ++i) out[dim_ + i] = u[i] * std::exp(phi[dim_ + i]) * eps[i];
    } else {
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < i; ++j) out[dim_ + tril_index(i, j)] = u[i] * eps[j];
            out[dim_ + tril_index(i, i)] = u[i] * eps[i] * sigmoid(phi[dim_ + tril_index(i, i)]);
        }
    }
    return out;
}

Vec GaussianVariational::grad_phi_log_density(const Vec& phi, const Vec& eps) const {
    Vec out = Vec::Zero(num_params());
    if (kind_ == FamilyKind::Diagonal) {
        for (int i = 0; i < dim_; ++i) {
            out[i] = eps[i] * std::exp(-phi[dim_ + i]);
            out[dim_ + i] = -1.0 + eps[i] * eps[i];
        }
        return out;
    }
    const Mat L = scale_factor(phi);
    const Vec w = L.transpose().triangularView<Eigen::Upper>().solve(eps);  // L^{-T} eps
    out.head(dim_) = w;
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < i; ++j) out[dim_ + tril_index(i, j)] = w[i] * eps[j];
        const double a = phi[dim_ + tril_index(i, i)];
        out[dim_ + tril_index(i, i)] = (w[i] * eps[i] - 1.0 / L(i, i)) * sigmoid(a);
    }
    return out;
}

Vec GaussianVariational::random_init(RngStream& rng) const {
    Vec phi(num_params());
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = rng.next_normal();
    return phi;
}

Vec GaussianVariational::params_for(const Vec& mu, const Mat& sigma) const {
    Vec phi = Vec::Zero(num_params());
    phi.head(dim_) = mu;
    if (kind_ == FamilyKind::Diagonal) {
        for (int i = 0; i < dim_; ++i) phi[dim_ + i] = 0.5 * std::log(sigma(i, i));
        return phi;
    }
    const Mat L = Eigen::LLT<Mat>(sigma).matrixL();
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < i; ++j) phi[dim_ + tril_index(i, j)] = L(i, j);
        phi[dim_ + tril_index(i, i)] = softplus_inv(L(i, i));
    }
    return phi;
}

TargetModel linear_gaussian_model(const Mat& A, double noise_sd, const Vec& x) {
    if (noise_sd <= 0.0) throw std::invalid_argument("linear_gaussian_model: noise_sd must be positive");
    if (A.rows() != x.size()) throw std::invalid_argument("linear_gaussian_model: A rows != |x|");
    const int dz = static_cast<int>(A.cols());
    const int dx = static_cast<int>(A.rows());
    const double s2 = noise_sd * noise_sd;

    TargetModel model;
    model.dim = dz;
    model.log_joint = [A, x, s2, dz, dx](const Vec& z) {
        const Vec resid = x - A * z;
        return -0.5 * z.squaredNorm() - 0.5 * dz * kLn2Pi - 0.5 * resid.squaredNorm() / s2 -
               0.5 * dx * (kLn2Pi + std::log(s2));
    };
    model.grad_log_joint = [A, x, s2](const Vec& z) -> Vec {
        return -z + A.transpose() * (x - A * z) / s2;
    };

    const Mat cov = A * A.transpose() + s2 * Mat::Identity(dx, dx);
    const Eigen::LLT<Mat> llt(cov);
    const Mat L = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < dx; ++i) log_det += 2.0 * std::log(L(i, i));
    const Vec w = llt.matrixL().solve(x);
    model.exact_log_evidence = -0.5 * w.squaredNorm() - 0.5 * log_det - 0.5 * dx * kLn2Pi;
    return model;
}

TargetModel logistic_regression_model(const Mat& X, const Vec& y, double prior_sd) {
    if (prior_sd <= 0.0) throw std::invalid_argument("logistic_regression_model: prior_sd must be positive");
    if (X.rows() != y.size()) throw std::invalid_argument("logistic_regression_model: X rows != |y|");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 1.0 && y[i] != -1.0) throw std::invalid_argument("logistic_regression_model: labels must be +/-1");
    }
    const int d = static_cast<int>(X.cols());
    const double s2 = prior_sd * prior_sd;

    TargetModel model;
    model.dim = d;
    model.log_joint = [X, y, s2, d](const Vec& theta) {
        double ll = 0.0;
        const Vec margins = (X * theta).cwiseProduct(y);
        for (Eigen::Index i = 0; i < margins.size(); ++i) {
            const double t = margins[i];
            // ln logistic(t) = -ln(1 + e^{-t}), stable in both tails
            ll += t > 0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
        }
        return ll - 0.5 * theta.squaredNorm() / s2 - 0.5 * d * (kLn2Pi + std::log(s2));
    };
    model.grad_log_joint = [X, y, s2](const Vec& theta) -> Vec {
        const Vec margins = (X * theta).cwiseProduct(y);
        Vec coef(margins.size());
        for (Eigen::Index i = 0; i < margins.size(); ++i) coef[i] = y[i] * sigmoid(-margins[i]);
        return X.transpose() * coef - theta / s2;
    };
    return model;
}

void make_synthetic_logistic_data(int N, int d, RngStream& rng, Mat& X, Vec& y) {
    Vec theta_star(d);
    for (int j = 0; j < d; ++j) theta_star[j] = rng.next_normal();
    X.resize(N, d);
    y.resize(N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = rng.next_normal();
        const double p = sigmoid(X.row(i).dot(theta_star));
        y[i] = rng.next_double() < p ? 1.0 : -1.0;
    }
}

Mat draw_noise(int n, int d, RngStream& rng) {
    Mat eps(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) eps(i, j) = rng.next_normal();
    return eps;
}

Vec log_weight_values(const TargetModel& model, const GaussianVariational& family, const Vec& phi,
                      const Mat& eps) {
    const int n = static_cast<int>(eps.rows());
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        const Vec e = eps.row(i);
        v[i] = model.log_joint(family.transform(phi, e)) - family.log_density(phi, e);
    }
    return v;
}

SampleBatch log_weight_batch(const TargetModel& model, const GaussianVariational& family,
                             const Vec& phi, Mat eps) {
    if (model.dim != family.dim()) throw std::invalid_argument("log_weight_batch: model/family dim mismatch");
    if (eps.cols() != model.dim) throw std::invalid_argument("log_weight_batch: noise dim mismatch");
    const int n = static_cast<int>(eps.rows());
    const int dp = family.num_params();

    Mat z(n, model.dim);
    Vec v(n);
    Mat grad_v(n, dp);
    Mat path_grad(n, dp);
    for (int i = 0; i < n; ++i) {
        const Vec e = eps.row(i);
        const Vec zi = family.transform(phi, e);
        z.row(i) = zi;
        const double log_q = family.log_density(phi, e);
        v[i] = model.log_joint(zi) - log_q;
        const Vec u = model.grad_log_joint(zi) - family.grad_z_log_density(phi, e);
        const Vec path = family.jacobian_transpose_apply(phi, e, u);
        path_grad.row(i) = path;
        grad_v.row(i) = path - family.grad_phi_log_density(phi, e);
    }
    return SampleBatch{std::move(eps), std::move(z), LogWeights(std::move(v)),
                       std::move(grad_v), std::move(path_grad)};
}

}  // namespace uwise
