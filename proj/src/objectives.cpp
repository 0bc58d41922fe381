#include "sgsim/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgsim {

namespace {

// Separable double well: w(u) = (u^2 - 1)^2 / 4 per coordinate.
// w'(u) = u^3 - u, w''(u) = 3u^2 - 1. Minima at u = +-1 (value 0),
// local max per coordinate at u = 0 with w''(0) = -1.
double well(double u) {
    const double q = u * u - 1.0;
    return 0.25 * q * q;
}
double well_grad(double u) { return u * u * u - u; }
double well_hess(double u) { return 3.0 * u * u - 1.0; }

} // namespace

Objective::Objective(const ObjectiveSpec& spec) : spec_(spec) {
    if (spec_.d == 0) throw std::invalid_argument("objective: d must be >= 1");
    if (spec_.noise_bound < 0.0) throw std::invalid_argument("objective: V must be >= 0");
    switch (spec_.kind) {
    case ObjectiveKind::QuadraticSaddle:
        lipschitz_grad_ = std::max(1.0, std::abs(spec_.delta));
        lipschitz_hess_ = 1.0;
        break;
    case ObjectiveKind::SeparableDoubleWell:
        // Valid on the box |x_i| <= 1.5 exercised by the tests.
        lipschitz_grad_ = 6.0;
        lipschitz_hess_ = 9.0;
        break;
    case ObjectiveKind::SyntheticSoftmax: {
        if (spec_.classes < 2) throw std::invalid_argument("objective: classes must be >= 2");
        if (spec_.samples < 1) throw std::invalid_argument("objective: samples must be >= 1");
        if (spec_.d % static_cast<std::size_t>(spec_.classes) != 0)
            throw std::invalid_argument("objective: d must be divisible by classes");
        feature_dim_ = spec_.d / static_cast<std::size_t>(spec_.classes);
        // Gaussian clusters around per-class centers; labels are balanced and
        // fixed, so the whole dataset is a pure function of the dataset seed.
        features_.resize(spec_.samples);
        labels_.resize(spec_.samples);
        std::vector<std::vector<double>> centers(spec_.classes);
        {
            RngStream cs(spec_.dataset_seed, stream_id::dataset, 0);
            for (int c = 0; c < spec_.classes; ++c) {
                centers[c].resize(feature_dim_);
                for (std::size_t j = 0; j < feature_dim_; ++j)
                    centers[c][j] = 2.0 * cs.next_gaussian();
            }
        }
        double max_sq = 0.0;
        for (int n = 0; n < spec_.samples; ++n) {
            const int label = n % spec_.classes;
            labels_[n] = label;
            features_[n].resize(feature_dim_);
            RngStream fs(spec_.dataset_seed, stream_id::dataset, static_cast<std::uint64_t>(n) + 1);
            double sq = 0.0;
            for (std::size_t j = 0; j < feature_dim_; ++j) {
                features_[n][j] = centers[label][j] + 0.5 * fs.next_gaussian();
                sq += features_[n][j] * features_[n][j];
            }
            max_sq = std::max(max_sq, sq);
        }
        // Softmax cross-entropy Hessian in the weights is bounded by
        // ||phi||^2 / 2 per sample.
        lipschitz_grad_ = std::max(1.0, 0.5 * max_sq);
        lipschitz_hess_ = lipschitz_grad_;
        break;
    }
    }
}

void Objective::check_dim(const DenseVector& x) const {
    if (x.dim() != spec_.d)
        throw std::invalid_argument("objective: point dimension mismatch");
}

double Objective::eval(const DenseVector& x) const {
    check_dim(x);
    switch (spec_.kind) {
    case ObjectiveKind::QuadraticSaddle: {
        double s = -spec_.delta * x[0] * x[0];
        for (std::size_t i = 1; i < x.dim(); ++i) s += x[i] * x[i];
        return 0.5 * s;
    }
    case ObjectiveKind::SeparableDoubleWell: {
        double s = 0.0;
        for (std::size_t i = 0; i < x.dim(); ++i) s += well(x[i]);
        return s;
    }
    case ObjectiveKind::SyntheticSoftmax:
        return eval_softmax(x, /*flipped=*/false);
    }
    throw std::logic_error("objective: unknown kind");
}

DenseVector Objective::grad(const DenseVector& x) const {
    check_dim(x);
    switch (spec_.kind) {
    case ObjectiveKind::QuadraticSaddle: {
        DenseVector g(x.dim());
        g[0] = -spec_.delta * x[0];
        for (std::size_t i = 1; i < x.dim(); ++i) g[i] = x[i];
        return g;
    }
    case ObjectiveKind::SeparableDoubleWell: {
        DenseVector g(x.dim());
        for (std::size_t i = 0; i < x.dim(); ++i) g[i] = well_grad(x[i]);
        return g;
    }
    case ObjectiveKind::SyntheticSoftmax:
        return grad_softmax(x, /*flipped=*/false);
    }
    throw std::logic_error("objective: unknown kind");
}

DenseVector Objective::stochastic_grad(const DenseVector& x, RngStream& stream) const {
    DenseVector g = grad(x);
    if (spec_.noise_bound == 0.0) return g;
    g += uniform_ball_vector(x.dim(), spec_.noise_bound, stream);
    return g;
}

DenseVector Objective::grad_label_flipped(const DenseVector& x) const {
    if (!is_classification())
        throw std::invalid_argument("label flip requires a classification objective");
    check_dim(x);
    return grad_softmax(x, /*flipped=*/true);
}

DenseVector Objective::stochastic_grad_label_flipped(const DenseVector& x, RngStream& stream) const {
    DenseVector g = grad_label_flipped(x);
    if (spec_.noise_bound == 0.0) return g;
    g += uniform_ball_vector(x.dim(), spec_.noise_bound, stream);
    return g;
}

double Objective::eval_softmax(const DenseVector& x, bool flipped) const {
    // x is the row-major (classes x feature_dim) weight matrix.
    double total = 0.0;
    std::vector<double> logits(spec_.classes);
    for (std::size_t n = 0; n < features_.size(); ++n) {
        double max_logit = -1e300;
        for (int c = 0; c < spec_.classes; ++c) {
            double z = 0.0;
            const std::size_t base = static_cast<std::size_t>(c) * feature_dim_;
            for (std::size_t j = 0; j < feature_dim_; ++j) z += x[base + j] * features_[n][j];
            logits[c] = z;
            max_logit = std::max(max_logit, z);
        }
        double lse = 0.0;
        for (int c = 0; c < spec_.classes; ++c) lse += std::exp(logits[c] - max_logit);
        lse = max_logit + std::log(lse);
        const int label = flipped ? spec_.classes - 1 - labels_[n] : labels_[n];
        total += lse - logits[label];
    }
    return total / static_cast<double>(features_.size());
}

DenseVector Objective::grad_softmax(const DenseVector& x, bool flipped) const {
    DenseVector g(x.dim());
    std::vector<double> logits(spec_.classes);
    std::vector<double> probs(spec_.classes);
    const double inv_n = 1.0 / static_cast<double>(features_.size());
    for (std::size_t n = 0; n < features_.size(); ++n) {
        double max_logit = -1e300;
        for (int c = 0; c < spec_.classes; ++c) {
            double z = 0.0;
            const std::size_t base = static_cast<std::size_t>(c) * feature_dim_;
            for (std::size_t j = 0; j < feature_dim_; ++j) z += x[base + j] * features_[n][j];
            logits[c] = z;
            max_logit = std::max(max_logit, z);
        }
        double sum = 0.0;
        for (int c = 0; c < spec_.classes; ++c) {
            probs[c] = std::exp(logits[c] - max_logit);
            sum += probs[c];
        }
        const int label = flipped ? spec_.classes - 1 - labels_[n] : labels_[n];
        for (int c = 0; c < spec_.classes; ++c) {
            const double coeff = (probs[c] / sum - (c == label ? 1.0 : 0.0)) * inv_n;
            const std::size_t base = static_cast<std::size_t>(c) * feature_dim_;
            for (std::size_t j = 0; j < feature_dim_; ++j)
                g[base + j] += coeff * features_[n][j];
        }
    }
    return g;
}

double Objective::hessian_min_eig(const DenseVector& x, double tol) const {
    check_dim(x);
    if (tol <= 0.0) throw std::invalid_argument("hessian_min_eig: tol must be > 0");
    switch (spec_.kind) {
    case ObjectiveKind::QuadraticSaddle:
        return x.dim() == 1 ? -spec_.delta : std::min(-spec_.delta, 1.0);
    case ObjectiveKind::SeparableDoubleWell: {
        double m = well_hess(x[0]);
        for (std::size_t i = 1; i < x.dim(); ++i) m = std::min(m, well_hess(x[i]));
        return m;
    }
    case ObjectiveKind::SyntheticSoftmax: {
        // Central-difference Hessian columns from exact gradients.
        const std::size_t d = x.dim();
        const double h = std::max(1e-5, std::sqrt(tol) * 1e-2);
        std::vector<double> hess(d * d, 0.0);
        DenseVector xp = x, xm = x;
        for (std::size_t j = 0; j < d; ++j) {
            xp[j] = x[j] + h;
            xm[j] = x[j] - h;
            const DenseVector gp = grad(xp);
            const DenseVector gm = grad(xm);
            for (std::size_t i = 0; i < d; ++i)
                hess[i * d + j] = (gp[i] - gm[i]) / (2.0 * h);
            xp[j] = x[j];
            xm[j] = x[j];
        }
        // Symmetrize before the eigensolve.
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                const double avg = 0.5 * (hess[i * d + j] + hess[j * d + i]);
                hess[i * d + j] = avg;
                hess[j * d + i] = avg;
            }
        return symmetric_min_eigenvalue(std::move(hess), d);
    }
    }
    throw std::logic_error("objective: unknown kind");
}

SospCertificate Objective::certify_sosp(const DenseVector& x, double epsilon) const {
    if (epsilon <= 0.0) throw std::invalid_argument("certify_sosp: epsilon must be > 0");
    SospCertificate cert;
    cert.epsilon = epsilon;
    cert.grad_norm = norm(grad(x));
    cert.hessian_min_eig = hessian_min_eig(x);
    cert.satisfied = cert.grad_norm <= epsilon && cert.hessian_min_eig >= -std::sqrt(epsilon);
    return cert;
}

double symmetric_min_eigenvalue(std::vector<double> a, std::size_t n) {
    if (n == 0) throw std::invalid_argument("symmetric_min_eigenvalue: empty matrix");
    if (a.size() != n * n) throw std::invalid_argument("symmetric_min_eigenvalue: bad size");
    // Cyclic Jacobi sweeps; rotations drive off-diagonal mass to zero.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    double min_eig = a[0];
    for (std::size_t i = 1; i < n; ++i) min_eig = std::min(min_eig, a[i * n + i]);
    return min_eig;
}

} // namespace sgsim
