#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgsim/rng.hpp"
#include "sgsim/vec.hpp"

namespace sgsim {

enum class ObjectiveKind { QuadraticSaddle, SeparableDoubleWell, SyntheticSoftmax };

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::QuadraticSaddle;
    std::size_t d = 10;
    // QuadraticSaddle: curvature of the first coordinate is -delta (so a
    // negative delta turns the function into a convex quadratic).
    double delta = 0.1;
    // SyntheticSoftmax: linear classifier over `classes` Gaussian clusters;
    // d must be divisible by classes.
    int classes = 4;
    int samples = 64;
    std::uint64_t dataset_seed = 0;
    // Bounded-noise oracle radius.
    double noise_bound = 1.0;
};

struct SospCertificate {
    double grad_norm = 0.0;
    double hessian_min_eig = 0.0;
    double epsilon = 0.0;
    bool satisfied = false;
};

/// A smooth synthetic objective with exact gradients, a surely-bounded
/// stochastic gradient oracle (gradient plus a uniform draw from the
/// noise-bound ball, so the noise is exactly mean zero and never exceeds the
/// bound), and minimum-eigenvalue Hessian diagnostics.
class Objective {
public:
    explicit Objective(const ObjectiveSpec& spec);

    const ObjectiveSpec& spec() const { return spec_; }
    std::size_t dim() const { return spec_.d; }
    double lipschitz_grad() const { return lipschitz_grad_; }
    double lipschitz_hess() const { return lipschitz_hess_; }
    double noise_bound() const { return spec_.noise_bound; }
    bool is_classification() const { return spec_.kind == ObjectiveKind::SyntheticSoftmax; }

    double eval(const DenseVector& x) const;
    DenseVector grad(const DenseVector& x) const;

    /// grad(x) plus a uniform draw from the noise-bound ball.
    DenseVector stochastic_grad(const DenseVector& x, RngStream& stream) const;

    /// Gradient of the classification objective with every label l replaced
    /// by classes-1-l. Only valid for SyntheticSoftmax.
    DenseVector grad_label_flipped(const DenseVector& x) const;
    DenseVector stochastic_grad_label_flipped(const DenseVector& x, RngStream& stream) const;

    /// Smallest Hessian eigenvalue within additive tol. Closed form where the
    /// Hessian is known analytically, otherwise a central-difference Hessian
    /// followed by a dense symmetric eigensolve.
    double hessian_min_eig(const DenseVector& x, double tol = 1e-6) const;

    SospCertificate certify_sosp(const DenseVector& x, double epsilon) const;

    /// True when the Hessian is the same at every point (QuadraticSaddle), in
    /// which case hessian_min_eig is exact and free.
    bool constant_hessian() const { return spec_.kind == ObjectiveKind::QuadraticSaddle; }

private:
    void check_dim(const DenseVector& x) const;
    double eval_softmax(const DenseVector& x, bool flipped) const;
    DenseVector grad_softmax(const DenseVector& x, bool flipped) const;

    ObjectiveSpec spec_;
    double lipschitz_grad_ = 1.0;
    double lipschitz_hess_ = 1.0;
    // Softmax dataset: feature vectors and labels, fixed at construction.
    std::vector<std::vector<double>> features_;
    std::vector<int> labels_;
    std::size_t feature_dim_ = 0;
};

/// Smallest eigenvalue of a dense symmetric matrix (row-major, n x n) via the
/// cyclic Jacobi method. Intended for the desk-scale dimensions used here.
double symmetric_min_eigenvalue(std::vector<double> matrix, std::size_t n);

} // namespace sgsim
