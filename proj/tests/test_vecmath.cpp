#include <doctest.h>

#include <cmath>

#include "sgsim/rng.hpp"
#include "sgsim/vec.hpp"

using namespace sgsim;

TEST_CASE("gaussian_vector with zero variance is the zero vector") {
    RngStream s(7, 1, 0);
    const DenseVector v = gaussian_vector(3, 0.0, s);
    for (std::size_t i = 0; i < 3; ++i) CHECK(v[i] == 0.0);
}

TEST_CASE("identical stream keys reproduce the identical draw sequence") {
    RngStream a(123, 4, 9);
    RngStream b(123, 4, 9);
    const DenseVector va = gaussian_vector(2, 1.0, a);
    const DenseVector vb = gaussian_vector(2, 1.0, b);
    CHECK(va == vb);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream keys decorrelate") {
    RngStream a(123, 4, 9);
    RngStream b(123, 5, 9);
    RngStream c(123, 4, 10);
    CHECK(a.next_u64() != b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
}

TEST_CASE("gaussian_vector norm concentrates at nu^2 d") {
    // Law of large numbers: the mean of ||xi||^2 over 1e5 draws lands within
    // 2% of nu^2 d = 2.5.
    const std::size_t d = 10;
    const double nu = 0.5;
    double sum = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        RngStream s(99, 0, static_cast<std::uint64_t>(k));
        sum += squared_norm(gaussian_vector(d, nu, s));
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(nu * nu * d).epsilon(0.02));
}

TEST_CASE("gaussian_vector rejects d = 0") {
    RngStream s(1, 1, 1);
    CHECK_THROWS_AS(gaussian_vector(0, 1.0, s), std::invalid_argument);
}

TEST_CASE("clip_to_ball scales points outside the ball") {
    const DenseVector v(std::vector<double>{3.0, 0.0});
    const DenseVector center(2, 0.0);
    const DenseVector out = clip_to_ball(v, center, 1.0);
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[1] == doctest::Approx(0.0));
}

TEST_CASE("clip_to_ball fixes the center and leaves interior points alone") {
    const DenseVector center(std::vector<double>{0.5, -2.0});
    CHECK(clip_to_ball(center, center, 0.0) == center);
    const DenseVector inside(std::vector<double>{1.0, 1.0});
    CHECK(clip_to_ball(inside, DenseVector(2, 0.0), 2.0) == inside);
}

TEST_CASE("clip_to_ball output never leaves the ball") {
    RngStream s(5, 0, 0);
    for (int it = 0; it < 500; ++it) {
        const std::size_t d = 1 + s.next_u64() % 6;
        DenseVector v(d), c(d);
        for (std::size_t i = 0; i < d; ++i) {
            v[i] = 10.0 * s.next_gaussian();
            c[i] = 10.0 * s.next_gaussian();
        }
        const double radius = 5.0 * s.next_double();
        const DenseVector out = clip_to_ball(v, c, radius);
        CHECK(distance(out, c) <= radius * (1.0 + 1e-12) + 1e-300);
    }
}

TEST_CASE("norm expansion identity holds to 1e-12 relative") {
    RngStream s(17, 0, 0);
    for (int it = 0; it < 200; ++it) {
        const std::size_t d = 1 + s.next_u64() % 8;
        DenseVector a(d), b(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = s.next_gaussian();
            b[i] = s.next_gaussian();
        }
        const double lhs = squared_norm(a + b);
        const double rhs = squared_norm(a) + 2.0 * dot(a, b) + squared_norm(b);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("uniform ball draws respect the radius and average to zero") {
    const std::size_t d = 6;
    DenseVector mean(d);
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        RngStream s(3, 2, static_cast<std::uint64_t>(k));
        const DenseVector v = uniform_ball_vector(d, 1.0, s);
        CHECK(norm(v) <= 1.0 + 1e-12);
        mean += v;
    }
    mean *= 1.0 / n;
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(mean[i]) < 0.01);
}

TEST_CASE("dimension mismatches are rejected") {
    CHECK_THROWS_AS(dot(DenseVector(2), DenseVector(3)), std::invalid_argument);
    CHECK_THROWS_AS(DenseVector(2) + DenseVector(3), std::invalid_argument);
    CHECK_THROWS_AS(clip_to_ball(DenseVector(2), DenseVector(3), 1.0), std::invalid_argument);
}
