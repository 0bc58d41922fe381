#include <doctest.h>

#include <cmath>

#include "sgsim/attacks.hpp"

using namespace sgsim;

namespace {

Objective quad(std::size_t d) {
    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::QuadraticSaddle;
    spec.d = d;
    return Objective(spec);
}

RoundContext basic_ctx(long t, const DenseVector& x, const PointHistory& hist,
                       const std::vector<DenseVector>& honest, DenseVector own) {
    RoundContext ctx;
    ctx.t = t;
    ctx.x_t = &x;
    ctx.history = &hist;
    ctx.honest_reports = &honest;
    ctx.own_gradient = std::move(own);
    return ctx;
}

} // namespace

TEST_CASE("sign flip negates the honest gradient") {
    const Objective obj = quad(2);
    AttackSpec spec;
    spec.kind = AttackKind::SignFlip;
    spec.byzantine_ids = {0};
    PointHistory hist(1);
    const DenseVector x(2, 0.0);
    hist.push(0, x);
    std::vector<DenseVector> honest;
    RngStream s(1, 0, 0);
    auto ctx = basic_ctx(0, x, hist, honest, DenseVector(std::vector<double>{0.2, -0.5}));
    const DenseVector rep = byzantine_report(spec, ctx, 0, obj, s);
    CHECK(rep[0] == doctest::Approx(-0.2));
    CHECK(rep[1] == doctest::Approx(0.5));
}

TEST_CASE("double negation restores the input exactly") {
    const DenseVector g(std::vector<double>{0.37, -1.25, 4.0});
    const DenseVector twice = -1.0 * (-1.0 * g);
    CHECK(twice == g);
}

TEST_CASE("rescale sends the negative scaled gradient") {
    const Objective obj = quad(2);
    AttackSpec spec;
    spec.kind = AttackKind::Rescale;
    spec.rescale_factor = 0.6;
    spec.byzantine_ids = {3};
    PointHistory hist(1);
    const DenseVector x(2, 0.0);
    hist.push(0, x);
    std::vector<DenseVector> honest;
    RngStream s(1, 3, 0);
    auto ctx = basic_ctx(0, x, hist, honest, DenseVector(std::vector<double>{1.0, 0.0}));
    const DenseVector rep = byzantine_report(spec, ctx, 3, obj, s);
    CHECK(rep[0] == doctest::Approx(-0.6));
    CHECK(rep[1] == doctest::Approx(0.0));
}

TEST_CASE("variance attack reports the shifted coordinate mean") {
    // Honest 1-D reports {1.0, 1.2, 0.8, 1.1, 0.9, 1.0}: mean 1.0, population
    // sd sqrt(0.1/6); the report lands at 1.0 - 0.3 * 0.12910 = 0.96127.
    const Objective obj = quad(1);
    AttackSpec spec;
    spec.kind = AttackKind::VarianceAttack;
    spec.z_max = 0.3;
    spec.byzantine_ids = {6, 7};
    std::vector<DenseVector> honest;
    for (double v : {1.0, 1.2, 0.8, 1.1, 0.9, 1.0}) honest.push_back(DenseVector({v}));
    PointHistory hist(1);
    const DenseVector x(1, 0.0);
    hist.push(0, x);
    RngStream s(1, 6, 0);
    auto ctx = basic_ctx(0, x, hist, honest, DenseVector(1, 0.0));
    const DenseVector rep6 = byzantine_report(spec, ctx, 6, obj, s);
    const double expected = 1.0 - 0.3 * std::sqrt(0.1 / 6.0);
    CHECK(rep6[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(rep6[0] == doctest::Approx(0.96127).epsilon(1e-4));
    // Collusion: every byzantine worker reports the identical vector.
    RngStream s7(1, 7, 0);
    const DenseVector rep7 = byzantine_report(spec, ctx, 7, obj, s7);
    CHECK(rep6 == rep7);
}

TEST_CASE("variance attack stays within z_max population deviations per coordinate") {
    const Objective obj = quad(3);
    AttackSpec spec;
    spec.kind = AttackKind::VarianceAttack;
    spec.z_max = 0.3;
    spec.byzantine_ids = {0};
    RngStream gen(77, 0, 0);
    std::vector<DenseVector> honest;
    for (int i = 0; i < 6; ++i) {
        DenseVector v(3);
        for (std::size_t j = 0; j < 3; ++j) v[j] = gen.next_gaussian();
        honest.push_back(v);
    }
    PointHistory hist(1);
    const DenseVector x(3, 0.0);
    hist.push(0, x);
    RngStream s(1, 0, 0);
    auto ctx = basic_ctx(0, x, hist, honest, DenseVector(3, 0.0));
    const DenseVector rep = byzantine_report(spec, ctx, 0, obj, s);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0;
        for (const auto& h : honest) mean += h[j];
        mean /= 6.0;
        double var = 0.0;
        for (const auto& h : honest) var += (h[j] - mean) * (h[j] - mean);
        var /= 6.0;
        CHECK(std::abs(rep[j] - mean) <= spec.z_max * std::sqrt(var) + 1e-12);
    }
}

TEST_CASE("delayed gradient falls back to the initial point before t reaches D") {
    ObjectiveSpec ospec;
    ospec.kind = ObjectiveKind::QuadraticSaddle;
    ospec.d = 2;
    ospec.noise_bound = 0.0; // noiseless so the report is exactly grad(x_0)
    const Objective obj(ospec);
    AttackSpec spec;
    spec.kind = AttackKind::DelayedGradient;
    spec.delay = 10;
    spec.byzantine_ids = {1};
    PointHistory hist(11);
    DenseVector x0(std::vector<double>{2.0, 2.0});
    hist.push(0, x0);
    DenseVector x1(std::vector<double>{1.0, 1.0});
    hist.push(1, x1);
    std::vector<DenseVector> honest;
    RngStream s(1, 1, 1);
    auto ctx = basic_ctx(1, x1, hist, honest, DenseVector(2, 0.0));
    const DenseVector rep = byzantine_report(spec, ctx, 1, obj, s);
    CHECK(rep == obj.grad(x0));
}

TEST_CASE("point history refuses evicted iterates") {
    PointHistory hist(3);
    for (long t = 0; t < 6; ++t) hist.push(t, DenseVector(1, static_cast<double>(t)));
    CHECK(hist.at(5)[0] == 5.0);
    CHECK(hist.at(3)[0] == 3.0);
    CHECK_THROWS_AS(hist.at(2), std::out_of_range);
}

TEST_CASE("transient wraps the inner attack inside its window only") {
    const Objective obj = quad(2);
    AttackSpec spec;
    spec.kind = AttackKind::Transient;
    spec.transient_inner = AttackKind::SignFlip;
    spec.transient_start = 5;
    spec.transient_stop = 10;
    spec.byzantine_ids = {0};
    PointHistory hist(1);
    const DenseVector x(2, 1.0);
    std::vector<DenseVector> honest;
    const DenseVector own(std::vector<double>{1.0, -2.0});
    for (long t : {0L, 4L, 10L, 20L}) {
        hist.push(t, x);
        RngStream s(1, 0, static_cast<std::uint64_t>(t));
        auto ctx = basic_ctx(t, x, hist, honest, own);
        CHECK(byzantine_report(spec, ctx, 0, obj, s) == own);
    }
    for (long t : {5L, 9L}) {
        hist.push(t, x);
        RngStream s(1, 0, static_cast<std::uint64_t>(t));
        auto ctx = basic_ctx(t, x, hist, honest, own);
        CHECK(byzantine_report(spec, ctx, 0, obj, s) == -1.0 * own);
    }
}

TEST_CASE("label flip demands a classification objective") {
    const Objective obj = quad(2);
    AttackSpec spec;
    spec.kind = AttackKind::LabelFlip;
    spec.byzantine_ids = {0};
    PointHistory hist(1);
    const DenseVector x(2, 0.0);
    hist.push(0, x);
    std::vector<DenseVector> honest;
    RngStream s(1, 0, 0);
    auto ctx = basic_ctx(0, x, hist, honest, DenseVector(2, 0.0));
    CHECK_THROWS_AS(byzantine_report(spec, ctx, 0, obj, s), std::invalid_argument);
}

TEST_CASE("byzantine_report rejects workers outside the byzantine set") {
    const Objective obj = quad(2);
    AttackSpec spec;
    spec.kind = AttackKind::SignFlip;
    spec.byzantine_ids = {4};
    PointHistory hist(1);
    const DenseVector x(2, 0.0);
    hist.push(0, x);
    std::vector<DenseVector> honest;
    RngStream s(1, 2, 0);
    auto ctx = basic_ctx(0, x, hist, honest, DenseVector(2, 0.0));
    CHECK_THROWS_AS(byzantine_report(spec, ctx, 2, obj, s), std::invalid_argument);
}
