#include "sgsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgsim {

namespace {

// splitmix64 finalizer; also used to mix key material into the stream state.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t step) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ (stream + 0xA5A5A5A5A5A5A5A5ULL));
    h = mix64(h ^ (step + 0x5A5A5A5A5A5A5A5AULL));
    state_ = h;
}

std::uint64_t RngStream::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_double_open() {
    return 1.0 - next_double();
}

double RngStream::next_gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_gaussian_;
    }
    const double u1 = next_double_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_gaussian_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

DenseVector gaussian_vector(std::size_t d, double nu, RngStream& stream) {
    if (d == 0) throw std::invalid_argument("gaussian_vector: d must be >= 1");
    if (nu < 0.0) throw std::invalid_argument("gaussian_vector: nu must be >= 0");
    DenseVector out(d);
    if (nu == 0.0) return out;
    for (std::size_t i = 0; i < d; ++i) out[i] = nu * stream.next_gaussian();
    return out;
}

DenseVector uniform_ball_vector(std::size_t d, double radius, RngStream& stream) {
    if (d == 0) throw std::invalid_argument("uniform_ball_vector: d must be >= 1");
    if (radius < 0.0) throw std::invalid_argument("uniform_ball_vector: negative radius");
    DenseVector out(d);
    if (radius == 0.0) return out;
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = stream.next_gaussian();
        sq += out[i] * out[i];
    }
    if (sq == 0.0) return out; // measure-zero direction, return the center
    const double u = stream.next_double_open();
    const double scale = radius * std::pow(u, 1.0 / static_cast<double>(d)) / std::sqrt(sq);
    for (std::size_t i = 0; i < d; ++i) out[i] *= scale;
    return out;
}

} // namespace sgsim
