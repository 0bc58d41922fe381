#include "sgsim/vec.hpp"

namespace sgsim {

DenseVector clip_to_ball(const DenseVector& v, const DenseVector& center, double radius) {
    if (v.dim() != center.dim())
        throw std::invalid_argument("clip_to_ball: dimension mismatch");
    if (radius < 0.0)
        throw std::invalid_argument("clip_to_ball: negative radius");
    const double d = distance(v, center);
    if (d <= radius) return v;
    DenseVector out = center;
    const double scale = radius / d;
    for (std::size_t i = 0; i < v.dim(); ++i)
        out[i] = center[i] + scale * (v[i] - center[i]);
    return out;
}

} // namespace sgsim
