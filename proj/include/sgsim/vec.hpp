#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sgsim {

/// Dense d-dimensional vector with value semantics. Dimensions are fixed at
/// construction; every binary operation checks that dimensions agree.
class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::size_t dim, double fill = 0.0) : v_(dim, fill) {}
    explicit DenseVector(std::vector<double> entries) : v_(std::move(entries)) {}
    DenseVector(std::initializer_list<double> entries) : v_(entries) {}

    static DenseVector zeros(std::size_t dim) { return DenseVector(dim, 0.0); }

    std::size_t dim() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    const std::vector<double>& entries() const { return v_; }

    DenseVector& operator+=(const DenseVector& o) {
        check_dim(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    DenseVector& operator-=(const DenseVector& o) {
        check_dim(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    DenseVector& operator*=(double s) {
        for (double& x : v_) x *= s;
        return *this;
    }

    friend DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
    friend DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
    friend DenseVector operator*(double s, DenseVector a) { return a *= s; }
    friend DenseVector operator*(DenseVector a, double s) { return a *= s; }
    friend bool operator==(const DenseVector& a, const DenseVector& b) { return a.v_ == b.v_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    void check_dim(const DenseVector& o) const {
        if (v_.size() != o.v_.size())
            throw std::invalid_argument("DenseVector: dimension mismatch");
    }

    std::vector<double> v_;
};

inline double dot(const DenseVector& a, const DenseVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const DenseVector& a) { return dot(a, a); }
inline double norm(const DenseVector& a) { return std::sqrt(squared_norm(a)); }

inline double distance(const DenseVector& a, const DenseVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

/// Projects v onto the closed ball of the given radius around center.
/// Returns v unchanged when it is already inside.
DenseVector clip_to_ball(const DenseVector& v, const DenseVector& center, double radius);

} // namespace sgsim
