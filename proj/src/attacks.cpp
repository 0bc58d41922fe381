#include "sgsim/attacks.hpp"

#include <cmath>
#include <stdexcept>

namespace sgsim {

void PointHistory::push(long t, const DenseVector& x) {
    if (ring_.size() < capacity_) {
        ring_.push_back(x);
    } else {
        ring_[static_cast<std::size_t>(t % static_cast<long>(capacity_))] = x;
    }
    latest_ = t;
}

const DenseVector& PointHistory::at(long k) const {
    if (k < 0 || k > latest_ || latest_ - k >= static_cast<long>(ring_.size()))
        throw std::out_of_range("point history: iterate fell outside the retained window");
    return ring_[static_cast<std::size_t>(k % static_cast<long>(capacity_))];
}

namespace {

DenseVector apply_kind(AttackKind kind, const AttackSpec& spec, const RoundContext& ctx,
                       const Objective& obj, RngStream& stream) {
    switch (kind) {
    case AttackKind::Honest:
        return ctx.own_gradient;
    case AttackKind::SignFlip:
        return -1.0 * ctx.own_gradient;
    case AttackKind::Rescale:
        return -spec.rescale_factor * ctx.own_gradient;
    case AttackKind::DelayedGradient: {
        if (spec.delay < 1) throw std::invalid_argument("delayed attack: D must be >= 1");
        const long k = std::max<long>(0, ctx.t - spec.delay);
        return obj.stochastic_grad(ctx.history->at(k), stream);
    }
    case AttackKind::VarianceAttack: {
        const std::vector<DenseVector>& honest = *ctx.honest_reports;
        if (honest.empty())
            throw std::runtime_error("variance attack: no honest reports to imitate");
        const std::size_t d = honest[0].dim();
        const double n = static_cast<double>(honest.size());
        DenseVector out(d);
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (const DenseVector& r : honest) mean += r[j];
            mean /= n;
            double var = 0.0;
            for (const DenseVector& r : honest) {
                const double diff = r[j] - mean;
                var += diff * diff;
            }
            var /= n; // population variance
            out[j] = mean - spec.z_max * std::sqrt(var);
        }
        return out;
    }
    case AttackKind::LabelFlip:
        return obj.stochastic_grad_label_flipped(*ctx.x_t, stream);
    case AttackKind::Transient:
        throw std::logic_error("transient attack cannot nest itself");
    }
    throw std::logic_error("unknown attack kind");
}

} // namespace

DenseVector byzantine_report(const AttackSpec& spec, const RoundContext& ctx, int worker,
                             const Objective& obj, RngStream& stream) {
    if (!spec.is_byzantine(worker))
        throw std::invalid_argument("byzantine_report: worker is not in the byzantine set");
    AttackKind kind = spec.kind;
    if (kind == AttackKind::Transient)
        kind = (ctx.t >= spec.transient_start && ctx.t < spec.transient_stop)
                   ? spec.transient_inner
                   : AttackKind::Honest;
    return apply_kind(kind, spec, ctx, obj, stream);
}

} // namespace sgsim
