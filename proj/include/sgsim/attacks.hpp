#pragma once

#include <memory>
#include <set>
#include <vector>

#include "sgsim/objectives.hpp"
#include "sgsim/rng.hpp"
#include "sgsim/vec.hpp"

namespace sgsim {

enum class AttackKind {
    Honest,
    SignFlip,
    Rescale,
    DelayedGradient,
    VarianceAttack,
    LabelFlip,
    Transient,
};

struct AttackSpec {
    AttackKind kind = AttackKind::Honest;
    std::set<int> byzantine_ids;
    double rescale_factor = 0.6;
    long delay = 1000;
    double z_max = 0.3;
    long transient_start = 0;
    long transient_stop = 0;
    AttackKind transient_inner = AttackKind::Honest;

    bool is_byzantine(int worker) const { return byzantine_ids.count(worker) != 0; }
};

/// Ring buffer over recent iterates so delayed reports can look back up to a
/// fixed horizon. Iterate k stays addressable while k >= t - capacity + 1.
class PointHistory {
public:
    explicit PointHistory(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

    void push(long t, const DenseVector& x);
    const DenseVector& at(long k) const; // throws when k fell out of the window
    long latest() const { return latest_; }

private:
    std::size_t capacity_;
    long latest_ = -1;
    std::vector<DenseVector> ring_;
};

/// Everything a colluding round attacker may observe: the current iterate,
/// recent history, every honest report already submitted this round, and its
/// own honestly computed stochastic gradient.
struct RoundContext {
    long t = 0;
    const DenseVector* x_t = nullptr;
    const PointHistory* history = nullptr;
    const std::vector<DenseVector>* honest_reports = nullptr;
    DenseVector own_gradient;
};

/// The vector a Byzantine worker reports this round. Pure given its context;
/// the stream is consumed only by the variants that resample gradients.
DenseVector byzantine_report(const AttackSpec& spec, const RoundContext& ctx, int worker,
                             const Objective& obj, RngStream& stream);

} // namespace sgsim
