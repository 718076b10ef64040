#pragma once

#include "tiger/autodiff.hpp"

#include <cstdint>
#include <vector>

namespace tiger::ad {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment optimizer. Moment buffers are created lazily with the
/// parameter's shape, so parameters may be registered once and stepped many
/// times across training rounds.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    /// Applies one update from each parameter's accumulated gradient.
    /// Throws TrainingError if any gradient is non-finite; parameters are
    /// left untouched in that case.
    void step(std::vector<Var>& params);
    void reset();

    const AdamConfig& config() const noexcept { return config_; }
    std::uint64_t steps_taken() const noexcept { return t_; }
    /// First/second moment buffers in parameter order (empty before the first step).
    const std::vector<Tensor>& first_moments() const noexcept { return m_; }
    const std::vector<Tensor>& second_moments() const noexcept { return v_; }

private:
    AdamConfig config_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace tiger::ad
