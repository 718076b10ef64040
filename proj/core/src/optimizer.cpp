#include "tiger/optimizer.hpp"

#include "tiger/error.hpp"

#include <cmath>
#include <string>

namespace tiger::ad {

void Adam::step(std::vector<Var>& params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].grad().all_finite()) {
            throw TrainingError("optimizer", "non-finite gradient in parameter " + std::to_string(i) +
                                                 " (" + shape_string(params[i].value()) + ")");
        }
    }
    if (m_.size() != params.size()) {
        m_.clear();
        v_.clear();
        for (const auto& p : params) {
            m_.emplace_back(p.rows(), p.cols());
            v_.emplace_back(p.rows(), p.cols());
        }
        t_ = 0;
    }
    ++t_;
    const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor grad = params[i].grad();
        auto w = params[i].mutable_value().data();
        auto m = m_[i].data();
        auto v = v_[i].data();
        auto g = grad.data();
        for (std::size_t k = 0; k < w.size(); ++k) {
            m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
            v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
            const double m_hat = m[k] / bias1;
            const double v_hat = v[k] / bias2;
            w[k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }
}

void Adam::reset() {
    t_ = 0;
    m_.clear();
    v_.clear();
}

}  // namespace tiger::ad
