#include "doctest.h"

#include "oracles.hpp"

#include "tiger/autodiff.hpp"
#include "tiger/error.hpp"
#include "tiger/optimizer.hpp"

#include <cmath>
#include <random>

using namespace tiger;
using ad::Var;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(r, c);
    for (double& x : t.data()) x = u(rng);
    return t;
}

// Reduces any output to a scalar with fixed random weights, so every output
// entry influences the checked gradient differently.
Var weigh(const Var& out, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return ad::sum(ad::mul(out, Var::constant(random_tensor(out.rows(), out.cols(), rng))));
}

constexpr double kGradTol = 1e-6;

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("tensor construction and products agree with the triple-loop oracle") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(Tensor(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    const Tensor a = random_tensor(4, 3, rng);
    const Tensor b = random_tensor(3, 5, rng);
    const Tensor c = matmul(a, b);
    const Tensor ref = oracle::matmul(a, b);
    for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k] == doctest::Approx(ref[k]).epsilon(1e-12));
    const Tensor tn = matmul_tn(a.transposed(), b);
    const Tensor nt = matmul_nt(a, b.transposed());
    for (std::size_t k = 0; k < c.size(); ++k) {
        CHECK(tn[k] == doctest::Approx(ref[k]).epsilon(1e-12));
        CHECK(nt[k] == doctest::Approx(ref[k]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(matmul(a, a), ShapeError);
    const Tensor s = softmax(Tensor::from_rows({{1, 2}, {3, 1000}}));
    double total = 0.0;
    for (double x : s.data()) total += x;
    CHECK(total == doctest::Approx(1.0));
    CHECK(s.all_finite());
}

TEST_CASE("diamond-shaped graphs accumulate gradients from both paths") {
    Var x = Var::parameter(Tensor::scalar(3.0));
    Var y = ad::add(ad::mul(x, x), x);
    ad::backward(y);
    CHECK(x.grad().item() == doctest::Approx(7.0));
}

TEST_CASE("backward requires a scalar loss") {
    Var x = Var::parameter(Tensor(2, 1, 1.0));
    CHECK_THROWS_AS(ad::backward(ad::scale(x, 2.0)), ContractError);
}

TEST_CASE("elementwise and reduction ops match finite differences") {
    std::mt19937_64 rng(7);
    Var a = Var::parameter(random_tensor(3, 4, rng));
    Var b = Var::parameter(random_tensor(3, 4, rng));
    Var row = Var::parameter(random_tensor(1, 4, rng));
    Var sc = Var::parameter(Tensor::scalar(0.7));
    Var pos = Var::parameter(random_tensor(3, 4, rng, 0.2, 2.0));

    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::add(a, b), 1); }) < kGradTol);
    CHECK(oracle::gradient_error(row, [&] { return weigh(ad::add(a, row), 2); }) < kGradTol);
    CHECK(oracle::gradient_error(sc, [&] { return weigh(ad::add(a, sc), 3); }) < kGradTol);
    CHECK(oracle::gradient_error(b, [&] { return weigh(ad::sub(a, b), 4); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::mul(a, b), 5); }) < kGradTol);
    CHECK(oracle::gradient_error(b, [&] { return weigh(ad::maximum(a, b), 6); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::scale(a, -2.5), 7); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::relu(a), 8); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::sigmoid(a), 9); }) < kGradTol);
    CHECK(oracle::gradient_error(pos, [&] { return weigh(ad::log(pos), 10); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return ad::mean(ad::mul(a, a)); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::row_sum(a), 11); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::rowwise_dot(a, b), 12); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::softmax(a), 13); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::softmax_rows(a), 14); }) < kGradTol);
}

TEST_CASE("matrix and structural ops match finite differences") {
    std::mt19937_64 rng(8);
    Var a = Var::parameter(random_tensor(4, 3, rng));
    Var w = Var::parameter(random_tensor(3, 2, rng));
    Var c = Var::parameter(random_tensor(2, 3, rng));
    const std::vector<std::size_t> idx{3, 0, 3, 1};

    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::matmul(a, w), 1); }) < kGradTol);
    CHECK(oracle::gradient_error(w, [&] { return weigh(ad::matmul(a, w), 1); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::transpose(a), 2); }) < kGradTol);
    CHECK(oracle::gradient_error(a, [&] { return weigh(ad::gather_rows(a, idx), 3); }) < kGradTol);
    CHECK(oracle::gradient_error(c, [&] { return weigh(ad::concat_rows(a, c), 4); }) < kGradTol);
    CHECK(oracle::gradient_error(w, [&] {
              const Var parts[] = {a, ad::matmul(a, ad::matmul(w, ad::transpose(w)))};
              return weigh(ad::concat_cols(parts), 5);
          }) < kGradTol);
    CHECK_THROWS_AS(ad::gather_rows(a, std::vector<std::size_t>{9}), ShapeError);
}

TEST_CASE("segment ops match finite differences and normalise per segment") {
    std::mt19937_64 rng(9);
    const std::vector<std::size_t> owner{0, 1, 0, 2, 1, 0};
    Var logits = Var::parameter(random_tensor(6, 1, rng, -2.0, 2.0));
    Var values = Var::parameter(random_tensor(6, 3, rng));

    const Tensor alpha = ad::segment_softmax(logits, owner, 3).value();
    double sums[3] = {0, 0, 0};
    for (std::size_t e = 0; e < owner.size(); ++e) {
        CHECK(alpha(e, 0) > 0.0);
        sums[owner[e]] += alpha(e, 0);
    }
    for (double s : sums) CHECK(std::abs(s - 1.0) < 1e-12);

    CHECK(oracle::gradient_error(logits, [&] { return weigh(ad::segment_softmax(logits, owner, 3), 1); }) < kGradTol);
    CHECK(oracle::gradient_error(values, [&] {
              return weigh(ad::segment_weighted_sum(ad::segment_softmax(logits, owner, 3), values, owner, 3), 2);
          }) < kGradTol);
    CHECK(oracle::gradient_error(logits, [&] {
              return weigh(ad::segment_weighted_sum(ad::segment_softmax(logits, owner, 3), values, owner, 3), 2);
          }) < kGradTol);
}

TEST_CASE("losses: bce clamps, cross-entropy matches finite differences") {
    std::mt19937_64 rng(10);
    Var p = Var::parameter(random_tensor(5, 1, rng, 0.05, 0.95));
    const Tensor labels = Tensor::from_rows({{1}, {0}, {1}, {1}, {0}});
    CHECK(oracle::gradient_error(p, [&] { return ad::bce_loss(p, labels); }) < kGradTol);

    Var half = Var::constant(Tensor(4, 1, 0.5));
    CHECK(ad::bce_loss(half, Tensor(4, 1, 1.0)).value().item() == doctest::Approx(std::log(2.0)));

    Var sure = Var::parameter(Tensor(2, 1, 1.0));
    Var l = ad::bce_loss(sure, Tensor(2, 1, 1.0));
    CHECK(std::isfinite(l.value().item()));
    CHECK(l.value().item() == doctest::Approx(-std::log(1.0 - ad::kProbabilityClamp)));
    ad::backward(l);
    CHECK(sure.grad()(0, 0) == 0.0);

    Var logits = Var::parameter(random_tensor(4, 3, rng));
    const std::vector<std::size_t> rows{0, 2, 3};
    const std::vector<std::size_t> targets{2, 0, 1};
    CHECK(oracle::gradient_error(logits, [&] { return ad::softmax_cross_entropy(logits, rows, targets); }) <
          kGradTol);
}

TEST_CASE("adam takes a bias-corrected first step and refuses non-finite gradients") {
    Var w = Var::parameter(Tensor::from_rows({{1.0, -2.0}}));
    ad::Adam opt(ad::AdamConfig{0.1});
    std::vector<Var> params{w};
    ad::backward(ad::sum(ad::mul(w, Var::constant(Tensor::from_rows({{3.0, -0.5}})))));
    opt.step(params);
    // First step: m_hat = g, v_hat = g^2, so each entry moves by lr * sign(g).
    CHECK(w.value()(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(w.value()(0, 1) == doctest::Approx(-1.9).epsilon(1e-6));
    CHECK(opt.steps_taken() == 1);

    ad::zero_grad(params);
    ad::backward(ad::sum(ad::mul(w, Var::constant(Tensor::from_rows({{NAN, 1.0}})))));
    const Tensor before = w.value();
    CHECK_THROWS_AS(opt.step(params), TrainingError);
    CHECK(w.value() == before);
}

TEST_CASE("worked examples for products, softmax, sigmoid and bce") {
    std::mt19937_64 rng(2);
    const Tensor x = random_tensor(2, 3, rng);
    CHECK(matmul(Tensor::identity(2), x) == x);
    CHECK(matmul(Tensor::from_rows({{1, 2}, {3, 4}}), Tensor::from_rows({{1}, {1}})) == Tensor::from_rows({{3}, {7}}));
    CHECK(matmul(Tensor(2, 3), random_tensor(3, 4, rng)) == Tensor(2, 4));

    const Tensor third = softmax(Tensor(1, 3, 0.0));
    for (double v : third.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    const Tensor big = softmax(Tensor::from_rows({{1000, 0}}));
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] < 1e-300);
    const Tensor logs = softmax(Tensor::from_rows({{std::log(1.0), std::log(2.0), std::log(3.0)}}));
    for (int k = 0; k < 3; ++k) CHECK(logs[k] == doctest::Approx((k + 1) / 6.0).epsilon(1e-12));
    CHECK_THROWS_AS(softmax(Tensor()), ShapeError);

    // Shift invariance on random inputs in [-2, 2].
    const Tensor r = random_tensor(1, 7, rng, -2.0, 2.0);
    Tensor shifted = r;
    for (double& v : shifted.data()) v += 3.25;
    const Tensor a = softmax(r);
    const Tensor b = softmax(shifted);
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(std::abs(a[k] - b[k]) < 1e-9);
        total += a[k];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);

    auto sig = [](double v) { return ad::sigmoid(Var::constant(Tensor::scalar(v))).value().item(); };
    CHECK(sig(0.0) == 0.5);
    CHECK(std::abs(sig(40.0) - 1.0) < 1e-12);
    CHECK(sig(-1.7) == doctest::Approx(1.0 - sig(1.7)).epsilon(1e-15));

    auto bce = [](Tensor p, Tensor y) { return ad::bce_loss(Var::constant(std::move(p)), y).value().item(); };
    CHECK(bce(Tensor::scalar(0.5), Tensor::scalar(1.0)) == doctest::Approx(0.6931471805599453));
    CHECK(bce(Tensor::scalar(1.0 - 1e-7), Tensor::scalar(1.0)) < 1e-6);
    CHECK(bce(Tensor::from_rows({{0.9}, {0.1}}), Tensor::from_rows({{1}, {0}})) == doctest::Approx(-std::log(0.9)));
    CHECK_THROWS_AS(bce(Tensor(2, 1, 0.5), Tensor(3, 1, 1.0)), ShapeError);
}

TEST_CASE("gradient of sum(W x) is x broadcast per row; constants get zero gradient") {
    Var w = Var::parameter(Tensor(2, 3, 0.3));
    Var unused = Var::parameter(Tensor(1, 1, 5.0));
    const Tensor xv = Tensor::from_rows({{1.0}, {-2.0}, {0.5}});
    ad::backward(ad::add(ad::sum(ad::matmul(w, Var::constant(xv))), ad::scale(ad::sum(unused), 0.0)));
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(w.grad()(r, c) == xv(c, 0));
    CHECK(unused.grad().item() == 0.0);
}

TEST_CASE("shared sub-expressions accumulate like a duplicated subgraph") {
    std::mt19937_64 rng(4);
    const Tensor init = random_tensor(3, 3, rng, -2.0, 2.0);
    const Tensor m = random_tensor(3, 3, rng);
    Var a = Var::parameter(init);
    Var shared = ad::sigmoid(ad::matmul(a, Var::constant(m)));
    ad::backward(ad::sum(ad::mul(shared, shared)));
    Var b = Var::parameter(init);
    Var left = ad::sigmoid(ad::matmul(b, Var::constant(m)));
    Var right = ad::sigmoid(ad::matmul(b, Var::constant(m)));
    ad::backward(ad::sum(ad::mul(left, right)));
    for (std::size_t k = 0; k < init.size(); ++k) CHECK(a.grad()[k] == doctest::Approx(b.grad()[k]).epsilon(1e-14));
}

TEST_CASE("adam: zero gradient is a no-op, descends w^2 and converges on a quadratic bowl") {
    Var w = Var::parameter(Tensor::scalar(1.0));
    std::vector<Var> params{w};
    ad::Adam opt(ad::AdamConfig{0.01});
    opt.step(params);
    CHECK(w.value().item() == 1.0);
    ad::backward(ad::mul(w, w));
    opt.step(params);
    CHECK(std::abs(w.value().item()) < 1.0);

    Var v = Var::parameter(Tensor::from_rows({{3.0, -4.0}}));
    std::vector<Var> vp{v};
    ad::Adam bowl(ad::AdamConfig{0.05});
    const Tensor target = Tensor::from_rows({{1.0, 2.0}});
    std::size_t steps = 0;
    for (; steps < 500; ++steps) {
        const Var d = ad::sub(v, Var::constant(target));
        ad::zero_grad(vp);
        ad::backward(ad::sum(ad::mul(d, d)));
        bowl.step(vp);
    }
    CHECK(std::abs(v.value()(0, 0) - 1.0) < 1e-3);
    CHECK(std::abs(v.value()(0, 1) - 2.0) < 1e-3);
}

}  // TEST_SUITE
