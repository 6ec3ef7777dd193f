#include <doctest.h>

#include "test_util.hpp"
#include "venomguard/nn/ops.hpp"
#include "venomguard/nn/optimizer.hpp"

using namespace vg;
using namespace vg::nn;
using vgtest::fd_grad;
using vgtest::grad_rel_err;
using vgtest::random_tensor;

namespace {

// gradcheck of a scalar-valued graph builder against finite differences
void check_grad(const Var& leaf, const std::function<Var()>& build, double tol = 1e-6) {
    Var loss = build();
    auto g = grad(loss, {leaf}, false);
    auto fd = fd_grad(leaf, [&] {
        NoGradGuard ng;
        return build()->value.item();
    });
    CHECK(grad_rel_err(g[0], fd) < tol);
}

}  // namespace

TEST_CASE("elementwise and reduction gradients match finite differences") {
    Rng rng(21);
    Var x = leaf(random_tensor({2, 3, 4, 4}, rng, -0.8, 0.8));
    Var y = constant(random_tensor({2, 3, 4, 4}, rng, -0.5, 0.5));

    check_grad(x, [&] { return mean_all(mul(x, y)); });
    check_grad(x, [&] { return mean_all(square(sub(x, y))); });
    check_grad(x, [&] { return mean_all(tanh_op(x)); });
    check_grad(x, [&] { return mean_all(sigmoid_op(x)); });
    check_grad(x, [&] { return mean_all(softplus_op(x)); });
    check_grad(x, [&] { return mean_abs(x); }, 1e-5);
    check_grad(x, [&] { return mean_all(leaky_relu(x, 0.2)); }, 1e-5);
    check_grad(x, [&] { return mean_all(sqrt_op(add_scalar(square(x), 0.1))); });
    check_grad(x, [&] { return mean_all(log_op(add_scalar(square(x), 0.5))); });
    check_grad(x, [&] { return mean_all(reciprocal(add_scalar(square(x), 1.0))); });
    check_grad(x, [&] { return sum_all(mul(sum_per_sample(square(x)), sum_per_sample(x))); });
    check_grad(x, [&] { return mean_all(upsample2(x)); });
    check_grad(x, [&] { return mean_all(downsample2_sum(x)); });
    check_grad(x, [&] { return mean_all(square(concat_c(x, slice_c(x, 1, 3)))); });
}

TEST_CASE("matmul family gradients match finite differences") {
    Rng rng(22);
    Var a = leaf(random_tensor({3, 5}, rng, -1.0, 1.0));
    Var b = leaf(random_tensor({5, 4}, rng, -1.0, 1.0));
    Var bt = leaf(random_tensor({4, 5}, rng, -1.0, 1.0));
    Var at = leaf(random_tensor({5, 3}, rng, -1.0, 1.0));

    check_grad(a, [&] { return mean_sq(matmul_nn(a, b)); });
    check_grad(b, [&] { return mean_sq(matmul_nn(a, b)); });
    check_grad(a, [&] { return mean_sq(matmul_nt(a, bt)); });
    check_grad(bt, [&] { return mean_sq(matmul_nt(a, bt)); });
    check_grad(at, [&] { return mean_sq(matmul_tn(at, b)); });
    check_grad(b, [&] { return mean_sq(matmul_tn(at, b)); });
}

TEST_CASE("convolution triad gradients match finite differences") {
    Rng rng(23);
    for (int stride : {1, 2}) {
        ConvGeom g{3, stride, 1};
        Var x = leaf(random_tensor({2, 3, 8, 8}, rng, -1.0, 1.0));
        Var w = leaf(random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5));
        Var b = leaf(random_tensor({4}, rng, -0.1, 0.1));

        check_grad(x, [&] { return mean_sq(conv2d(x, w, b, g)); });
        check_grad(w, [&] { return mean_sq(conv2d(x, w, b, g)); });
        check_grad(b, [&] { return mean_sq(conv2d(x, w, b, g)); });
    }
}

TEST_CASE("double backward: gradient-norm penalties differentiate correctly") {
    Rng rng(24);
    Var x = leaf(random_tensor({2, 2, 4, 4}, rng, -1.0, 1.0));
    Var w = leaf(random_tensor({1, 2, 3, 3}, rng, -0.7, 0.7));

    auto penalty = [&]() -> Var {
        Var out = sum_all(tanh_op(conv_fwd(x, w, {3, 1, 1})));
        Var gx = grad(out, {x}, true)[0];
        Var n2 = sum_per_sample(square(gx));
        Var n = sqrt_op(add_scalar(n2, 1e-12));
        return mean_all(square(add_scalar(n, -1.0)));
    };

    Var pen = penalty();
    auto gw = grad(pen, {w}, false)[0];
    auto fd = fd_grad(
        w,
        [&] {
            return penalty()->value.item();
        },
        1e-5);
    CHECK(grad_rel_err(gw, fd) < 1e-4);

    auto gx2 = grad(pen, {x}, false)[0];
    auto fdx = fd_grad(
        x,
        [&] {
            return penalty()->value.item();
        },
        1e-5);
    CHECK(grad_rel_err(gx2, fdx) < 1e-4);
}

TEST_CASE("grad through an inner sgd step (unrolled update)") {
    Rng rng(25);
    Var theta = leaf(random_tensor({1, 1, 3, 3}, rng, -0.5, 0.5));
    Var bias = leaf(random_tensor({1}, rng, -0.1, 0.1));
    Var z = constant(random_tensor({1, 1, 4, 4}, rng));
    Var xprime = leaf(random_tensor({1, 1, 4, 4}, rng));
    Var target = constant(random_tensor({1, 1, 4, 4}, rng));

    auto unrolled = [&]() -> Var {
        Var inner = mean_abs(sub(conv2d(z, theta, bias, {3, 1, 1}), xprime));
        auto gs = grad(inner, {theta, bias}, true);
        Var theta2 = sub(theta, scale(gs[0], 0.2));
        Var bias2 = sub(bias, scale(gs[1], 0.2));
        return mean_abs(sub(conv2d(z, theta2, bias2, {3, 1, 1}), target));
    };

    Var outer = unrolled();
    auto gxp = grad(outer, {xprime}, false)[0];
    auto fd = fd_grad(
        xprime,
        [&] {
            return unrolled()->value.item();
        },
        1e-5);
    CHECK(grad_rel_err(gxp, fd) < 1e-4);
}

TEST_CASE("gradients of disconnected inputs are explicit zeros") {
    Rng rng(26);
    Var x = leaf(random_tensor({2, 2}, rng));
    Var unused = leaf(random_tensor({3}, rng));
    Var loss = mean_sq(x);
    auto gs = grad(loss, {x, unused}, false);
    CHECK(gs[1]->value.dims() == std::vector<int>{3});
    for (std::size_t i = 0; i < gs[1]->value.size(); ++i) CHECK(gs[1]->value.data()[i] == 0.0);
}

TEST_CASE("adam drives a quadratic toward its minimum") {
    Rng rng(27);
    Var p = leaf(random_tensor({4}, rng, -1.0, 1.0));
    Tensor target = random_tensor({4}, rng, -0.5, 0.5);
    Adam opt(0.05);
    for (int i = 0; i < 400; ++i) {
        Var loss = mean_sq(sub(p, constant(target)));
        auto g = grad(loss, {p}, false);
        opt.step({p}, {g[0]});
    }
    for (int i = 0; i < 4; ++i)
        CHECK(std::fabs(p->value.data()[i] - target.data()[i]) < 1e-3);
}

TEST_CASE("no-grad mode skips recording") {
    Rng rng(28);
    Var x = leaf(random_tensor({2, 2}, rng));
    NoGradGuard ng;
    Var y = mean_sq(x);
    CHECK_FALSE(y->requires_grad);
    CHECK(y->inputs.empty());
}
