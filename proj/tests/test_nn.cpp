#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "botracle/nn.hpp"

using namespace botracle;
using nn::Matrix;
using nn::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("softmax hand values") {
    CHECK(nn::softmax(vec({0, 0}))[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(nn::softmax(vec({0, 0}))[1] == doctest::Approx(0.5).epsilon(1e-12));
    Vector thirds = nn::softmax(vec({1, 1, 1}));
    for (int i = 0; i < 3; ++i) CHECK(thirds[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    Vector two_thirds = nn::softmax(vec({std::log(2.0), 0}));
    CHECK(two_thirds[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(two_thirds[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("softmax sums to one, is order preserving and shift invariant") {
    Rng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(6));
        Vector z(n);
        for (int i = 0; i < n; ++i) z[i] = rng.uniform(-30.0, 30.0);
        Vector p = nn::softmax(z);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
        for (int i = 0; i + 1 < n; ++i)
            if (z[i] < z[i + 1]) CHECK(p[i] <= p[i + 1]);
        const double c = rng.uniform(-50.0, 50.0);
        Vector shifted = nn::softmax((z.array() + c).matrix());
        CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("softmax stability under large magnitudes") {
    Vector p = nn::softmax(vec({1000.0, 999.0}));
    CHECK(std::isfinite(p[0]));
    CHECK(p.sum() == doctest::Approx(1.0));
}

TEST_CASE("cross entropy hand values") {
    CHECK(nn::cross_entropy_loss(vec({1, 0}), vec({1, 0})) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(nn::cross_entropy_loss(vec({1, 0}), vec({0.5, 0.5})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(nn::cross_entropy_loss(vec({0, 1}), vec({0.25, 0.75})) ==
          doctest::Approx(-std::log(0.75)).epsilon(1e-9));
    CHECK_THROWS(nn::cross_entropy_loss(vec({1, 0}), vec({1, 0, 0})));
}

TEST_CASE("cross entropy of softmax is non-negative") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        Vector z(3);
        for (int i = 0; i < 3; ++i) z[i] = rng.uniform(-20.0, 20.0);
        Vector y = Vector::Zero(3);
        y[rng.uniform_index(3)] = 1.0;
        CHECK(nn::cross_entropy_loss(y, nn::softmax(z)) >= 0.0);
    }
}

TEST_CASE("expsum activation hand values") {
    CHECK(nn::expsum_activation(vec({0})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(nn::expsum_activation(vec({0, 0})) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(nn::expsum_activation(vec({-1000})) < 1e-6);
    // no overflow for huge activations
    CHECK(nn::expsum_activation(vec({800, 800})) == doctest::Approx(1.0));
}

TEST_CASE("expsum is strictly monotone in every coordinate") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        Vector z(4);
        for (int i = 0; i < 4; ++i) z[i] = rng.uniform(-5.0, 5.0);
        const double base = nn::expsum_activation(z);
        const int k = static_cast<int>(rng.uniform_index(4));
        Vector raised = z;
        raised[k] += rng.uniform(0.01, 1.0);
        CHECK(nn::expsum_activation(raised) > base);
        CHECK(base > 0.0);
        CHECK(base < 1.0);
    }
}

TEST_CASE("dense forward") {
    Matrix x(1, 2);
    x << 1, 1;
    Matrix w_identity = Matrix::Identity(2, 2);
    Vector b0 = Vector::Zero(2);
    CHECK(nn::dense_forward(x, w_identity, b0, nn::Activation::linear).isApprox(x));

    Matrix neg(1, 2);
    neg << -1, 2;
    Matrix out = nn::activate(neg, nn::Activation::leaky_relu);
    CHECK(out(0, 0) == doctest::Approx(-0.2));
    CHECK(out(0, 1) == doctest::Approx(2.0));

    Matrix w(2, 1);
    w << 1, 1;
    Vector b1 = Vector::Zero(1);
    Matrix sig = nn::dense_forward(x, w, b1, nn::Activation::sigmoid);
    CHECK(sig(0, 0) == doctest::Approx(0.8807970779778823).epsilon(1e-9));

    CHECK_THROWS(nn::dense_forward(x, Matrix::Identity(3, 3), Vector::Zero(3),
                                   nn::Activation::linear));
}

TEST_CASE("adam hand-checked first step and determinism") {
    nn::AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};

    // zero gradient leaves parameters alone
    nn::ParamBlock p0("p", Matrix::Zero(1, 1));
    nn::Adam opt0(cfg);
    opt0.update({&p0});
    CHECK(p0.value(0, 0) == doctest::Approx(0.0));
    CHECK(opt0.step_count() == 1);

    // scalar 0 with gradient 1: bias correction gives a full-size first step
    nn::ParamBlock p1("p", Matrix::Zero(1, 1));
    p1.grad(0, 0) = 1.0;
    nn::Adam opt1(cfg);
    opt1.update({&p1});
    CHECK(p1.value(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));

    // identical state + identical call = identical result
    nn::ParamBlock a("p", Matrix::Constant(2, 2, 0.5)), b("p", Matrix::Constant(2, 2, 0.5));
    a.grad.setConstant(0.3);
    b.grad.setConstant(0.3);
    nn::Adam oa(cfg), ob(cfg);
    oa.update({&a});
    ob.update({&b});
    CHECK(a.value == b.value);

    nn::ParamBlock bad("naughty", Matrix::Zero(1, 1));
    bad.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    nn::Adam opt2(cfg);
    CHECK_THROWS_WITH_AS(opt2.update({&bad}),
                         doctest::Contains("naughty"), std::runtime_error);
}

TEST_CASE("grad check on a quadratic is near exact") {
    nn::ParamBlock p("p", Matrix::Random(3, 3));
    const auto loss = [&]() { return 0.5 * p.value.squaredNorm(); };
    p.grad = p.value;  // exact gradient of the quadratic
    Rng rng(3);
    CHECK(nn::grad_check(loss, {&p}, 25, rng) < 1e-7);
}

TEST_CASE("grad check on dense+sigmoid+cross-entropy") {
    Rng init(11);
    const int batch = 5, in = 4, out = 3;
    Matrix x(batch, in);
    for (int r = 0; r < batch; ++r)
        for (int c = 0; c < in; ++c) x(r, c) = init.uniform(-1.0, 1.0);
    std::vector<int> labels;
    for (int r = 0; r < batch; ++r) labels.push_back(static_cast<int>(init.uniform_index(out)));

    nn::ParamBlock w("w", nn::glorot_uniform(in, out, init));
    nn::ParamBlock b("b", Matrix::Zero(1, out));

    const auto forward_loss = [&]() {
        Matrix pre = x * w.value;
        pre.rowwise() += b.value.row(0);
        Matrix act = nn::sigmoid(pre);
        double loss = 0.0;
        for (int r = 0; r < batch; ++r) {
            Vector p = nn::softmax(act.row(r).transpose());
            Vector y = Vector::Zero(out);
            y[labels[static_cast<std::size_t>(r)]] = 1.0;
            loss += nn::cross_entropy_loss(y, p);
        }
        return loss / batch;
    };

    // analytic gradients
    Matrix pre = x * w.value;
    pre.rowwise() += b.value.row(0);
    Matrix act = nn::sigmoid(pre);
    Matrix dact(batch, out);
    for (int r = 0; r < batch; ++r) {
        Vector p = nn::softmax(act.row(r).transpose());
        p[labels[static_cast<std::size_t>(r)]] -= 1.0;
        dact.row(r) = p.transpose() / batch;
    }
    Matrix dpre = dact.cwiseProduct(nn::activation_grad(pre, act, nn::Activation::sigmoid));
    w.grad = x.transpose() * dpre;
    b.grad = dpre.colwise().sum();

    Rng rng(7);
    CHECK(nn::grad_check(forward_loss, {&w, &b}, 30, rng) < 1e-4);
}

TEST_CASE("grad check on expsum head with binary cross-entropy") {
    Rng init(13);
    const int batch = 6, in = 5, out = 2;
    Matrix x(batch, in);
    for (int r = 0; r < batch; ++r)
        for (int c = 0; c < in; ++c) x(r, c) = init.uniform(-1.0, 1.0);
    std::vector<double> targets;
    for (int r = 0; r < batch; ++r) targets.push_back(init.bernoulli(0.5) ? 1.0 : 0.0);

    nn::ParamBlock w("w", nn::glorot_uniform(in, out, init));

    const auto forward_loss = [&]() {
        Matrix z = x * w.value;
        double loss = 0.0;
        for (int r = 0; r < batch; ++r) {
            const double p = nn::expsum_activation(z.row(r).transpose());
            const double t = targets[static_cast<std::size_t>(r)];
            loss += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        }
        return loss / batch;
    };

    Matrix z = x * w.value;
    Matrix dz(batch, out);
    for (int r = 0; r < batch; ++r) {
        const Vector row = z.row(r).transpose();
        const double p = nn::expsum_activation(row);
        dz.row(r) = ((p - targets[static_cast<std::size_t>(r)]) / batch) *
                    nn::softmax(row).transpose();
    }
    w.grad = x.transpose() * dz;

    Rng rng(23);
    CHECK(nn::grad_check(forward_loss, {&w}, 30, rng) < 1e-4);
}

TEST_CASE("parameter serialization round trip validates names and shapes") {
    Rng rng(1);
    std::vector<nn::ParamBlock> blocks;
    blocks.emplace_back("layer.weight", nn::glorot_uniform(3, 4, rng));
    blocks.emplace_back("layer.bias", Matrix::Zero(1, 4));
    blocks[1].value(0, 2) = 0.25;

    auto j = nn::params_to_json(blocks);
    std::vector<nn::ParamBlock> restored;
    restored.emplace_back("layer.weight", Matrix::Zero(3, 4));
    restored.emplace_back("layer.bias", Matrix::Zero(1, 4));
    nn::params_from_json(j, restored);
    CHECK(restored[0].value == blocks[0].value);
    CHECK(restored[1].value == blocks[1].value);

    std::vector<nn::ParamBlock> wrong_name;
    wrong_name.emplace_back("other.weight", Matrix::Zero(3, 4));
    wrong_name.emplace_back("layer.bias", Matrix::Zero(1, 4));
    CHECK_THROWS(nn::params_from_json(j, wrong_name));

    std::vector<nn::ParamBlock> wrong_shape;
    wrong_shape.emplace_back("layer.weight", Matrix::Zero(4, 3));
    wrong_shape.emplace_back("layer.bias", Matrix::Zero(1, 4));
    CHECK_THROWS(nn::params_from_json(j, wrong_shape));
}
