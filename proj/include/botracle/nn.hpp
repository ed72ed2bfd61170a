#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "botracle/rng.hpp"

namespace botracle::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { sigmoid, relu, leaky_relu, tanh, linear };

constexpr double kLeakySlope = 0.2;
constexpr double kProbClip = 1e-12;

/// Elementwise activations over any dense expression.
template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix().eval();
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
    return x.array().max(typename Derived::Scalar(0)).matrix().eval();
}

template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived>& x) {
    return (x.array() > 0).select(x, kLeakySlope * x).eval();
}

Matrix activate(const Matrix& pre, Activation act);

/// Elementwise d(act)/d(pre), given both the pre-activation and the output.
Matrix activation_grad(const Matrix& pre, const Matrix& post, Activation act);

double logsumexp(const Vector& z);

/// Normalized probabilities, max-shifted for stability. Sums to 1.
Vector softmax(const Vector& z);

/// Row-wise softmax for batched logits.
Matrix softmax_rows(const Matrix& z);

/// L(Y, p) = -sum_k Y_k log p_k with p clipped to [1e-12, 1].
double cross_entropy_loss(const Vector& y_true, const Vector& p);

/// E(Z) = F/(F+1) with F = sum_k e^{z_k}, evaluated as sigmoid(logsumexp(Z))
/// so large activations cannot overflow. Output strictly inside (0,1).
double expsum_activation(const Vector& z);

/// y = act(x W + b); x is batch x in, W is in x out, b has out entries.
Matrix dense_forward(const Matrix& x, const Matrix& weights, const Vector& bias, Activation act);

/// A named trainable tensor with its gradient accumulator.
struct ParamBlock {
    std::string name;
    Matrix value;
    Matrix grad;

    ParamBlock() = default;
    ParamBlock(std::string n, Matrix v)
        : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

    void zero_grad() { grad.setZero(); }
};

struct AdamConfig {
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed set of parameter blocks.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {});

    /// Applies one step using each block's .grad; throws on non-finite
    /// gradients, naming the offending block. Does not clear gradients.
    void update(std::vector<ParamBlock*> blocks);

    long step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    void reset();

private:
    AdamConfig cfg_;
    long step_ = 0;
    std::vector<Matrix> m_, v_;
};

/// Uniform fan-in/fan-out scaled initialization.
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Compares the gradients stored in the blocks against central finite
/// differences of `loss` at probe_count random coordinates. Returns the
/// maximum relative error |g - g_fd| / max(1e-8, |g| + |g_fd|).
double grad_check(const std::function<double()>& loss, std::vector<ParamBlock*> blocks,
                  int probe_count, Rng& rng, double step = 1e-5);

/// Versioned JSON of named blocks (shape + row-major flat data).
nlohmann::ordered_json params_to_json(const std::vector<ParamBlock>& blocks);

/// Loads into existing blocks, validating names and shapes.
void params_from_json(const nlohmann::json& j, std::vector<ParamBlock>& blocks);

}  // namespace botracle::nn
