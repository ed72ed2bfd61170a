#include "botracle/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace botracle::nn {

Matrix activate(const Matrix& pre, Activation act) {
    switch (act) {
        case Activation::sigmoid: return sigmoid(pre);
        case Activation::relu: return relu(pre);
        case Activation::leaky_relu: return leaky_relu(pre);
        case Activation::tanh: return pre.array().tanh();
        case Activation::linear: return pre;
    }
    return pre;
}

Matrix activation_grad(const Matrix& pre, const Matrix& post, Activation act) {
    switch (act) {
        case Activation::sigmoid: return (post.array() * (1.0 - post.array())).matrix();
        case Activation::relu:
            return (pre.array() > 0).select(Matrix::Ones(pre.rows(), pre.cols()),
                                            Matrix::Zero(pre.rows(), pre.cols()));
        case Activation::leaky_relu:
            return (pre.array() > 0)
                .select(Matrix::Ones(pre.rows(), pre.cols()),
                        Matrix::Constant(pre.rows(), pre.cols(), kLeakySlope));
        case Activation::tanh: return (1.0 - post.array().square()).matrix();
        case Activation::linear: return Matrix::Ones(pre.rows(), pre.cols());
    }
    return Matrix::Ones(pre.rows(), pre.cols());
}

double logsumexp(const Vector& z) {
    if (z.size() == 0) throw std::invalid_argument("logsumexp of empty vector");
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
}

Vector softmax(const Vector& z) {
    const double m = z.maxCoeff();
    Vector e = (z.array() - m).exp();
    return e / e.sum();
}

Matrix softmax_rows(const Matrix& z) {
    Matrix out(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) out.row(r) = softmax(z.row(r).transpose()).transpose();
    return out;
}

double cross_entropy_loss(const Vector& y_true, const Vector& p) {
    if (y_true.size() != p.size())
        throw std::invalid_argument("cross entropy dimension mismatch");
    double loss = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (y_true[k] == 0.0) continue;
        loss -= y_true[k] * std::log(std::clamp(p[k], kProbClip, 1.0));
    }
    return loss;
}

double expsum_activation(const Vector& z) {
    // F/(F+1) = sigmoid(log F); log F = logsumexp(z).
    const double lse = logsumexp(z);
    return 1.0 / (1.0 + std::exp(-lse));
}

Matrix dense_forward(const Matrix& x, const Matrix& weights, const Vector& bias, Activation act) {
    if (x.cols() != weights.rows())
        throw std::invalid_argument("dense_forward: input width " + std::to_string(x.cols()) +
                                    " does not match weight rows " + std::to_string(weights.rows()));
    if (weights.cols() != bias.size())
        throw std::invalid_argument("dense_forward: bias size mismatch");
    Matrix pre = x * weights;
    pre.rowwise() += bias.transpose();
    return activate(pre, act);
}

Adam::Adam(AdamConfig cfg) : cfg_(cfg) {
    if (cfg_.alpha <= 0) throw std::invalid_argument("adam alpha must be > 0");
    if (cfg_.beta1 < 0 || cfg_.beta1 >= 1 || cfg_.beta2 < 0 || cfg_.beta2 >= 1)
        throw std::invalid_argument("adam betas must lie in [0, 1)");
}

void Adam::reset() {
    step_ = 0;
    m_.clear();
    v_.clear();
}

void Adam::update(std::vector<ParamBlock*> blocks) {
    if (m_.empty()) {
        for (const auto* b : blocks) {
            m_.emplace_back(Matrix::Zero(b->value.rows(), b->value.cols()));
            v_.emplace_back(Matrix::Zero(b->value.rows(), b->value.cols()));
        }
    }
    if (m_.size() != blocks.size())
        throw std::invalid_argument("adam called with a different block set");
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        ParamBlock& b = *blocks[i];
        if (!b.grad.allFinite())
            throw std::runtime_error("non-finite gradient in parameter block '" + b.name + "'");
        if (b.grad.rows() != b.value.rows() || b.grad.cols() != b.value.cols())
            throw std::invalid_argument("gradient shape mismatch in block '" + b.name + "'");
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * b.grad;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * b.grad.cwiseProduct(b.grad);
        const Matrix m_hat = m_[i] / bc1;
        const Matrix v_hat = v_[i] / bc2;
        b.value.array() -= cfg_.alpha * m_hat.array() / (v_hat.array().sqrt() + cfg_.eps);
    }
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.uniform(-limit, limit);
    return out;
}

double grad_check(const std::function<double()>& loss, std::vector<ParamBlock*> blocks,
                  int probe_count, Rng& rng, double step) {
    std::size_t total = 0;
    for (const auto* b : blocks) total += static_cast<std::size_t>(b->value.size());
    if (total == 0) return 0.0;

    double worst = 0.0;
    for (int probe = 0; probe < probe_count; ++probe) {
        // Coordinates with near-zero analytic gradient are numerically
        // untestable (cancellation noise in the differences swamps them);
        // resample a few times before accepting one.
        std::size_t flat = 0;
        ParamBlock* target = nullptr;
        for (int attempt = 0; attempt < 16; ++attempt) {
            flat = static_cast<std::size_t>(rng.uniform_index(total));
            target = nullptr;
            for (auto* b : blocks) {
                const auto n = static_cast<std::size_t>(b->value.size());
                if (flat < n) {
                    target = b;
                    break;
                }
                flat -= n;
            }
            if (std::abs(target->grad.data()[flat]) >= 1e-7) break;
        }
        double& coord = target->value.data()[flat];
        const double analytic = target->grad.data()[flat];
        const double saved = coord;
        coord = saved + step;
        const double up = loss();
        coord = saved - step;
        const double down = loss();
        coord = saved;
        const double fd = (up - down) / (2.0 * step);
        const double rel =
            std::abs(analytic - fd) / std::max(1e-8, std::abs(analytic) + std::abs(fd));
        worst = std::max(worst, rel);
    }
    return worst;
}

nlohmann::ordered_json params_to_json(const std::vector<ParamBlock>& blocks) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& b : blocks) {
        nlohmann::ordered_json jb;
        jb["name"] = b.name;
        jb["rows"] = b.value.rows();
        jb["cols"] = b.value.cols();
        auto data = nlohmann::ordered_json::array();
        for (Eigen::Index r = 0; r < b.value.rows(); ++r)
            for (Eigen::Index c = 0; c < b.value.cols(); ++c) data.push_back(b.value(r, c));
        jb["data"] = std::move(data);
        out.push_back(std::move(jb));
    }
    return out;
}

void params_from_json(const nlohmann::json& j, std::vector<ParamBlock>& blocks) {
    if (!j.is_array() || j.size() != blocks.size())
        throw std::runtime_error("parameter document does not match model block count");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& jb = j[i];
        if (jb.at("name").get<std::string>() != blocks[i].name)
            throw std::runtime_error("parameter block name mismatch: expected '" + blocks[i].name +
                                     "', found '" + jb.at("name").get<std::string>() + "'");
        const auto rows = jb.at("rows").get<Eigen::Index>();
        const auto cols = jb.at("cols").get<Eigen::Index>();
        if (rows != blocks[i].value.rows() || cols != blocks[i].value.cols())
            throw std::runtime_error("parameter block shape mismatch in '" + blocks[i].name + "'");
        const auto& data = jb.at("data");
        if (static_cast<Eigen::Index>(data.size()) != rows * cols)
            throw std::runtime_error("parameter data length mismatch in '" + blocks[i].name + "'");
        std::size_t idx = 0;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) blocks[i].value(r, c) = data[idx++].get<double>();
        blocks[i].zero_grad();
    }
}

}  // namespace botracle::nn
