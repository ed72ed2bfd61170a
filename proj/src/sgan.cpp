#include "botracle/sgan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace botracle {

using nn::Matrix;
using nn::Vector;

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double clamp_prob(double p) { return std::clamp(p, nn::kProbClip, 1.0 - nn::kProbClip); }

Matrix colsum(const Matrix& m) { return m.colwise().sum(); }

}  // namespace

void SganConfig::validate() const {
    if (latent_dim != 100 || generator_hidden_units != 200 || trunk_units != 100 ||
        n_classes != 2)
        throw std::invalid_argument("sgan architecture constants are fixed");
    if (dropout_p < 0 || dropout_p >= 1) throw std::invalid_argument("dropout_p out of range");
    if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
}

struct SganModel::TrunkCache {
    Matrix x;
    Matrix h1, h2, h3;  // sigmoid outputs (inputs to the leaky layers)
    Matrix l1, l2, l3;  // leaky outputs
    Matrix mask;        // inverted-dropout mask, empty at inference
    Matrix dropped;     // trunk output fed to the logit layer
};

SganModel SganModel::build(const SganConfig& config, int feature_width, std::uint64_t seed) {
    config.validate();
    if (feature_width < 1) throw std::invalid_argument("feature_width must be >= 1");

    SganModel m;
    m.config_ = config;
    m.config_.seed = seed;
    m.feature_width_ = feature_width;

    Rng init(seed);
    const int H = config.generator_hidden_units;
    const int T = config.trunk_units;
    const int F = feature_width;
    const int C = config.n_classes;
    auto w = [&](const char* name, int r, int c) {
        m.params_.emplace_back(name, nn::glorot_uniform(r, c, init));
    };
    auto b = [&](const char* name, int c) { m.params_.emplace_back(name, Matrix::Zero(1, c)); };

    w("generator.dense1.weight", config.latent_dim, H);
    b("generator.dense1.bias", H);
    w("generator.output.weight", H, F);
    b("generator.output.bias", F);
    w("trunk.dense1.weight", F, T);
    b("trunk.dense1.bias", T);
    w("trunk.dense2.weight", T, T);
    b("trunk.dense2.bias", T);
    w("trunk.dense3.weight", T, T);
    b("trunk.dense3.bias", T);
    w("logits.weight", T, C);
    b("logits.bias", C);

    const nn::AdamConfig adam{config.adam_alpha, config.adam_beta1, 0.999, 1e-8};
    m.adam_classifier_ = nn::Adam(adam);
    m.adam_discriminator_ = nn::Adam(adam);
    m.adam_generator_ = nn::Adam(adam);
    m.rng_ = Rng(seed).split(99);
    return m;
}

Matrix SganModel::trunk_logits(const Matrix& x, bool training, Rng& rng, TrunkCache* cache) const {
    if (x.cols() != feature_width_)
        throw std::invalid_argument("input width " + std::to_string(x.cols()) +
                                    " does not match model feature width " +
                                    std::to_string(feature_width_));
    auto layer = [&](const Matrix& in, Block wi, Block bi) {
        Matrix pre = in * params_[wi].value;
        pre.rowwise() += params_[bi].value.row(0);
        return nn::sigmoid(pre);
    };
    Matrix h1 = layer(x, DW1, DB1);
    Matrix l1 = nn::leaky_relu(h1);
    Matrix h2 = layer(l1, DW2, DB2);
    Matrix l2 = nn::leaky_relu(h2);
    Matrix h3 = layer(l2, DW3, DB3);
    Matrix l3 = nn::leaky_relu(h3);

    Matrix dropped;
    Matrix mask;
    if (training && config_.dropout_p > 0) {
        const double keep = 1.0 - config_.dropout_p;
        mask.resize(l3.rows(), l3.cols());
        for (Eigen::Index r = 0; r < mask.rows(); ++r)
            for (Eigen::Index c = 0; c < mask.cols(); ++c)
                mask(r, c) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
        dropped = l3.cwiseProduct(mask);
    } else {
        dropped = l3;
    }

    Matrix logits = dropped * params_[DW4].value;
    logits.rowwise() += params_[DB4].value.row(0);

    if (cache) {
        cache->x = x;
        cache->h1 = std::move(h1);
        cache->h2 = std::move(h2);
        cache->h3 = std::move(h3);
        cache->l1 = std::move(l1);
        cache->l2 = std::move(l2);
        cache->l3 = std::move(l3);
        cache->mask = std::move(mask);
        cache->dropped = std::move(dropped);
    }
    return logits;
}

Matrix SganModel::logits(const Matrix& x) const {
    Rng dummy(0);
    return trunk_logits(x, false, dummy, nullptr);
}

void SganModel::trunk_backward(const TrunkCache& cache, const Matrix& dlogits, Matrix* dx) {
    params_[DW4].grad += cache.dropped.transpose() * dlogits;
    params_[DB4].grad += colsum(dlogits);
    Matrix dd = dlogits * params_[DW4].value.transpose();
    if (cache.mask.size() > 0) dd = dd.cwiseProduct(cache.mask);

    auto through = [&](const Matrix& leaky_in, const Matrix& dense_in, Block wi, Block bi,
                       Matrix dl) {
        // leaky layer consumed the sigmoid output directly
        Matrix dh = dl.cwiseProduct(nn::activation_grad(leaky_in, Matrix{}, nn::Activation::leaky_relu));
        Matrix dpre = dh.cwiseProduct((leaky_in.array() * (1.0 - leaky_in.array())).matrix());
        params_[wi].grad += dense_in.transpose() * dpre;
        params_[bi].grad += colsum(dpre);
        return (dpre * params_[wi].value.transpose()).eval();
    };

    Matrix dl2 = through(cache.h3, cache.l2, DW3, DB3, std::move(dd));
    Matrix dl1 = through(cache.h2, cache.l1, DW2, DB2, std::move(dl2));
    Matrix dx_local = through(cache.h1, cache.x, DW1, DB1, std::move(dl1));
    if (dx) *dx = std::move(dx_local);
}

Matrix SganModel::generator_forward(const Matrix& z, Matrix* a1_out, Matrix* pre_out) const {
    Matrix pre1 = z * params_[GW1].value;
    pre1.rowwise() += params_[GB1].value.row(0);
    Matrix a1 = nn::sigmoid(pre1);
    Matrix pre2 = a1 * params_[GW2].value;
    pre2.rowwise() += params_[GB2].value.row(0);
    Matrix out = nn::relu(pre2);
    if (a1_out) *a1_out = std::move(a1);
    if (pre_out) *pre_out = std::move(pre2);
    return out;
}

nn::Matrix SganModel::sample_fakes(int n, Rng& rng) const {
    Matrix z(n, config_.latent_dim);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = rng.normal();
    return generator_forward(z, nullptr, nullptr);
}

double SganModel::classifier_loss(const Matrix& x, const std::vector<int>& class_ids) const {
    if (static_cast<Eigen::Index>(class_ids.size()) != x.rows())
        throw std::invalid_argument("label count does not match batch rows");
    Rng dummy(0);
    Matrix logits = trunk_logits(x, false, dummy, nullptr);
    double loss = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const Vector row = logits.row(r).transpose();
        loss += nn::logsumexp(row) - row[class_ids[static_cast<std::size_t>(r)]];
    }
    return loss / static_cast<double>(x.rows());
}

double SganModel::classifier_backward(const Matrix& x, const std::vector<int>& class_ids,
                                      bool training) {
    if (static_cast<Eigen::Index>(class_ids.size()) != x.rows())
        throw std::invalid_argument("label count does not match batch rows");
    TrunkCache cache;
    Matrix logits = trunk_logits(x, training, rng_, &cache);

    const double batch = static_cast<double>(x.rows());
    Matrix dlogits(logits.rows(), logits.cols());
    double loss = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const Vector row = logits.row(r).transpose();
        loss += nn::logsumexp(row) - row[class_ids[static_cast<std::size_t>(r)]];
        Vector p = nn::softmax(row);
        p[class_ids[static_cast<std::size_t>(r)]] -= 1.0;
        dlogits.row(r) = p.transpose() / batch;
    }
    trunk_backward(cache, dlogits, nullptr);
    return loss / batch;
}

double SganModel::supervised_step(const Matrix& x, const std::vector<int>& class_ids) {
    for (int i = DW1; i <= DB4; ++i) params_[i].zero_grad();
    const double loss = classifier_backward(x, class_ids, true);
    std::vector<nn::ParamBlock*> dblocks;
    for (int i = DW1; i <= DB4; ++i) dblocks.push_back(&params_[i]);
    adam_classifier_.update(dblocks);
    return loss;
}

double SganModel::discriminator_loss(const Matrix& real, const Matrix& fake) const {
    Rng dummy(0);
    Matrix real_logits = trunk_logits(real, false, dummy, nullptr);
    Matrix fake_logits = trunk_logits(fake, false, dummy, nullptr);
    double loss = 0.0;
    for (Eigen::Index r = 0; r < real_logits.rows(); ++r)
        loss += softplus(-nn::logsumexp(real_logits.row(r).transpose()));
    for (Eigen::Index r = 0; r < fake_logits.rows(); ++r)
        loss += softplus(nn::logsumexp(fake_logits.row(r).transpose()));
    return loss / static_cast<double>(real.rows() + fake.rows());
}

double SganModel::discriminator_backward(const Matrix& real, const Matrix& fake, bool training) {
    TrunkCache real_cache, fake_cache;
    Matrix real_logits = trunk_logits(real, training, rng_, &real_cache);
    Matrix fake_logits = trunk_logits(fake, training, rng_, &fake_cache);

    const double total = static_cast<double>(real.rows() + fake.rows());
    double loss = 0.0;
    auto head_grad = [&](const Matrix& logits, double target, Matrix& dlogits) {
        dlogits.resize(logits.rows(), logits.cols());
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            const Vector row = logits.row(r).transpose();
            const double s = nn::logsumexp(row);
            loss += softplus(s) - target * s;
            const double p = 1.0 / (1.0 + std::exp(-s));
            dlogits.row(r) = ((p - target) / total) * nn::softmax(row).transpose();
        }
    };
    Matrix dreal, dfake;
    head_grad(real_logits, 1.0, dreal);
    head_grad(fake_logits, 0.0, dfake);
    trunk_backward(real_cache, dreal, nullptr);
    trunk_backward(fake_cache, dfake, nullptr);
    return loss / total;
}

double SganModel::discriminator_step(const Matrix& real, const Matrix& fake) {
    for (int i = DW1; i <= DB4; ++i) params_[i].zero_grad();
    const double loss = discriminator_backward(real, fake, true);
    std::vector<nn::ParamBlock*> dblocks;
    for (int i = DW1; i <= DB4; ++i) dblocks.push_back(&params_[i]);
    adam_discriminator_.update(dblocks);
    return loss;
}

double SganModel::generator_loss(const Matrix& z) const {
    Rng dummy(0);
    Matrix fake = generator_forward(z, nullptr, nullptr);
    Matrix logits = trunk_logits(fake, false, dummy, nullptr);
    double loss = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r)
        loss += softplus(-nn::logsumexp(logits.row(r).transpose()));
    return loss / static_cast<double>(z.rows());
}

double SganModel::generator_backward(const Matrix& z, bool training) {
    Matrix a1, out_pre;
    Matrix fake = generator_forward(z, &a1, &out_pre);

    TrunkCache cache;
    Matrix logits = trunk_logits(fake, training, rng_, &cache);

    const double b = static_cast<double>(z.rows());
    double loss = 0.0;
    Matrix dlogits(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const Vector row = logits.row(r).transpose();
        const double s = nn::logsumexp(row);
        loss += softplus(-s);  // target: fool the real/fake head
        const double p = 1.0 / (1.0 + std::exp(-s));
        dlogits.row(r) = ((p - 1.0) / b) * nn::softmax(row).transpose();
    }

    // Gradients flow through the frozen discriminator into the generator;
    // the trunk grads this fills are discarded by the optimizer step.
    Matrix dfake;
    trunk_backward(cache, dlogits, &dfake);

    Matrix dpre2 = dfake.cwiseProduct(nn::activation_grad(out_pre, Matrix{}, nn::Activation::relu));
    params_[GW2].grad += a1.transpose() * dpre2;
    params_[GB2].grad += colsum(dpre2);
    Matrix da1 = dpre2 * params_[GW2].value.transpose();
    Matrix dpre1 = da1.cwiseProduct((a1.array() * (1.0 - a1.array())).matrix());
    params_[GW1].grad += z.transpose() * dpre1;
    params_[GB1].grad += colsum(dpre1);
    return loss / b;
}

double SganModel::generator_step(int batch) {
    Matrix z(batch, config_.latent_dim);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = rng_.normal();

    for (auto& block : params_) block.zero_grad();
    const double loss = generator_backward(z, true);
    std::vector<nn::ParamBlock*> gblocks = {&params_[GW1], &params_[GB1], &params_[GW2],
                                            &params_[GB2]};
    adam_generator_.update(gblocks);
    return loss;
}

namespace {

// Cycles through a shuffled index pool, reshuffling on wrap.
struct IndexPool {
    std::vector<std::size_t> indices;
    std::size_t cursor = 0;

    std::size_t next(Rng& rng) {
        if (cursor >= indices.size()) {
            rng.shuffle(indices);
            cursor = 0;
        }
        return indices[cursor++];
    }
};

IndexPool make_pool(std::size_t n) {
    IndexPool pool;
    pool.indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) pool.indices[i] = i;
    pool.cursor = n;  // force an initial shuffle
    return pool;
}

}  // namespace

void SganModel::train(const std::vector<FeatureVector>& labeled,
                      const std::vector<FeatureVector>& unlabeled) {
    if (labeled.empty()) throw std::invalid_argument("no labeled data");

    std::vector<std::size_t> humans, bots;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        if (labeled[i].label == Label::human) humans.push_back(i);
        else if (labeled[i].label == Label::bot) bots.push_back(i);
        else throw std::invalid_argument("labeled data contains unknown labels");
    }
    if (humans.empty() || bots.empty())
        throw std::invalid_argument("labeled data must contain both classes");

    auto to_row = [&](const FeatureVector& v) {
        if (static_cast<int>(v.values.size()) != feature_width_)
            throw std::invalid_argument("feature vector width mismatch");
        return Eigen::Map<const Eigen::RowVectorXd>(v.values.data(),
                                                    static_cast<Eigen::Index>(v.values.size()));
    };

    Matrix x_labeled(labeled.size(), feature_width_);
    for (std::size_t i = 0; i < labeled.size(); ++i) x_labeled.row(static_cast<Eigen::Index>(i)) = to_row(labeled[i]);

    const std::size_t n_real = labeled.size() + unlabeled.size();
    Matrix x_real(n_real, feature_width_);
    for (std::size_t i = 0; i < labeled.size(); ++i) x_real.row(static_cast<Eigen::Index>(i)) = to_row(labeled[i]);
    for (std::size_t i = 0; i < unlabeled.size(); ++i)
        x_real.row(static_cast<Eigen::Index>(labeled.size() + i)) = to_row(unlabeled[i]);

    IndexPool human_pool = make_pool(humans.size());
    IndexPool bot_pool = make_pool(bots.size());
    IndexPool real_pool = make_pool(n_real);

    const int B = config_.batch_size;
    const std::size_t steps =
        std::max<std::size_t>(1, (std::max(labeled.size(), n_real) + B - 1) / B);

    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        double c_sum = 0, d_sum = 0, g_sum = 0;
        for (std::size_t step = 0; step < steps; ++step) {
            // (a) supervised classifier update, class-balanced batch
            Matrix xb(B, feature_width_);
            std::vector<int> yb(static_cast<std::size_t>(B));
            for (int i = 0; i < B; ++i) {
                const bool pick_bot = i >= B / 2;
                const std::size_t src = pick_bot ? bots[bot_pool.next(rng_)]
                                                 : humans[human_pool.next(rng_)];
                xb.row(i) = x_labeled.row(static_cast<Eigen::Index>(src));
                yb[static_cast<std::size_t>(i)] = pick_bot ? 1 : 0;
            }
            c_sum += supervised_step(xb, yb);

            // (b) discriminator update on real vs generated
            Matrix xr(B, feature_width_);
            for (int i = 0; i < B; ++i)
                xr.row(i) = x_real.row(static_cast<Eigen::Index>(real_pool.next(rng_)));
            Matrix xf = sample_fakes(B, rng_);
            d_sum += discriminator_step(xr, xf);

            // (c) generator update through the frozen discriminator
            g_sum += generator_step(B);
        }
        const double denom = static_cast<double>(steps);
        const double lc = c_sum / denom, ld = d_sum / denom, lg = g_sum / denom;
        if (!std::isfinite(lc) || !std::isfinite(ld) || !std::isfinite(lg))
            throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch + 1));
        history_.classifier_loss.push_back(lc);
        history_.discriminator_loss.push_back(ld);
        history_.generator_loss.push_back(lg);
    }
}

std::pair<double, double> SganModel::classify_values(const Vector& values) const {
    Rng dummy(0);
    Matrix x = values.transpose();
    Matrix l = trunk_logits(x, false, dummy, nullptr);
    Vector p = nn::softmax(l.row(0).transpose());
    return {clamp_prob(p[1]), clamp_prob(p[0])};
}

std::pair<double, double> SganModel::classify(const FeatureVector& v) const {
    if (static_cast<int>(v.values.size()) != feature_width_)
        throw std::invalid_argument("feature vector width " + std::to_string(v.values.size()) +
                                    " does not match model width " +
                                    std::to_string(feature_width_));
    return classify_values(
        Eigen::Map<const Vector>(v.values.data(), static_cast<Eigen::Index>(v.values.size())));
}

double SganModel::discriminate_values(const Vector& values) const {
    Rng dummy(0);
    Matrix x = values.transpose();
    Matrix l = trunk_logits(x, false, dummy, nullptr);
    return clamp_prob(nn::expsum_activation(l.row(0).transpose()));
}

double SganModel::discriminate(const FeatureVector& v) const {
    if (static_cast<int>(v.values.size()) != feature_width_)
        throw std::invalid_argument("feature vector width mismatch");
    return discriminate_values(
        Eigen::Map<const Vector>(v.values.data(), static_cast<Eigen::Index>(v.values.size())));
}

void SganModel::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["format"] = "botracle-model";
    j["version"] = 1;
    j["kind"] = "sgan";
    j["config"] = {{"latent_dim", config_.latent_dim},
                   {"generator_hidden_units", config_.generator_hidden_units},
                   {"trunk_units", config_.trunk_units},
                   {"n_classes", config_.n_classes},
                   {"dropout_p", config_.dropout_p},
                   {"adam_alpha", config_.adam_alpha},
                   {"adam_beta1", config_.adam_beta1},
                   {"batch_size", config_.batch_size},
                   {"epochs", config_.epochs},
                   {"seed", config_.seed}};
    j["feature_width"] = feature_width_;
    j["params"] = nn::params_to_json(params_);
    j["history"] = {{"classifier_loss", history_.classifier_loss},
                    {"discriminator_loss", history_.discriminator_loss},
                    {"generator_loss", history_.generator_loss}};
    if (encoder_) j["encoder"] = encoder_->to_json();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump(2) << '\n';
}

SganModel SganModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("cannot parse model file " + path + ": " + e.what());
    }
    if (j.value("format", std::string{}) != "botracle-model" ||
        j.value("kind", std::string{}) != "sgan")
        throw std::runtime_error("not an sgan model file: " + path);

    SganConfig cfg;
    const auto& jc = j.at("config");
    cfg.latent_dim = jc.value("latent_dim", 100);
    cfg.generator_hidden_units = jc.value("generator_hidden_units", 200);
    cfg.trunk_units = jc.value("trunk_units", 100);
    cfg.n_classes = jc.value("n_classes", 2);
    cfg.dropout_p = jc.value("dropout_p", 0.4);
    cfg.adam_alpha = jc.value("adam_alpha", 0.0002);
    cfg.adam_beta1 = jc.value("adam_beta1", 0.5);
    cfg.batch_size = jc.value("batch_size", 64);
    cfg.epochs = jc.value("epochs", 50);
    cfg.seed = jc.value("seed", std::uint64_t{1});

    SganModel m = build(cfg, j.at("feature_width").get<int>(), cfg.seed);
    nn::params_from_json(j.at("params"), m.params_);
    if (j.contains("history")) {
        m.history_.classifier_loss = j["history"].value("classifier_loss", std::vector<double>{});
        m.history_.discriminator_loss =
            j["history"].value("discriminator_loss", std::vector<double>{});
        m.history_.generator_loss = j["history"].value("generator_loss", std::vector<double>{});
    }
    if (j.contains("encoder")) m.encoder_ = FeatureEncoder::from_json(j["encoder"]);
    return m;
}

}  // namespace botracle
