#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "botracle/encoding.hpp"
#include "botracle/nn.hpp"

namespace botracle {

/// Architecture and training knobs. The layer widths, activations, dropout
/// and optimizer parameters are fixed by design; batch size, epochs and seed
/// are free.
struct SganConfig {
    int latent_dim = 100;
    int generator_hidden_units = 200;
    int trunk_units = 100;     // three sigmoid dense layers, each leaky-ReLU'd
    int n_classes = 2;         // human, bot
    double dropout_p = 0.4;
    double adam_alpha = 0.0002;
    double adam_beta1 = 0.5;
    int batch_size = 64;
    int epochs = 50;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SganHistory {
    std::vector<double> classifier_loss;     // L_C per epoch
    std::vector<double> discriminator_loss;  // L_D per epoch
    std::vector<double> generator_loss;      // per epoch
};

/// Semi-supervised GAN: a generator plus a shared discriminator trunk whose
/// single logit layer feeds two heads - softmax over classes and an
/// exp-sum real/fake probability. Classifier and discriminator losses both
/// train the shared weights; the generator trains against the frozen
/// discriminator path.
class SganModel {
public:
    /// Deterministic (seeded) initialization for the given input width.
    static SganModel build(const SganConfig& config, int feature_width, std::uint64_t seed);

    /// Runs the three-update loop (classifier / discriminator / generator)
    /// for config.epochs epochs. labeled must contain both classes; unlabeled
    /// joins the discriminator's real batches only.
    void train(const std::vector<FeatureVector>& labeled,
               const std::vector<FeatureVector>& unlabeled);

    /// Softmax class head; dropout disabled. Returns (p_bot, p_human),
    /// both clipped inside (0, 1) and summing to 1.
    std::pair<double, double> classify(const FeatureVector& v) const;
    std::pair<double, double> classify_values(const nn::Vector& values) const;

    /// Exp-sum real/fake head over the shared logits; in (0, 1).
    double discriminate(const FeatureVector& v) const;
    double discriminate_values(const nn::Vector& values) const;

    /// Generator samples (rows), for inspection and tests.
    nn::Matrix sample_fakes(int n, Rng& rng) const;

    // Single optimization steps, exposed for the training loop and tests.
    double supervised_step(const nn::Matrix& x, const std::vector<int>& class_ids);
    double discriminator_step(const nn::Matrix& real, const nn::Matrix& fake);
    double generator_step(int batch);

    // Loss evaluation and gradient accumulation without optimizer updates
    // (dropout off), for finite-difference checks. Callers zero grads first.
    double classifier_loss(const nn::Matrix& x, const std::vector<int>& class_ids) const;
    double classifier_backward(const nn::Matrix& x, const std::vector<int>& class_ids,
                               bool training);
    double discriminator_loss(const nn::Matrix& real, const nn::Matrix& fake) const;
    double discriminator_backward(const nn::Matrix& real, const nn::Matrix& fake, bool training);
    double generator_loss(const nn::Matrix& z) const;
    double generator_backward(const nn::Matrix& z, bool training);

    int feature_width() const { return feature_width_; }
    const SganConfig& config() const { return config_; }
    const SganHistory& history() const { return history_; }
    const std::vector<nn::ParamBlock>& parameters() const { return params_; }
    std::vector<nn::ParamBlock>& parameters() { return params_; }

    const std::optional<FeatureEncoder>& encoder() const { return encoder_; }
    void bind_encoder(FeatureEncoder enc) { encoder_ = std::move(enc); }

    void save(const std::string& path) const;
    static SganModel load(const std::string& path);

    /// Trunk + logits forward with dropout off; used by the heads and the
    /// gradient-check tests.
    nn::Matrix logits(const nn::Matrix& x) const;

private:
    SganModel() = default;

    struct TrunkCache;
    nn::Matrix trunk_logits(const nn::Matrix& x, bool training, Rng& rng, TrunkCache* cache) const;
    void trunk_backward(const TrunkCache& cache, const nn::Matrix& dlogits, nn::Matrix* dx);
    nn::Matrix generator_forward(const nn::Matrix& z, nn::Matrix* a1, nn::Matrix* out_pre) const;

    SganConfig config_;
    int feature_width_ = 0;
    std::vector<nn::ParamBlock> params_;  // generator then discriminator blocks
    nn::Adam adam_classifier_, adam_discriminator_, adam_generator_;
    Rng rng_{0};
    SganHistory history_;
    std::optional<FeatureEncoder> encoder_;

    // indices into params_
    enum Block { GW1, GB1, GW2, GB2, DW1, DB1, DW2, DB2, DW3, DB3, DW4, DB4, kBlockCount };
};

}  // namespace botracle
