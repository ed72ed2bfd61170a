#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "botracle/nn.hpp"
#include "botracle/wtgraph.hpp"

namespace botracle {

/// Graph ready for convolution: node features, row-normalized propagation
/// matrix over the symmetrized adjacency with self-loops, and node keys for
/// deterministic sort-pooling tie breaks.
struct GraphTensor {
    nn::Matrix x;     // n x f node features
    nn::Matrix prop;  // n x n, rows sum to 1
    std::vector<std::string> node_keys;
    int label = -1;  // 0 human, 1 bot, -1 unlabeled
};

/// Maps graphs onto fixed-width node features: one-hot page type, log1p hit
/// count, first-visit offset scaled into [0,1], in-degree and out-degree.
/// The benchmark label never enters the features.
class GraphFeaturizer {
public:
    static GraphFeaturizer standard();

    GraphTensor featurize(const WTGraph& g) const;
    int feature_width() const { return static_cast<int>(page_types_.size()) + 4; }

    nlohmann::ordered_json to_json() const;
    static GraphFeaturizer from_json(const nlohmann::json& j);

private:
    std::vector<PageType> page_types_;
};

struct DgcnnConfig {
    std::vector<int> gcn_units = {32, 32, 32, 1};  // tanh layers
    int sort_pool_k = 35;
    int conv1_filters = 16;  // kernel and stride equal the concatenated width
    int maxpool_size = 2;
    int conv2_filters = 32;
    int conv2_kernel = 5;
    int dense_units = 128;
    double dropout_p = 0.5;
    double adam_alpha = 0.0001;
    int batch_size = 32;
    int epochs = 50;
    std::uint64_t seed = 1;

    int concat_width() const;  // sum of gcn_units
    void validate() const;
};

struct DgcnnHistory {
    std::vector<double> loss;  // mean binary cross-entropy per epoch
};

/// Four-layer graph convolution, sort pooling at k, a two-stage 1-D
/// convolutional head and a sigmoid output.
class DgcnnModel {
public:
    static DgcnnModel build(const DgcnnConfig& config, GraphFeaturizer featurizer,
                            std::uint64_t seed);

    /// Trains on labeled tensors (label 0/1); both classes required.
    void train(const std::vector<GraphTensor>& graphs);

    /// p_bot strictly inside (0, 1); dropout disabled.
    double classify_graph(const WTGraph& g) const;
    double classify_tensor(const GraphTensor& t) const;

    /// Concatenated per-node embeddings of the four GCN layers (n x 97).
    nn::Matrix gcn_embeddings(const GraphTensor& t) const;

    /// Rows sorted by the last channel (descending, earlier channels then the
    /// node key break ties), truncated or zero-padded to k rows.
    static nn::Matrix sort_pooling(const nn::Matrix& embeddings,
                                   const std::vector<std::string>& node_keys, int k);

    /// Inference-mode loss, and loss with gradient accumulation (training
    /// mode optional); exposed for the training loop and gradient checks.
    double loss(const GraphTensor& t, int label) const;
    double loss_backward(const GraphTensor& t, int label, bool training);

    const DgcnnConfig& config() const { return config_; }
    const DgcnnHistory& history() const { return history_; }
    const GraphFeaturizer& featurizer() const { return featurizer_; }
    std::vector<nn::ParamBlock>& parameters() { return params_; }
    const std::vector<nn::ParamBlock>& parameters() const { return params_; }

    void save(const std::string& path) const;
    static DgcnnModel load(const std::string& path);

private:
    DgcnnModel() = default;

    struct Cache;
    double forward(const GraphTensor& t, bool training, Cache* cache) const;

    DgcnnConfig config_;
    GraphFeaturizer featurizer_;
    std::vector<nn::ParamBlock> params_;
    nn::Adam adam_;
    Rng rng_{0};
    DgcnnHistory history_;

    // params_ layout: gcn.0..gcn.3, conv1 w/b, conv2 w/b, dense w/b, out w/b
    std::size_t gcn_block(std::size_t layer) const { return layer; }
    enum Offset { CONV1_W = 4, CONV1_B, CONV2_W, CONV2_B, DENSE_W, DENSE_B, OUT_W, OUT_B };
};

}  // namespace botracle
