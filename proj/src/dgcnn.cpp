#include "botracle/dgcnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace botracle {

using nn::Matrix;
using nn::Vector;

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

GraphFeaturizer GraphFeaturizer::standard() {
    GraphFeaturizer f;
    f.page_types_ = {PageType::product, PageType::category, PageType::search, PageType::cart,
                     PageType::checkout, PageType::content, PageType::other};
    return f;
}

GraphTensor GraphFeaturizer::featurize(const WTGraph& g) const {
    const auto n = static_cast<Eigen::Index>(g.nodes.size());
    if (n == 0) throw std::invalid_argument("cannot featurize empty graph");

    GraphTensor t;
    t.node_keys.reserve(static_cast<std::size_t>(n));
    std::map<std::string, Eigen::Index> index;
    std::int64_t ts_min = 0, ts_max = 0;
    for (const auto& [name, label] : g.nodes) {
        if (t.node_keys.empty()) {
            ts_min = ts_max = label.first_visit_timestamp;
        } else {
            ts_min = std::min(ts_min, label.first_visit_timestamp);
            ts_max = std::max(ts_max, label.first_visit_timestamp);
        }
        index[name] = static_cast<Eigen::Index>(t.node_keys.size());
        t.node_keys.push_back(name);
    }

    std::map<std::string, int> in_degree, out_degree;
    for (const auto& [edge, weight] : g.edges) {
        (void)weight;
        ++out_degree[edge.first];
        ++in_degree[edge.second];
    }

    const auto f_width = static_cast<Eigen::Index>(feature_width());
    t.x = Matrix::Zero(n, f_width);
    const double span_s = static_cast<double>(ts_max - ts_min) / 1000.0;
    for (const auto& [name, label] : g.nodes) {
        const Eigen::Index r = index[name];
        Eigen::Index c = 0;
        for (PageType pt : page_types_) {
            t.x(r, c++) = label.page_type == pt ? 1.0 : 0.0;
        }
        t.x(r, c++) = std::log1p(static_cast<double>(label.hit_count));
        const double offset_s =
            static_cast<double>(label.first_visit_timestamp - ts_min) / 1000.0;
        t.x(r, c++) = span_s > 0 ? offset_s / span_s : 0.0;
        t.x(r, c++) = in_degree.count(name) ? in_degree[name] : 0;
        t.x(r, c) = out_degree.count(name) ? out_degree[name] : 0;
    }

    // Propagation consumes the symmetrized adjacency with self-loops,
    // row-normalized; the traversal graph itself stays directed.
    Matrix a = Matrix::Identity(n, n);
    for (const auto& [edge, weight] : g.edges) {
        (void)weight;
        const Eigen::Index u = index[edge.first];
        const Eigen::Index v = index[edge.second];
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    t.prop = a.rowwise().sum().cwiseInverse().asDiagonal() * a;

    if (!g.nodes.empty()) {
        const Label bench = g.nodes.begin()->second.benchmark_label;
        t.label = bench == Label::bot ? 1 : bench == Label::human ? 0 : -1;
    }
    return t;
}

nlohmann::ordered_json GraphFeaturizer::to_json() const {
    nlohmann::ordered_json j;
    auto types = nlohmann::ordered_json::array();
    for (PageType pt : page_types_) types.push_back(to_string(pt));
    j["page_types"] = std::move(types);
    return j;
}

GraphFeaturizer GraphFeaturizer::from_json(const nlohmann::json& j) {
    GraphFeaturizer f;
    for (const auto& v : j.at("page_types"))
        f.page_types_.push_back(page_type_from_string(v.get<std::string>()));
    return f;
}

int DgcnnConfig::concat_width() const {
    return std::accumulate(gcn_units.begin(), gcn_units.end(), 0);
}

void DgcnnConfig::validate() const {
    if (gcn_units != std::vector<int>{32, 32, 32, 1})
        throw std::invalid_argument("gcn layer widths are fixed at 32/32/32/1");
    if (sort_pool_k < 1) throw std::invalid_argument("sort_pool_k must be >= 1");
    if (conv1_filters != 16 || conv2_filters != 32 || conv2_kernel != 5 || maxpool_size != 2 ||
        dense_units != 128)
        throw std::invalid_argument("convolutional head constants are fixed");
    if (dropout_p < 0 || dropout_p >= 1) throw std::invalid_argument("dropout_p out of range");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
}

DgcnnModel DgcnnModel::build(const DgcnnConfig& config, GraphFeaturizer featurizer,
                             std::uint64_t seed) {
    config.validate();
    DgcnnModel m;
    m.config_ = config;
    m.config_.seed = seed;
    m.featurizer_ = std::move(featurizer);

    Rng init(seed);
    int in_width = m.featurizer_.feature_width();
    for (std::size_t l = 0; l < config.gcn_units.size(); ++l) {
        m.params_.emplace_back("gcn." + std::to_string(l) + ".weight",
                               nn::glorot_uniform(in_width, config.gcn_units[l], init));
        in_width = config.gcn_units[l];
    }

    const int concat = config.concat_width();  // conv1 kernel and stride
    const int pooled = config.sort_pool_k / config.maxpool_size;
    const int conv2_positions = pooled - config.conv2_kernel + 1;
    if (conv2_positions < 1)
        throw std::invalid_argument("sort_pool_k too small for the convolutional head");

    m.params_.emplace_back("conv1.weight", nn::glorot_uniform(concat, config.conv1_filters, init));
    m.params_.emplace_back("conv1.bias", Matrix::Zero(1, config.conv1_filters));
    m.params_.emplace_back(
        "conv2.weight",
        nn::glorot_uniform(config.conv2_kernel * config.conv1_filters, config.conv2_filters, init));
    m.params_.emplace_back("conv2.bias", Matrix::Zero(1, config.conv2_filters));
    m.params_.emplace_back(
        "dense.weight",
        nn::glorot_uniform(conv2_positions * config.conv2_filters, config.dense_units, init));
    m.params_.emplace_back("dense.bias", Matrix::Zero(1, config.dense_units));
    m.params_.emplace_back("output.weight", nn::glorot_uniform(config.dense_units, 1, init));
    m.params_.emplace_back("output.bias", Matrix::Zero(1, 1));

    m.adam_ = nn::Adam({config.adam_alpha, 0.9, 0.999, 1e-8});
    m.rng_ = Rng(seed).split(7);
    return m;
}

Matrix DgcnnModel::sort_pooling(const Matrix& embeddings, const std::vector<std::string>& node_keys,
                                int k) {
    const auto n = embeddings.rows();
    const auto width = embeddings.cols();
    if (static_cast<Eigen::Index>(node_keys.size()) != n)
        throw std::invalid_argument("node key count does not match embedding rows");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = width - 1; c >= 0; --c) {
            if (embeddings(a, c) != embeddings(b, c)) return embeddings(a, c) > embeddings(b, c);
        }
        return node_keys[static_cast<std::size_t>(a)] < node_keys[static_cast<std::size_t>(b)];
    });

    Matrix pooled = Matrix::Zero(k, width);
    const auto keep = std::min<Eigen::Index>(n, k);
    for (Eigen::Index i = 0; i < keep; ++i) pooled.row(i) = embeddings.row(order[static_cast<std::size_t>(i)]);
    return pooled;
}

struct DgcnnModel::Cache {
    std::vector<Matrix> z;       // z[0] = X, z[1..4] = layer outputs
    std::vector<Matrix> pz;      // prop * z[l-1] per layer
    Matrix embeddings;           // n x concat
    std::vector<Eigen::Index> order;  // sort-pool selection
    Matrix pooled;               // k x concat
    Matrix conv1_pre, conv1_out;      // k x 16
    Matrix maxpooled;                 // k/2 x 16
    std::vector<std::vector<Eigen::Index>> argmax;  // per pooled pos, per channel
    Matrix windows;                   // conv2 im2col, positions x (kernel*16)
    Matrix conv2_pre, conv2_out;      // positions x 32
    Matrix flat;                      // 1 x positions*32
    Matrix dense_pre, dense_out;      // 1 x 128
    Matrix mask;                      // dropout (training only)
    Matrix dropped;                   // 1 x 128
    double logit = 0.0;
};

double DgcnnModel::forward(const GraphTensor& t, bool training, Cache* cache) const {
    if (t.x.cols() != featurizer_.feature_width())
        throw std::invalid_argument("graph tensor width " + std::to_string(t.x.cols()) +
                                    " does not match featurizer width " +
                                    std::to_string(featurizer_.feature_width()));
    Cache local;
    Cache& c = cache ? *cache : local;

    const auto layers = config_.gcn_units.size();
    c.z.assign(layers + 1, Matrix{});
    c.pz.assign(layers, Matrix{});
    c.z[0] = t.x;
    for (std::size_t l = 0; l < layers; ++l) {
        c.pz[l] = t.prop * c.z[l];
        c.z[l + 1] = (c.pz[l] * params_[gcn_block(l)].value).array().tanh().matrix();
    }
    const int concat = config_.concat_width();
    c.embeddings.resize(t.x.rows(), concat);
    Eigen::Index col = 0;
    for (std::size_t l = 1; l <= layers; ++l) {
        c.embeddings.middleCols(col, c.z[l].cols()) = c.z[l];
        col += c.z[l].cols();
    }

    // sort pooling (order kept for the backward scatter)
    {
        const auto n = c.embeddings.rows();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            for (Eigen::Index cc = c.embeddings.cols() - 1; cc >= 0; --cc) {
                if (c.embeddings(a, cc) != c.embeddings(b, cc))
                    return c.embeddings(a, cc) > c.embeddings(b, cc);
            }
            return t.node_keys[static_cast<std::size_t>(a)] <
                   t.node_keys[static_cast<std::size_t>(b)];
        });
        c.order = std::move(order);
        c.pooled = Matrix::Zero(config_.sort_pool_k, concat);
        const auto keep = std::min<Eigen::Index>(n, config_.sort_pool_k);
        for (Eigen::Index i = 0; i < keep; ++i)
            c.pooled.row(i) = c.embeddings.row(c.order[static_cast<std::size_t>(i)]);
    }

    // conv1: kernel = stride = concat width, i.e. one pooled node per step
    c.conv1_pre = c.pooled * params_[CONV1_W].value;
    c.conv1_pre.rowwise() += params_[CONV1_B].value.row(0);
    c.conv1_out = nn::relu(c.conv1_pre);

    const Eigen::Index pooled_positions = config_.sort_pool_k / config_.maxpool_size;
    c.maxpooled.resize(pooled_positions, config_.conv1_filters);
    c.argmax.assign(static_cast<std::size_t>(pooled_positions),
                    std::vector<Eigen::Index>(static_cast<std::size_t>(config_.conv1_filters)));
    for (Eigen::Index j = 0; j < pooled_positions; ++j) {
        for (Eigen::Index ch = 0; ch < config_.conv1_filters; ++ch) {
            const Eigen::Index a = config_.maxpool_size * j;
            const Eigen::Index b = a + 1;
            if (c.conv1_out(a, ch) >= c.conv1_out(b, ch)) {
                c.maxpooled(j, ch) = c.conv1_out(a, ch);
                c.argmax[static_cast<std::size_t>(j)][static_cast<std::size_t>(ch)] = a;
            } else {
                c.maxpooled(j, ch) = c.conv1_out(b, ch);
                c.argmax[static_cast<std::size_t>(j)][static_cast<std::size_t>(ch)] = b;
            }
        }
    }

    const Eigen::Index positions = pooled_positions - config_.conv2_kernel + 1;
    const Eigen::Index window_width = config_.conv2_kernel * config_.conv1_filters;
    c.windows.resize(positions, window_width);
    for (Eigen::Index j = 0; j < positions; ++j)
        for (Eigen::Index u = 0; u < config_.conv2_kernel; ++u)
            c.windows.block(j, u * config_.conv1_filters, 1, config_.conv1_filters) =
                c.maxpooled.row(j + u);
    c.conv2_pre = c.windows * params_[CONV2_W].value;
    c.conv2_pre.rowwise() += params_[CONV2_B].value.row(0);
    c.conv2_out = nn::relu(c.conv2_pre);

    c.flat.resize(1, positions * config_.conv2_filters);
    for (Eigen::Index j = 0; j < positions; ++j)
        c.flat.block(0, j * config_.conv2_filters, 1, config_.conv2_filters) = c.conv2_out.row(j);

    c.dense_pre = c.flat * params_[DENSE_W].value;
    c.dense_pre.rowwise() += params_[DENSE_B].value.row(0);
    c.dense_out = nn::relu(c.dense_pre);

    if (training && config_.dropout_p > 0) {
        const double keep_p = 1.0 - config_.dropout_p;
        c.mask.resize(1, c.dense_out.cols());
        Rng& rng = const_cast<DgcnnModel*>(this)->rng_;
        for (Eigen::Index i = 0; i < c.mask.cols(); ++i)
            c.mask(0, i) = rng.bernoulli(keep_p) ? 1.0 / keep_p : 0.0;
        c.dropped = c.dense_out.cwiseProduct(c.mask);
    } else {
        c.mask.resize(0, 0);
        c.dropped = c.dense_out;
    }

    c.logit = (c.dropped * params_[OUT_W].value)(0, 0) + params_[OUT_B].value(0, 0);
    return c.logit;
}

double DgcnnModel::loss(const GraphTensor& t, int label) const {
    const double s = forward(t, false, nullptr);
    return softplus(s) - static_cast<double>(label) * s;
}

double DgcnnModel::loss_backward(const GraphTensor& t, int label, bool training) {
    Cache c;
    const double s = forward(t, training, &c);
    const double loss_value = softplus(s) - static_cast<double>(label) * s;
    const double ds = 1.0 / (1.0 + std::exp(-s)) - static_cast<double>(label);

    params_[OUT_W].grad += c.dropped.transpose() * ds;
    params_[OUT_B].grad(0, 0) += ds;
    Matrix ddropped = ds * params_[OUT_W].value.transpose();  // 1 x 128
    if (c.mask.size() > 0) ddropped = ddropped.cwiseProduct(c.mask);
    Matrix ddense_pre =
        ddropped.cwiseProduct(nn::activation_grad(c.dense_pre, Matrix{}, nn::Activation::relu));
    params_[DENSE_W].grad += c.flat.transpose() * ddense_pre;
    params_[DENSE_B].grad += ddense_pre;
    Matrix dflat = ddense_pre * params_[DENSE_W].value.transpose();

    const Eigen::Index positions = c.conv2_out.rows();
    Matrix dconv2(positions, config_.conv2_filters);
    for (Eigen::Index j = 0; j < positions; ++j)
        dconv2.row(j) = dflat.block(0, j * config_.conv2_filters, 1, config_.conv2_filters);
    Matrix dconv2_pre =
        dconv2.cwiseProduct(nn::activation_grad(c.conv2_pre, Matrix{}, nn::Activation::relu));
    params_[CONV2_W].grad += c.windows.transpose() * dconv2_pre;
    params_[CONV2_B].grad += dconv2_pre.colwise().sum();
    Matrix dwindows = dconv2_pre * params_[CONV2_W].value.transpose();

    Matrix dmax = Matrix::Zero(c.maxpooled.rows(), c.maxpooled.cols());
    for (Eigen::Index j = 0; j < positions; ++j)
        for (Eigen::Index u = 0; u < config_.conv2_kernel; ++u)
            dmax.row(j + u) +=
                dwindows.block(j, u * config_.conv1_filters, 1, config_.conv1_filters);

    Matrix dconv1 = Matrix::Zero(c.conv1_out.rows(), c.conv1_out.cols());
    for (Eigen::Index j = 0; j < c.maxpooled.rows(); ++j)
        for (Eigen::Index ch = 0; ch < config_.conv1_filters; ++ch)
            dconv1(c.argmax[static_cast<std::size_t>(j)][static_cast<std::size_t>(ch)], ch) +=
                dmax(j, ch);
    Matrix dconv1_pre =
        dconv1.cwiseProduct(nn::activation_grad(c.conv1_pre, Matrix{}, nn::Activation::relu));
    params_[CONV1_W].grad += c.pooled.transpose() * dconv1_pre;
    params_[CONV1_B].grad += dconv1_pre.colwise().sum();
    Matrix dpooled = dconv1_pre * params_[CONV1_W].value.transpose();

    Matrix dembed = Matrix::Zero(c.embeddings.rows(), c.embeddings.cols());
    const auto keep = std::min<Eigen::Index>(c.embeddings.rows(), config_.sort_pool_k);
    for (Eigen::Index i = 0; i < keep; ++i)
        dembed.row(c.order[static_cast<std::size_t>(i)]) += dpooled.row(i);

    // back through the concatenated GCN stack
    const auto layers = config_.gcn_units.size();
    std::vector<Matrix> dz(layers + 1);
    Eigen::Index col = 0;
    for (std::size_t l = 1; l <= layers; ++l) {
        dz[l] = dembed.middleCols(col, c.z[l].cols());
        col += c.z[l].cols();
    }
    for (std::size_t l = layers; l >= 1; --l) {
        Matrix dpre = dz[l].cwiseProduct((1.0 - c.z[l].array().square()).matrix());
        params_[gcn_block(l - 1)].grad += c.pz[l - 1].transpose() * dpre;
        if (l > 1) {
            Matrix back = t.prop.transpose() * dpre * params_[gcn_block(l - 1)].value.transpose();
            dz[l - 1] += back;
        }
    }
    return loss_value;
}

void DgcnnModel::train(const std::vector<GraphTensor>& graphs) {
    std::vector<std::size_t> humans, bots;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        if (graphs[i].label == 0) humans.push_back(i);
        else if (graphs[i].label == 1) bots.push_back(i);
        else throw std::invalid_argument("training graph without a 0/1 label");
    }
    if (humans.empty() || bots.empty())
        throw std::invalid_argument("training graphs must contain both classes");

    struct Pool {
        std::vector<std::size_t> idx;
        std::size_t cursor;
    };
    Pool hp{humans, humans.size()}, bp{bots, bots.size()};
    auto next = [&](Pool& p) {
        if (p.cursor >= p.idx.size()) {
            rng_.shuffle(p.idx);
            p.cursor = 0;
        }
        return p.idx[p.cursor++];
    };

    const int B = std::max(2, config_.batch_size);
    const std::size_t steps = std::max<std::size_t>(1, (graphs.size() + B - 1) / B);
    std::vector<nn::ParamBlock*> blocks;
    for (auto& p : params_) blocks.push_back(&p);

    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t step = 0; step < steps; ++step) {
            for (auto& p : params_) p.zero_grad();
            for (int i = 0; i < B; ++i) {
                const std::size_t g = i < B / 2 ? next(hp) : next(bp);
                loss_sum += loss_backward(graphs[g], graphs[g].label, true);
                ++seen;
            }
            for (auto& p : params_) p.grad /= static_cast<double>(B);
            adam_.update(blocks);
        }
        const double mean_loss = loss_sum / static_cast<double>(seen);
        if (!std::isfinite(mean_loss))
            throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch + 1));
        history_.loss.push_back(mean_loss);
    }
}

double DgcnnModel::classify_tensor(const GraphTensor& t) const {
    const double s = forward(t, false, nullptr);
    const double p = 1.0 / (1.0 + std::exp(-s));
    return std::clamp(p, nn::kProbClip, 1.0 - nn::kProbClip);
}

double DgcnnModel::classify_graph(const WTGraph& g) const {
    return classify_tensor(featurizer_.featurize(g));
}

nn::Matrix DgcnnModel::gcn_embeddings(const GraphTensor& t) const {
    Cache c;
    forward(t, false, &c);
    return c.embeddings;
}

void DgcnnModel::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["format"] = "botracle-model";
    j["version"] = 1;
    j["kind"] = "dgcnn";
    j["config"] = {{"gcn_units", config_.gcn_units},
                   {"sort_pool_k", config_.sort_pool_k},
                   {"conv1_filters", config_.conv1_filters},
                   {"maxpool_size", config_.maxpool_size},
                   {"conv2_filters", config_.conv2_filters},
                   {"conv2_kernel", config_.conv2_kernel},
                   {"dense_units", config_.dense_units},
                   {"dropout_p", config_.dropout_p},
                   {"adam_alpha", config_.adam_alpha},
                   {"batch_size", config_.batch_size},
                   {"epochs", config_.epochs},
                   {"seed", config_.seed}};
    j["featurizer"] = featurizer_.to_json();
    j["params"] = nn::params_to_json(params_);
    j["history"] = {{"loss", history_.loss}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump(2) << '\n';
}

DgcnnModel DgcnnModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("cannot parse model file " + path + ": " + e.what());
    }
    if (j.value("format", std::string{}) != "botracle-model" ||
        j.value("kind", std::string{}) != "dgcnn")
        throw std::runtime_error("not a dgcnn model file: " + path);

    DgcnnConfig cfg;
    const auto& jc = j.at("config");
    cfg.gcn_units = jc.value("gcn_units", std::vector<int>{32, 32, 32, 1});
    cfg.sort_pool_k = jc.value("sort_pool_k", 35);
    cfg.conv1_filters = jc.value("conv1_filters", 16);
    cfg.maxpool_size = jc.value("maxpool_size", 2);
    cfg.conv2_filters = jc.value("conv2_filters", 32);
    cfg.conv2_kernel = jc.value("conv2_kernel", 5);
    cfg.dense_units = jc.value("dense_units", 128);
    cfg.dropout_p = jc.value("dropout_p", 0.5);
    cfg.adam_alpha = jc.value("adam_alpha", 0.0001);
    cfg.batch_size = jc.value("batch_size", 32);
    cfg.epochs = jc.value("epochs", 50);
    cfg.seed = jc.value("seed", std::uint64_t{1});

    DgcnnModel m = build(cfg, GraphFeaturizer::from_json(j.at("featurizer")), cfg.seed);
    nn::params_from_json(j.at("params"), m.params_);
    if (j.contains("history")) m.history_.loss = j["history"].value("loss", std::vector<double>{});
    return m;
}

}  // namespace botracle
