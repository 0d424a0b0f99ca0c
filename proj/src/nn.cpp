#include "jrc/nn.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "jrc/errors.hpp"

namespace jrc {

namespace {
constexpr int kWeightFormatVersion = 1;
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        count += static_cast<std::size_t>(dims[l + 1]) * dims[l] + dims[l + 1];
    return count;
}

GradientSet GradientSet::zeros_like(const NetworkParams& p) {
    GradientSet g;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        g.weights.emplace_back(Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols()));
        g.biases.emplace_back(Eigen::VectorXd::Zero(p.biases[l].size()));
    }
    return g;
}

void GradientSet::add_scaled(const GradientSet& other, double scale) {
    require(weights.size() == other.weights.size(), "gradient shape mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += scale * other.weights[l];
        biases[l] += scale * other.biases[l];
    }
}

NetworkParams init_network(const std::vector<int>& dims, std::mt19937_64& rng) {
    require(dims.size() >= 2, "network needs at least input and output layers");
    for (int d : dims) require(d > 0, "layer sizes must be > 0");

    NetworkParams p;
    p.dims = dims;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd w(dims[l + 1], dims[l]);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }
    return p;
}

ForwardCache forward_batch(const NetworkParams& p, const Eigen::MatrixXd& inputs) {
    require(inputs.rows() == p.input_dim(), "input dimension mismatch");
    ForwardCache cache;
    cache.a.push_back(inputs);
    const std::size_t layers = p.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = (p.weights[l] * cache.a.back()).colwise() + p.biases[l];
        if (l + 1 < layers) {
            cache.a.push_back(z.cwiseMax(0.0));  // rectifier on hidden layers
        } else {
            cache.a.push_back(z);  // linear output
        }
        cache.z.push_back(std::move(z));
    }
    return cache;
}

Eigen::VectorXd forward(const NetworkParams& p, const Eigen::VectorXd& input) {
    return forward_batch(p, input).a.back().col(0);
}

void backward_batch(const NetworkParams& p, const ForwardCache& cache,
                    const Eigen::MatrixXd& output_grad, GradientSet& out) {
    require(output_grad.rows() == p.output_dim(), "output gradient shape mismatch");
    Eigen::MatrixXd delta = output_grad;
    for (int l = static_cast<int>(p.weights.size()) - 1; l >= 0; --l) {
        out.weights[l].noalias() += delta * cache.a[l].transpose();
        out.biases[l] += delta.rowwise().sum();
        if (l > 0) {
            delta = (p.weights[l].transpose() * delta).eval();
            delta = delta.cwiseProduct(
                (cache.z[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
}

std::pair<double, GradientSet> loss_and_gradients(const NetworkParams& p,
                                                  const WeightedBatch& batch) {
    const std::size_t n = batch.inputs.size();
    require(n > 0, "batch must be nonempty");
    require(batch.actions.size() == n && batch.targets.size() == n &&
                batch.weights.size() == n,
            "batch field lengths must match");

    Eigen::MatrixXd inputs(p.input_dim(), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        require(batch.inputs[i].size() == p.input_dim(), "input dimension mismatch");
        inputs.col(static_cast<Eigen::Index>(i)) = batch.inputs[i];
    }

    ForwardCache cache = forward_batch(p, inputs);
    const Eigen::MatrixXd& q = cache.a.back();

    double loss = 0.0;
    Eigen::MatrixXd output_grad = Eigen::MatrixXd::Zero(p.output_dim(),
                                                        static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const int a = batch.actions[i];
        require(a >= 0 && a < p.output_dim(), "action index out of range");
        const auto col = static_cast<Eigen::Index>(i);
        const double err = q(a, col) - batch.targets[i];
        loss += batch.weights[i] * err * err;
        output_grad(a, col) = 2.0 * batch.weights[i] * err / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);

    GradientSet grads = GradientSet::zeros_like(p);
    backward_batch(p, cache, output_grad, grads);
    return {loss, grads};
}

void sgd_step(NetworkParams& p, const GradientSet& grads, double learning_rate) {
    require(learning_rate > 0, "learning rate must be > 0");
    require(grads.weights.size() == p.weights.size(), "gradient shape mismatch");
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        require(grads.weights[l].rows() == p.weights[l].rows() &&
                    grads.weights[l].cols() == p.weights[l].cols() &&
                    grads.biases[l].size() == p.biases[l].size(),
                "gradient shape mismatch");
        p.weights[l] -= learning_rate * grads.weights[l];
        p.biases[l] -= learning_rate * grads.biases[l];
    }
}

NetworkParams sync_target(const NetworkParams& online) { return online; }

void save_network(const NetworkParams& p, const std::string& path) {
    nlohmann::json doc;
    doc["format_version"] = kWeightFormatVersion;
    doc["layer_dims"] = p.dims;
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        nlohmann::json layer;
        std::vector<double> w;  // row-major
        w.reserve(static_cast<std::size_t>(p.weights[l].size()));
        for (Eigen::Index i = 0; i < p.weights[l].rows(); ++i)
            for (Eigen::Index j = 0; j < p.weights[l].cols(); ++j)
                w.push_back(p.weights[l](i, j));
        layer["weights"] = w;
        layer["bias"] = std::vector<double>(p.biases[l].data(),
                                            p.biases[l].data() + p.biases[l].size());
        layers.push_back(std::move(layer));
    }
    doc["layers"] = std::move(layers);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write weight file: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("failed writing weight file: " + path);
}

NetworkParams load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weight file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed weight file " + path + ": " + e.what());
    }
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer() ||
        doc["format_version"].get<int>() != kWeightFormatVersion)
        throw IoError("weight file version mismatch: " + path);

    NetworkParams p;
    p.dims = doc.at("layer_dims").get<std::vector<int>>();
    if (p.dims.size() < 2) throw IoError("weight file has invalid layer_dims");
    const auto& layers = doc.at("layers");
    if (layers.size() != p.dims.size() - 1)
        throw IoError("weight file layer count mismatch");
    for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
        const auto rows = static_cast<std::size_t>(p.dims[l + 1]);
        const auto cols = static_cast<std::size_t>(p.dims[l]);
        auto w = layers[l].at("weights").get<std::vector<double>>();
        auto b = layers[l].at("bias").get<std::vector<double>>();
        if (w.size() != rows * cols || b.size() != rows)
            throw IoError("weight file shape mismatch in layer " + std::to_string(l));
        Eigen::MatrixXd wm(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) wm(i, j) = w[i * cols + j];
        p.weights.push_back(std::move(wm));
        p.biases.push_back(Eigen::Map<Eigen::VectorXd>(b.data(), rows));
    }
    return p;
}

}  // namespace jrc
