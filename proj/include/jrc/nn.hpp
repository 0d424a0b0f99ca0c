#ifndef JRC_NN_HPP
#define JRC_NN_HPP

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace jrc {

// Fully-connected net with rectifier hidden units and a linear output.
// weights[l] is dims[l+1] x dims[l], biases[l] is dims[l+1].
struct NetworkParams {
    std::vector<int> dims;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
    std::size_t parameter_count() const;
};

struct GradientSet {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static GradientSet zeros_like(const NetworkParams& p);
    void add_scaled(const GradientSet& other, double scale);
};

struct WeightedBatch {
    std::vector<Eigen::VectorXd> inputs;
    std::vector<int> actions;
    std::vector<double> targets;
    std::vector<double> weights;
};

// Activations kept for backprop: a[0] is the input batch, a[l+1] the
// post-activation of layer l; z[l] the pre-activation.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> z;
    std::vector<Eigen::MatrixXd> a;
};

// Fan-in-scaled uniform weights, zero biases.
NetworkParams init_network(const std::vector<int>& dims, std::mt19937_64& rng);

Eigen::VectorXd forward(const NetworkParams& p, const Eigen::VectorXd& input);

// Batched forward over inputs packed column-wise (input_dim x N).
ForwardCache forward_batch(const NetworkParams& p, const Eigen::MatrixXd& inputs);

// Backprop of an arbitrary output-side gradient (output_dim x N); gradients
// are summed over the batch columns into `out`.
void backward_batch(const NetworkParams& p, const ForwardCache& cache,
                    const Eigen::MatrixXd& output_grad, GradientSet& out);

// loss = (1/N) sum_i w_i (y_i - Q(s_i, a_i))^2 with exact analytic gradients.
std::pair<double, GradientSet> loss_and_gradients(const NetworkParams& p,
                                                  const WeightedBatch& batch);

void sgd_step(NetworkParams& p, const GradientSet& grads, double learning_rate);

NetworkParams sync_target(const NetworkParams& online);

// Versioned JSON weight file; round-trips bit-exactly.
void save_network(const NetworkParams& p, const std::string& path);
NetworkParams load_network(const std::string& path);

}  // namespace jrc

#endif
