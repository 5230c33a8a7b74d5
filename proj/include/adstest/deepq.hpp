#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "adstest/actions.hpp"
#include "adstest/agents.hpp"

namespace adstest {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-layer gradients, same shapes as the network parameters.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Fully connected network: rectifier on hidden layers, identity output.
class Mlp {
 public:
  Mlp() = default;
  /// All parameters zero.
  explicit Mlp(std::vector<std::size_t> layer_sizes);
  /// He-uniform weights, zero biases.
  static Mlp initialized(std::vector<std::size_t> layer_sizes, Rng& rng);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t num_layers() const { return weights_.size(); }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  Eigen::MatrixXd& weight(std::size_t layer) { return weights_[layer]; }
  const Eigen::MatrixXd& weight(std::size_t layer) const { return weights_[layer]; }
  Eigen::VectorXd& bias(std::size_t layer) { return biases_[layer]; }
  const Eigen::VectorXd& bias(std::size_t layer) const { return biases_[layer]; }

  /// Throws NumericError on a non-finite or wrongly sized input.
  Eigen::VectorXd forward(std::span<const double> input) const;

  /// Activations kept for backpropagation; column j is sample j.
  struct Cache {
    std::vector<Eigen::MatrixXd> pre;   // per layer, before activation
    std::vector<Eigen::MatrixXd> post;  // post[0] is the input
  };
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, Cache& cache) const;
  /// Gradient of a loss whose derivative w.r.t. the outputs is `output_grad`.
  MlpGradients backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const;

  /// Flat view in layer order, weights (column-major) then bias per layer.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  bool all_finite() const;

  bool operator==(const Mlp& o) const;

  void write_json(std::ostream& out) const;
  static Mlp read_json(std::istream& in);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Eigen::MatrixXd> weights_;  // out x in
  std::vector<Eigen::VectorXd> biases_;
};

/// Adaptive-moment gradient step.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step(Mlp& net, const MlpGradients& g);

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  MlpGradients m_, v_;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded_at_kink = 0;
};

/// Analytic vs central-difference gradient of 0.5*||net(x) - target||^2.
/// Parameters whose +-h perturbation flips a rectifier are skipped.
GradCheckResult grad_check(const Mlp& net, std::span<const double> input,
                           std::span<const double> target, double h = 1e-5);
GradCheckResult grad_check(const Mlp& net, Rng& rng, double h = 1e-5);

struct DqnTransition {
  Observation obs{};
  ActionId action = ActionId::kNoOp;
  double reward = 0.0;
  Observation next_obs{};
  bool done = false;
};

/// FIFO ring buffer of experiences.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(const DqnTransition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  std::uint64_t insertions() const { return inserted_; }
  /// i-th oldest stored transition.
  const DqnTransition& at(std::size_t i) const;
  /// Uniform with replacement; one draw per sample.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::vector<DqnTransition> data_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
  std::uint64_t inserted_ = 0;
};

struct DqnConfig {
  std::vector<std::size_t> hidden{64, 64};
  double gamma = 0.99;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 100000;
  std::size_t target_sync_period = 1000;
  std::size_t warmup = 1000;
  std::size_t train_interval = 1;
  double huber_delta = 1.0;
};

class DqnAgent {
 public:
  DqnAgent(const DqnConfig& config, std::size_t input_size, std::size_t num_actions, Rng& init_rng);

  const DqnConfig& config() const { return config_; }
  const Mlp& online() const { return online_; }
  Mlp& online() { return online_; }
  const Mlp& target() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::uint64_t train_steps() const { return train_steps_; }

  void sync_target() { target_ = online_; }

  /// Mean Huber loss of one minibatch update, or nullopt before warm-up.
  std::optional<double> train_step(Rng& rng);

 private:
  DqnConfig config_;
  Mlp online_;
  Mlp target_;
  ReplayBuffer buffer_;
  Adam adam_;
  std::uint64_t train_steps_ = 0;
};

ActionId dqn_select(const DqnAgent& agent, const Observation& normalized_obs, double epsilon,
                    AgentRng& rng);

double huber(double x, double delta);
double huber_grad(double x, double delta);

/// Synthetic one-step task: context s0 uniform in [-1.7, 1.7), other slots
/// zero, reward 1 when action == floor(10 |s0|) mod 17. Exercises select,
/// store and train without the simulator.
int bandit_target(double s0);

/// Campaign defaults with a larger step and batch; one scalar context needs
/// 34 rectifier breakpoints.
DqnConfig bandit_config();

struct BanditReport {
  double final_accuracy = 0.0;
  double best_accuracy = 0.0;
  std::int64_t first_step_above = -1;  // first evaluation with accuracy > threshold
  std::vector<std::pair<std::int64_t, double>> curve;
};

BanditReport run_contextual_bandit(const DqnConfig& config, std::int64_t steps, std::uint64_t seed,
                                   double threshold = 0.9, std::int64_t eval_every = 1000,
                                   std::size_t eval_contexts = 2000);

}  // namespace adstest
