#include "adstest/deepq.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace adstest {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

MlpGradients zeros_like(const Mlp& net) {
  MlpGradients g;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(net.weight(l).rows(), net.weight(l).cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
  }
  return g;
}

std::vector<double> flatten(const MlpGradients& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    out.insert(out.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
    out.insert(out.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
  }
  return out;
}

double half_squared_error(const Mlp& net, std::span<const double> x, std::span<const double> t) {
  const Eigen::VectorXd y = net.forward(x);
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += 0.5 * (y[i] - t[i]) * (y[i] - t[i]);
  return s;
}

// Sign pattern of every hidden pre-activation for one input.
std::vector<bool> activation_pattern(const Mlp& net, std::span<const double> x) {
  Eigen::MatrixXd in(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) in(static_cast<Eigen::Index>(i), 0) = x[i];
  Mlp::Cache cache;
  net.forward_batch(in, cache);
  std::vector<bool> pattern;
  for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) {
    for (Eigen::Index i = 0; i < cache.pre[l].size(); ++i) pattern.push_back(cache.pre[l](i) > 0.0);
  }
  return pattern;
}

}  // namespace

double huber(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 0.5 * x * x : delta * (a - 0.5 * delta);
}

double huber_grad(double x, double delta) { return std::clamp(x, -delta, delta); }

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("an Mlp needs at least input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    weights_.push_back(Eigen::MatrixXd::Zero(out, in));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

Mlp Mlp::initialized(std::vector<std::size_t> layer_sizes, Rng& rng) {
  Mlp net(std::move(layer_sizes));
  for (auto& w : net.weights_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Eigen::VectorXd Mlp::forward(std::span<const double> input) const {
  if (input.size() != input_size()) throw NumericError("forward: input size mismatch");
  Eigen::VectorXd h(static_cast<Eigen::Index>(input.size()));
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!std::isfinite(input[i])) throw NumericError("forward: non-finite input");
    h[static_cast<Eigen::Index>(i)] = input[i];
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * h + biases_[l];
    h = (l + 1 < weights_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return h;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * h;
    z.colwise() += biases_[l];
    h = (l + 1 < weights_.size()) ? relu(z) : std::move(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs, Cache& cache) const {
  cache.pre.clear();
  cache.post.clear();
  cache.post.push_back(inputs);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * cache.post.back();
    z.colwise() += biases_[l];
    cache.pre.push_back(z);
    cache.post.push_back((l + 1 < weights_.size()) ? relu(z) : std::move(z));
  }
  return cache.post.back();
}

MlpGradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const {
  MlpGradients g;
  g.weights.resize(weights_.size());
  g.biases.resize(weights_.size());
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    g.weights[l].noalias() = delta * cache.post[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weights_[l].transpose() * delta;
      delta = back.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.insert(out.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
    out.insert(out.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
  }
  return out;
}

void Mlp::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), weights_[l].size(), weights_[l].data());
    k += static_cast<std::size_t>(weights_[l].size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), biases_[l].size(), biases_[l].data());
    k += static_cast<std::size_t>(biases_[l].size());
  }
}

bool Mlp::all_finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

bool Mlp::operator==(const Mlp& o) const {
  if (sizes_ != o.sizes_) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] != o.weights_[l] || biases_[l] != o.biases_[l]) return false;
  }
  return true;
}

void Mlp::write_json(std::ostream& out) const {
  nlohmann::json j;
  j["format"] = "adstest-mlp";
  j["layers"] = sizes_;
  j["activation"] = "relu";
  auto& layers = j["parameters"] = nlohmann::json::array();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    nlohmann::json layer;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(weights_[l].rows()));
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i) {
      for (Eigen::Index k = 0; k < weights_[l].cols(); ++k) rows[static_cast<std::size_t>(i)].push_back(weights_[l](i, k));
    }
    layer["weight"] = rows;
    layer["bias"] = std::vector<double>(biases_[l].data(), biases_[l].data() + biases_[l].size());
    layers.push_back(layer);
  }
  out << j.dump() << '\n';
}

Mlp Mlp::read_json(std::istream& in) {
  const nlohmann::json j = nlohmann::json::parse(in);
  Mlp net(j.at("layers").get<std::vector<std::size_t>>());
  const auto& layers = j.at("parameters");
  if (layers.size() != net.num_layers()) throw std::invalid_argument("checkpoint layer count mismatch");
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto rows = layers[l].at("weight").get<std::vector<std::vector<double>>>();
    const auto bias = layers[l].at("bias").get<std::vector<double>>();
    auto& w = net.weights_[l];
    if (rows.size() != static_cast<std::size_t>(w.rows()) ||
        bias.size() != static_cast<std::size_t>(w.rows())) {
      throw std::invalid_argument("checkpoint shape mismatch");
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (row.size() != static_cast<std::size_t>(w.cols())) throw std::invalid_argument("checkpoint shape mismatch");
      for (Eigen::Index k = 0; k < w.cols(); ++k) w(i, k) = row[static_cast<std::size_t>(k)];
      net.biases_[l][i] = bias[static_cast<std::size_t>(i)];
    }
  }
  return net;
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(zeros_like(net)), v_(zeros_like(net)) {}

void Adam::step(Mlp& net, const MlpGradients& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    update(net.weight(l), g.weights[l], m_.weights[l], v_.weights[l]);
    update(net.bias(l), g.biases[l], m_.biases[l], v_.biases[l]);
  }
}

GradCheckResult grad_check(const Mlp& net, std::span<const double> input, std::span<const double> target,
                           double h) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(input.size()), 1);
  for (std::size_t i = 0; i < input.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = input[i];
  Mlp::Cache cache;
  const Eigen::MatrixXd y = net.forward_batch(x, cache);
  Eigen::MatrixXd dy = y;
  for (Eigen::Index i = 0; i < y.rows(); ++i) dy(i, 0) = y(i, 0) - target[static_cast<std::size_t>(i)];
  const std::vector<double> analytic = flatten(net.backward(cache, dy));

  GradCheckResult res;
  const std::vector<double> base = net.parameters();
  Mlp probe = net;
  std::vector<double> p = base;
  for (std::size_t k = 0; k < base.size(); ++k) {
    p[k] = base[k] + h;
    probe.set_parameters(p);
    const double up = half_squared_error(probe, input, target);
    const auto pattern_up = activation_pattern(probe, input);
    p[k] = base[k] - h;
    probe.set_parameters(p);
    const double down = half_squared_error(probe, input, target);
    const auto pattern_down = activation_pattern(probe, input);
    p[k] = base[k];
    if (pattern_up != pattern_down) {
      ++res.excluded_at_kink;
      continue;
    }
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(analytic[k] - numeric) /
                       std::max(1e-8, std::abs(analytic[k]) + std::abs(numeric));
    res.max_relative_error = std::max(res.max_relative_error, rel);
    ++res.checked;
  }
  return res;
}

GradCheckResult grad_check(const Mlp& net, Rng& rng, double h) {
  std::vector<double> x(net.input_size());
  std::vector<double> t(net.output_size());
  for (double& v : x) v = 2.0 * rng.uniform() - 1.0;
  for (double& v : t) v = 2.0 * rng.uniform() - 1.0;
  return grad_check(net, x, t, h);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(const DqnTransition& t) {
  data_[head_] = t;
  head_ = (head_ + 1) % data_.size();
  size_ = std::min(size_ + 1, data_.size());
  ++inserted_;
}

const DqnTransition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index");
  const std::size_t oldest = (head_ + data_.size() - size_) % data_.size();
  return data_[(oldest + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.below(size_);
  return idx;
}

DqnAgent::DqnAgent(const DqnConfig& config, std::size_t input_size, std::size_t num_actions,
                   Rng& init_rng)
    : config_(config), buffer_(config.buffer_capacity) {
  std::vector<std::size_t> sizes{input_size};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(num_actions);
  online_ = Mlp::initialized(sizes, init_rng);
  target_ = online_;
  adam_ = Adam(online_, config.learning_rate);
}

std::optional<double> DqnAgent::train_step(Rng& rng) {
  const std::size_t B = config_.batch_size;
  if (buffer_.size() < std::max(B, config_.warmup)) return std::nullopt;

  const auto idx = buffer_.sample_indices(B, rng);
  const auto n_in = static_cast<Eigen::Index>(online_.input_size());
  const auto nb = static_cast<Eigen::Index>(B);
  Eigen::MatrixXd x(n_in, nb);
  Eigen::MatrixXd xn(n_in, nb);
  for (Eigen::Index j = 0; j < nb; ++j) {
    const DqnTransition& t = buffer_.at(idx[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n_in; ++i) {
      x(i, j) = t.obs[static_cast<std::size_t>(i)];
      xn(i, j) = t.next_obs[static_cast<std::size_t>(i)];
    }
  }
  const Eigen::MatrixXd q_next = target_.forward_batch(xn);
  Mlp::Cache cache;
  const Eigen::MatrixXd q = online_.forward_batch(x, cache);

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < nb; ++j) {
    const DqnTransition& t = buffer_.at(idx[static_cast<std::size_t>(j)]);
    const double y = t.done ? t.reward : t.reward + config_.gamma * q_next.col(j).maxCoeff();
    const auto a = static_cast<Eigen::Index>(index_of(t.action));
    const double err = q(a, j) - y;
    loss += huber(err, config_.huber_delta);
    grad(a, j) = huber_grad(err, config_.huber_delta) / static_cast<double>(B);
  }
  loss /= static_cast<double>(B);
  adam_.step(online_, online_.backward(cache, grad));
  if (!std::isfinite(loss) || !online_.all_finite()) {
    throw NumericError("non-finite value during DQN training");
  }
  ++train_steps_;
  if (train_steps_ % config_.target_sync_period == 0) sync_target();
  return loss;
}

ActionId dqn_select(const DqnAgent& agent, const Observation& normalized_obs, double epsilon,
                    AgentRng& rng) {
  if (rng.explore.uniform() < epsilon) return random_select(rng.action);
  const Eigen::VectorXd q = agent.online().forward(normalized_obs);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return action_from_index(static_cast<std::size_t>(best));
}

DqnConfig bandit_config() {
  DqnConfig c;
  c.learning_rate = 3e-3;
  c.batch_size = 256;
  return c;
}

int bandit_target(double s0) {
  return static_cast<int>(std::floor(10.0 * std::abs(s0))) % static_cast<int>(kNumActions);
}

BanditReport run_contextual_bandit(const DqnConfig& config, std::int64_t steps, std::uint64_t seed,
                                   double threshold, std::int64_t eval_every, std::size_t eval_contexts) {
  AgentRng rng(seed);
  DqnAgent agent(config, kObservationSize, kNumActions, rng.init);
  auto context = [](Rng& r) {
    Observation o{};
    o[0] = -1.7 + 3.4 * r.uniform();
    return o;
  };
  // Fixed evaluation set from its own stream.
  std::vector<Observation> eval(eval_contexts);
  for (auto& o : eval) o = context(rng.noise);

  BanditReport rep;
  auto evaluate = [&](std::int64_t step) {
    AgentRng greedy(0);
    std::size_t hits = 0;
    for (const auto& o : eval) hits += static_cast<int>(index_of(dqn_select(agent, o, 0.0, greedy))) == bandit_target(o[0]);
    const double acc = static_cast<double>(hits) / static_cast<double>(eval.size());
    rep.curve.emplace_back(step, acc);
    rep.best_accuracy = std::max(rep.best_accuracy, acc);
    if (acc > threshold && rep.first_step_above < 0) rep.first_step_above = step;
    rep.final_accuracy = acc;
  };

  const double anneal = 0.5 * static_cast<double>(steps);
  for (std::int64_t step = 1; step <= steps; ++step) {
    const double eps = std::max(0.1, 1.0 - 0.9 * static_cast<double>(step) / anneal);
    DqnTransition t;
    t.obs = context(rng.scenario);
    t.next_obs = t.obs;
    t.action = dqn_select(agent, t.obs, eps, rng);
    t.reward = static_cast<int>(index_of(t.action)) == bandit_target(t.obs[0]) ? 1.0 : 0.0;
    t.done = true;
    agent.buffer().push(t);
    agent.train_step(rng.replay);
    if (step % eval_every == 0 || step == steps) evaluate(step);
  }
  return rep;
}

}  // namespace adstest
