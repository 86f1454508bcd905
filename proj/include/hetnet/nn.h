#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/rng.h"

namespace hetnet {

// Fully connected Q-network with leaky-ReLU hidden layers and a dueling
// head: Q(a) = V + A(a) - mean(A). Parameters live in one flat vector so
// gradients and optimizer state share its layout.
//
// widths = {input, hidden_1, ..., hidden_n, actions}; n may be zero.
class DenseNet {
 public:
  static constexpr double kLeakySlope = 0.1;

  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  DenseNet() = default;
  // All parameters zero.
  explicit DenseNet(std::vector<int> widths);

  const std::vector<int>& widths() const { return widths_; }
  int input_size() const { return widths_.front(); }
  int num_actions() const { return widths_.back(); }
  std::size_t hidden_layers() const { return widths_.size() - 2; }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  // Layer views; layer == hidden_layers() addresses the value head,
  // hidden_layers() + 1 the advantage head.
  MatrixMap weight(std::size_t layer);
  ConstMatrixMap weight(std::size_t layer) const;
  VectorMap bias(std::size_t layer);
  ConstVectorMap bias(std::size_t layer) const;
  std::size_t value_head() const { return hidden_layers(); }
  std::size_t advantage_head() const { return hidden_layers() + 1; }

  struct Heads {
    Eigen::RowVectorXd value;   // 1 x B
    Eigen::MatrixXd advantage;  // A x B, before mean-centering
    Eigen::MatrixXd q;          // A x B
  };

  // Single observation; throws std::invalid_argument on width mismatch.
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  // One sample per column.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;
  Heads forward_heads(const Eigen::MatrixXd& inputs) const;

  // Backpropagates dL/dQ (A x B, one column per sample of `inputs`) to a
  // flat gradient aligned with parameters().
  Eigen::VectorXd backward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& dq) const;

 private:
  struct Block {
    Eigen::Index weight_offset;
    Eigen::Index bias_offset;
    Eigen::Index rows;
    Eigen::Index cols;
  };

  void check_input(const Eigen::MatrixXd& inputs) const;

  std::vector<int> widths_;
  std::vector<Block> blocks_;
  Eigen::VectorXd params_;
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
DenseNet init_net(const std::vector<int>& widths, Rng& rng);

// Deep copy; the result shares no storage with src.
inline DenseNet copy_params(const DenseNet& src) { return src; }

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam(const DenseNet& net, double learning_rate = 1e-4);

// Bias-corrected Adam update of net.parameters().
void adam_step(DenseNet& net, AdamState& adam, const Eigen::VectorXd& gradient);

// Text checkpoint, version 1:
//   dueling-dense-net 1
//   widths <w0> <w1> ... <wn>
//   then per block "<name> <index> weight <rows> <cols>" followed by one
//   line per row, and "<name> <index> bias <rows>" followed by one line;
//   names are hidden/value/advantage. Values use 17 significant digits.
std::string serialize_net(const DenseNet& net);
DenseNet parse_net(std::string_view text);
void save_net(const DenseNet& net, const std::filesystem::path& path);
DenseNet load_net(const std::filesystem::path& path);

}  // namespace hetnet
