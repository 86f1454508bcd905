#include "hetnet/nn.h"

#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hetnet {
namespace {

Eigen::MatrixXd leaky(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? v : DenseNet::kLeakySlope * v; });
}

Eigen::MatrixXd leaky_grad(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : DenseNet::kLeakySlope; });
}

}  // namespace

DenseNet::DenseNet(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw std::invalid_argument("need at least input and action widths");
  for (int w : widths_) {
    if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
  }
  Eigen::Index offset = 0;
  auto add = [&](Eigen::Index rows, Eigen::Index cols) {
    blocks_.push_back({offset, offset + rows * cols, rows, cols});
    offset += rows * cols + rows;
  };
  for (std::size_t i = 0; i + 2 < widths_.size(); ++i) add(widths_[i + 1], widths_[i]);
  const Eigen::Index last = widths_[widths_.size() - 2];
  add(1, last);
  add(widths_.back(), last);
  params_ = Eigen::VectorXd::Zero(offset);
}

DenseNet::MatrixMap DenseNet::weight(std::size_t layer) {
  const Block& b = blocks_.at(layer);
  return MatrixMap(params_.data() + b.weight_offset, b.rows, b.cols);
}

DenseNet::ConstMatrixMap DenseNet::weight(std::size_t layer) const {
  const Block& b = blocks_.at(layer);
  return ConstMatrixMap(params_.data() + b.weight_offset, b.rows, b.cols);
}

DenseNet::VectorMap DenseNet::bias(std::size_t layer) {
  const Block& b = blocks_.at(layer);
  return VectorMap(params_.data() + b.bias_offset, b.rows);
}

DenseNet::ConstVectorMap DenseNet::bias(std::size_t layer) const {
  const Block& b = blocks_.at(layer);
  return ConstVectorMap(params_.data() + b.bias_offset, b.rows);
}

void DenseNet::check_input(const Eigen::MatrixXd& inputs) const {
  if (widths_.empty()) throw std::invalid_argument("network has no layers");
  if (inputs.rows() != input_size()) {
    throw std::invalid_argument("input width " + std::to_string(inputs.rows()) +
                                " does not match network input " + std::to_string(input_size()));
  }
}

DenseNet::Heads DenseNet::forward_heads(const Eigen::MatrixXd& inputs) const {
  check_input(inputs);
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < hidden_layers(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    a = leaky(z);
  }
  Heads h;
  h.value = (weight(value_head()) * a).row(0);
  h.value.array() += bias(value_head())[0];
  h.advantage = weight(advantage_head()) * a;
  h.advantage.colwise() += bias(advantage_head());
  const Eigen::RowVectorXd mean = h.advantage.colwise().mean();
  h.q = h.advantage;
  h.q.rowwise() += h.value - mean;
  return h;
}

Eigen::MatrixXd DenseNet::forward_batch(const Eigen::MatrixXd& inputs) const {
  return forward_heads(inputs).q;
}

Eigen::VectorXd DenseNet::forward(const Eigen::VectorXd& input) const {
  return forward_batch(input).col(0);
}

Eigen::VectorXd DenseNet::backward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& dq) const {
  check_input(inputs);
  if (dq.rows() != num_actions() || dq.cols() != inputs.cols()) {
    throw std::invalid_argument("dL/dQ shape does not match batch");
  }
  const std::size_t n = hidden_layers();
  std::vector<Eigen::MatrixXd> pre(n);
  std::vector<Eigen::MatrixXd> act(n + 1);
  act[0] = inputs;
  for (std::size_t l = 0; l < n; ++l) {
    pre[l] = weight(l) * act[l];
    pre[l].colwise() += bias(l);
    act[l + 1] = leaky(pre[l]);
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  auto grad_weight = [&](std::size_t layer) {
    const Block& b = blocks_[layer];
    return MatrixMap(grad.data() + b.weight_offset, b.rows, b.cols);
  };
  auto grad_bias = [&](std::size_t layer) {
    const Block& b = blocks_[layer];
    return VectorMap(grad.data() + b.bias_offset, b.rows);
  };

  const Eigen::RowVectorXd d_value = dq.colwise().sum();
  Eigen::MatrixXd d_adv = dq;
  d_adv.rowwise() -= d_value / static_cast<double>(num_actions());

  const Eigen::MatrixXd& top = act[n];
  grad_weight(value_head()) = d_value * top.transpose();
  grad_bias(value_head())[0] = d_value.sum();
  grad_weight(advantage_head()) = d_adv * top.transpose();
  grad_bias(advantage_head()) = d_adv.rowwise().sum();

  if (n == 0) return grad;
  Eigen::MatrixXd d_act = weight(value_head()).transpose() * d_value +
                          weight(advantage_head()).transpose() * d_adv;
  for (std::size_t l = n; l-- > 0;) {
    const Eigen::MatrixXd dz = d_act.cwiseProduct(leaky_grad(pre[l]));
    grad_weight(l) = dz * act[l].transpose();
    grad_bias(l) = dz.rowwise().sum();
    if (l > 0) d_act = weight(l).transpose() * dz;
  }
  return grad;
}

DenseNet init_net(const std::vector<int>& widths, Rng& rng) {
  DenseNet net(widths);
  const std::size_t blocks = net.hidden_layers() + 2;
  for (std::size_t l = 0; l < blocks; ++l) {
    auto w = net.weight(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major fill order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return net;
}

AdamState make_adam(const DenseNet& net, double learning_rate) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(net.parameter_count());
  s.second_moment = Eigen::VectorXd::Zero(net.parameter_count());
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(DenseNet& net, AdamState& adam, const Eigen::VectorXd& gradient) {
  if (gradient.size() != net.parameter_count() ||
      adam.first_moment.size() != net.parameter_count()) {
    throw std::invalid_argument("gradient/optimizer shape does not match network");
  }
  ++adam.step;
  adam.first_moment = adam.beta1 * adam.first_moment + (1.0 - adam.beta1) * gradient;
  adam.second_moment =
      adam.beta2 * adam.second_moment + (1.0 - adam.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  net.parameters().array() -=
      adam.learning_rate * (adam.first_moment.array() / c1) /
      ((adam.second_moment.array() / c2).sqrt() + adam.epsilon);
}

namespace {

constexpr std::string_view kMagic = "dueling-dense-net";
constexpr int kVersion = 1;

void append_number(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("failed to format value");
  out.append(buf, end);
}

std::string block_name(const DenseNet& net, std::size_t layer) {
  if (layer == net.value_head()) return "value 0";
  if (layer == net.advantage_head()) return "advantage 0";
  return "hidden " + std::to_string(layer);
}

class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) throw std::runtime_error("checkpoint truncated");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view word) {
    const auto got = next();
    if (got != word) {
      throw std::runtime_error("checkpoint: expected '" + std::string(word) + "', got '" +
                               std::string(got) + "'");
    }
  }

  long integer() {
    const auto tok = next();
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw std::runtime_error("checkpoint: bad integer '" + std::string(tok) + "'");
    }
    return v;
  }

  double real() {
    const auto tok = next();
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw std::runtime_error("checkpoint: bad number '" + std::string(tok) + "'");
    }
    return v;
  }

  bool done() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ >= text_.size();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_net(const DenseNet& net) {
  std::string out;
  out += std::string(kMagic) + " " + std::to_string(kVersion) + "\nwidths";
  for (int w : net.widths()) out += " " + std::to_string(w);
  out += "\n";
  for (std::size_t l = 0; l < net.hidden_layers() + 2; ++l) {
    const auto w = net.weight(l);
    out += block_name(net, l) + " weight " + std::to_string(w.rows()) + " " +
           std::to_string(w.cols()) + "\n";
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (c) out += ' ';
        append_number(out, w(r, c));
      }
      out += '\n';
    }
    const auto b = net.bias(l);
    out += block_name(net, l) + " bias " + std::to_string(b.size()) + "\n";
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      if (r) out += ' ';
      append_number(out, b[r]);
    }
    out += '\n';
  }
  return out;
}

DenseNet parse_net(std::string_view text) {
  Tokens tok(text);
  tok.expect(kMagic);
  if (tok.integer() != kVersion) throw std::runtime_error("unsupported checkpoint version");
  tok.expect("widths");
  // Width list runs until the first block header.
  std::vector<int> widths;
  Tokens probe = tok;
  for (;;) {
    Tokens save = probe;
    const auto t = probe.next();
    if (t == "hidden" || t == "value") {
      tok = save;
      break;
    }
    widths.push_back(static_cast<int>(Tokens(t).integer()));
  }
  DenseNet net(widths);
  for (std::size_t l = 0; l < net.hidden_layers() + 2; ++l) {
    const std::string name = block_name(net, l);
    const auto space = name.find(' ');
    auto w = net.weight(l);
    tok.expect(name.substr(0, space));
    tok.expect(name.substr(space + 1));
    tok.expect("weight");
    if (tok.integer() != w.rows() || tok.integer() != w.cols()) {
      throw std::runtime_error("checkpoint: weight shape mismatch in " + name);
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = tok.real();
    }
    auto b = net.bias(l);
    tok.expect(name.substr(0, space));
    tok.expect(name.substr(space + 1));
    tok.expect("bias");
    if (tok.integer() != b.size()) throw std::runtime_error("checkpoint: bias shape mismatch");
    for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = tok.real();
  }
  if (!tok.done()) throw std::runtime_error("checkpoint: trailing data");
  return net;
}

void save_net(const DenseNet& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << serialize_net(net);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

DenseNet load_net(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_net(buf.str());
}

}  // namespace hetnet
