#pragma once

// A single-hidden-layer feed-forward classifier over sparse inputs: ReLU
// hidden activation, softmax output, cross-entropy loss, trained with plain
// mini-batch gradient descent. The forward and backward passes exploit input
// sparsity, so wide tf-idf features stay cheap.
//
// Parameter layout (also the flattening order for gradient checks):
//   w1[j * hidden + h]  input feature j -> hidden unit h
//   b1[h]
//   w2[h * out + o]     hidden unit h -> class o
//   b2[o]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "scholmig/errors.hpp"
#include "scholmig/rng.hpp"
#include "scholmig/tfidf.hpp"

namespace scholmig {

inline void softmax_inplace(std::vector<double>& z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
}

struct NetGradients {
  std::vector<double> w1, b1, w2, b2;

  void zero() {
    std::fill(w1.begin(), w1.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    std::fill(b2.begin(), b2.end(), 0.0);
  }
};

class FeedForwardNet {
 public:
  FeedForwardNet() = default;

  FeedForwardNet(int input_dim, int hidden_dim, int output_dim)
      : input_(input_dim), hidden_(hidden_dim), output_(output_dim),
        w1(static_cast<std::size_t>(input_dim) * hidden_dim, 0.0),
        b1(static_cast<std::size_t>(hidden_dim), 0.0),
        w2(static_cast<std::size_t>(hidden_dim) * output_dim, 0.0),
        b2(static_cast<std::size_t>(output_dim), 0.0) {}

  static FeedForwardNet initialized(int input_dim, int hidden_dim, int output_dim,
                                    std::uint64_t seed) {
    FeedForwardNet net(input_dim, hidden_dim, output_dim);
    DetRng rng(seed);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(std::max(1, input_dim)));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(std::max(1, hidden_dim)));
    for (auto& w : net.w1) w = rng.gaussian() * s1;
    for (auto& w : net.w2) w = rng.gaussian() * s2;
    return net;
  }

  int input_dim() const { return input_; }
  int hidden_dim() const { return hidden_; }
  int output_dim() const { return output_; }

  // Class probabilities; softmax guarantees they sum to 1.
  std::vector<double> forward(const SparseVec& x) const {
    std::vector<double> hidden_pre(b1);
    for (const auto& [j, v] : x.entries) {
      const double* row = &w1[static_cast<std::size_t>(j) * hidden_];
      for (int h = 0; h < hidden_; ++h) hidden_pre[static_cast<std::size_t>(h)] += row[h] * v;
    }
    std::vector<double> logits(b2);
    for (int h = 0; h < hidden_; ++h) {
      const double a = std::max(0.0, hidden_pre[static_cast<std::size_t>(h)]);
      if (a == 0.0) continue;
      const double* row = &w2[static_cast<std::size_t>(h) * output_];
      for (int o = 0; o < output_; ++o) logits[static_cast<std::size_t>(o)] += row[o] * a;
    }
    softmax_inplace(logits);
    return logits;
  }

  // Summed cross-entropy over the batch; gradients are accumulated into g.
  double loss_and_grad(const std::vector<std::pair<const SparseVec*, int>>& batch,
                       NetGradients& g) const {
    double loss = 0.0;
    std::vector<double> hidden_pre(static_cast<std::size_t>(hidden_));
    std::vector<double> d_hidden(static_cast<std::size_t>(hidden_));
    for (const auto& [xp, label] : batch) {
      const SparseVec& x = *xp;
      std::copy(b1.begin(), b1.end(), hidden_pre.begin());
      for (const auto& [j, v] : x.entries) {
        const double* row = &w1[static_cast<std::size_t>(j) * hidden_];
        for (int h = 0; h < hidden_; ++h) hidden_pre[static_cast<std::size_t>(h)] += row[h] * v;
      }
      std::vector<double> probs(b2);
      for (int h = 0; h < hidden_; ++h) {
        const double a = std::max(0.0, hidden_pre[static_cast<std::size_t>(h)]);
        if (a == 0.0) continue;
        const double* row = &w2[static_cast<std::size_t>(h) * output_];
        for (int o = 0; o < output_; ++o) probs[static_cast<std::size_t>(o)] += row[o] * a;
      }
      softmax_inplace(probs);
      loss -= std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));

      // dL/dlogits = probs - onehot(label)
      std::vector<double>& d_logits = probs;
      d_logits[static_cast<std::size_t>(label)] -= 1.0;

      std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
      for (int h = 0; h < hidden_; ++h) {
        const double a = std::max(0.0, hidden_pre[static_cast<std::size_t>(h)]);
        double* grow = &g.w2[static_cast<std::size_t>(h) * output_];
        const double* wrow = &w2[static_cast<std::size_t>(h) * output_];
        double dh = 0.0;
        for (int o = 0; o < output_; ++o) {
          if (a > 0.0) grow[o] += a * d_logits[static_cast<std::size_t>(o)];
          dh += wrow[o] * d_logits[static_cast<std::size_t>(o)];
        }
        if (hidden_pre[static_cast<std::size_t>(h)] > 0.0) {
          d_hidden[static_cast<std::size_t>(h)] = dh;
        }
      }
      for (int o = 0; o < output_; ++o) g.b2[static_cast<std::size_t>(o)] += d_logits[static_cast<std::size_t>(o)];
      for (int h = 0; h < hidden_; ++h) g.b1[static_cast<std::size_t>(h)] += d_hidden[static_cast<std::size_t>(h)];
      for (const auto& [j, v] : x.entries) {
        double* grow = &g.w1[static_cast<std::size_t>(j) * hidden_];
        for (int h = 0; h < hidden_; ++h) grow[h] += v * d_hidden[static_cast<std::size_t>(h)];
      }
    }
    return loss;
  }

  NetGradients make_gradients() const {
    NetGradients g;
    g.w1.assign(w1.size(), 0.0);
    g.b1.assign(b1.size(), 0.0);
    g.w2.assign(w2.size(), 0.0);
    g.b2.assign(b2.size(), 0.0);
    return g;
  }

  void sgd_step(const NetGradients& g, double learning_rate, std::size_t batch_size) {
    const double scale = learning_rate / static_cast<double>(batch_size);
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] -= scale * g.w1[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] -= scale * g.b1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] -= scale * g.w2[i];
    for (std::size_t i = 0; i < b2.size(); ++i) b2[i] -= scale * g.b2[i];
  }

  // Flat parameter view in w1, b1, w2, b2 order (used by the gradient check).
  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  double& parameter(std::size_t i) {
    if (i < w1.size()) return w1[i];
    i -= w1.size();
    if (i < b1.size()) return b1[i];
    i -= b1.size();
    if (i < w2.size()) return w2[i];
    i -= w2.size();
    return b2[i];
  }

  static double flat_gradient(const NetGradients& g, std::size_t i) {
    if (i < g.w1.size()) return g.w1[i];
    i -= g.w1.size();
    if (i < g.b1.size()) return g.b1[i];
    i -= g.b1.size();
    if (i < g.w2.size()) return g.w2[i];
    i -= g.w2.size();
    return g.b2[i];
  }

  bool operator==(const FeedForwardNet& other) const {
    return input_ == other.input_ && hidden_ == other.hidden_ && output_ == other.output_ &&
           w1 == other.w1 && b1 == other.b1 && w2 == other.w2 && b2 == other.b2;
  }

 private:
  int input_ = 0;
  int hidden_ = 0;
  int output_ = 0;

 public:
  std::vector<double> w1, b1, w2, b2;
};

// Largest relative mismatch between analytic gradients and central finite
// differences of the batch loss, over all parameters.
inline double gradient_check(FeedForwardNet net,
                             const std::vector<std::pair<const SparseVec*, int>>& batch,
                             double epsilon = 1e-6) {
  NetGradients g = net.make_gradients();
  net.loss_and_grad(batch, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < net.parameter_count(); ++i) {
    double& p = net.parameter(i);
    const double saved = p;
    p = saved + epsilon;
    NetGradients scratch = net.make_gradients();
    const double loss_plus = net.loss_and_grad(batch, scratch);
    p = saved - epsilon;
    scratch.zero();
    const double loss_minus = net.loss_and_grad(batch, scratch);
    p = saved;
    const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
    const double analytic = FeedForwardNet::flat_gradient(g, i);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

}  // namespace scholmig
