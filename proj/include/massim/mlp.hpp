#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "massim/rng.hpp"

namespace massim {

// Minimal fully-connected network: rectifier on hidden layers, identity on
// the output. Weights are row-major [out x in] per layer.
class Mlp {
 public:
  Mlp() = default;

  // sizes includes input and output dimensions.
  static Mlp make(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two layers");
    Mlp net;
    net.sizes_ = sizes;
    net.weights_.resize(sizes.size() - 1);
    net.biases_.resize(sizes.size() - 1);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      int in = sizes[l], out = sizes[l + 1];
      double scale = std::sqrt(1.0 / in);  // fan-in scaled uniform
      net.weights_[l].resize(static_cast<std::size_t>(out) * in);
      net.biases_[l].assign(out, 0.0);
      for (double& w : net.weights_[l]) w = rng.uniform(-scale, scale);
    }
    return net;
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  std::vector<double>& weights(int l) { return weights_[l]; }
  const std::vector<double>& weights(int l) const { return weights_[l]; }
  std::vector<double>& biases(int l) { return biases_[l]; }
  const std::vector<double>& biases(int l) const { return biases_[l]; }

  std::vector<double> forward(const std::vector<double>& input) const {
    if (static_cast<int>(input.size()) != input_dim())
      throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    std::vector<double> cur = input, next;
    for (int l = 0; l < num_layers(); ++l) {
      affine(l, cur, next);
      if (l + 1 < num_layers())
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      cur.swap(next);
    }
    return cur;
  }

  // Per-layer post-activation values, activations[0] == input.
  struct ForwardCache {
    std::vector<std::vector<double>> activations;
  };

  std::vector<double> forward_cached(const std::vector<double>& input,
                                     ForwardCache& cache) const {
    if (static_cast<int>(input.size()) != input_dim())
      throw std::invalid_argument("Mlp::forward_cached: input dimension mismatch");
    cache.activations.assign(1, input);
    std::vector<double> next;
    for (int l = 0; l < num_layers(); ++l) {
      affine(l, cache.activations.back(), next);
      if (l + 1 < num_layers())
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      cache.activations.push_back(next);
    }
    return cache.activations.back();
  }

  struct Grad {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void zero_like(const Mlp& net) {
      weights.resize(net.num_layers());
      biases.resize(net.num_layers());
      for (int l = 0; l < net.num_layers(); ++l) {
        weights[l].assign(net.weights(l).size(), 0.0);
        biases[l].assign(net.biases(l).size(), 0.0);
      }
    }
    void scale(double s) {
      for (auto& w : weights)
        for (double& v : w) v *= s;
      for (auto& b : biases)
        for (double& v : b) v *= s;
    }
  };

  // Accumulates d(loss)/d(theta) into grad given d(loss)/d(output).
  void backward(const ForwardCache& cache, const std::vector<double>& d_output,
                Grad& grad) const {
    std::vector<double> delta = d_output, prev_delta;
    for (int l = num_layers() - 1; l >= 0; --l) {
      const std::vector<double>& a_in = cache.activations[l];
      const int in = sizes_[l], out = sizes_[l + 1];
      for (int o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        grad.biases[l][o] += d;
        double* gw = grad.weights[l].data() + static_cast<std::size_t>(o) * in;
        const double* ai = a_in.data();
        for (int i = 0; i < in; ++i) gw[i] += d * ai[i];
      }
      if (l == 0) break;
      prev_delta.assign(in, 0.0);
      const double* w = weights_[l].data();
      for (int o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* wr = w + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) prev_delta[i] += d * wr[i];
      }
      // rectifier derivative at the layer-l output
      for (int i = 0; i < in; ++i)
        if (a_in[i] <= 0.0) prev_delta[i] = 0.0;
      delta.swap(prev_delta);
    }
  }

  // theta <- theta - step * grad (descent on the loss).
  void apply_gradient(const Grad& grad, double step) {
    for (int l = 0; l < num_layers(); ++l) {
      for (std::size_t i = 0; i < weights_[l].size(); ++i)
        weights_[l][i] -= step * grad.weights[l][i];
      for (std::size_t i = 0; i < biases_[l].size(); ++i)
        biases_[l][i] -= step * grad.biases[l][i];
    }
  }

  bool finite() const {
    for (const auto& layer : weights_)
      for (double v : layer)
        if (!std::isfinite(v)) return false;
    for (const auto& layer : biases_)
      for (double v : layer)
        if (!std::isfinite(v)) return false;
    return true;
  }

  // Versioned text checkpoint with hexfloat parameters; round-trip is
  // bit-exact.
  void save(std::ostream& out) const {
    out << "massim-qnet 1\n" << sizes_.size();
    for (int s : sizes_) out << " " << s;
    out << "\n";
    char buf[64];
    for (int l = 0; l < num_layers(); ++l) {
      for (double v : weights_[l]) {
        std::snprintf(buf, sizeof buf, "%a\n", v);
        out << buf;
      }
      for (double v : biases_[l]) {
        std::snprintf(buf, sizeof buf, "%a\n", v);
        out << buf;
      }
    }
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    save(out);
  }

  static Mlp load(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "massim-qnet" || version != "1")
      throw std::runtime_error("bad checkpoint header");
    std::size_t n = 0;
    in >> n;
    if (n < 2 || n > 64) throw std::runtime_error("bad checkpoint layer count");
    Mlp net;
    net.sizes_.resize(n);
    for (auto& s : net.sizes_) in >> s;
    net.weights_.resize(n - 1);
    net.biases_.resize(n - 1);
    for (std::size_t l = 0; l + 1 < n; ++l) {
      net.weights_[l].resize(static_cast<std::size_t>(net.sizes_[l]) * net.sizes_[l + 1]);
      net.biases_[l].resize(net.sizes_[l + 1]);
      for (double& v : net.weights_[l]) v = read_hex(in);
      for (double& v : net.biases_[l]) v = read_hex(in);
    }
    if (!in) throw std::runtime_error("truncated checkpoint");
    return net;
  }

  static Mlp load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return load(in);
  }

  bool same_architecture(const Mlp& other) const { return sizes_ == other.sizes_; }

 private:
  void affine(int l, const std::vector<double>& in, std::vector<double>& out) const {
    const int ni = sizes_[l], no = sizes_[l + 1];
    out.assign(no, 0.0);
    const double* w = weights_[l].data();
    const double* x = in.data();
    for (int o = 0; o < no; ++o) {
      const double* wr = w + static_cast<std::size_t>(o) * ni;
      double acc = biases_[l][o];
      for (int i = 0; i < ni; ++i) acc += wr[i] * x[i];
      out[o] = acc;
    }
  }

  static double read_hex(std::istream& in) {
    std::string tok;
    in >> tok;
    return std::strtod(tok.c_str(), nullptr);
  }

  std::vector<int> sizes_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

}  // namespace massim
