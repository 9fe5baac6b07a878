#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scneugm/rng.hpp"

namespace scneugm {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  static Tensor zeros(std::vector<int> shape);
  int numel() const;
};

enum class Activation { None, ReLU, GELU, Sigmoid, Tanh };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);
double activate(Activation a, double x);
// derivative given pre-activation x and post-activation y
double activate_grad(Activation a, double x, double y);

struct DenseSpec {
  std::vector<int> dims;  // widths, >= 2 entries
  Activation hidden = Activation::ReLU;
  Activation output = Activation::None;

  int num_layers() const { return static_cast<int>(dims.size()) - 1; }
  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
  Activation layer_activation(int layer) const {
    return layer + 1 == num_layers() ? output : hidden;
  }
};

struct LstmSpec {
  int input_dim = 1;
  int hidden_dim = 1;
  int layers = 1;
};

// A named slice of a flat parameter vector (row-major rows x cols block).
struct ParamSegment {
  std::string name;
  int offset = 0;
  int rows = 0;
  int cols = 0;
  int size() const { return rows * cols; }
};

struct ParamLayout {
  std::vector<ParamSegment> segments;
  int total = 0;

  int add(const std::string& name, int rows, int cols);
  const ParamSegment& find(const std::string& name) const;
  bool has(const std::string& name) const;
  bool same_as(const ParamLayout& other) const;
};

using LayoutPtr = std::shared_ptr<const ParamLayout>;

// Flat parameter carrier. Segment views are the "unflatten" side of the
// contract; the flat values are what SGD and the ES touch.
struct ParamVector {
  LayoutPtr layout;
  std::vector<double> values;

  static ParamVector zeros(LayoutPtr layout);
  std::span<double> seg(const std::string& name);
  std::span<const double> seg(const std::string& name) const;
  int size() const { return static_cast<int>(values.size()); }
};

class LayoutBuilder {
 public:
  // dense: <prefix>W<l> (out x in), <prefix>b<l> (out x 1)
  void add_dense(const std::string& prefix, const DenseSpec& spec);
  // lstm: <prefix>Wx<l> (4H x in), <prefix>Wh<l> (4H x H), <prefix>b<l> (4H x 1);
  // gate row order: input, forget, cell, output
  void add_lstm(const std::string& prefix, const LstmSpec& spec);
  LayoutPtr build();

 private:
  std::shared_ptr<ParamLayout> layout_ = std::make_shared<ParamLayout>();
};

LayoutPtr dense_layout(const DenseSpec& spec, const std::string& prefix = "");
LayoutPtr lstm_layout(const LstmSpec& spec, const std::string& prefix = "");

// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, +1 LSTM forget
// bias. Draw order follows the layout, so init is reproducible. The LSTM
// weight bound takes an optional gain (partial saturation speeds up the
// recurrent autoencoder).
void init_dense(const DenseSpec& spec, const std::string& prefix,
                ParamVector& params, Rng& rng);
void init_lstm(const LstmSpec& spec, const std::string& prefix,
               ParamVector& params, Rng& rng, double gain = 1.0);

struct DenseCache {
  // act[0] is the input; act[l+1]/pre[l] per layer
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
};

void dense_forward(const DenseSpec& spec, const ParamVector& params,
                   const std::string& prefix, std::span<const double> input,
                   std::span<double> output, DenseCache* cache = nullptr);

// Accumulates parameter gradients into `grads`; writes d(loss)/d(input) into
// `dinput` when nonempty.
void dense_backward(const DenseSpec& spec, const ParamVector& params,
                    const std::string& prefix, const DenseCache& cache,
                    std::span<const double> doutput, ParamVector& grads,
                    std::span<double> dinput);

struct LstmCache {
  int steps = 0;
  // indexed [layer][t]; gates stored post-nonlinearity
  std::vector<std::vector<std::vector<double>>> x, gi, gf, gg, go, c, tanh_c, h;
};

// Runs the stacked LSTM over `seq`. hidden_all (optional) receives the
// last-layer hidden state at every position; h_final the last of them.
// Initial hidden and cell states are zero.
void lstm_forward(const LstmSpec& spec, const ParamVector& params,
                  const std::string& prefix,
                  const std::vector<std::vector<double>>& seq,
                  std::vector<std::vector<double>>* hidden_all,
                  std::vector<double>* h_final, LstmCache* cache = nullptr);

// BPTT. dh_all holds d(loss)/d(last-layer h_t) per position (empty vectors
// allowed). dinputs (optional) receives per-position input gradients.
void lstm_backward(const LstmSpec& spec, const ParamVector& params,
                   const std::string& prefix, const LstmCache& cache,
                   const std::vector<std::vector<double>>& dh_all,
                   ParamVector& grads,
                   std::vector<std::vector<double>>* dinputs);

// params - lr * grads (layouts must match)
ParamVector sgd_step(const ParamVector& params, const ParamVector& grads,
                     double lr);

// scales grads down to the given global L2 norm when they exceed it
// (spike guard for the recurrent training loops); max_norm <= 0 disables
void clip_norm(ParamVector& grads, double max_norm);

// mean + exp(log_var/2) * N(0, I), elementwise
ParamVector gaussian_sample(const ParamVector& mean, const ParamVector& log_var,
                            Rng& rng);

}  // namespace scneugm
