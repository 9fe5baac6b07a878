#include "scneugm/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace scneugm {

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  t.shape = std::move(shape);
  t.values.assign(size_t(t.numel()), 0.0);
  return t;
}

int Tensor::numel() const {
  int n = 1;
  for (int d : shape) n *= d;
  return n;
}

Activation activation_from_name(const std::string& name) {
  if (name == "none") return Activation::None;
  if (name == "relu") return Activation::ReLU;
  if (name == "gelu") return Activation::GELU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::ReLU: return "relu";
    case Activation::GELU: return "gelu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
  }
  return "none";
}

namespace {
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}
}  // namespace

double activate(Activation a, double x) {
  switch (a) {
    case Activation::None: return x;
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::GELU: return x * std_normal_cdf(x);  // exact CDF form
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::Tanh: return std::tanh(x);
  }
  return x;
}

double activate_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::None: return 1.0;
    case Activation::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Activation::GELU: return std_normal_cdf(x) + x * std_normal_pdf(x);
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::Tanh: return 1.0 - y * y;
  }
  return 1.0;
}

int ParamLayout::add(const std::string& name, int rows, int cols) {
  for (const auto& s : segments)
    if (s.name == name)
      throw std::invalid_argument("duplicate parameter segment: " + name);
  segments.push_back({name, total, rows, cols});
  total += rows * cols;
  return segments.back().offset;
}

const ParamSegment& ParamLayout::find(const std::string& name) const {
  for (const auto& s : segments)
    if (s.name == name) return s;
  throw std::invalid_argument("unknown parameter segment: " + name);
}

bool ParamLayout::has(const std::string& name) const {
  for (const auto& s : segments)
    if (s.name == name) return true;
  return false;
}

bool ParamLayout::same_as(const ParamLayout& other) const {
  if (total != other.total || segments.size() != other.segments.size())
    return false;
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& a = segments[i];
    const auto& b = other.segments[i];
    if (a.name != b.name || a.offset != b.offset || a.rows != b.rows ||
        a.cols != b.cols)
      return false;
  }
  return true;
}

ParamVector ParamVector::zeros(LayoutPtr layout) {
  ParamVector p;
  p.values.assign(size_t(layout->total), 0.0);
  p.layout = std::move(layout);
  return p;
}

std::span<double> ParamVector::seg(const std::string& name) {
  const auto& s = layout->find(name);
  return {values.data() + s.offset, size_t(s.size())};
}

std::span<const double> ParamVector::seg(const std::string& name) const {
  const auto& s = layout->find(name);
  return {values.data() + s.offset, size_t(s.size())};
}

void LayoutBuilder::add_dense(const std::string& prefix, const DenseSpec& spec) {
  if (spec.dims.size() < 2)
    throw std::invalid_argument("DenseSpec needs at least two dims");
  for (int l = 0; l < spec.num_layers(); ++l) {
    layout_->add(prefix + "W" + std::to_string(l), spec.dims[l + 1],
                 spec.dims[l]);
    layout_->add(prefix + "b" + std::to_string(l), spec.dims[l + 1], 1);
  }
}

void LayoutBuilder::add_lstm(const std::string& prefix, const LstmSpec& spec) {
  if (spec.layers < 1) throw std::invalid_argument("LstmSpec needs layers >= 1");
  for (int l = 0; l < spec.layers; ++l) {
    const int in = l == 0 ? spec.input_dim : spec.hidden_dim;
    layout_->add(prefix + "Wx" + std::to_string(l), 4 * spec.hidden_dim, in);
    layout_->add(prefix + "Wh" + std::to_string(l), 4 * spec.hidden_dim,
                 spec.hidden_dim);
    layout_->add(prefix + "b" + std::to_string(l), 4 * spec.hidden_dim, 1);
  }
}

LayoutPtr LayoutBuilder::build() { return layout_; }

LayoutPtr dense_layout(const DenseSpec& spec, const std::string& prefix) {
  LayoutBuilder b;
  b.add_dense(prefix, spec);
  return b.build();
}

LayoutPtr lstm_layout(const LstmSpec& spec, const std::string& prefix) {
  LayoutBuilder b;
  b.add_lstm(prefix, spec);
  return b.build();
}

namespace {
void glorot_fill(std::span<double> w, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
  for (double& v : w) v = rng.uniform(-bound, bound);
}
}  // namespace

void init_dense(const DenseSpec& spec, const std::string& prefix,
                ParamVector& params, Rng& rng) {
  for (int l = 0; l < spec.num_layers(); ++l) {
    glorot_fill(params.seg(prefix + "W" + std::to_string(l)), spec.dims[l],
                spec.dims[l + 1], rng);
    auto b = params.seg(prefix + "b" + std::to_string(l));
    for (double& v : b) v = 0.0;
  }
}

void init_lstm(const LstmSpec& spec, const std::string& prefix,
               ParamVector& params, Rng& rng, double gain) {
  const int h = spec.hidden_dim;
  for (int l = 0; l < spec.layers; ++l) {
    const int in = l == 0 ? spec.input_dim : h;
    auto wx = params.seg(prefix + "Wx" + std::to_string(l));
    glorot_fill(wx, in, h, rng);
    for (double& v : wx) v *= gain;
    auto wh = params.seg(prefix + "Wh" + std::to_string(l));
    glorot_fill(wh, h, h, rng);
    for (double& v : wh) v *= gain;
    auto b = params.seg(prefix + "b" + std::to_string(l));
    for (double& v : b) v = 0.0;
    for (int i = h; i < 2 * h; ++i) b[i] = 1.0;  // forget gate
  }
}

void dense_forward(const DenseSpec& spec, const ParamVector& params,
                   const std::string& prefix, std::span<const double> input,
                   std::span<double> output, DenseCache* cache) {
  if (static_cast<int>(input.size()) != spec.in_dim())
    throw std::invalid_argument("dense_forward: input width mismatch");
  if (static_cast<int>(output.size()) != spec.out_dim())
    throw std::invalid_argument("dense_forward: output width mismatch");
  std::vector<double> cur(input.begin(), input.end());
  if (cache) {
    cache->pre.assign(spec.num_layers(), {});
    cache->act.assign(spec.num_layers() + 1, {});
    cache->act[0] = cur;
  }
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int in = spec.dims[l];
    const int out = spec.dims[l + 1];
    auto w = params.seg(prefix + "W" + std::to_string(l));
    auto b = params.seg(prefix + "b" + std::to_string(l));
    std::vector<double> nxt(out);
    const Activation act = spec.layer_activation(l);
    std::vector<double> pre(out);
    for (int i = 0; i < out; ++i) {
      double acc = b[i];
      const double* wr = w.data() + size_t(i) * in;
      for (int j = 0; j < in; ++j) acc += wr[j] * cur[j];
      pre[i] = acc;
      nxt[i] = activate(act, acc);
    }
    if (cache) {
      cache->pre[l] = pre;
      cache->act[l + 1] = nxt;
    }
    cur = std::move(nxt);
  }
  std::copy(cur.begin(), cur.end(), output.begin());
}

void dense_backward(const DenseSpec& spec, const ParamVector& params,
                    const std::string& prefix, const DenseCache& cache,
                    std::span<const double> doutput, ParamVector& grads,
                    std::span<double> dinput) {
  std::vector<double> dcur(doutput.begin(), doutput.end());
  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const int in = spec.dims[l];
    const int out = spec.dims[l + 1];
    const Activation act = spec.layer_activation(l);
    auto w = params.seg(prefix + "W" + std::to_string(l));
    auto gw = grads.seg(prefix + "W" + std::to_string(l));
    auto gb = grads.seg(prefix + "b" + std::to_string(l));
    const auto& pre = cache.pre[l];
    const auto& post = cache.act[l + 1];
    const auto& below = cache.act[l];
    std::vector<double> dz(out);
    for (int i = 0; i < out; ++i)
      dz[i] = dcur[i] * activate_grad(act, pre[i], post[i]);
    std::vector<double> dprev(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double g = dz[i];
      gb[i] += g;
      double* gwr = gw.data() + size_t(i) * in;
      const double* wr = w.data() + size_t(i) * in;
      for (int j = 0; j < in; ++j) {
        gwr[j] += g * below[j];
        dprev[j] += g * wr[j];
      }
    }
    dcur = std::move(dprev);
  }
  if (!dinput.empty()) {
    if (dinput.size() != dcur.size())
      throw std::invalid_argument("dense_backward: dinput width mismatch");
    std::copy(dcur.begin(), dcur.end(), dinput.begin());
  }
}

void lstm_forward(const LstmSpec& spec, const ParamVector& params,
                  const std::string& prefix,
                  const std::vector<std::vector<double>>& seq,
                  std::vector<std::vector<double>>* hidden_all,
                  std::vector<double>* h_final, LstmCache* cache) {
  const int steps = static_cast<int>(seq.size());
  if (steps == 0) throw std::invalid_argument("lstm_forward: empty sequence");
  const int h = spec.hidden_dim;
  LstmCache local;
  LstmCache& c = cache ? *cache : local;
  c.steps = steps;
  auto resize = [&](auto& field) {
    field.assign(spec.layers, std::vector<std::vector<double>>(steps));
  };
  resize(c.x);
  resize(c.gi);
  resize(c.gf);
  resize(c.gg);
  resize(c.go);
  resize(c.c);
  resize(c.tanh_c);
  resize(c.h);

  std::vector<double> layer_in;
  for (int l = 0; l < spec.layers; ++l) {
    const int in = l == 0 ? spec.input_dim : h;
    auto wx = params.seg(prefix + "Wx" + std::to_string(l));
    auto wh = params.seg(prefix + "Wh" + std::to_string(l));
    auto b = params.seg(prefix + "b" + std::to_string(l));
    std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0);
    for (int t = 0; t < steps; ++t) {
      const std::vector<double>& x = l == 0 ? seq[t] : c.h[l - 1][t];
      if (static_cast<int>(x.size()) != in)
        throw std::invalid_argument("lstm_forward: input width mismatch");
      std::vector<double> gi(h), gf(h), gg(h), go(h), cc(h), th(h), hh(h);
      for (int u = 0; u < h; ++u) {
        double zi = b[u], zf = b[h + u], zg = b[2 * h + u], zo = b[3 * h + u];
        const double* wxi = wx.data() + size_t(u) * in;
        const double* wxf = wx.data() + size_t(h + u) * in;
        const double* wxg = wx.data() + size_t(2 * h + u) * in;
        const double* wxo = wx.data() + size_t(3 * h + u) * in;
        for (int j = 0; j < in; ++j) {
          const double xv = x[j];
          zi += wxi[j] * xv;
          zf += wxf[j] * xv;
          zg += wxg[j] * xv;
          zo += wxo[j] * xv;
        }
        const double* whi = wh.data() + size_t(u) * h;
        const double* whf = wh.data() + size_t(h + u) * h;
        const double* whg = wh.data() + size_t(2 * h + u) * h;
        const double* who = wh.data() + size_t(3 * h + u) * h;
        for (int j = 0; j < h; ++j) {
          const double hv = h_prev[j];
          zi += whi[j] * hv;
          zf += whf[j] * hv;
          zg += whg[j] * hv;
          zo += who[j] * hv;
        }
        gi[u] = activate(Activation::Sigmoid, zi);
        gf[u] = activate(Activation::Sigmoid, zf);
        gg[u] = std::tanh(zg);
        go[u] = activate(Activation::Sigmoid, zo);
        cc[u] = gf[u] * c_prev[u] + gi[u] * gg[u];
        th[u] = std::tanh(cc[u]);
        hh[u] = go[u] * th[u];
      }
      c.x[l][t] = x;
      c.gi[l][t] = std::move(gi);
      c.gf[l][t] = std::move(gf);
      c.gg[l][t] = std::move(gg);
      c.go[l][t] = std::move(go);
      c.c[l][t] = cc;
      c.tanh_c[l][t] = std::move(th);
      c.h[l][t] = hh;
      h_prev = c.h[l][t];
      c_prev = std::move(cc);
    }
  }
  if (hidden_all) *hidden_all = c.h[spec.layers - 1];
  if (h_final) *h_final = c.h[spec.layers - 1][steps - 1];
}

void lstm_backward(const LstmSpec& spec, const ParamVector& params,
                   const std::string& prefix, const LstmCache& cache,
                   const std::vector<std::vector<double>>& dh_all,
                   ParamVector& grads,
                   std::vector<std::vector<double>>* dinputs) {
  const int steps = cache.steps;
  const int h = spec.hidden_dim;
  // gradient flowing into each layer's hidden outputs, per position
  std::vector<std::vector<double>> dh_layer(steps, std::vector<double>(h, 0.0));
  for (int t = 0; t < steps; ++t)
    if (t < static_cast<int>(dh_all.size()) && !dh_all[t].empty())
      dh_layer[t] = dh_all[t];

  for (int l = spec.layers - 1; l >= 0; --l) {
    const int in = l == 0 ? spec.input_dim : h;
    auto wx = params.seg(prefix + "Wx" + std::to_string(l));
    auto wh = params.seg(prefix + "Wh" + std::to_string(l));
    auto gwx = grads.seg(prefix + "Wx" + std::to_string(l));
    auto gwh = grads.seg(prefix + "Wh" + std::to_string(l));
    auto gb = grads.seg(prefix + "b" + std::to_string(l));
    std::vector<std::vector<double>> dx(steps, std::vector<double>(in, 0.0));
    std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
    for (int t = steps - 1; t >= 0; --t) {
      const auto& gi = cache.gi[l][t];
      const auto& gf = cache.gf[l][t];
      const auto& gg = cache.gg[l][t];
      const auto& go = cache.go[l][t];
      const auto& th = cache.tanh_c[l][t];
      const auto& x = cache.x[l][t];
      const std::vector<double>* c_prev = t > 0 ? &cache.c[l][t - 1] : nullptr;
      const std::vector<double>* h_prev = t > 0 ? &cache.h[l][t - 1] : nullptr;
      std::vector<double> dzi(h), dzf(h), dzg(h), dzo(h);
      std::vector<double> dh_prev(h, 0.0), dc_prev(h, 0.0);
      for (int u = 0; u < h; ++u) {
        const double dh = dh_layer[t][u] + dh_next[u];
        const double dgo = dh * th[u];
        double dc = dh * go[u] * (1.0 - th[u] * th[u]) + dc_next[u];
        const double dgi = dc * gg[u];
        const double dgg = dc * gi[u];
        const double dgf = dc * (c_prev ? (*c_prev)[u] : 0.0);
        dc_prev[u] = dc * gf[u];
        dzi[u] = dgi * gi[u] * (1.0 - gi[u]);
        dzf[u] = dgf * gf[u] * (1.0 - gf[u]);
        dzg[u] = dgg * (1.0 - gg[u] * gg[u]);
        dzo[u] = dgo * go[u] * (1.0 - go[u]);
      }
      auto accumulate = [&](const std::vector<double>& dz, int block) {
        for (int u = 0; u < h; ++u) {
          const double g = dz[u];
          gb[block * h + u] += g;
          double* gx = gwx.data() + size_t(block * h + u) * in;
          for (int j = 0; j < in; ++j) gx[j] += g * x[j];
          if (h_prev) {
            double* gh = gwh.data() + size_t(block * h + u) * h;
            for (int j = 0; j < h; ++j) gh[j] += g * (*h_prev)[j];
          }
          const double* wxr = wx.data() + size_t(block * h + u) * in;
          for (int j = 0; j < in; ++j) dx[t][j] += g * wxr[j];
          const double* whr = wh.data() + size_t(block * h + u) * h;
          for (int j = 0; j < h; ++j) dh_prev[j] += g * whr[j];
        }
      };
      accumulate(dzi, 0);
      accumulate(dzf, 1);
      accumulate(dzg, 2);
      accumulate(dzo, 3);
      dh_next = std::move(dh_prev);
      dc_next = std::move(dc_prev);
    }
    if (l > 0) {
      dh_layer = std::move(dx);  // feeds the layer below as its hidden grad
    } else if (dinputs) {
      *dinputs = std::move(dx);
    }
  }
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grads,
                     double lr) {
  if (!params.layout->same_as(*grads.layout))
    throw std::invalid_argument("sgd_step: layout mismatch");
  ParamVector out = params;
  for (size_t i = 0; i < out.values.size(); ++i)
    out.values[i] -= lr * grads.values[i];
  return out;
}

void clip_norm(ParamVector& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (double v : grads.values) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (double& v : grads.values) v *= scale;
}

ParamVector gaussian_sample(const ParamVector& mean, const ParamVector& log_var,
                            Rng& rng) {
  if (!mean.layout->same_as(*log_var.layout))
    throw std::invalid_argument("gaussian_sample: layout mismatch");
  ParamVector out = mean;
  for (size_t i = 0; i < out.values.size(); ++i)
    out.values[i] += std::exp(0.5 * log_var.values[i]) * rng.normal();
  return out;
}

}  // namespace scneugm
