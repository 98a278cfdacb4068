#include "cvflock/baseline.hpp"

#include <cmath>
#include <string>

namespace cvflock {

namespace {

void check_width(const std::vector<RealVector>& x, int want,
                 const char* where) {
  for (const auto& v : x) {
    if (static_cast<int>(v.size()) != want)
      throw ShapeError(std::string(where) + ": node feature width " +
                       std::to_string(v.size()) + ", expected " +
                       std::to_string(want));
  }
}

void encode_angle(double theta, AngleEncoding enc, double* out) {
  if (enc == AngleEncoding::kRaw) {
    out[0] = theta;
  } else {
    out[0] = std::cos(theta);
    out[1] = std::sin(theta);
  }
}

RealVector matvec(const RealMatrix& w, const RealVector& x) {
  RealVector out(static_cast<std::size_t>(w.rows()), 0.0);
  for (int r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (int c = 0; c < w.cols(); ++c) acc += w(r, c) * x[c];
    out[r] = acc;
  }
  return out;
}

}  // namespace

BaselineGnn init_baseline(const BaselineArch& arch, Rng& rng) {
  if (arch.input_width < 1 || arch.hidden_layers < 1 || arch.width < 1 ||
      arch.output_width < 1)
    throw ConfigError("init_baseline: widths and layer count must be >= 1");
  BaselineGnn net;
  net.encoding = arch.encoding;
  const int ad = angle_dims(arch.encoding);
  auto make_layer = [&](int out_w, int in_w) {
    RealSageLayer layer;
    layer.w = RealMatrix(out_w, 2 * in_w + ad);
    const double stddev = std::sqrt(1.0 / layer.w.cols());
    for (auto& e : layer.w.data()) e = rng.normal(0.0, stddev);
    return layer;
  };
  int in_w = arch.input_width;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    net.layers.push_back(make_layer(arch.width, in_w));
    in_w = arch.width;
  }
  net.layers.push_back(make_layer(arch.output_width, in_w));
  return net;
}

RealVector baseline_message(const RealVector& x_j, double theta_ij,
                            AngleEncoding enc) {
  RealVector m(x_j.size() + angle_dims(enc));
  std::copy(x_j.begin(), x_j.end(), m.begin());
  encode_angle(theta_ij, enc, m.data() + x_j.size());
  return m;
}

std::vector<RealVector> real_features(const EncodedGraph& g) {
  std::vector<RealVector> out(g.size());
  for (int i = 0; i < g.size(); ++i) {
    out[i].reserve(2 * g.features[i].size());
    for (const auto& c : g.features[i]) {
      out[i].push_back(c.real());
      out[i].push_back(c.imag());
    }
  }
  return out;
}

std::vector<RealVector> baseline_layer_forward(const RealSageLayer& layer,
                                               const std::vector<RealVector>& x,
                                               const EncodedGraph& g,
                                               AngleEncoding enc) {
  const int n = g.size();
  if (static_cast<int>(x.size()) != n)
    throw ShapeError("baseline_layer_forward: " + std::to_string(x.size()) +
                     " feature vectors for " + std::to_string(n) + " nodes");
  const int ad = angle_dims(enc);
  const int in_w = (layer.w.cols() - ad) / 2;
  check_width(x, in_w, "baseline_layer_forward");

  std::vector<RealVector> out(n);
  RealVector concat(static_cast<std::size_t>(layer.w.cols()), 0.0);
  double enc_buf[2];
  for (int i = 0; i < n; ++i) {
    RealVector agg(static_cast<std::size_t>(in_w) + ad, 0.0);
    const std::size_t deg = g.nbrs[i].size();
    if (deg > 0) {
      for (const auto& e : g.nbrs[i]) {
        for (int k = 0; k < in_w; ++k) agg[k] += x[e.j][k];
        encode_angle(std::arg(e.rot), enc, enc_buf);
        for (int k = 0; k < ad; ++k) agg[in_w + k] += enc_buf[k];
      }
      for (auto& a : agg) a /= static_cast<double>(deg);
    }
    std::copy(x[i].begin(), x[i].end(), concat.begin());
    std::copy(agg.begin(), agg.end(), concat.begin() + in_w);
    out[i] = matvec(layer.w, concat);
  }
  return out;
}

std::vector<RealVector> baseline_forward(const BaselineGnn& net,
                                         const EncodedGraph& g) {
  return baseline_forward_traced(net, g).output;
}

BaselineTrace baseline_forward_traced(const BaselineGnn& net,
                                      const EncodedGraph& g) {
  BaselineTrace tr;
  const int hidden = net.hidden_count();
  std::vector<RealVector> x = real_features(g);
  for (int l = 0; l < hidden; ++l) {
    tr.inputs.push_back(x);
    auto pre = baseline_layer_forward(net.layers[l], x, g, net.encoding);
    tr.preact.push_back(pre);
    for (auto& node : pre)
      for (auto& v : node) v = std::tanh(v);
    x = std::move(pre);
  }
  tr.inputs.push_back(x);
  tr.output = baseline_layer_forward(net.layers.back(), x, g, net.encoding);
  return tr;
}

std::size_t baseline_param_count(const BaselineGnn& net) {
  std::size_t c = 0;
  for (const auto& l : net.layers) c += l.w.data().size();
  return c;
}

std::vector<double> baseline_params_flat(const BaselineGnn& net) {
  std::vector<double> p;
  p.reserve(baseline_param_count(net));
  for (const auto& l : net.layers)
    p.insert(p.end(), l.w.data().begin(), l.w.data().end());
  return p;
}

void baseline_set_params_flat(BaselineGnn& net, const std::vector<double>& p) {
  if (p.size() != baseline_param_count(net))
    throw ShapeError("baseline_set_params_flat: got " +
                     std::to_string(p.size()) + " values, expected " +
                     std::to_string(baseline_param_count(net)));
  std::size_t k = 0;
  for (auto& l : net.layers)
    for (auto& e : l.w.data()) e = p[k++];
}

std::string baseline_describe_param(const BaselineGnn& net,
                                    std::size_t index) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& w = net.layers[l].w;
    const std::string name =
        l + 1 == net.layers.size() ? "head" : "conv" + std::to_string(l);
    if (index < w.data().size())
      return name + ".W[" + std::to_string(index / w.cols()) + "," +
             std::to_string(index % w.cols()) + "]";
    index -= w.data().size();
  }
  return "param[out-of-range]";
}

namespace {

std::vector<RealVector> baseline_conv_backward(
    const RealSageLayer& layer, const std::vector<RealVector>& x,
    const EncodedGraph& g, AngleEncoding enc,
    const std::vector<RealVector>& adj_out, RealMatrix& gw) {
  const int n = g.size();
  const int ad = angle_dims(enc);
  const int in_w = (layer.w.cols() - ad) / 2;
  const int out_w = layer.w.rows();
  std::vector<RealVector> adj_x(n, RealVector(in_w, 0.0));
  RealVector concat(static_cast<std::size_t>(layer.w.cols()), 0.0);
  RealVector adj_y(static_cast<std::size_t>(layer.w.cols()), 0.0);
  double enc_buf[2];
  for (int i = 0; i < n; ++i) {
    RealVector agg(static_cast<std::size_t>(in_w) + ad, 0.0);
    const std::size_t deg = g.nbrs[i].size();
    if (deg > 0) {
      for (const auto& e : g.nbrs[i]) {
        for (int k = 0; k < in_w; ++k) agg[k] += x[e.j][k];
        encode_angle(std::arg(e.rot), enc, enc_buf);
        for (int k = 0; k < ad; ++k) agg[in_w + k] += enc_buf[k];
      }
      for (auto& a : agg) a /= static_cast<double>(deg);
    }
    std::copy(x[i].begin(), x[i].end(), concat.begin());
    std::copy(agg.begin(), agg.end(), concat.begin() + in_w);

    std::fill(adj_y.begin(), adj_y.end(), 0.0);
    for (int r = 0; r < out_w; ++r) {
      const double a = adj_out[i][r];
      if (a == 0.0) continue;
      for (int c = 0; c < layer.w.cols(); ++c) {
        gw(r, c) += concat[c] * a;
        adj_y[c] += layer.w(r, c) * a;
      }
    }
    for (int k = 0; k < in_w; ++k) adj_x[i][k] += adj_y[k];
    if (deg > 0) {
      const double inv = 1.0 / static_cast<double>(deg);
      for (const auto& e : g.nbrs[i])
        for (int k = 0; k < in_w; ++k)
          adj_x[e.j][k] += inv * adj_y[in_w + k];
      // angle slots carry no parameters upstream; nothing to propagate
    }
  }
  return adj_x;
}

}  // namespace

std::vector<double> baseline_backward(const BaselineGnn& net,
                                      const EncodedGraph& g,
                                      const BaselineTrace& trace,
                                      const std::vector<RealVector>& cotangent) {
  const int n = g.size();
  if (static_cast<int>(cotangent.size()) != n)
    throw ShapeError("baseline_backward: cotangent size " +
                     std::to_string(cotangent.size()) + " for " +
                     std::to_string(n) + " nodes");
  const int hidden = net.hidden_count();

  std::vector<RealMatrix> gw;
  gw.reserve(net.layers.size());
  for (const auto& l : net.layers) gw.emplace_back(l.w.rows(), l.w.cols());

  std::vector<RealVector> adj_x = baseline_conv_backward(
      net.layers.back(), trace.inputs[hidden], g, net.encoding, cotangent,
      gw.back());

  for (int l = hidden; l-- > 0;) {
    // tanh adjoint: d tanh(z) = (1 - tanh(z)^2) dz, tanh(z) is the layer input
    std::vector<RealVector> adj_pre(n);
    for (int i = 0; i < n; ++i) {
      const RealVector& act = trace.inputs[l + 1][i];
      adj_pre[i].resize(act.size());
      for (std::size_t k = 0; k < act.size(); ++k)
        adj_pre[i][k] = adj_x[i][k] * (1.0 - act[k] * act[k]);
    }
    adj_x = baseline_conv_backward(net.layers[l], trace.inputs[l], g,
                                   net.encoding, adj_pre, gw[l]);
  }

  std::vector<double> flat;
  flat.reserve(baseline_param_count(net));
  for (const auto& m : gw)
    flat.insert(flat.end(), m.data().begin(), m.data().end());
  return flat;
}

}  // namespace cvflock
