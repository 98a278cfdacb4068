#include "cvflock/cvnet.hpp"

#include <cmath>
#include <string>

namespace cvflock {

namespace {

void check_feature_width(const std::vector<ComplexVector>& x, int want,
                         const char* where) {
  for (const auto& v : x) {
    if (static_cast<int>(v.size()) != want)
      throw ShapeError(std::string(where) + ": node feature width " +
                       std::to_string(v.size()) + ", expected " +
                       std::to_string(want));
  }
}

}  // namespace

InvariantGnn init_invariant(const GnnArch& arch, Rng& rng) {
  if (arch.input_width < 1 || arch.hidden_layers < 1 || arch.width < 1)
    throw ConfigError("init_invariant: widths and layer count must be >= 1");
  InvariantGnn net;
  auto make_layer = [&](int out_w, int in_w) {
    SageLayer layer;
    layer.w = ComplexMatrix(out_w, 2 * in_w);
    const double stddev = std::sqrt(1.0 / (2.0 * layer.w.cols()));
    for (auto& e : layer.w.data())
      e = Complex(rng.normal(0.0, stddev), rng.normal(0.0, stddev));
    return layer;
  };
  int in_w = arch.input_width;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    net.layers.push_back(make_layer(arch.width, in_w));
    net.acts.push_back({std::vector<double>(arch.width, 0.0),
                        std::vector<double>(arch.width, 0.0)});
    in_w = arch.width;
  }
  net.layers.push_back(make_layer(1, in_w));
  return net;
}

ComplexVector message(const ComplexVector& x_j, Complex rot_ij) {
  ComplexVector out(x_j.size());
  for (std::size_t k = 0; k < x_j.size(); ++k) out[k] = rot_ij * x_j[k];
  return out;
}

std::vector<ComplexVector> layer_forward(const SageLayer& layer,
                                         const std::vector<ComplexVector>& x,
                                         const EncodedGraph& g) {
  const int n = g.size();
  if (static_cast<int>(x.size()) != n)
    throw ShapeError("layer_forward: " + std::to_string(x.size()) +
                     " feature vectors for " + std::to_string(n) + " nodes");
  const int in_w = layer.in_width();
  check_feature_width(x, in_w, "layer_forward");

  std::vector<ComplexVector> out(n);
  ComplexVector concat(2 * in_w);
  for (int i = 0; i < n; ++i) {
    ComplexVector agg(in_w, 0.0);
    if (!g.nbrs[i].empty()) {
      for (const auto& e : g.nbrs[i])
        for (int k = 0; k < in_w; ++k) agg[k] += e.rot * x[e.j][k];
      const double inv = 1.0 / static_cast<double>(g.nbrs[i].size());
      for (auto& a : agg) a *= inv;
    }
    for (int k = 0; k < in_w; ++k) {
      concat[k] = x[i][k];
      concat[in_w + k] = agg[k];
    }
    out[i] = cmatvec(layer.w, concat);
  }
  return out;
}

ComplexVector activate(const PhaseAmpActivation& act, const ComplexVector& c) {
  if (static_cast<int>(c.size()) != act.width())
    throw ShapeError("activate: input width " + std::to_string(c.size()) +
                     ", activation width " + std::to_string(act.width()));
  ComplexVector out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double r = std::abs(c[k]);
    if (r < kActivationEps) {
      out[k] = 0.0;
      continue;
    }
    const double t = std::tanh(r + act.mag_bias[k]);
    out[k] = std::polar(1.0, act.phase_bias[k]) * (t / r) * c[k];
  }
  return out;
}

std::vector<Complex> forward(const InvariantGnn& net, const EncodedGraph& g) {
  return forward_traced(net, g).output;
}

InvariantTrace forward_traced(const InvariantGnn& net, const EncodedGraph& g) {
  check_feature_width(g.features, net.input_width(), "forward");
  InvariantTrace tr;
  const std::size_t hidden = net.acts.size();
  std::vector<ComplexVector> x = g.features;
  for (std::size_t l = 0; l < hidden; ++l) {
    tr.inputs.push_back(x);
    auto pre = layer_forward(net.layers[l], x, g);
    tr.preact.push_back(pre);
    for (int i = 0; i < g.size(); ++i) x[i] = activate(net.acts[l], pre[i]);
  }
  tr.inputs.push_back(x);
  auto head = layer_forward(net.layers.back(), x, g);
  tr.output.resize(g.size());
  for (int i = 0; i < g.size(); ++i) tr.output[i] = head[i][0];
  return tr;
}

std::size_t param_count(const InvariantGnn& net) {
  std::size_t c = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    c += 2 * net.layers[l].w.data().size();
    if (l < net.acts.size()) c += 2 * net.acts[l].mag_bias.size();
  }
  return c;
}

std::vector<double> params_flat(const InvariantGnn& net) {
  std::vector<double> p;
  p.reserve(param_count(net));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (const auto& e : net.layers[l].w.data()) {
      p.push_back(e.real());
      p.push_back(e.imag());
    }
    if (l < net.acts.size()) {
      p.insert(p.end(), net.acts[l].mag_bias.begin(),
               net.acts[l].mag_bias.end());
      p.insert(p.end(), net.acts[l].phase_bias.begin(),
               net.acts[l].phase_bias.end());
    }
  }
  return p;
}

void set_params_flat(InvariantGnn& net, const std::vector<double>& p) {
  if (p.size() != param_count(net))
    throw ShapeError("set_params_flat: got " + std::to_string(p.size()) +
                     " values, expected " + std::to_string(param_count(net)));
  std::size_t k = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (auto& e : net.layers[l].w.data()) {
      e = Complex(p[k], p[k + 1]);
      k += 2;
    }
    if (l < net.acts.size()) {
      for (auto& b : net.acts[l].mag_bias) b = p[k++];
      for (auto& th : net.acts[l].phase_bias)
        th = canonical_angle(p[k++]);
    }
  }
}

std::string describe_param(const InvariantGnn& net, std::size_t index) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& w = net.layers[l].w;
    const std::string name =
        l + 1 == net.layers.size() ? "head" : "conv" + std::to_string(l);
    const std::size_t wn = 2 * w.data().size();
    if (index < wn) {
      const std::size_t entry = index / 2;
      return name + ".W[" + std::to_string(entry / w.cols()) + "," +
             std::to_string(entry % w.cols()) + "]." +
             (index % 2 == 0 ? "re" : "im");
    }
    index -= wn;
    if (l < net.acts.size()) {
      const std::size_t width = net.acts[l].mag_bias.size();
      if (index < width)
        return "act" + std::to_string(l) + ".b[" + std::to_string(index) + "]";
      index -= width;
      if (index < width)
        return "act" + std::to_string(l) + ".theta[" + std::to_string(index) +
               "]";
      index -= width;
    }
  }
  return "param[out-of-range]";
}

namespace {

// Adjoint convention: for a complex value z, adj(z) = dL/dRe(z) + j dL/dIm(z).
// For linear ops z = w*x this propagates as adj(x) += conj(w) adj(z) and
// grad(w) += conj(x) adj(z), with grad(w) packing (dL/dRe w, dL/dIm w).

struct LayerGrads {
  std::vector<ComplexMatrix> w;                 // per conv layer
  std::vector<std::vector<double>> mag_bias;    // per hidden layer
  std::vector<std::vector<double>> phase_bias;  // per hidden layer
};

// Adjoint of one conv layer. adj_out is consumed; returns adj of the input.
std::vector<ComplexVector> conv_backward(const SageLayer& layer,
                                         const std::vector<ComplexVector>& x,
                                         const EncodedGraph& g,
                                         const std::vector<ComplexVector>& adj_out,
                                         ComplexMatrix& gw) {
  const int n = g.size();
  const int in_w = layer.in_width();
  const int out_w = layer.out_width();
  std::vector<ComplexVector> adj_x(n, ComplexVector(in_w, 0.0));
  ComplexVector concat(2 * in_w);
  ComplexVector adj_y(2 * in_w);
  for (int i = 0; i < n; ++i) {
    ComplexVector agg(in_w, 0.0);
    const std::size_t deg = g.nbrs[i].size();
    if (deg > 0) {
      for (const auto& e : g.nbrs[i])
        for (int k = 0; k < in_w; ++k) agg[k] += e.rot * x[e.j][k];
      for (auto& a : agg) a /= static_cast<double>(deg);
    }
    for (int k = 0; k < in_w; ++k) {
      concat[k] = x[i][k];
      concat[in_w + k] = agg[k];
    }
    // grad(W) and adj of the concatenated input
    std::fill(adj_y.begin(), adj_y.end(), Complex(0.0));
    for (int r = 0; r < out_w; ++r) {
      const Complex a = adj_out[i][r];
      if (a == Complex(0.0)) continue;
      for (int k = 0; k < 2 * in_w; ++k) {
        gw(r, k) += std::conj(concat[k]) * a;
        adj_y[k] += std::conj(layer.w(r, k)) * a;
      }
    }
    for (int k = 0; k < in_w; ++k) adj_x[i][k] += adj_y[k];
    if (deg > 0) {
      const double inv = 1.0 / static_cast<double>(deg);
      for (const auto& e : g.nbrs[i]) {
        const Complex crot = std::conj(e.rot) * inv;
        for (int k = 0; k < in_w; ++k)
          adj_x[e.j][k] += crot * adj_y[in_w + k];
      }
    }
  }
  return adj_x;
}

// Adjoint of the activation at one node; accumulates bias gradients.
ComplexVector act_backward(const PhaseAmpActivation& act,
                           const ComplexVector& pre,
                           const ComplexVector& adj_out,
                           std::vector<double>& g_b,
                           std::vector<double>& g_th) {
  ComplexVector adj_c(pre.size(), 0.0);
  for (std::size_t k = 0; k < pre.size(); ++k) {
    const Complex c = pre[k];
    const double r = std::abs(c);
    if (r < kActivationEps) continue;  // value and gradient pinned to zero
    const Complex a = adj_out[k];
    const double t = std::tanh(r + act.mag_bias[k]);
    const double tp = 1.0 - t * t;
    const double h = t / r;
    const double hp = (tp * r - t) / (r * r);
    const Complex w = std::polar(1.0, act.phase_bias[k]);
    const Complex p = std::conj(w) * a;
    const Complex q = std::conj(w * c) * a;
    adj_c[k] = h * p + (hp * q.real() / r) * c;
    g_b[k] += tp * q.real() / r;
    g_th[k] += h * q.imag();
  }
  return adj_c;
}

}  // namespace

std::vector<double> backward(const InvariantGnn& net, const EncodedGraph& g,
                             const InvariantTrace& trace,
                             const std::vector<Complex>& cotangent) {
  const int n = g.size();
  if (static_cast<int>(cotangent.size()) != n)
    throw ShapeError("backward: cotangent size " +
                     std::to_string(cotangent.size()) + " for " +
                     std::to_string(n) + " nodes");
  const std::size_t hidden = net.acts.size();

  LayerGrads grads;
  grads.w.reserve(net.layers.size());
  for (const auto& l : net.layers)
    grads.w.emplace_back(l.w.rows(), l.w.cols());
  for (const auto& a : net.acts) {
    grads.mag_bias.emplace_back(a.mag_bias.size(), 0.0);
    grads.phase_bias.emplace_back(a.phase_bias.size(), 0.0);
  }

  // head
  std::vector<ComplexVector> adj(n, ComplexVector(1));
  for (int i = 0; i < n; ++i) adj[i][0] = cotangent[i];
  std::vector<ComplexVector> adj_x = conv_backward(
      net.layers.back(), trace.inputs[hidden], g, adj, grads.w.back());

  for (std::size_t l = hidden; l-- > 0;) {
    std::vector<ComplexVector> adj_pre(n);
    for (int i = 0; i < n; ++i)
      adj_pre[i] = act_backward(net.acts[l], trace.preact[l][i], adj_x[i],
                                grads.mag_bias[l], grads.phase_bias[l]);
    adj_x = conv_backward(net.layers[l], trace.inputs[l], g, adj_pre,
                          grads.w[l]);
  }

  // flatten in the parameter layout
  std::vector<double> flat;
  flat.reserve(param_count(net));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (const auto& e : grads.w[l].data()) {
      flat.push_back(e.real());
      flat.push_back(e.imag());
    }
    if (l < net.acts.size()) {
      flat.insert(flat.end(), grads.mag_bias[l].begin(),
                  grads.mag_bias[l].end());
      flat.insert(flat.end(), grads.phase_bias[l].begin(),
                  grads.phase_bias[l].end());
    }
  }
  return flat;
}

}  // namespace cvflock
