#include "robustnav/picnn.hpp"

#include <string>

namespace robustnav::picnn {

namespace {

int in_u(const Params& p, int l) { return l == 0 ? p.context_dim : p.hidden; }
int out_dim(const Params& p, int l) { return l == p.layers ? 1 : p.hidden; }

void expect_shape(const Matrix& m, Eigen::Index r, Eigen::Index c, const char* name, int l) {
  if (m.rows() != r || m.cols() != c)
    throw ShapeMismatch("picnn: layer " + std::to_string(l) + " " + name + " is " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                        std::to_string(r) + "x" + std::to_string(c));
}

void expect_len(const Vector& v, Eigen::Index n, const char* name, int l) {
  if (v.size() != n)
    throw ShapeMismatch("picnn: layer " + std::to_string(l) + " " + name + " has length " +
                        std::to_string(v.size()) + ", expected " + std::to_string(n));
}

Layer zero_layer(const Params& p, int l) {
  const int iu = in_u(p, l), out = out_dim(p, l), d = p.hidden, v = p.input_dim;
  Layer L;
  if (l < p.layers) {
    L.context_weight = Matrix::Zero(d, iu);
    L.context_bias = Vector::Zero(d);
  }
  L.convex_weight = Matrix::Zero(out, d);
  L.convex_gate_weight = Matrix::Zero(d, iu);
  L.convex_gate_bias = Vector::Zero(d);
  L.input_weight = Matrix::Zero(out, v);
  L.input_gate_weight = Matrix::Zero(v, iu);
  L.input_gate_bias = Vector::Zero(v);
  L.bias_weight = Matrix::Zero(out, iu);
  L.bias_offset = Vector::Zero(out);
  return L;
}

Params skeleton(int layers, int hidden, int context_dim, int input_dim) {
  if (layers < 1 || hidden < 1 || context_dim < 1 || input_dim < 1)
    throw InvalidArgument("picnn: dimensions must be positive");
  Params p;
  p.layers = layers;
  p.hidden = hidden;
  p.context_dim = context_dim;
  p.input_dim = input_dim;
  for (int l = 0; l <= layers; ++l) p.layer.push_back(zero_layer(p, l));
  return p;
}

}  // namespace

void Params::validate() const {
  if (layers < 1 || hidden < 1 || context_dim < 1 || input_dim < 1)
    throw ShapeMismatch("picnn: dimensions must be positive");
  if (static_cast<int>(layer.size()) != layers + 1)
    throw ShapeMismatch("picnn: expected " + std::to_string(layers + 1) + " layers");
  if (!(compactness_epsilon >= 0.0)) throw ShapeMismatch("picnn: compactness_epsilon must be >= 0");
  for (int l = 0; l <= layers; ++l) {
    const Layer& L = layer[l];
    const int iu = in_u(*this, l), out = out_dim(*this, l);
    if (l < layers) {
      expect_shape(L.context_weight, hidden, iu, "context_weight", l);
      expect_len(L.context_bias, hidden, "context_bias", l);
    } else if (L.context_weight.size() != 0 || L.context_bias.size() != 0) {
      throw ShapeMismatch("picnn: output layer has no context path");
    }
    expect_shape(L.convex_weight, out, hidden, "convex_weight", l);
    expect_shape(L.convex_gate_weight, hidden, iu, "convex_gate_weight", l);
    expect_len(L.convex_gate_bias, hidden, "convex_gate_bias", l);
    expect_shape(L.input_weight, out, input_dim, "input_weight", l);
    expect_shape(L.input_gate_weight, input_dim, iu, "input_gate_weight", l);
    expect_len(L.input_gate_bias, input_dim, "input_gate_bias", l);
    expect_shape(L.bias_weight, out, iu, "bias_weight", l);
    expect_len(L.bias_offset, out, "bias_offset", l);
  }
}

EffectiveMaps effective_maps(const Params& p, const Vector& x) {
  p.validate();
  if (x.size() != p.context_dim)
    throw ShapeMismatch("picnn: context has length " + std::to_string(x.size()) + ", expected " +
                        std::to_string(p.context_dim));
  EffectiveMaps e;
  Vector u = x;
  for (int l = 0; l <= p.layers; ++l) {
    const Layer& L = p.layer[l];
    const Vector gate_w = (L.convex_gate_weight * u + L.convex_gate_bias).cwiseMax(0.0);
    const Vector gate_v = L.input_gate_weight * u + L.input_gate_bias;
    e.u.push_back(u);
    e.w.push_back(L.convex_weight * gate_w.asDiagonal());
    e.v.push_back(L.input_weight * gate_v.asDiagonal());
    e.b.push_back(L.bias_weight * u + L.bias_offset);
    if (l < p.layers) u = (L.context_weight * u + L.context_bias).cwiseMax(0.0);
  }
  return e;
}

Activations forward(const Params& p, const Vector& x, const Vector& m) {
  if (m.size() != p.input_dim)
    throw ShapeMismatch("picnn: input has length " + std::to_string(m.size()) + ", expected " +
                        std::to_string(p.input_dim));
  return forward(p, effective_maps(p, x), m);
}

Activations forward(const Params& p, const EffectiveMaps& e, const Vector& m) {
  if (m.size() != p.input_dim)
    throw ShapeMismatch("picnn: input has length " + std::to_string(m.size()) + ", expected " +
                        std::to_string(p.input_dim));
  Activations act;
  act.u = e.u;
  Vector sigma = Vector::Zero(p.hidden);
  act.sigma.push_back(sigma);
  for (int l = 0; l < p.layers; ++l) {
    // ReLU at exactly zero yields zero.
    sigma = (e.w[l] * sigma + e.v[l] * m + e.b[l]).cwiseMax(0.0);
    act.sigma.push_back(sigma);
  }
  const int L = p.layers;
  act.score = (e.w[L] * sigma + e.v[L] * m + e.b[L])[0] + p.compactness_epsilon * m.squaredNorm();
  return act;
}

double score(const Params& p, const Vector& x, const Vector& m) { return forward(p, x, m).score; }

double score(const Params& p, const EffectiveMaps& maps, const Vector& m) { return forward(p, maps, m).score; }

Embedding embed(const Params& p, const Vector& x, double q) {
  if (!std::isfinite(q)) throw InvalidArgument("picnn: embedding needs a finite threshold");
  const EffectiveMaps e = effective_maps(p, x);
  const int V = p.input_dim, d = p.hidden, L = p.layers;
  const int nvar = V + L * d, nrow = 2 * L * d + 1;
  Embedding emb;
  emb.input_dim = V;
  emb.hidden = d;
  emb.layers = L;
  emb.a = Matrix::Zero(nrow, nvar);
  emb.b = Vector::Zero(nrow);
  // -sigma_l <= 0 for l = 1..L.
  for (int k = 0; k < L * d; ++k) emb.a(k, V + k) = -1.0;
  // Layer rows: V_l m + W_l sigma_l - sigma_{l+1} <= -b_l.
  for (int l = 0; l < L; ++l) {
    const int row = L * d + l * d;
    emb.a.block(row, 0, d, V) = e.v[l];
    if (l > 0) emb.a.block(row, V + (l - 1) * d, d, d) = e.w[l];
    emb.a.block(row, V + l * d, d, d) -= Matrix::Identity(d, d);
    emb.b.segment(row, d) = -e.b[l];
  }
  const int last = nrow - 1;
  emb.a.block(last, 0, 1, V) = e.v[L];
  emb.a.block(last, V + (L - 1) * d, 1, d) = e.w[L];
  emb.b[last] = q - e.b[L][0];
  return emb;
}

Vector stacked_activations(const Activations& act, const Vector& m) {
  const int L = static_cast<int>(act.sigma.size()) - 1;
  const Eigen::Index d = act.sigma[0].size();
  Vector k(m.size() + L * d);
  k.head(m.size()) = m;
  for (int l = 1; l <= L; ++l) k.segment(m.size() + (l - 1) * d, d) = act.sigma[l];
  return k;
}

Params project_weights(Params params) {
  for (auto& L : params.layer) L.convex_weight = L.convex_weight.cwiseMax(0.0);
  return params;
}

Params random_params(int layers, int hidden, int context_dim, int input_dim, std::uint64_t seed,
                     double compactness_epsilon) {
  Params p = skeleton(layers, hidden, context_dim, input_dim);
  p.compactness_epsilon = compactness_epsilon;
  Rng rng(seed);
  const double s = 0.5 / std::sqrt(static_cast<double>(hidden));
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-s, s);
  };
  for (auto& L : p.layer) {
    fill(L.context_weight);
    fill(L.context_bias);
    for (Eigen::Index i = 0; i < L.convex_weight.size(); ++i) L.convex_weight.data()[i] = rng.uniform(0.0, 0.5);
    fill(L.convex_gate_weight);
    fill(L.convex_gate_bias);
    fill(L.input_weight);
    fill(L.input_gate_weight);
    fill(L.input_gate_bias);
    fill(L.bias_weight);
    fill(L.bias_offset);
  }
  return p;
}

Params constant_params(int layers, int hidden, int context_dim, int input_dim, double value) {
  Params p = skeleton(layers, hidden, context_dim, input_dim);
  p.layer[layers].bias_offset[0] = value;
  return p;
}

Params l1_ball_params(int input_dim, int context_dim, int offset) {
  if (offset < 0 || offset + input_dim > context_dim)
    throw InvalidArgument("picnn: predicted vector does not fit in the context");
  const int V = input_dim;
  Params p = skeleton(1, 2 * V, context_dim, V);
  Layer& l0 = p.layer[0];
  l0.input_gate_bias.setOnes();
  l0.input_weight.topRows(V) = Matrix::Identity(V, V);
  l0.input_weight.bottomRows(V) = -Matrix::Identity(V, V);
  for (int u = 0; u < V; ++u) {
    l0.bias_weight(u, offset + u) = -1.0;
    l0.bias_weight(V + u, offset + u) = 1.0;
  }
  Layer& l1 = p.layer[1];
  l1.convex_gate_bias.setOnes();
  l1.convex_weight.setOnes();
  return p;
}

}  // namespace robustnav::picnn
