#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "robustnav/common.hpp"

namespace robustnav::picnn {

/// Weights of layer l (0 <= l <= L). in_u is the context width feeding the
/// layer (context_dim for l = 0, hidden otherwise); out is hidden for l < L and
/// 1 for the output layer. The context path (R, r) is empty on layer L.
struct Layer {
  Matrix context_weight;      // R_l   hidden x in_u
  Vector context_bias;        // r_l   hidden
  Matrix convex_weight;       // W̄_l  out x hidden, elementwise >= 0
  Matrix convex_gate_weight;  // Ŵ_l  hidden x in_u
  Vector convex_gate_bias;    // ω_l   hidden
  Matrix input_weight;        // V̄_l  out x input_dim
  Matrix input_gate_weight;   // V̂_l  input_dim x in_u
  Vector input_gate_bias;     // v_l   input_dim
  Matrix bias_weight;         // B̄_l  out x in_u
  Vector bias_offset;         // b̄_l  out
};

struct Params {
  int layers = 1;
  int hidden = 1;
  int context_dim = 1;
  int input_dim = 1;
  double compactness_epsilon = 0.0;
  std::vector<Layer> layer;  // layers + 1 entries

  /// Throws ShapeMismatch.
  void validate() const;
};

struct Activations {
  std::vector<Vector> u;      // u_0 = x, ..., u_L
  std::vector<Vector> sigma;  // sigma_0 = 0, ..., sigma_L
  double score = 0.0;
};

/// Context-dependent affine maps of every layer:
/// W_l = W̄_l diag([Ŵ_l u_l + ω_l]_+), V_l = V̄_l diag(V̂_l u_l + v_l), b_l = B̄_l u_l + b̄_l.
struct EffectiveMaps {
  std::vector<Matrix> w;
  std::vector<Matrix> v;
  std::vector<Vector> b;
  std::vector<Vector> u;
};

EffectiveMaps effective_maps(const Params& params, const Vector& x);

/// Throws ShapeMismatch.
Activations forward(const Params& params, const Vector& x, const Vector& m);
double score(const Params& params, const Vector& x, const Vector& m);
/// Same, with the maps of a fixed context computed once.
Activations forward(const Params& params, const EffectiveMaps& maps, const Vector& m);
double score(const Params& params, const EffectiveMaps& maps, const Vector& m);

/// Polyhedral relaxation {k : A k <= b} of {m : g(x, m) <= q} over
/// k = [m, sigma_1, ..., sigma_L]. Row order: -sigma <= 0 (L*d rows), the L*d
/// layer rows V_l m + W_l sigma_l - sigma_{l+1} <= -b_l, then the output row
/// V_L m + W_L sigma_L <= q - b_L. The box 0 <= m <= 1 is kept separately as
/// variable bounds by consumers. The quadratic compactness term is not embedded.
struct Embedding {
  Matrix a;
  Vector b;
  int input_dim = 0;
  int hidden = 0;
  int layers = 0;

  Eigen::Index num_vars() const { return a.cols(); }
  Eigen::Index output_row() const { return a.rows() - 1; }
};

Embedding embed(const Params& params, const Vector& x, double q);

/// k = [m, sigma_1, ..., sigma_L] for a forward pass.
Vector stacked_activations(const Activations& act, const Vector& m);

/// Clamps every W̄_l to be elementwise nonnegative.
Params project_weights(Params params);

/// W̄ ~ U[0, 0.5], every other entry ~ U[-0.5/sqrt(d), 0.5/sqrt(d)].
Params random_params(int layers, int hidden, int context_dim, int input_dim, std::uint64_t seed,
                     double compactness_epsilon = 0.0);

/// All-zero weights with output bias b̄_L = value.
Params constant_params(int layers, int hidden, int context_dim, int input_dim, double value);

/// Exact single-layer network with g(x, m) = sum_u |m_u - x[offset + u]|.
/// The predicted vector is read from the context, hidden = 2 * input_dim.
Params l1_ball_params(int input_dim, int context_dim, int offset);

/// Text format with a shape header and hex-float row-major blocks;
/// round trip is exact. load throws ParseError.
void save(const Params& params, std::ostream& out);
Params load(std::istream& in);
void save_file(const Params& params, const std::string& path);
Params load_file(const std::string& path);

}  // namespace robustnav::picnn
