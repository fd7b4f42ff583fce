#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "robustnav/picnn.hpp"

namespace robustnav::picnn {

namespace {

constexpr const char* kMagic = "robustnav-picnn";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_block(std::ostream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << hex(m(i, j));
    out << '\n';
  }
}

void write_block(std::ostream& out, const char* name, const Vector& v) {
  out << name << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << hex(v[i]);
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string token() {
    std::string t;
    if (!(in_ >> t)) throw ParseError("picnn file: unexpected end of input");
    return t;
  }

  void expect(const std::string& word) {
    const std::string t = token();
    if (t != word) throw ParseError("picnn file: expected '" + word + "', found '" + t + "'");
  }

  long integer() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0' || v < 0) throw ParseError("picnn file: bad integer '" + t + "'");
    return v;
  }

  double real() {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') throw ParseError("picnn file: bad number '" + t + "'");
    return v;
  }

  Matrix matrix(const char* name) {
    expect(name);
    const long r = integer(), c = integer();
    Matrix m(r, c);
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) m(i, j) = real();
    return m;
  }

  Vector vector(const char* name) {
    expect(name);
    const long n = integer();
    Vector v(n);
    for (long i = 0; i < n; ++i) v[i] = real();
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save(const Params& p, std::ostream& out) {
  p.validate();
  out << kMagic << ' ' << kVersion << '\n';
  out << "layers " << p.layers << " hidden " << p.hidden << " context " << p.context_dim << " input "
      << p.input_dim << '\n';
  out << "epsilon " << hex(p.compactness_epsilon) << '\n';
  for (int l = 0; l <= p.layers; ++l) {
    const Layer& L = p.layer[l];
    out << "layer " << l << '\n';
    if (l < p.layers) {
      write_block(out, "context_weight", L.context_weight);
      write_block(out, "context_bias", L.context_bias);
    }
    write_block(out, "convex_weight", L.convex_weight);
    write_block(out, "convex_gate_weight", L.convex_gate_weight);
    write_block(out, "convex_gate_bias", L.convex_gate_bias);
    write_block(out, "input_weight", L.input_weight);
    write_block(out, "input_gate_weight", L.input_gate_weight);
    write_block(out, "input_gate_bias", L.input_gate_bias);
    write_block(out, "bias_weight", L.bias_weight);
    write_block(out, "bias_offset", L.bias_offset);
  }
  out << "end\n";
}

Params load(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  if (r.integer() != kVersion) throw ParseError("picnn file: unsupported version");
  Params p;
  r.expect("layers");
  p.layers = static_cast<int>(r.integer());
  r.expect("hidden");
  p.hidden = static_cast<int>(r.integer());
  r.expect("context");
  p.context_dim = static_cast<int>(r.integer());
  r.expect("input");
  p.input_dim = static_cast<int>(r.integer());
  r.expect("epsilon");
  p.compactness_epsilon = r.real();
  if (p.layers < 1 || p.layers > 1024) throw ParseError("picnn file: bad layer count");
  for (int l = 0; l <= p.layers; ++l) {
    r.expect("layer");
    if (r.integer() != l) throw ParseError("picnn file: layers out of order");
    Layer L;
    if (l < p.layers) {
      L.context_weight = r.matrix("context_weight");
      L.context_bias = r.vector("context_bias");
    }
    L.convex_weight = r.matrix("convex_weight");
    L.convex_gate_weight = r.matrix("convex_gate_weight");
    L.convex_gate_bias = r.vector("convex_gate_bias");
    L.input_weight = r.matrix("input_weight");
    L.input_gate_weight = r.matrix("input_gate_weight");
    L.input_gate_bias = r.vector("input_gate_bias");
    L.bias_weight = r.matrix("bias_weight");
    L.bias_offset = r.vector("bias_offset");
    p.layer.push_back(std::move(L));
  }
  r.expect("end");
  try {
    p.validate();
  } catch (const ShapeMismatch& e) {
    throw ParseError(std::string("picnn file: ") + e.what());
  }
  return p;
}

void save_file(const Params& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save(params, out);
}

Params load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load(in);
}

}  // namespace robustnav::picnn
