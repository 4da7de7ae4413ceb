#include "mdq/quantizer.hpp"

#include <cmath>
#include <stdexcept>

namespace mdq {

bool QuantizerSpec::valid() const {
  if (k < 2 || z.size() == 0 || d.size() != z.size()) return false;
  return d.minCoeff() >= 0.0;
}

int QuantizerSpec::bits_per_coord() const {
  int bits = 1;
  while ((1 << bits) < alphabet()) ++bits;
  return bits;
}

static std::uint32_t quantize_index(double z, double d, int k, double x) {
  if (d < 0.0) throw std::invalid_argument("quantize: negative interval size");
  const double u = x - z;
  if (u < -d) return 0;
  if (u >= d) return static_cast<std::uint32_t>(k + 1);
  // u + d in [2jd/K, 2(j+1)d/K); guard against float rounding at the edge.
  int j = static_cast<int>(std::floor((u + d) * k / (2.0 * d)));
  j = std::max(0, std::min(j, k - 1));
  return static_cast<std::uint32_t>(j + 1);
}

static double level_value(double z, double d, int k, std::uint32_t index) {
  if (index == 0) return z - d;
  if (index == static_cast<std::uint32_t>(k + 1)) return z + d;
  const int j = static_cast<int>(index) - 1;
  return z + (2.0 * j - k) * d / k;
}

double quantize_scalar(double z, double d, int k, double x) {
  return level_value(z, d, k, quantize_index(z, d, k, x));
}

Vec quantize_vector(const QuantizerSpec& spec, const Vec& x) {
  if (x.size() != spec.z.size()) throw std::invalid_argument("quantize_vector: dim mismatch");
  Vec q(x.size());
  for (int i = 0; i < x.size(); ++i) q[i] = quantize_scalar(spec.z[i], spec.d[i], spec.k, x[i]);
  return q;
}

QuantizedMessage encode(const QuantizerSpec& spec, const Vec& x) {
  if (x.size() != spec.z.size()) throw std::invalid_argument("encode: dim mismatch");
  QuantizedMessage m;
  m.n = spec.dim();
  m.indices.resize(m.n);
  for (int i = 0; i < m.n; ++i) m.indices[i] = quantize_index(spec.z[i], spec.d[i], spec.k, x[i]);
  return m;
}

Vec decode(const QuantizerSpec& spec, const QuantizedMessage& msg) {
  if (msg.n != spec.dim() || static_cast<int>(msg.indices.size()) != msg.n) {
    throw std::invalid_argument("decode: message/spec dimension mismatch");
  }
  Vec x(msg.n);
  for (int i = 0; i < msg.n; ++i) {
    if (msg.indices[i] > static_cast<std::uint32_t>(spec.k + 1)) {
      throw std::runtime_error("decode: level index out of range (corrupt message)");
    }
    x[i] = level_value(spec.z[i], spec.d[i], spec.k, msg.indices[i]);
  }
  return x;
}

std::vector<std::uint8_t> QuantizedMessage::pack(const QuantizerSpec& spec) const {
  const int bits = spec.bits_per_coord();
  std::vector<std::uint8_t> out((static_cast<std::size_t>(n) * bits + 7) / 8, 0);
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint32_t v = indices[i];
    for (int b = 0; b < bits; ++b, ++pos) {
      if (v & (1u << b)) out[pos / 8] |= static_cast<std::uint8_t>(1u << (pos % 8));
    }
  }
  return out;
}

QuantizedMessage QuantizedMessage::unpack(const QuantizerSpec& spec,
                                          const std::vector<std::uint8_t>& bytes) {
  const int bits = spec.bits_per_coord();
  const std::size_t need = (static_cast<std::size_t>(spec.dim()) * bits + 7) / 8;
  if (bytes.size() != need) throw std::runtime_error("unpack: wrong payload size");
  QuantizedMessage m;
  m.n = spec.dim();
  m.indices.assign(m.n, 0);
  std::size_t pos = 0;
  for (int i = 0; i < m.n; ++i) {
    for (int b = 0; b < bits; ++b, ++pos) {
      if (bytes[pos / 8] & (1u << (pos % 8))) m.indices[i] |= (1u << b);
    }
    if (m.indices[i] > static_cast<std::uint32_t>(spec.k + 1)) {
      throw std::runtime_error("unpack: level index out of range (corrupt message)");
    }
  }
  return m;
}

Vec adaptive_interval(double g_bound, double sigma_phi, double alpha_t, double beta_t, int n) {
  if (g_bound <= 0.0 || sigma_phi <= 0.0 || alpha_t <= 0.0 || beta_t <= 0.0 || n < 1) {
    throw std::invalid_argument("adaptive_interval: all parameters must be positive");
  }
  return Vec::Constant(n, g_bound * alpha_t * beta_t / sigma_phi);
}

double quantization_error_bound(double g_bound, int n, double sigma_phi, double alpha_t,
                                double beta_t) {
  return g_bound * n * alpha_t * beta_t / sigma_phi;
}

}  // namespace mdq
