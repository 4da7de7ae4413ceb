#pragma once

#include <cstdint>
#include <vector>

#include "mdq/geometry.hpp"

namespace mdq {

/// Adaptive uniform quantizer parameters for one (agent, iteration):
/// mid-value vector z, interval vector d >= 0, and interior level count K.
struct QuantizerSpec {
  int k = 5;  // interior levels; K >= 2 for the error bound to hold
  Vec z;
  Vec d;

  int dim() const { return static_cast<int>(z.size()); }
  bool valid() const;
  /// Alphabet size K + 2 (two saturation values plus K interior levels).
  int alphabet() const { return k + 2; }
  /// Bits per coordinate: ceil(log2(K+2)).
  int bits_per_coord() const;
  int payload_bits() const { return dim() * bits_per_coord(); }
};

/// Per-coordinate level indices in {0, ..., K+1}: 0 is the lower saturation
/// z-d, 1..K are the interior levels j=0..K-1, K+1 is the upper saturation.
struct QuantizedMessage {
  int n = 0;
  std::vector<std::uint32_t> indices;

  /// Little-endian packed indices, coordinate 0 in the least significant bits.
  std::vector<std::uint8_t> pack(const QuantizerSpec& spec) const;
  static QuantizedMessage unpack(const QuantizerSpec& spec,
                                 const std::vector<std::uint8_t>& bytes);
};

/// The scalar quantizer Q(z, d, x): saturates to z-d below and z+d at or
/// above, and maps [z-d+2jd/K, z-d+2(j+1)d/K) to z+(2j-K)d/K inside.
double quantize_scalar(double z, double d, int k, double x);

Vec quantize_vector(const QuantizerSpec& spec, const Vec& x);

QuantizedMessage encode(const QuantizerSpec& spec, const Vec& x);
Vec decode(const QuantizerSpec& spec, const QuantizedMessage& msg);

/// d(t) = G * alpha(t) * beta(t) / sigma_phi * ones(n).
Vec adaptive_interval(double g_bound, double sigma_phi, double alpha_t, double beta_t, int n);

/// E(t) = G * n * alpha(t) * beta(t) / sigma_phi.
double quantization_error_bound(double g_bound, int n, double sigma_phi, double alpha_t,
                                double beta_t);

}  // namespace mdq
