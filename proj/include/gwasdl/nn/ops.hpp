#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gwasdl/nn/tensor.hpp"
#include "gwasdl/rng.hpp"

namespace gwasdl::nn {

/// x (N, in) * w (out, in)^T + b (out) -> (N, out).
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Valid 1-D convolution. x (N, Cin, L), w (Cout, Cin, K), b (Cout)
/// -> (N, Cout, floor((L - K) / stride) + 1).
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride);
std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride);

/// 1x1 convolution collapsing C channels to one: w (1, C, 1), b (1).
Tensor channel_mix(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// x (N, C, L) -> (N, C, floor((L - kernel) / stride) + 1).
Tensor max_pool1d(const Tensor& x, std::size_t kernel, std::size_t stride);

/// x (N, C, L) -> (N, C, out_len). Window i covers
/// [floor(i L / out_len), ceil((i + 1) L / out_len)).
Tensor adaptive_max_pool1d(const Tensor& x, std::size_t out_len);

/// Inverted dropout; identity when !training or p == 0.
Tensor dropout(const Tensor& x, double p, Rng& rng, bool training);

Tensor reshape(const Tensor& x, Shape shape);

/// Columns [begin, end) of the last axis of a rank-2 or rank-3 tensor.
Tensor slice_last(const Tensor& x, std::size_t begin, std::size_t end);

/// Concatenate rank-2 tensors (N, F_i) along the feature axis.
Tensor concat_features(const std::vector<Tensor>& parts);

Tensor sum(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
/// sum_i x_i * w_i with constant weights (used for gradient probes).
Tensor weighted_sum(const Tensor& x, std::span<const double> weights);

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross-entropy over observed cells of an (N, K) logit matrix.
/// p = sigmoid(logit) is clamped to [1e-7, 1 - 1e-7]; unobserved cells
/// (mask 0) contribute neither loss nor gradient. Throws AllMissing.
Tensor masked_bce_with_logits(const Tensor& logits, std::span<const double> labels,
                              std::span<const std::uint8_t> mask);

/// Value-only form of the same loss on probabilities.
double masked_bce_loss(std::span<const double> probabilities, std::span<const double> labels,
                       std::span<const std::uint8_t> mask);

}  // namespace gwasdl::nn
