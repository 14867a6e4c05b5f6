#pragma once

#include "dsts/tensor.hpp"
#include "dsts/transform.hpp"

namespace dsts {

// Per-location weights of the shape and texture branches; A_s + A_t = 1.
struct AttentionMaps {
  Tensor shape;    // (1, P, Q)
  Tensor texture;  // (1, P, Q)
};

// Population variance across channels at every location, as a (1, P, Q) map.
Tensor channel_variance(const Tensor& embedding);

// A_s = V_s / (V_s + V_t), A_t = V_t / (V_s + V_t); 0.5/0.5 where both vanish.
AttentionMaps attention_maps(const AlignedEmbedding& shape, const AlignedEmbedding& texture);

// Shape-texture adaptive fusion: I_m = I_s * A_s + I_t * A_t with the attention
// broadcast across channels. Throws kShapeMismatch on differing shapes or layouts.
AlignedEmbedding staf_fuse(const AlignedEmbedding& shape, const AlignedEmbedding& texture);

}  // namespace dsts
