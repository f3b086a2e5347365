#pragma once

#include <vector>

#include "stga/nn/tape.hpp"

namespace stga {

/// Hidden states feeding one pedestrian's attention: the temporal edgeLSTM
/// hidden plus one hidden per incoming spatial edge. The spatial collection
/// is ordered by (edge class, source id) upstream; the attention output does
/// not depend on the order, only on the multiset.
struct EdgeHiddenBundle {
  nn::Var temporal;
  std::vector<nn::Var> spatial;
};

/// softmax(PReLU(h)) over the hidden dimension; positive entries summing to 1.
nn::Var embed_hidden(nn::Var h, nn::Var alpha);

/// Attention coefficient vector: the Hadamard product of the embedding and
/// the hidden state, preserving depth.
nn::Var coefficients(nn::Var e_hat, nn::Var h);

/// Soft attention across all edges of a node: per-edge coefficient vectors
/// are stacked and averaged into one depth-H vector.
nn::Var multi_node_attention(const EdgeHiddenBundle& bundle, nn::Var alpha);

}  // namespace stga
