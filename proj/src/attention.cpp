#include "stga/attention.hpp"

namespace stga {

nn::Var embed_hidden(nn::Var h, nn::Var alpha) { return nn::softmax(nn::prelu(h, alpha)); }

nn::Var coefficients(nn::Var e_hat, nn::Var h) { return nn::cmul(e_hat, h); }

nn::Var multi_node_attention(const EdgeHiddenBundle& bundle, nn::Var alpha) {
  std::vector<nn::Var> coeffs;
  coeffs.reserve(1 + bundle.spatial.size());
  coeffs.push_back(coefficients(embed_hidden(bundle.temporal, alpha), bundle.temporal));
  for (nn::Var h : bundle.spatial) {
    coeffs.push_back(coefficients(embed_hidden(h, alpha), h));
  }
  return nn::mean(coeffs);
}

}  // namespace stga
