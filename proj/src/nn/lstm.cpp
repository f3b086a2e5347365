#include "stga/nn/lstm.hpp"

#include <cmath>
#include <string>

namespace stga::nn {

LstmCellParams LstmCellParams::init(int input_size, int hidden_size, Rng& rng) {
  LstmCellParams p;
  const int gates = 4 * hidden_size;
  const double sd_in = 1.0 / std::sqrt(static_cast<double>(input_size));
  const double sd_hid = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  p.w_input.resize(gates, input_size);
  for (int i = 0; i < gates; ++i)
    for (int j = 0; j < input_size; ++j) p.w_input(i, j) = sd_in * normal01(rng);
  p.w_hidden.resize(gates, hidden_size);
  for (int i = 0; i < gates; ++i)
    for (int j = 0; j < hidden_size; ++j) p.w_hidden(i, j) = sd_hid * normal01(rng);
  p.bias = Mat::Zero(gates, 1);
  p.bias.block(hidden_size, 0, hidden_size, 1).setOnes();  // forget gate
  return p;
}

LstmStateVars zero_lstm_state(Tape& tape, int hidden_size) {
  return LstmStateVars{tape.zeros(hidden_size), tape.zeros(hidden_size), 0};
}

LstmStateVars lstm_step(const LstmVars& params, const LstmStateVars& state, Var x,
                        const char* block_name) {
  try {
    Tape& tape = *x.tape;
    const int hidden = static_cast<int>(tape.value(state.h).rows());
    Var pre = add(affine(params.w_input, x, params.bias), matvec(params.w_hidden, state.h));
    Var gate_in = sigmoid(slice(pre, 0, hidden));
    Var gate_forget = sigmoid(slice(pre, hidden, hidden));
    Var candidate = tanh(slice(pre, 2 * hidden, hidden));
    Var gate_out = sigmoid(slice(pre, 3 * hidden, hidden));
    Var c = add(cmul(gate_forget, state.c), cmul(gate_in, candidate));
    Var h = cmul(gate_out, tanh(c));
    return LstmStateVars{h, c, state.steps + 1};
  } catch (const NumericError& e) {
    throw NumericError(std::string(block_name) + ": " + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(std::string(block_name) + ": " + e.what());
  }
}

}  // namespace stga::nn
