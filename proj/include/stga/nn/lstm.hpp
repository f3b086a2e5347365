#pragma once

#include "stga/nn/random.hpp"
#include "stga/nn/tape.hpp"
#include "stga/types.hpp"

namespace stga::nn {

/// One shared LSTM parameter block. Gate layout along the 4H axis is
/// [input; forget; candidate; output].
struct LstmCellParams {
  Mat w_input;   // [4H x D]
  Mat w_hidden;  // [4H x H]
  Mat bias;      // [4H x 1], forget-gate segment initialized to 1

  int hidden_size() const { return static_cast<int>(w_hidden.cols()); }
  int input_size() const { return static_cast<int>(w_input.cols()); }

  /// Weights ~ N(0, 1/fan_in); biases zero except forget gate = 1.
  static LstmCellParams init(int input_size, int hidden_size, Rng& rng);
};

/// Tape handles for one bound LSTM block.
struct LstmVars {
  Var w_input, w_hidden, bias;
};

struct LstmStateVars {
  Var h, c;
  int steps = 0;  // forward steps taken since zero-init
};

LstmStateVars zero_lstm_state(Tape& tape, int hidden_size);

/// Standard LSTM recurrence: sigmoid input/forget/output gates, tanh
/// candidate. `block_name` tags numeric failures with the parameter block.
LstmStateVars lstm_step(const LstmVars& params, const LstmStateVars& state, Var x,
                        const char* block_name);

}  // namespace stga::nn
