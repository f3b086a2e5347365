#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stga/nn/gaussian.hpp"
#include "stga/nn/lstm.hpp"
#include "stga/nn/random.hpp"
#include "stga/nn/tape.hpp"
#include "stga/st_graph.hpp"
#include "stga/trajectory_data.hpp"
#include "stga/types.hpp"

namespace stga {

struct ModelConfig {
  GraphMode mode = GraphMode::HH;
  int hidden_size = 256;
  int embed_size = 64;
  double lambda = 0.5;
  int t_obs = kObsSteps;
  int t_pred = kPredSteps;

  void validate() const;
};

struct AffineParams {
  Mat w;
  Mat b;  // column vector

  static AffineParams init(int out_size, int in_size, nn::Rng& rng);
};

/// Every learnable block. Regardless of crowd size there are exactly four
/// LSTM blocks (HH edge, HO edge, temporal edge, node), three embedding maps,
/// the 5-way output head, and the shared PReLU leak.
struct ModelParams {
  AffineParams embed_spatial;   // 2 -> D, shared by HH and HO edges
  AffineParams embed_temporal;  // 2 -> D
  AffineParams embed_node;      // 2 -> D
  nn::LstmCellParams lstm_hh;        // D -> H
  nn::LstmCellParams lstm_ho;        // D -> H
  nn::LstmCellParams lstm_temporal;  // D -> H
  nn::LstmCellParams lstm_node;      // 2D + 2H -> H
  AffineParams head;            // H -> 5
  Mat alpha;                    // 1x1, PReLU leak shared across the model

  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
  static ModelParams zeros_like(const ModelParams& other);

  /// Canonical block enumeration; fixes checkpoint order, Adam slot order,
  /// and grad-check leaf order.
  template <typename F>
  void visit(F&& f) {
    f("embed_spatial.w", embed_spatial.w);
    f("embed_spatial.b", embed_spatial.b);
    f("embed_temporal.w", embed_temporal.w);
    f("embed_temporal.b", embed_temporal.b);
    f("embed_node.w", embed_node.w);
    f("embed_node.b", embed_node.b);
    f("lstm_hh.w_input", lstm_hh.w_input);
    f("lstm_hh.w_hidden", lstm_hh.w_hidden);
    f("lstm_hh.bias", lstm_hh.bias);
    f("lstm_ho.w_input", lstm_ho.w_input);
    f("lstm_ho.w_hidden", lstm_ho.w_hidden);
    f("lstm_ho.bias", lstm_ho.bias);
    f("lstm_temporal.w_input", lstm_temporal.w_input);
    f("lstm_temporal.w_hidden", lstm_temporal.w_hidden);
    f("lstm_temporal.bias", lstm_temporal.bias);
    f("lstm_node.w_input", lstm_node.w_input);
    f("lstm_node.w_hidden", lstm_node.w_hidden);
    f("lstm_node.bias", lstm_node.bias);
    f("head.w", head.w);
    f("head.b", head.b);
    f("alpha", alpha);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit(
        [&f](const char* name, Mat& m) { f(name, static_cast<const Mat&>(m)); });
  }

  std::vector<std::pair<std::string, Mat*>> blocks();
  void add_scaled(const ModelParams& other, double factor);
  void set_zero();
  double grad_norm() const;  // Frobenius norm over all blocks
  void scale_all(double factor);
};

/// Tape handles for one binding of ModelParams.
struct BoundParams {
  nn::Var embed_spatial_w, embed_spatial_b;
  nn::Var embed_temporal_w, embed_temporal_b;
  nn::Var embed_node_w, embed_node_b;
  nn::LstmVars lstm_hh, lstm_ho, lstm_temporal, lstm_node;
  nn::Var head_w, head_b;
  nn::Var alpha;

  static BoundParams bind(nn::Tape& tape, const ModelParams& params, bool requires_grad);
  /// Rebuilds the typed view from leaves created in visit() order.
  static BoundParams from_vars(std::span<const nn::Var> vars);

  /// Adds this binding's tape gradients into `grads` (visit order).
  void accumulate_grads(nn::Tape& tape, ModelParams& grads) const;
};

struct PedNodeState {
  nn::LstmStateVars node;
  nn::LstmStateVars temporal;
  nn::GaussianParams2D head;  // emission of the most recent forward step
  bool has_head = false;
};

struct EdgeKey {
  NodeRef src;
  int dst_ped = 0;
  EdgeClass cls = EdgeClass::HH;

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

/// Recurrent state threaded through forward steps. States exist exactly for
/// the nodes/edges of the latest snapshot; entered nodes/edges start from
/// zeros, exited ones are dropped.
struct RecurrentState {
  std::shared_ptr<nn::Tape> tape;
  BoundParams bound;
  std::map<int, PedNodeState> peds;
  std::map<EdgeKey, nn::LstmStateVars> edges;

  static RecurrentState create(std::shared_ptr<nn::Tape> tape, const ModelParams& params,
                               bool requires_grad);
  bool empty() const { return peds.empty(); }
};

struct PedOutput {
  nn::GaussianParams2D params;
  nn::GaussianVars vars;
};

using StepOutput = std::map<int, PedOutput>;

/// One full pass over a snapshot: embed + step every incident edge LSTM,
/// run attention, embed the node position, step the node LSTM, and emit
/// constrained Gaussian parameters per pedestrian. Mutates `state` in place.
StepOutput forward_step(const GraphSnapshot& snapshot, RecurrentState& state,
                        const ModelConfig& config);

/// Teacher-forced pass over the observed window (t_obs steps on ground
/// truth). The returned state carries the final step's head emissions.
RecurrentState observe(const SceneInstance& instance, const ModelParams& params,
                       const ModelConfig& config);

enum class RolloutMode { Mean, Sample };

/// Autoregressive rollout of t_pred future positions. The first position is
/// drawn from the state's pending head emission; subsequent snapshots are
/// built from the previous step's (clamped) output with obstacle gating
/// re-evaluated each step. Returned positions are the raw draws, unclamped.
std::vector<std::map<int, Vec2>> predict(RecurrentState& state,
                                         const std::map<int, Vec2>& last_positions,
                                         const std::map<int, Vec2>& obstacles,
                                         const ModelConfig& config, RolloutMode mode,
                                         nn::Rng& rng);

/// Teacher-forced loss over one scene instance: sum of per-step NLL of the
/// ground-truth next position over the 12 future steps, averaged over
/// pedestrians. Tape version for training; scalar version for verification.
nn::Var sequence_nll_var(nn::Tape& tape, const BoundParams& bound, const SceneInstance& instance,
                         const ModelConfig& config);
double sequence_nll(const SceneInstance& instance, const ModelParams& params,
                    const ModelConfig& config);

}  // namespace stga
