#include "stga/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "stga/attention.hpp"

namespace stga {

using nn::Var;

void ModelConfig::validate() const {
  if (hidden_size < 1 || embed_size < 1) {
    throw DomainError("ModelConfig: hidden and embed sizes must be >= 1");
  }
  if (!(lambda > 0.0)) {
    throw DomainError("ModelConfig: lambda must be positive");
  }
  if (t_obs < 1 || t_pred < 1) {
    throw DomainError("ModelConfig: t_obs and t_pred must be >= 1");
  }
}

AffineParams AffineParams::init(int out_size, int in_size, nn::Rng& rng) {
  AffineParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_size));
  p.w.resize(out_size, in_size);
  for (int i = 0; i < out_size; ++i)
    for (int j = 0; j < in_size; ++j) p.w(i, j) = nn::uniform_in(rng, -bound, bound);
  p.b.resize(out_size, 1);
  for (int i = 0; i < out_size; ++i) p.b(i, 0) = nn::uniform_in(rng, -bound, bound);
  return p;
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const int h = config.hidden_size;
  const int d = config.embed_size;
  nn::Rng rng(nn::derive_seed(seed, 0x7061726d));  // "parm"
  ModelParams p;
  // Block order below is fixed: both graph modes must draw identically so
  // that HH and HHO runs share initializations under one seed.
  p.embed_spatial = AffineParams::init(d, 2, rng);
  p.embed_temporal = AffineParams::init(d, 2, rng);
  p.embed_node = AffineParams::init(d, 2, rng);
  p.lstm_hh = nn::LstmCellParams::init(d, h, rng);
  p.lstm_ho = nn::LstmCellParams::init(d, h, rng);
  p.lstm_temporal = nn::LstmCellParams::init(d, h, rng);
  p.lstm_node = nn::LstmCellParams::init(2 * d + 2 * h, h, rng);
  p.head = AffineParams::init(5, h, rng);
  p.alpha = Mat::Constant(1, 1, 0.2);
  return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
  ModelParams z = other;
  z.visit([](const char*, Mat& m) { m.setZero(); });
  return z;
}

std::vector<std::pair<std::string, Mat*>> ModelParams::blocks() {
  std::vector<std::pair<std::string, Mat*>> out;
  visit([&out](const char* name, Mat& m) { out.emplace_back(name, &m); });
  return out;
}

void ModelParams::add_scaled(const ModelParams& other, double factor) {
  std::vector<const Mat*> theirs;
  other.visit([&theirs](const char*, const Mat& m) { theirs.push_back(&m); });
  std::size_t i = 0;
  visit([&](const char*, Mat& m) { m += factor * *theirs[i++]; });
}

void ModelParams::set_zero() {
  visit([](const char*, Mat& m) { m.setZero(); });
}

double ModelParams::grad_norm() const {
  double sq = 0.0;
  visit([&sq](const char*, const Mat& m) { sq += m.squaredNorm(); });
  return std::sqrt(sq);
}

void ModelParams::scale_all(double factor) {
  visit([factor](const char*, Mat& m) { m *= factor; });
}

BoundParams BoundParams::bind(nn::Tape& tape, const ModelParams& params, bool requires_grad) {
  std::vector<Var> vars;
  params.visit([&](const char*, const Mat& m) { vars.push_back(tape.leaf(m, requires_grad)); });
  return from_vars(vars);
}

BoundParams BoundParams::from_vars(std::span<const Var> vars) {
  if (vars.size() != 21) {
    throw ShapeError("BoundParams: expected 21 parameter blocks, got " +
                     std::to_string(vars.size()));
  }
  BoundParams b;
  std::size_t i = 0;
  b.embed_spatial_w = vars[i++];
  b.embed_spatial_b = vars[i++];
  b.embed_temporal_w = vars[i++];
  b.embed_temporal_b = vars[i++];
  b.embed_node_w = vars[i++];
  b.embed_node_b = vars[i++];
  b.lstm_hh = {vars[i], vars[i + 1], vars[i + 2]};
  i += 3;
  b.lstm_ho = {vars[i], vars[i + 1], vars[i + 2]};
  i += 3;
  b.lstm_temporal = {vars[i], vars[i + 1], vars[i + 2]};
  i += 3;
  b.lstm_node = {vars[i], vars[i + 1], vars[i + 2]};
  i += 3;
  b.head_w = vars[i++];
  b.head_b = vars[i++];
  b.alpha = vars[i++];
  return b;
}

void BoundParams::accumulate_grads(nn::Tape& tape, ModelParams& grads) const {
  const std::array<Var, 21> vars = {
      embed_spatial_w,  embed_spatial_b,  embed_temporal_w,     embed_temporal_b,
      embed_node_w,     embed_node_b,     lstm_hh.w_input,      lstm_hh.w_hidden,
      lstm_hh.bias,     lstm_ho.w_input,  lstm_ho.w_hidden,     lstm_ho.bias,
      lstm_temporal.w_input, lstm_temporal.w_hidden, lstm_temporal.bias,
      lstm_node.w_input, lstm_node.w_hidden, lstm_node.bias,    head_w,
      head_b,           alpha};
  std::size_t i = 0;
  grads.visit([&](const char*, Mat& g) { g += tape.grad(vars[i++]); });
}

RecurrentState RecurrentState::create(std::shared_ptr<nn::Tape> tape, const ModelParams& params,
                                      bool requires_grad) {
  RecurrentState s;
  s.tape = std::move(tape);
  s.bound = BoundParams::bind(*s.tape, params, requires_grad);
  return s;
}

namespace {

Var embed(nn::Tape& tape, Var w, Var b, Var alpha, const Vec2& feature) {
  Var x = tape.leaf(Vec(feature));
  return nn::prelu(nn::affine(w, x, b), alpha);
}

EdgeKey key_of(const SpatialEdge& e) { return EdgeKey{e.src, e.dst.id, e.cls}; }

}  // namespace

StepOutput forward_step(const GraphSnapshot& snapshot, RecurrentState& state,
                        const ModelConfig& config) {
  if (!state.tape) {
    throw ShapeError("forward_step: state has no tape");
  }
  nn::Tape& tape = *state.tape;
  const int h = config.hidden_size;

  // Reconcile node membership with the new snapshot: zero state for entered
  // pedestrians, drop state of exited ones.
  for (auto it = state.peds.begin(); it != state.peds.end();) {
    if (snapshot.pedestrians.count(it->first) == 0) {
      it = state.peds.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& [ped, pos] : snapshot.pedestrians) {
    if (state.peds.count(ped) == 0) {
      PedNodeState fresh;
      fresh.node = nn::zero_lstm_state(tape, h);
      fresh.temporal = nn::zero_lstm_state(tape, h);
      state.peds.emplace(ped, std::move(fresh));
    }
  }
  // Same for edge states: an edge absent from the snapshot loses its state
  // (an obstacle edge that re-enters the lambda neighborhood restarts cold).
  {
    std::map<EdgeKey, bool> present;
    for (const SpatialEdge& e : snapshot.spatial_edges) present[key_of(e)] = true;
    for (auto it = state.edges.begin(); it != state.edges.end();) {
      if (!present.count(it->first)) {
        it = state.edges.erase(it);
      } else {
        ++it;
      }
    }
  }

  // Step every spatial edge LSTM once.
  std::map<EdgeKey, Var> edge_hidden;
  for (const SpatialEdge& e : snapshot.spatial_edges) {
    const EdgeKey key = key_of(e);
    auto it = state.edges.find(key);
    if (it == state.edges.end()) {
      it = state.edges.emplace(key, nn::zero_lstm_state(tape, h)).first;
    }
    try {
      Var feat = embed(tape, state.bound.embed_spatial_w, state.bound.embed_spatial_b,
                       state.bound.alpha, Vec2(e.feature.dx, e.feature.dy));
      const nn::LstmVars& block =
          e.cls == EdgeClass::HH ? state.bound.lstm_hh : state.bound.lstm_ho;
      it->second = nn::lstm_step(block, it->second, feat,
                                 e.cls == EdgeClass::HH ? "lstm_hh" : "lstm_ho");
    } catch (const NumericError& err) {
      throw NumericError("forward_step: edge into pedestrian " + std::to_string(e.dst.id) +
                         ": " + err.what());
    }
    edge_hidden.emplace(key, it->second.h);
  }

  StepOutput out;
  for (const auto& [ped, pos] : snapshot.pedestrians) {
    PedNodeState& ps = state.peds.at(ped);
    try {
      // Temporal edge consumes the absolute position.
      Var temporal_feat = embed(tape, state.bound.embed_temporal_w,
                                state.bound.embed_temporal_b, state.bound.alpha, pos);
      ps.temporal =
          nn::lstm_step(state.bound.lstm_temporal, ps.temporal, temporal_feat, "lstm_temporal");

      EdgeHiddenBundle bundle;
      bundle.temporal = ps.temporal.h;
      for (const SpatialEdge* e : snapshot.incoming(ped)) {
        bundle.spatial.push_back(edge_hidden.at(key_of(*e)));
      }
      Var weighted = multi_node_attention(bundle, state.bound.alpha);

      Var node_embed = embed(tape, state.bound.embed_node_w, state.bound.embed_node_b,
                             state.bound.alpha, pos);
      // Node input keeps both written copies of the embedding alongside the
      // previous hidden state and the attention vector.
      const std::array<Var, 4> parts = {node_embed, ps.node.h, weighted, node_embed};
      Var node_input = nn::concat(parts);
      ps.node = nn::lstm_step(state.bound.lstm_node, ps.node, node_input, "lstm_node");

      Var raw = nn::affine(state.bound.head_w, ps.node.h, state.bound.head_b);
      nn::GaussianVars g = nn::constrain_head(raw);
      PedOutput po{nn::gaussian_value(g), g};
      ps.head = po.params;
      ps.has_head = true;
      out.emplace(ped, std::move(po));
    } catch (const NumericError& e) {
      throw NumericError("forward_step: pedestrian " + std::to_string(ped) + ": " + e.what());
    }
  }
  return out;
}

RecurrentState observe(const SceneInstance& instance, const ModelParams& params,
                       const ModelConfig& config) {
  config.validate();
  RecurrentState state = RecurrentState::create(std::make_shared<nn::Tape>(), params, false);
  for (int t = 0; t < config.t_obs; ++t) {
    GraphSnapshot snap = build_snapshot(instance.positions_at(t), instance.obstacles,
                                        config.lambda, config.mode, t);
    forward_step(snap, state, config);
  }
  return state;
}

std::vector<std::map<int, Vec2>> predict(RecurrentState& state,
                                         const std::map<int, Vec2>& last_positions,
                                         const std::map<int, Vec2>& obstacles,
                                         const ModelConfig& config, RolloutMode mode,
                                         nn::Rng& rng) {
  if (state.peds.empty()) {
    return std::vector<std::map<int, Vec2>>(config.t_pred);
  }
  // The caller's pedestrian set must be the one the state was built from.
  if (last_positions.size() != state.peds.size()) {
    throw ShapeError("predict: state/position pedestrian sets differ");
  }
  for (const auto& [ped, ps] : state.peds) {
    if (last_positions.count(ped) == 0) {
      throw ShapeError("predict: pedestrian " + std::to_string(ped) + " missing from positions");
    }
    if (!ps.has_head) {
      throw ShapeError("predict: state carries no pending emission; run observe first");
    }
  }

  std::vector<std::map<int, Vec2>> result;
  result.reserve(config.t_pred);
  for (int k = 0; k < config.t_pred; ++k) {
    // Draw this step's positions from the previous step's emissions.
    std::map<int, Vec2> raw;
    std::map<int, Vec2> clamped;
    for (const auto& [ped, ps] : state.peds) {
      Vec2 p = mode == RolloutMode::Mean ? Vec2(ps.head.mu_x, ps.head.mu_y)
                                         : nn::sample_bivariate(ps.head, rng);
      raw.emplace(ped, p);
      clamped.emplace(ped, clamp01(p));
    }
    result.push_back(std::move(raw));
    if (k + 1 < config.t_pred) {
      GraphSnapshot snap = build_snapshot(clamped, obstacles, config.lambda, config.mode,
                                          config.t_obs + k);
      forward_step(snap, state, config);
    }
  }
  return result;
}

nn::Var sequence_nll_var(nn::Tape& tape, const BoundParams& bound, const SceneInstance& instance,
                         const ModelConfig& config) {
  if (instance.sequences.empty()) {
    throw DomainError("sequence_nll: empty scene instance");
  }
  RecurrentState state;
  state.tape = std::shared_ptr<nn::Tape>(&tape, [](nn::Tape*) {});  // non-owning
  state.bound = bound;

  const int total_steps = config.t_obs + config.t_pred;
  std::vector<Var> terms;
  terms.reserve(instance.sequences.size() * config.t_pred);
  for (int t = 0; t < total_steps; ++t) {
    GraphSnapshot snap = build_snapshot(instance.positions_at(t), instance.obstacles,
                                        config.lambda, config.mode, t);
    StepOutput out = forward_step(snap, state, config);
    // The emission after consuming step t parameterizes step t+1; loss is
    // collected on the t_pred future positions.
    if (t + 1 >= config.t_obs && t + 1 < total_steps) {
      for (const TrajectorySequence& seq : instance.sequences) {
        const Vec2 target = seq.position(t + 1);
        terms.push_back(nn::bivariate_nll(out.at(seq.ped_id).vars, target));
      }
    }
  }
  Var total = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) {
    total = nn::add(total, terms[i]);
  }
  return nn::scale(total, 1.0 / static_cast<double>(instance.sequences.size()));
}

double sequence_nll(const SceneInstance& instance, const ModelParams& params,
                    const ModelConfig& config) {
  nn::Tape tape;
  BoundParams bound = BoundParams::bind(tape, params, false);
  Var loss = sequence_nll_var(tape, bound, instance, config);
  return tape.value(loss)(0, 0);
}

}  // namespace stga
