#pragma once

#include <functional>
#include <vector>

#include "ace/adam.hpp"
#include "ace/characters.hpp"
#include "ace/checkpoint.hpp"
#include "ace/dataset.hpp"
#include "ace/motion_io.hpp"
#include "ace/network.hpp"
#include "ace/tape.hpp"

namespace ace {

inline constexpr std::size_t kLatentDim = 32;

/// Embedded control variable z.
struct LatentCode {
  std::vector<double> values;

  void validate() const {
    require(values.size() == kLatentDim, "LatentCode: length must be 32");
    require_finite(values, "LatentCode");
  }
};

/// Architecture of the prior: encoder MLP plus a gated mixture of experts
/// (gating network -> softmax -> blend of expert predictions).
struct PriorSpec {
  std::size_t expert_count = 8;
  std::vector<std::size_t> encoder_hidden{512, 512, 512, 512};
  std::vector<std::size_t> gate_hidden{512, 512};
  std::vector<std::size_t> expert_hidden{512, 512};
};

struct PriorModel {
  Skeleton skeleton;
  NormStats norm;          // over CharacterState dims
  MlpParams encoder;       // [2S] -> 32
  MlpParams gating;        // [S] -> expert_count (logits)
  std::vector<MlpParams> experts;  // [32 + S] -> S each
  CharacterState default_seed_state;  // mean standing state of the training data
  // per-dim embedding statistics over the training transitions; inference
  // clamps latent codes to this support (the decoder is only meaningful on
  // the embedding the encoder actually produced)
  std::vector<double> z_mean;
  std::vector<double> z_std;

  CharacterStateLayout layout() const { return CharacterStateLayout::of(skeleton); }
  std::size_t state_dim() const { return layout().size(); }

  void validate() const {
    const std::size_t s = state_dim();
    require(encoder.spec.input == 2 * s && encoder.spec.output == kLatentDim,
            "PriorModel: encoder width contract violated");
    require(gating.spec.input == s && gating.spec.output == experts.size(),
            "PriorModel: gating width contract violated");
    for (const MlpParams& e : experts)
      require(e.spec.input == kLatentDim + s && e.spec.output == s,
              "PriorModel: expert width contract violated");
    encoder.validate();
    gating.validate();
    for (const MlpParams& e : experts) e.validate();
    require(norm.mean.size() == s, "PriorModel: normalization dimension mismatch");
    if (!default_seed_state.values.empty()) default_seed_state.validate(layout());
  }

  static PriorModel init(const Skeleton& skeleton, const NormStats& norm, const PriorSpec& spec,
                         Rng& rng) {
    PriorModel m;
    m.skeleton = skeleton;
    m.norm = norm;
    const std::size_t s = CharacterStateLayout::of(skeleton).size();
    m.encoder = MlpParams::init(
        {2 * s, spec.encoder_hidden, kLatentDim, Activation::kLeakyRelu, Activation::kLinear},
        rng);
    m.gating = MlpParams::init(
        {s, spec.gate_hidden, spec.expert_count, Activation::kLeakyRelu, Activation::kLinear},
        rng);
    for (std::size_t k = 0; k < spec.expert_count; ++k)
      m.experts.push_back(MlpParams::init({kLatentDim + s, spec.expert_hidden, s,
                                           Activation::kLeakyRelu, Activation::kLinear},
                                          rng));
    return m;
  }

  std::vector<Tensor*> all_params() {
    std::vector<Tensor*> out;
    auto collect = [&](MlpParams& p) {
      for (Tensor& w : p.weights) out.push_back(&w);
      for (Tensor& b : p.biases) out.push_back(&b);
    };
    collect(encoder);
    collect(gating);
    for (MlpParams& e : experts) collect(e);
    return out;
  }
};

/// MANN gate weights for a (normalized) previous state; softmax over logits.
inline std::vector<double> gate_weights(const PriorModel& m, std::span<const double> prev_norm) {
  std::vector<double> logits = mlp_eval(m.gating, prev_norm);
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return logits;
}

/// Deterministic 32-d embedding of a state transition.
inline LatentCode encode(const PriorModel& m, const CharacterState& prev,
                         const CharacterState& cur) {
  const CharacterStateLayout layout = m.layout();
  prev.validate(layout);
  cur.validate(layout);
  std::vector<double> in = m.norm.normalize(prev.values);
  const std::vector<double> cn = m.norm.normalize(cur.values);
  in.insert(in.end(), cn.begin(), cn.end());
  LatentCode z{mlp_eval(m.encoder, in)};
  z.validate();
  return z;
}

namespace detail {

/// Renormalizes the two quaternion blocks of a predicted character state.
inline void repair_quaternions(std::vector<double>& state) {
  auto renorm = [&](std::size_t at) {
    Quat q{state[at], state[at + 1], state[at + 2], state[at + 3]};
    q = q.normalized().canonical();
    state[at] = q.w;
    state[at + 1] = q.x;
    state[at + 2] = q.y;
    state[at + 3] = q.z;
  };
  renorm(CharacterStateLayout::kOrientation);
  renorm(CharacterStateLayout::kRelOrientation);
}

}  // namespace detail

/// Normalized predictions are clamped to this many standard deviations at
/// inference. Training data lives within a few sigma, so the clamp never
/// binds on-manifold; it bounds the autoregressive feedback loop when a
/// generator drives the prior off-distribution.
inline constexpr double kPredictionClampSigma = 10.0;

/// Inference safety clamp on latent codes, in standard deviations of the
/// embedding support. Wide on purpose: the generator's own output bound is
/// the real control, this only stops runaway feedback.
inline constexpr double kLatentClampSigma = 12.0;

/// One decoder step: predicted current state from (z, previous state).
/// The latent is clamped to the embedding support, the normalized output to
/// the inference envelope, and quaternion blocks repaired to unit norm.
inline CharacterState prior_step(const PriorModel& m, const LatentCode& z,
                                 const CharacterState& prev) {
  z.validate();
  const CharacterStateLayout layout = m.layout();
  prev.validate(layout);
  const std::vector<double> prev_norm = m.norm.normalize(prev.values);
  const std::vector<double> gates = gate_weights(m, prev_norm);

  std::vector<double> z_clamped = z.values;
  if (m.z_mean.size() == kLatentDim)
    for (std::size_t i = 0; i < kLatentDim; ++i) {
      const double lo = m.z_mean[i] - kLatentClampSigma * m.z_std[i];
      const double hi = m.z_mean[i] + kLatentClampSigma * m.z_std[i];
      z_clamped[i] = std::min(std::max(z_clamped[i], lo), hi);
    }

  std::vector<double> expert_in = z_clamped;
  expert_in.insert(expert_in.end(), prev_norm.begin(), prev_norm.end());
  std::vector<double> blend(layout.size(), 0.0);
  for (std::size_t k = 0; k < m.experts.size(); ++k) {
    if (gates[k] == 0.0) continue;
    const std::vector<double> e = mlp_eval(m.experts[k], expert_in);
    for (std::size_t i = 0; i < blend.size(); ++i) blend[i] += gates[k] * e[i];
  }
  for (double& v : blend)
    v = std::min(std::max(v, -kPredictionClampSigma), kPredictionClampSigma);
  CharacterState out{m.norm.denormalize(blend)};
  detail::repair_quaternions(out.values);
  out.validate(layout);
  return out;
}

/// Tape-side nodes of a pushed prior (training and loss composition).
struct PriorOnTape {
  MlpOnTape encoder;
  MlpOnTape gating;
  std::vector<MlpOnTape> experts;

  std::vector<int> all() const {
    std::vector<int> ids = encoder.all();
    auto g = gating.all();
    ids.insert(ids.end(), g.begin(), g.end());
    for (const MlpOnTape& e : experts) {
      auto v = e.all();
      ids.insert(ids.end(), v.begin(), v.end());
    }
    return ids;
  }
};

inline PriorOnTape push_prior(Tape& tape, const PriorModel& m, bool trainable) {
  PriorOnTape p;
  p.encoder = push_mlp(tape, m.encoder, trainable);
  p.gating = push_mlp(tape, m.gating, trainable);
  for (const MlpParams& e : m.experts) p.experts.push_back(push_mlp(tape, e, trainable));
  return p;
}

/// Decoder on tape: z [32,B] and normalized previous states [S,B] to the
/// normalized prediction [S,B] (gate-weighted blend of expert outputs).
inline int prior_decode_on_tape(Tape& tape, const PriorOnTape& p, const PriorModel& m,
                                int z, int prev_norm) {
  const std::size_t batch = tape.value(prev_norm).cols();
  const std::size_t s = m.state_dim();
  const int gates = tape.softmax_cols(mlp_forward(tape, p.gating, m.gating.spec, prev_norm));
  const int expert_in = tape.concat_rows(z, prev_norm);
  int blend = -1;
  for (std::size_t k = 0; k < p.experts.size(); ++k) {
    const int ek = mlp_forward(tape, p.experts[k], m.experts[k].spec, expert_in);
    const int wk = tape.broadcast_rows(tape.gather_rows(gates, {k}), s);
    const int term = tape.mul(wk, ek);
    blend = blend < 0 ? term : tape.add(blend, term);
  }
  (void)batch;
  return blend;
}

/// Encoder on tape: concatenated normalized (prev, cur) [2S,B] -> z [32,B].
inline int prior_encode_on_tape(Tape& tape, const PriorOnTape& p, const PriorModel& m,
                                int prev_cur_norm) {
  return mlp_forward(tape, p.encoder, m.encoder.spec, prev_cur_norm);
}

struct PriorTrainConfig {
  PriorSpec spec;
  double lr = 3e-4;
  std::size_t batch_size = 256;
  std::size_t steps = 5000;
  std::uint64_t seed = 0;
  double kl_weight = 0.0;  // optional latent magnitude regularizer, off by default
  // gaussian corruption of the decoder's conditioning state (normalized
  // units). Autoregressive rollouts feed predictions back as conditioning;
  // denoising teaches the decoder to contract small drift back onto the
  // data manifold instead of compounding it. The encoder always sees the
  // clean transition.
  double conditioning_noise = 0.05;
};

struct PriorTrainResult {
  PriorModel model;
  std::vector<double> loss_curve;  // per-dimension MSE in normalized units
  bool diverged = false;
  std::string diagnostic;
};

namespace detail {

inline Tensor batch_matrix(const std::vector<CharacterState>& states, const NormStats& norm,
                           const std::vector<std::size_t>& idx) {
  const std::size_t s = norm.mean.size();
  Tensor out(s, idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const std::vector<double> n = norm.normalize(states[idx[j]].values);
    for (std::size_t i = 0; i < s; ++i) out.at(i, j) = n[i];
  }
  return out;
}

}  // namespace detail

/// Joint training of the encoder and the mixture-of-experts prior by
/// minimizing the reconstruction error of dataset transitions.
inline PriorTrainResult train_prior(const MotionDataset& dataset, const PriorTrainConfig& cfg) {
  dataset.validate();
  const TransitionSet transitions = character_transitions(dataset);
  const std::vector<CharacterState> pooled = pooled_character_states(dataset);
  const NormStats norm = NormStats::fit(pooled);

  Rng master(cfg.seed);
  Rng init_rng = master.fork();
  Rng rng = master.fork();  // batch sampling stream
  PriorTrainResult result;
  result.model = PriorModel::init(dataset.skeleton, norm, cfg.spec, init_rng);
  result.model.default_seed_state =
      mean_standing_state(pooled, CharacterStateLayout::of(dataset.skeleton));
  PriorModel& model = result.model;

  AdamState adam = AdamState::init([&] {
    std::vector<Tensor> snapshot;
    for (Tensor* t : model.all_params()) snapshot.push_back(*t);
    return snapshot;
  }(), cfg.lr);

  const std::size_t n = transitions.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  const std::size_t s = model.state_dim();

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    // step decay squeezes the tail of the reconstruction loss
    const double progress = static_cast<double>(step) / static_cast<double>(cfg.steps);
    adam.lr = cfg.lr * (progress < 0.6 ? 1.0 : progress < 0.85 ? 0.3 : 0.1);

    std::vector<std::size_t> idx(batch);
    for (std::size_t j = 0; j < batch; ++j) idx[j] = rng.index(n);

    try {
      Tape tape;
      const PriorOnTape p = push_prior(tape, model, true);
      Tensor prev_clean = detail::batch_matrix(transitions.prev, norm, idx);
      Tensor prev_noisy = prev_clean;
      if (cfg.conditioning_noise > 0.0)
        for (double& v : prev_noisy.data) v += cfg.conditioning_noise * rng.normal();
      const int prev = tape.constant(std::move(prev_clean));
      const int cur = tape.constant(detail::batch_matrix(transitions.cur, norm, idx));
      const int z = prior_encode_on_tape(tape, p, model, tape.concat_rows(prev, cur));
      const int pred = prior_decode_on_tape(tape, p, model, z, tape.constant(std::move(prev_noisy)));
      const int resid = tape.sub(pred, cur);
      int loss = tape.mean_all(tape.mul(resid, resid));
      if (cfg.kl_weight > 0.0)
        loss = tape.add(loss, tape.scale(tape.sum_all(tape.mul(z, z)),
                                         0.5 * cfg.kl_weight / static_cast<double>(batch)));
      result.loss_curve.push_back(tape.value(loss).data[0]);

      const Gradients g = tape.backward(loss);
      std::vector<Tensor> grads;
      Tape* tp = &tape;
      std::vector<int> ids = p.all();
      for (int id : ids) grads.push_back(tp->gradient(g, id));
      adam_step(model.all_params(), grads, adam);
    } catch (const NumericalError& e) {
      result.diverged = true;
      result.diagnostic = "train_prior: aborted at step " + std::to_string(step) + ": " + e.what();
      break;
    }
    (void)s;
  }

  // embedding support over the training transitions, for inference clamping
  if (!result.diverged) {
    model.z_mean.assign(kLatentDim, 0.0);
    model.z_std.assign(kLatentDim, 0.0);
    std::vector<std::vector<double>> codes;
    codes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      codes.push_back(encode(model, transitions.prev[i], transitions.cur[i]).values);
      for (std::size_t k = 0; k < kLatentDim; ++k) model.z_mean[k] += codes.back()[k];
    }
    for (double& v : model.z_mean) v /= static_cast<double>(n);
    for (const auto& c : codes)
      for (std::size_t k = 0; k < kLatentDim; ++k) {
        const double d = c[k] - model.z_mean[k];
        model.z_std[k] += d * d;
      }
    for (double& v : model.z_std)
      v = std::max(std::sqrt(v / static_cast<double>(n)), 1e-6);
  }
  return result;
}

/// Rollout of the prior under a latent sequence; world root pose is
/// re-integrated from the relative displacement/orientation entries so the
/// emitted trajectory is globally consistent.
struct RolloutResult {
  Trajectory trajectory;
  std::vector<CharacterState> states;  // x0 followed by each prediction
  bool truncated = false;
};

/// Integrates character states into world-frame poses.
class StateIntegrator {
 public:
  StateIntegrator(const Skeleton& skel, const CharacterState& x0) : layout_(CharacterStateLayout::of(skel)) {
    x0.validate(layout_);
    const auto& v = x0.values;
    heading_ = 0.0;
    // world orientation seeded from the local-frame orientation at heading 0
    q_ = Quat{v[CharacterStateLayout::kOrientation], v[CharacterStateLayout::kOrientation + 1],
              v[CharacterStateLayout::kOrientation + 2], v[CharacterStateLayout::kOrientation + 3]}
             .normalized();
    heading_of(q_, heading_);
    pos_ = {0, 0, v[CharacterStateLayout::kHeight]};
  }

  Pose pose_of(const CharacterState& x) const {
    Pose p;
    p.root_position = pos_;
    p.root_orientation = q_;
    p.joint_values.assign(x.values.begin() + CharacterStateLayout::kJointPose,
                          x.values.begin() + CharacterStateLayout::kJointPose + layout_.dof);
    return p;
  }

  /// Advance with the next state's relative entries; returns its world pose.
  Pose advance(const CharacterState& x) {
    x.validate(layout_);
    const auto& v = x.values;
    const Vec3 step = Quat::yaw(heading_).rotate(
        {v[CharacterStateLayout::kRelLocation], v[CharacterStateLayout::kRelLocation + 1], 0});
    pos_ = {pos_.x + step.x, pos_.y + step.y, v[CharacterStateLayout::kHeight]};
    const Quat rel{v[CharacterStateLayout::kRelOrientation],
                   v[CharacterStateLayout::kRelOrientation + 1],
                   v[CharacterStateLayout::kRelOrientation + 2],
                   v[CharacterStateLayout::kRelOrientation + 3]};
    q_ = (q_ * rel).normalized();
    heading_of(q_, heading_);  // carried through degenerate facings
    return pose_of(x);
  }

 private:
  CharacterStateLayout layout_;
  Vec3 pos_{};
  Quat q_ = Quat::identity();
  double heading_ = 0.0;
};

inline RolloutResult rollout(const PriorModel& m, const std::vector<LatentCode>& z_sequence,
                             const CharacterState& x0, double dt = 1.0 / 30.0) {
  RolloutResult out;
  out.trajectory.skeleton_id = m.skeleton.name;
  out.trajectory.dt = dt;
  StateIntegrator cursor(m.skeleton, x0);
  out.states.push_back(x0);
  out.trajectory.frames.push_back(cursor.pose_of(x0));
  CharacterState prev = x0;
  for (const LatentCode& z : z_sequence) {
    CharacterState next;
    try {
      next = prior_step(m, z, prev);
    } catch (const NumericalError&) {
      out.truncated = true;
      break;
    }
    out.states.push_back(next);
    out.trajectory.frames.push_back(cursor.advance(next));
    prev = std::move(next);
  }
  return out;
}

// ---- checkpoint I/O ----

inline void save_prior(const std::filesystem::path& path, const PriorModel& m,
                       std::uint64_t seed = 0, std::size_t step = 0) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "prior";
  ckpt.meta["version"] = kVersion;
  ckpt.meta["seed"] = seed;
  ckpt.meta["step"] = step;
  ckpt.meta["skeleton"] = skeleton_to_json(m.skeleton);
  ckpt.meta["expert_count"] = m.experts.size();
  pack_mlp(ckpt, "encoder", m.encoder);
  pack_mlp(ckpt, "gating", m.gating);
  for (std::size_t k = 0; k < m.experts.size(); ++k)
    pack_mlp(ckpt, "expert" + std::to_string(k), m.experts[k]);
  Tensor mean(m.norm.mean.size(), 1), sd(m.norm.std_dev.size(), 1);
  mean.data = m.norm.mean;
  sd.data = m.norm.std_dev;
  ckpt.tensors.emplace_back("norm.mean", std::move(mean));
  ckpt.tensors.emplace_back("norm.std", std::move(sd));
  Tensor seed_state(m.default_seed_state.values.size(), 1);
  seed_state.data = m.default_seed_state.values;
  ckpt.tensors.emplace_back("default_seed_state", std::move(seed_state));
  Tensor zm(m.z_mean.size(), 1), zs(m.z_std.size(), 1);
  zm.data = m.z_mean;
  zs.data = m.z_std;
  ckpt.tensors.emplace_back("z.mean", std::move(zm));
  ckpt.tensors.emplace_back("z.std", std::move(zs));
  save_checkpoint(path, ckpt);
}

inline PriorModel load_prior(const std::filesystem::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  require(ckpt.meta.contains("kind") && ckpt.meta["kind"] == "prior",
          "load_prior: not a prior checkpoint");
  PriorModel m;
  m.skeleton = skeleton_from_json(ckpt.meta["skeleton"]);
  m.encoder = unpack_mlp(ckpt, "encoder");
  m.gating = unpack_mlp(ckpt, "gating");
  const std::size_t experts = ckpt.meta["expert_count"].get<std::size_t>();
  for (std::size_t k = 0; k < experts; ++k)
    m.experts.push_back(unpack_mlp(ckpt, "expert" + std::to_string(k)));
  m.norm.mean = ckpt.tensor("norm.mean").data;
  m.norm.std_dev = ckpt.tensor("norm.std").data;
  m.default_seed_state.values = ckpt.tensor("default_seed_state").data;
  m.z_mean = ckpt.tensor("z.mean").data;
  m.z_std = ckpt.tensor("z.std").data;
  m.validate();
  return m;
}

}  // namespace ace
