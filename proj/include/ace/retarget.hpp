#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ace/adam.hpp"
#include "ace/features.hpp"
#include "ace/prior.hpp"

namespace ace {

/// Retargeting generator G(x^h_t, x^r_{t-1}) -> z. Inputs are z-scored with
/// the stored per-species statistics; the raw MLP output maps through a
/// scaled tanh onto the prior's embedding support (z_center +- z_half_range),
/// so generated codes stay where the decoder is meaningful, in training and
/// at inference alike.
struct GeneratorModel {
  MlpParams mlp;  // [Sh + Sr] -> 32, LeakyReLU hidden, linear out
  NormStats human_norm;
  NormStats char_norm;
  std::vector<double> z_center;
  std::vector<double> z_half_range;

  void validate() const {
    mlp.validate();
    require(mlp.spec.input == human_norm.mean.size() + char_norm.mean.size(),
            "GeneratorModel: input width must be |HumanState| + |CharacterState|");
    require(mlp.spec.output == kLatentDim, "GeneratorModel: output must be 32");
    require(z_center.size() == kLatentDim && z_half_range.size() == kLatentDim,
            "GeneratorModel: latent range must cover 32 dims");
    for (double h : z_half_range)
      require(h > 0, "GeneratorModel: latent half-range must be positive");
  }
};

/// Transition discriminator D(x^r_{t-1}, x^r_t) -> (0, 1).
struct DiscriminatorModel {
  MlpParams mlp;  // [2 Sr] -> 1, SiLU hidden, sigmoid out

  void validate() const {
    mlp.validate();
    require(mlp.spec.output == 1, "DiscriminatorModel: output must be scalar");
    require(mlp.spec.output_activation == Activation::kSigmoid,
            "DiscriminatorModel: output activation must be sigmoid");
  }
};

struct TrainConfig {
  double w_gp = 0.1;
  double w_adv = 0.3;
  double w_fea = 0.7;
  double lr = 3e-4;
  std::size_t batch_size = 256;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  std::size_t d_steps_per_g_step = 1;
  std::size_t checkpoint_every = 0;  // 0 = only final
  // half-width of the generator's latent box, in embedding std deviations
  double latent_range_sigma = 4.0;
  std::vector<std::size_t> generator_hidden{512, 512, 512};
  std::vector<std::size_t> discriminator_hidden{512, 512, 512};

  void validate() const {
    require(w_gp >= 0 && w_adv >= 0 && w_fea >= 0, "TrainConfig: weights must be nonnegative");
    require(w_adv + w_fea > 0, "TrainConfig: w_adv + w_fea must be positive");
    require(batch_size >= 1 && d_steps_per_g_step >= 1, "TrainConfig: counts must be >= 1");
  }
};

/// Probabilities are clamped away from {0, 1} before any log.
inline constexpr double kProbEps = 1e-7;

// ---- GAN loss building blocks (shared with the 2-d toy in the test suite) ----

inline int clamped_log(Tape& t, int prob) { return t.log(t.clamp(prob, kProbEps, 1.0 - kProbEps)); }

/// -E[log D(real)] over a [1, B] row of discriminator outputs.
inline int bce_real_term(Tape& t, int d_out) { return t.neg(t.mean_all(clamped_log(t, d_out))); }

/// -E[log(1 - D(fake))].
inline int bce_fake_term(Tape& t, int d_out) {
  const Tensor& v = t.value(d_out);
  const int ones = t.constant(Tensor(v.rows(), v.cols(), 1.0));
  return t.neg(t.mean_all(clamped_log(t, t.sub(ones, d_out))));
}

/// -E[log D(fake)] (generator's adversarial objective).
inline int adversarial_term(Tape& t, int d_out) { return t.neg(t.mean_all(clamped_log(t, d_out))); }

/// (w_gp / 2) E[||grad_input D||^2], evaluated at the given input leaf. The
/// input gradient is produced by a recorded backward pass, so the returned
/// scalar can itself be differentiated with respect to D's parameters.
inline int gradient_penalty_term(Tape& t, int d_out, int input_leaf, double w_gp) {
  const std::size_t batch = t.value(d_out).cols();
  const Gradients g = t.backward(t.sum_all(d_out));
  if (!g.has(input_leaf)) return t.constant(Tensor::scalar(0.0));  // input-independent D
  const int gx = g.node_of(input_leaf);
  return t.scale(t.sum_all(t.mul(gx, gx)), 0.5 * w_gp / static_cast<double>(batch));
}

struct DiscriminatorLossResult {
  double loss = 0;
  double base = 0;
  double penalty = 0;
  std::vector<Tensor> grads;  // parameter order: weights then biases
};

/// Discriminator loss over batches of concatenated transitions [2S, B]:
/// -E_real[log D] - E_fake[log(1 - D)] + (w_gp/2) E_real[||grad D||^2].
/// The penalty is evaluated at the real samples; its parameter gradients go
/// through the recorded double-backward machinery.
inline DiscriminatorLossResult discriminator_loss(const DiscriminatorModel& d,
                                                  const Tensor& real_pairs,
                                                  const Tensor& fake_pairs, double w_gp) {
  require(real_pairs.rows() == d.mlp.spec.input && fake_pairs.rows() == d.mlp.spec.input,
          "discriminator_loss: pair width mismatch");
  require(real_pairs.cols() >= 1 && fake_pairs.cols() >= 1,
          "discriminator_loss: empty batch");
  Tape tape;
  const MlpOnTape dm = push_mlp(tape, d.mlp, true);
  const int real_in = tape.leaf(real_pairs);
  const int fake_in = tape.constant(fake_pairs);
  const int d_real = mlp_forward(tape, dm, d.mlp.spec, real_in);
  const int d_fake = mlp_forward(tape, dm, d.mlp.spec, fake_in);
  const int base = tape.add(bce_real_term(tape, d_real), bce_fake_term(tape, d_fake));
  const int penalty = gradient_penalty_term(tape, d_real, real_in, w_gp);
  const int loss = tape.add(base, penalty);

  DiscriminatorLossResult out;
  out.base = tape.value(base).data[0];
  out.penalty = tape.value(penalty).data[0];
  out.loss = tape.value(loss).data[0];
  const Gradients g = tape.backward(loss);
  for (int id : dm.all()) out.grads.push_back(tape.gradient(g, id));
  return out;
}

/// Deterministic latent code for one (human state, previous character state).
inline LatentCode generator_forward(const GeneratorModel& g, const HumanState& xh,
                                    const CharacterState& xr_prev) {
  xh.validate();
  std::vector<double> in = g.human_norm.normalize(xh.values);
  const std::vector<double> cn = g.char_norm.normalize(xr_prev.values);
  in.insert(in.end(), cn.begin(), cn.end());
  LatentCode z{mlp_eval(g.mlp, in)};
  for (std::size_t i = 0; i < kLatentDim; ++i)
    z.values[i] = g.z_center[i] + g.z_half_range[i] * std::tanh(z.values[i]);
  z.validate();
  return z;
}

struct GeneratorLossResult {
  double loss = 0;
  double adv_term = 0;  // unweighted -E[log D]
  double fea_term = 0;  // unweighted E||psi_h - psi_r||
  std::vector<Tensor> grads;
};

namespace detail {

inline Tensor human_batch_matrix(const std::vector<HumanState>& states, const NormStats& norm,
                                 const std::vector<std::size_t>& idx) {
  Tensor out(norm.mean.size(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const std::vector<double> n = norm.normalize(states[idx[j]].values);
    for (std::size_t i = 0; i < n.size(); ++i) out.at(i, j) = n[i];
  }
  return out;
}

inline Tensor column_tensor(const std::vector<double>& v) {
  Tensor t(v.size(), 1);
  t.data = v;
  return t;
}

}  // namespace detail

/// Generator loss over a batch: w_adv * (-E[log D(x_{t-1}, xhat_t)]) +
/// w_fea * E||Psi(x^h) - Psi(xhat^r)||, with xhat^r produced by the frozen
/// prior from the generator's latent code. Gradients flow through the prior
/// into the generator only.
inline GeneratorLossResult generator_loss(const GeneratorModel& g, const DiscriminatorModel& d,
                                          const PriorModel& prior,
                                          const std::vector<HumanState>& xh_batch,
                                          const std::vector<CharacterState>& xr_prev_batch,
                                          const Skeleton& human_skel, const EEMapping& mapping,
                                          double w_adv, double w_fea) {
  require(!xh_batch.empty() && xh_batch.size() == xr_prev_batch.size(),
          "generator_loss: batch sizes must match and be non-empty");
  const std::size_t batch = xh_batch.size();
  const std::size_t s = prior.state_dim();
  mapping.validate(prior.skeleton.end_effectors.size(), human_skel.end_effectors.size());

  Tape tape;
  const MlpOnTape gm = push_mlp(tape, g.mlp, true);
  const PriorOnTape pm = push_prior(tape, prior, false);
  const MlpOnTape dm = push_mlp(tape, d.mlp, false);

  std::vector<std::size_t> all_idx(batch);
  for (std::size_t i = 0; i < batch; ++i) all_idx[i] = i;
  const int xh_norm = tape.constant(detail::human_batch_matrix(xh_batch, g.human_norm, all_idx));
  Tensor prev_mat(s, batch);
  for (std::size_t j = 0; j < batch; ++j) {
    const std::vector<double> n = g.char_norm.normalize(xr_prev_batch[j].values);
    for (std::size_t i = 0; i < s; ++i) prev_mat.at(i, j) = n[i];
  }
  const int prev_norm = tape.constant(std::move(prev_mat));

  const int z_raw = mlp_forward(tape, gm, g.mlp.spec, tape.concat_rows(xh_norm, prev_norm));
  const int z = tape.add(
      tape.mul(tape.broadcast_cols(tape.constant(detail::column_tensor(g.z_half_range)), batch),
               tape.tanh(z_raw)),
      tape.broadcast_cols(tape.constant(detail::column_tensor(g.z_center)), batch));
  const int xhat_norm = prior_decode_on_tape(tape, pm, prior, z, prev_norm);
  const int d_out = mlp_forward(tape, dm, d.mlp.spec, tape.concat_rows(prev_norm, xhat_norm));
  const int adv = adversarial_term(tape, d_out);

  // denormalize, then gather + scale the linear feature map
  const FeatureIndexMap fmap = character_feature_map(prior.skeleton);
  const int std_b = tape.broadcast_cols(tape.constant(detail::column_tensor(prior.norm.std_dev)),
                                        batch);
  const int mean_b = tape.broadcast_cols(tape.constant(detail::column_tensor(prior.norm.mean)),
                                         batch);
  const int xhat_raw = tape.add(tape.mul(xhat_norm, std_b), mean_b);
  const int psi_r = tape.mul(tape.gather_rows(xhat_raw, fmap.rows),
                             tape.broadcast_cols(tape.constant(detail::column_tensor(fmap.scales)),
                                                 batch));
  Tensor psi_h(fmap.rows.size(), batch);
  for (std::size_t j = 0; j < batch; ++j) {
    const FeatureVector f = feature_of_human(xh_batch[j], human_skel, mapping);
    require(f.values.size() == fmap.rows.size(), "generator_loss: feature layout mismatch");
    for (std::size_t i = 0; i < f.values.size(); ++i) psi_h.at(i, j) = f.values[i];
  }
  const int diff = tape.sub(psi_r, tape.constant(std::move(psi_h)));
  const int per_sample = tape.sqrt(tape.col_sum(tape.mul(diff, diff)));
  const int fea = tape.scale(tape.sum_all(per_sample), 1.0 / static_cast<double>(batch));

  const int loss = tape.add(tape.scale(adv, w_adv), tape.scale(fea, w_fea));

  GeneratorLossResult out;
  out.adv_term = tape.value(adv).data[0];
  out.fea_term = tape.value(fea).data[0];
  out.loss = tape.value(loss).data[0];
  const Gradients grad = tape.backward(loss);
  for (int id : gm.all()) out.grads.push_back(tape.gradient(grad, id));
  return out;
}

/// Plain decoder step in normalized space, no quaternion repair: the exact
/// semantics the training tape sees. Used to assemble fake transitions.
inline std::vector<double> prior_decode_norm(const PriorModel& m, std::span<const double> z,
                                             std::span<const double> prev_norm) {
  const std::vector<double> gates = gate_weights(m, prev_norm);
  std::vector<double> expert_in(z.begin(), z.end());
  expert_in.insert(expert_in.end(), prev_norm.begin(), prev_norm.end());
  std::vector<double> blend(m.state_dim(), 0.0);
  for (std::size_t k = 0; k < m.experts.size(); ++k) {
    if (gates[k] == 0.0) continue;
    const std::vector<double> e = mlp_eval(m.experts[k], expert_in);
    for (std::size_t i = 0; i < blend.size(); ++i) blend[i] += gates[k] * e[i];
  }
  return blend;
}

struct TrainAceResult {
  GeneratorModel generator;
  DiscriminatorModel discriminator;
  std::vector<double> d_loss_curve;
  std::vector<double> g_loss_curve;
  std::vector<double> g_fea_curve;
  bool aborted = false;
  std::string diagnostic;
};

using CheckpointSink =
    std::function<void(std::size_t step, const GeneratorModel&, const DiscriminatorModel&)>;

/// Alternating adversarial training of the retargeting generator and the
/// transition discriminator against a frozen pretrained prior. Real and fake
/// transitions are compared in normalized state space; fake previous states
/// come from real dataset transitions paired with random human frames.
inline TrainAceResult train_ace(const MotionDataset& human_ds, const MotionDataset& char_ds,
                                const PriorModel& prior, const EEMapping& mapping,
                                const TrainConfig& cfg, const CheckpointSink& sink = nullptr) {
  cfg.validate();
  require(char_ds.skeleton.name == prior.skeleton.name,
          "train_ace: prior was trained for a different skeleton");
  prior.validate();

  const std::vector<HumanState> human_states = pooled_human_states(human_ds);
  const TransitionSet transitions = character_transitions(char_ds);
  const NormStats human_norm = NormStats::fit(human_states);
  const std::size_t s = prior.state_dim();
  const std::size_t sh = HumanStateLayout::kSize;

  require(prior.z_mean.size() == kLatentDim,
          "train_ace: prior has no embedding statistics (train it with train_prior)");

  Rng master(cfg.seed);
  Rng init_rng = master.fork();
  Rng rng = master.fork();  // batch sampling stream
  TrainAceResult result;
  result.generator.human_norm = human_norm;
  result.generator.char_norm = prior.norm;
  result.generator.z_center = prior.z_mean;
  result.generator.z_half_range.resize(kLatentDim);
  for (std::size_t i = 0; i < kLatentDim; ++i)
    result.generator.z_half_range[i] = cfg.latent_range_sigma * prior.z_std[i];
  result.generator.mlp = MlpParams::init({sh + s, cfg.generator_hidden, kLatentDim,
                                          Activation::kLeakyRelu, Activation::kLinear},
                                         init_rng);
  result.discriminator.mlp = MlpParams::init({2 * s, cfg.discriminator_hidden, 1,
                                              Activation::kSilu, Activation::kSigmoid},
                                             init_rng);
  GeneratorModel& gen = result.generator;
  DiscriminatorModel& dis = result.discriminator;

  auto snapshot = [](const MlpParams& p) {
    std::vector<Tensor> out = p.weights;
    out.insert(out.end(), p.biases.begin(), p.biases.end());
    return out;
  };
  AdamState adam_g = AdamState::init(snapshot(gen.mlp), cfg.lr);
  AdamState adam_d = AdamState::init(snapshot(dis.mlp), cfg.lr);
  auto params_of = [](MlpParams& p) {
    std::vector<Tensor*> out;
    for (Tensor& w : p.weights) out.push_back(&w);
    for (Tensor& b : p.biases) out.push_back(&b);
    return out;
  };

  const std::size_t n_real = transitions.size();
  const std::size_t n_human = human_states.size();
  const std::size_t batch = std::min(cfg.batch_size, std::min(n_real, n_human));

  auto normalized_pair_column = [&](const CharacterState& prev, std::span<const double> cur_norm,
                                    Tensor& m, std::size_t col) {
    const std::vector<double> pn = prior.norm.normalize(prev.values);
    for (std::size_t i = 0; i < s; ++i) m.at(i, col) = pn[i];
    for (std::size_t i = 0; i < s; ++i) m.at(s + i, col) = cur_norm[i];
  };

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    try {
      for (std::size_t dstep = 0; dstep < cfg.d_steps_per_g_step; ++dstep) {
        Tensor real_pairs(2 * s, batch);
        Tensor fake_pairs(2 * s, batch);
        for (std::size_t j = 0; j < batch; ++j) {
          const std::size_t r = rng.index(n_real);
          normalized_pair_column(transitions.prev[r],
                                 prior.norm.normalize(transitions.cur[r].values), real_pairs, j);
          const std::size_t h = rng.index(n_human);
          const std::size_t c = rng.index(n_real);
          const LatentCode z = generator_forward(gen, human_states[h], transitions.prev[c]);
          const std::vector<double> prev_norm = prior.norm.normalize(transitions.prev[c].values);
          normalized_pair_column(transitions.prev[c],
                                 prior_decode_norm(prior, z.values, prev_norm), fake_pairs, j);
        }
        DiscriminatorLossResult dl = discriminator_loss(dis, real_pairs, fake_pairs, cfg.w_gp);
        result.d_loss_curve.push_back(dl.loss);
        adam_step(params_of(dis.mlp), dl.grads, adam_d);
      }

      std::vector<HumanState> xh;
      std::vector<CharacterState> xprev;
      for (std::size_t j = 0; j < batch; ++j) {
        xh.push_back(human_states[rng.index(n_human)]);
        xprev.push_back(transitions.prev[rng.index(n_real)]);
      }
      GeneratorLossResult gl = generator_loss(gen, dis, prior, xh, xprev, human_ds.skeleton,
                                              mapping, cfg.w_adv, cfg.w_fea);
      result.g_loss_curve.push_back(gl.loss);
      result.g_fea_curve.push_back(gl.fea_term);
      adam_step(params_of(gen.mlp), gl.grads, adam_g);
    } catch (const NumericalError& e) {
      result.aborted = true;
      result.diagnostic =
          "train_ace: aborted at step " + std::to_string(step) + ": " + e.what();
      break;
    }
    if (sink && cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0)
      sink(step + 1, gen, dis);
  }
  if (sink) sink(cfg.steps, gen, dis);
  return result;
}

struct RetargetResult {
  Trajectory trajectory;
  std::vector<CharacterState> states;
  bool truncated = false;
};

/// Per-frame retargeting: z_t = G(x^h_t, xhat^r_{t-1}), xhat^r_t =
/// prior(z_t, xhat^r_{t-1}); the output has one frame per human frame (the
/// seed state covers frame 0).
inline RetargetResult retarget(const GeneratorModel& g, const PriorModel& prior,
                               const Skeleton& human_skel, const Trajectory& human_traj,
                               const CharacterState& x0) {
  require(human_traj.frames.size() >= 2, "retarget: need at least 2 human frames");
  g.validate();
  RetargetResult out;
  out.trajectory.skeleton_id = prior.skeleton.name;
  out.trajectory.dt = human_traj.dt;
  StateIntegrator cursor(prior.skeleton, x0);
  out.states.push_back(x0);
  out.trajectory.frames.push_back(cursor.pose_of(x0));
  CharacterState prev = x0;
  for (std::size_t t = 1; t < human_traj.frames.size(); ++t) {
    CharacterState next;
    try {
      const HumanState xh = extract_human_state(human_skel, human_traj, t);
      next = prior_step(prior, generator_forward(g, xh, prev), prev);
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

inline void save_generator(const std::filesystem::path& path, const GeneratorModel& g,
                           std::uint64_t seed = 0, std::size_t step = 0) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "generator";
  ckpt.meta["version"] = kVersion;
  ckpt.meta["seed"] = seed;
  ckpt.meta["step"] = step;
  pack_mlp(ckpt, "mlp", g.mlp);
  auto col = [](const std::vector<double>& v) {
    Tensor t(v.size(), 1);
    t.data = v;
    return t;
  };
  ckpt.tensors.emplace_back("human_norm.mean", col(g.human_norm.mean));
  ckpt.tensors.emplace_back("human_norm.std", col(g.human_norm.std_dev));
  ckpt.tensors.emplace_back("char_norm.mean", col(g.char_norm.mean));
  ckpt.tensors.emplace_back("char_norm.std", col(g.char_norm.std_dev));
  ckpt.tensors.emplace_back("z.center", col(g.z_center));
  ckpt.tensors.emplace_back("z.half_range", col(g.z_half_range));
  save_checkpoint(path, ckpt);
}

inline GeneratorModel load_generator(const std::filesystem::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  require(ckpt.meta.contains("kind") && ckpt.meta["kind"] == "generator",
          "load_generator: not a generator checkpoint");
  GeneratorModel g;
  g.mlp = unpack_mlp(ckpt, "mlp");
  g.human_norm.mean = ckpt.tensor("human_norm.mean").data;
  g.human_norm.std_dev = ckpt.tensor("human_norm.std").data;
  g.char_norm.mean = ckpt.tensor("char_norm.mean").data;
  g.char_norm.std_dev = ckpt.tensor("char_norm.std").data;
  g.z_center = ckpt.tensor("z.center").data;
  g.z_half_range = ckpt.tensor("z.half_range").data;
  g.validate();
  return g;
}

inline void save_discriminator(const std::filesystem::path& path, const DiscriminatorModel& d,
                               std::uint64_t seed = 0, std::size_t step = 0) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "discriminator";
  ckpt.meta["version"] = kVersion;
  ckpt.meta["seed"] = seed;
  ckpt.meta["step"] = step;
  pack_mlp(ckpt, "mlp", d.mlp);
  save_checkpoint(path, ckpt);
}

inline DiscriminatorModel load_discriminator(const std::filesystem::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  require(ckpt.meta.contains("kind") && ckpt.meta["kind"] == "discriminator",
          "load_discriminator: not a discriminator checkpoint");
  DiscriminatorModel d;
  d.mlp = unpack_mlp(ckpt, "mlp");
  d.validate();
  return d;
}

}  // namespace ace
