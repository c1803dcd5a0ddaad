// ace: batch pipeline driver for cross-morphology motion retargeting.
//
// Subcommands: gen-data, pretrain, map-ee, train, retarget, eval.
// Each command reads a JSON config (overridable with --set path=value),
// writes its outputs plus a run manifest, and prints a short summary.
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ace/bvh.hpp"
#include "ace/config.hpp"
#include "ace/gait.hpp"
#include "ace/human_motion.hpp"
#include "ace/metrics.hpp"
#include "ace/motion_io.hpp"
#include "ace/prior.hpp"
#include "ace/retarget.hpp"

namespace {

using ace::Json;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides,
                  "override a config field by dotted path, e.g. --set train.steps=500");
}

class ManifestScope {
 public:
  ManifestScope(std::string command, Json config)
      : start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.resolved_config = std::move(config);
    manifest_.seed = ace::cfg::get_or<std::uint64_t>(manifest_.resolved_config, "seed", 0);
  }

  void input(const std::string& path) { manifest_.inputs.push_back(path); }
  void output(const std::string& path) { manifest_.outputs.push_back(path); }

  void write() {
    ace::require(!manifest_.outputs.empty(), "manifest: no outputs recorded");
    manifest_.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.write(manifest_.outputs.front() + ".manifest.json");
  }

 private:
  ace::RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

ace::Skeleton skeleton_from_config(const Json& config, const std::string& key) {
  const auto* node = ace::cfg::find(config, key);
  ace::require(node != nullptr, "config field '" + key + "' is required");
  if (node->is_string()) return ace::skeleton_by_name(node->get<std::string>());
  return ace::skeleton_from_json(*node, key);
}

std::vector<ace::GaitSpec> gaits_from_config(const Json& config, std::size_t feet) {
  std::vector<ace::GaitSpec> out;
  const auto names = ace::cfg::get_or<std::vector<std::string>>(
      config, "gaits", feet == 6 ? std::vector<std::string>{"tripod"}
                                 : std::vector<std::string>{"trot", "walk", "bound"});
  for (const std::string& n : names) {
    if (n == "trot") out.push_back(ace::trot_gait());
    else if (n == "walk") out.push_back(ace::walk_gait());
    else if (n == "bound") out.push_back(ace::bound_gait());
    else if (n == "tripod") out.push_back(ace::tripod_gait());
    else throw ace::ValidationError("unknown gait '" + n + "'");
  }
  return out;
}

ace::CommandProfile profile_from_config(const Json& config, std::uint64_t seed) {
  ace::CommandProfile p;
  p.v_min = ace::cfg::get_or<double>(config, "commands.v_min", p.v_min);
  p.v_max = ace::cfg::get_or<double>(config, "commands.v_max", p.v_max);
  p.w_min = ace::cfg::get_or<double>(config, "commands.w_min", p.w_min);
  p.w_max = ace::cfg::get_or<double>(config, "commands.w_max", p.w_max);
  p.hold_min = ace::cfg::get_or<double>(config, "commands.hold_min", p.hold_min);
  p.hold_max = ace::cfg::get_or<double>(config, "commands.hold_max", p.hold_max);
  p.seed = seed;
  return p;
}

ace::EEMapping mapping_from_file(const std::string& path) {
  const Json j = ace::parse_json_file(path);
  ace::EEMapping m;
  const auto& pairs = ace::schema::field(j, "pairs", "mapping");
  for (const auto& p : pairs)
    m.char_to_human.push_back(p.at("human_ee").get<std::size_t>());
  m.source = ace::schema::field(j, "source", "mapping").get<std::string>() == "manual"
                 ? ace::EEMapping::Source::kManual
                 : ace::EEMapping::Source::kAuto;
  return m;
}

int cmd_gen_data(const CommonArgs& args) {
  const Json config = ace::load_config(args.config_path, args.overrides);
  ManifestScope manifest("gen-data", config);
  const std::uint64_t seed = ace::cfg::get_or<std::uint64_t>(config, "seed", 0);

  const std::string out_char = ace::cfg::get_or<std::string>(config, "out_character", "");
  const std::string out_human = ace::cfg::get_or<std::string>(config, "out_human", "");
  ace::require(!out_char.empty() || !out_human.empty(),
               "gen-data: set out_character and/or out_human");

  if (!out_char.empty()) {
    const ace::Skeleton skel = skeleton_from_config(config, "character");
    ace::DatagenReport report;
    const ace::MotionDataset ds = ace::gen_character_dataset(
        skel, skel.foot_indices().empty() ? std::vector<ace::GaitSpec>{}
                                          : gaits_from_config(config, skel.foot_indices().size()),
        profile_from_config(config, seed),
        ace::cfg::get_or<std::size_t>(config, "frames_per_trajectory", 3000),
        ace::cfg::get_or<std::size_t>(config, "trajectories_per_gait", 2),
        ace::cfg::get_or<double>(config, "dt", 1.0 / 30.0), &report);
    ace::save_dataset(out_char, ds);
    manifest.output(out_char);
    std::cout << "character dataset: " << ds.trajectories.size() << " trajectories, "
              << ds.frame_count() << " frames";
    if (report.ik_clamp_events > 0)
      std::cout << " (" << report.ik_clamp_events << " IK clamp events)";
    std::cout << " -> " << out_char << "\n";
  }

  if (!out_human.empty()) {
    ace::HumanMotionConfig hc;
    hc.templates = ace::cfg::get_or<std::vector<std::string>>(config, "human.templates", hc.templates);
    hc.trajectories_per_template = ace::cfg::get_or<std::size_t>(
        config, "human.trajectories_per_template", hc.trajectories_per_template);
    hc.frames = ace::cfg::get_or<std::size_t>(config, "human.frames", hc.frames);
    hc.dt = ace::cfg::get_or<double>(config, "dt", hc.dt);
    hc.seed = seed;
    const ace::MotionDataset ds = ace::gen_human_dataset(hc);
    ace::save_dataset(out_human, ds);
    manifest.output(out_human);
    std::cout << "human dataset: " << ds.trajectories.size() << " trajectories, "
              << ds.frame_count() << " frames -> " << out_human << "\n";
  }

  manifest.write();
  return 0;
}

int cmd_pretrain(const CommonArgs& args) {
  const Json config = ace::load_config(args.config_path, args.overrides);
  ManifestScope manifest("pretrain", config);

  const std::string dataset_path = ace::cfg::get_required<std::string>(config, "dataset");
  const std::string out = ace::cfg::get_or<std::string>(config, "out", "prior.ckpt");
  manifest.input(dataset_path);
  const ace::MotionDataset ds = ace::load_dataset(dataset_path);

  ace::PriorTrainConfig cfg;
  cfg.spec.expert_count = ace::cfg::get_or<std::size_t>(config, "prior.experts", 8);
  cfg.spec.encoder_hidden = ace::cfg::get_or<std::vector<std::size_t>>(
      config, "prior.encoder_hidden", cfg.spec.encoder_hidden);
  cfg.spec.gate_hidden =
      ace::cfg::get_or<std::vector<std::size_t>>(config, "prior.gate_hidden", cfg.spec.gate_hidden);
  cfg.spec.expert_hidden = ace::cfg::get_or<std::vector<std::size_t>>(
      config, "prior.expert_hidden", cfg.spec.expert_hidden);
  cfg.lr = ace::cfg::get_or<double>(config, "prior.lr", cfg.lr);
  cfg.batch_size = ace::cfg::get_or<std::size_t>(config, "prior.batch_size", cfg.batch_size);
  cfg.steps = ace::cfg::get_or<std::size_t>(config, "prior.steps", cfg.steps);
  cfg.kl_weight = ace::cfg::get_or<double>(config, "prior.kl_weight", 0.0);
  cfg.seed = ace::cfg::get_or<std::uint64_t>(config, "seed", 0);

  const ace::PriorTrainResult result = ace::train_prior(ds, cfg);
  if (result.diverged) {
    std::cerr << result.diagnostic << "\n";
    return 3;
  }
  ace::save_prior(out, result.model, cfg.seed, cfg.steps);
  manifest.output(out);

  const std::string curves = ace::cfg::get_or<std::string>(config, "out_curves", "");
  if (!curves.empty()) {
    Json c;
    c["loss"] = result.loss_curve;
    ace::write_file_atomic(curves, c.dump(1) + "\n");
    manifest.output(curves);
  }
  manifest.write();
  std::cout << "prior trained: " << cfg.steps << " steps, final loss "
            << (result.loss_curve.empty() ? 0.0 : result.loss_curve.back()) << " -> " << out
            << "\n";
  return 0;
}

int cmd_map_ee(const CommonArgs& args) {
  const Json config = ace::load_config(args.config_path, args.overrides);
  ManifestScope manifest("map-ee", config);

  const std::string human_path = ace::cfg::get_required<std::string>(config, "human_dataset");
  const std::string char_path = ace::cfg::get_required<std::string>(config, "character_dataset");
  const std::string out = ace::cfg::get_or<std::string>(config, "out", "mapping.json");
  manifest.input(human_path);
  manifest.input(char_path);
  const ace::MotionDataset human_ds = ace::load_dataset(human_path);
  const ace::MotionDataset char_ds = ace::load_dataset(char_path);

  // manual override pairs: ["<char_ee>=<human_ee>", ...] by index
  ace::EEMapping manual;
  const auto override_pairs =
      ace::cfg::get_or<std::vector<std::string>>(config, "override", {});
  const bool has_override = !override_pairs.empty();
  if (has_override) {
    manual.char_to_human.assign(char_ds.skeleton.end_effectors.size(), 0);
    std::vector<bool> seen(char_ds.skeleton.end_effectors.size(), false);
    for (const std::string& p : override_pairs) {
      const auto eq = p.find('=');
      ace::require(eq != std::string::npos, "override pair '" + p + "' must be char_ee=human_ee");
      const std::size_t c = std::stoul(p.substr(0, eq));
      const std::size_t h = std::stoul(p.substr(eq + 1));
      ace::require(c < seen.size(), "override pair '" + p + "': character EE out of range");
      seen[c] = true;
      manual.char_to_human[c] = h;
    }
    for (std::size_t j = 0; j < seen.size(); ++j)
      ace::require(seen[j], "override must cover every character EE (missing " +
                                std::to_string(j) + ")");
    manual.source = ace::EEMapping::Source::kManual;
  }

  const ace::EEMapResult result =
      ace::auto_map_end_effectors(human_ds, char_ds, has_override ? &manual : nullptr);

  Json j;
  j["source"] = result.mapping.source == ace::EEMapping::Source::kManual ? "manual" : "auto";
  Json pairs = Json::array();
  for (std::size_t c = 0; c < result.mapping.char_to_human.size(); ++c) {
    const std::size_t h = result.mapping.char_to_human[c];
    pairs.push_back(
        {{"character_ee", c},
         {"character_joint",
          char_ds.skeleton.joints[char_ds.skeleton.end_effectors[c].joint].name},
         {"human_ee", h},
         {"human_joint", human_ds.skeleton.joints[human_ds.skeleton.end_effectors[h].joint].name}});
  }
  j["pairs"] = std::move(pairs);
  j["kl"] = result.kl;
  ace::write_file_atomic(out, j.dump(1) + "\n");
  manifest.output(out);
  manifest.write();

  std::printf("KL(character EE || human EE):\n%-16s", "");
  for (const auto& e : human_ds.skeleton.end_effectors)
    std::printf(" %12s", human_ds.skeleton.joints[e.joint].name.c_str());
  std::printf("\n");
  for (std::size_t c = 0; c < result.kl.size(); ++c) {
    std::printf("%-16s",
                char_ds.skeleton.joints[char_ds.skeleton.end_effectors[c].joint].name.c_str());
    for (double v : result.kl[c]) std::printf(" %12.4f", v);
    std::printf("  -> %s\n",
                human_ds.skeleton.joints[human_ds.skeleton
                                             .end_effectors[result.mapping.char_to_human[c]]
                                             .joint]
                    .name.c_str());
  }
  return 0;
}

int cmd_train(const CommonArgs& args) {
  const Json config = ace::load_config(args.config_path, args.overrides);
  ManifestScope manifest("train", config);

  const std::string human_path = ace::cfg::get_required<std::string>(config, "human_dataset");
  const std::string char_path = ace::cfg::get_required<std::string>(config, "character_dataset");
  const std::string prior_path = ace::cfg::get_required<std::string>(config, "prior");
  const std::string mapping_path = ace::cfg::get_required<std::string>(config, "mapping");
  const std::string out_g = ace::cfg::get_or<std::string>(config, "out_generator", "generator.ckpt");
  const std::string out_d =
      ace::cfg::get_or<std::string>(config, "out_discriminator", "discriminator.ckpt");
  for (const auto& p : {human_path, char_path, prior_path, mapping_path}) manifest.input(p);

  const ace::MotionDataset human_ds = ace::load_dataset(human_path);
  const ace::MotionDataset char_ds = ace::load_dataset(char_path);
  const ace::PriorModel prior = ace::load_prior(prior_path);
  const ace::EEMapping mapping = mapping_from_file(mapping_path);

  ace::TrainConfig cfg;
  cfg.w_gp = ace::cfg::get_or<double>(config, "train.w_gp", cfg.w_gp);
  cfg.w_adv = ace::cfg::get_or<double>(config, "train.w_adv", cfg.w_adv);
  cfg.w_fea = ace::cfg::get_or<double>(config, "train.w_fea", cfg.w_fea);
  cfg.lr = ace::cfg::get_or<double>(config, "train.lr", cfg.lr);
  cfg.batch_size = ace::cfg::get_or<std::size_t>(config, "train.batch_size", cfg.batch_size);
  cfg.steps = ace::cfg::get_or<std::size_t>(config, "train.steps", cfg.steps);
  cfg.d_steps_per_g_step =
      ace::cfg::get_or<std::size_t>(config, "train.d_steps_per_g_step", cfg.d_steps_per_g_step);
  cfg.checkpoint_every =
      ace::cfg::get_or<std::size_t>(config, "train.checkpoint_every", cfg.checkpoint_every);
  cfg.generator_hidden = ace::cfg::get_or<std::vector<std::size_t>>(
      config, "train.generator_hidden", cfg.generator_hidden);
  cfg.discriminator_hidden = ace::cfg::get_or<std::vector<std::size_t>>(
      config, "train.discriminator_hidden", cfg.discriminator_hidden);
  cfg.seed = ace::cfg::get_or<std::uint64_t>(config, "seed", 0);

  ace::CheckpointSink sink;
  if (cfg.checkpoint_every > 0) {
    sink = [&](std::size_t step, const ace::GeneratorModel& g, const ace::DiscriminatorModel& d) {
      if (step == cfg.steps) return;  // final write happens below
      ace::save_generator(out_g + "." + std::to_string(step), g, cfg.seed, step);
      ace::save_discriminator(out_d + "." + std::to_string(step), d, cfg.seed, step);
    };
  }

  const ace::TrainAceResult result =
      ace::train_ace(human_ds, char_ds, prior, mapping, cfg, sink);
  if (result.aborted) {
    // the last good parameters are still written out for inspection
    ace::save_generator(out_g, result.generator, cfg.seed, cfg.steps);
    ace::save_discriminator(out_d, result.discriminator, cfg.seed, cfg.steps);
    std::cerr << result.diagnostic << "\n";
    return 3;
  }
  ace::save_generator(out_g, result.generator, cfg.seed, cfg.steps);
  ace::save_discriminator(out_d, result.discriminator, cfg.seed, cfg.steps);
  manifest.output(out_g);
  manifest.output(out_d);

  const std::string curves = ace::cfg::get_or<std::string>(config, "out_curves", "");
  if (!curves.empty()) {
    Json c;
    c["d_loss"] = result.d_loss_curve;
    c["g_loss"] = result.g_loss_curve;
    c["g_feature"] = result.g_fea_curve;
    ace::write_file_atomic(curves, c.dump(1) + "\n");
    manifest.output(curves);
  }
  manifest.write();
  std::cout << "ace trained: " << cfg.steps << " steps, final D loss "
            << (result.d_loss_curve.empty() ? 0.0 : result.d_loss_curve.back())
            << ", final G loss "
            << (result.g_loss_curve.empty() ? 0.0 : result.g_loss_curve.back()) << "\n";
  return 0;
}

int cmd_retarget(const CommonArgs& args, const std::string& human_motion_path) {
  const Json config = ace::load_config(args.config_path, args.overrides);
  ManifestScope manifest("retarget", config);

  const std::string generator_path = ace::cfg::get_required<std::string>(config, "generator");
  const std::string prior_path = ace::cfg::get_required<std::string>(config, "prior");
  const std::string out = ace::cfg::get_or<std::string>(config, "out", "retargeted.json");
  manifest.input(generator_path);
  manifest.input(prior_path);
  manifest.input(human_motion_path);

  const ace::GeneratorModel gen = ace::load_generator(generator_path);
  const ace::PriorModel prior = ace::load_prior(prior_path);
  auto [human_skel, human_traj] = ace::load_motion(human_motion_path);

  const ace::RetargetResult result =
      ace::retarget(gen, prior, human_skel, human_traj, prior.default_seed_state);
  if (result.truncated) {
    std::cerr << "retarget: non-finite state, trajectory truncated at frame "
              << result.trajectory.frames.size() << "\n";
    ace::save_motion(out, prior.skeleton, result.trajectory);
    return 3;
  }
  ace::save_motion(out, prior.skeleton, result.trajectory);
  manifest.output(out);
  manifest.write();
  std::cout << "retargeted " << human_traj.frames.size() << " frames onto "
            << prior.skeleton.name << " -> " << out << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::vector<std::string>& motion_paths) {
  const Json config = ace::load_config(args.config_path, args.overrides);
  ManifestScope manifest("eval", config);

  const std::string char_path = ace::cfg::get_required<std::string>(config, "character_dataset");
  const std::string mapping_path = ace::cfg::get_required<std::string>(config, "mapping");
  const std::string out = ace::cfg::get_or<std::string>(config, "out", "metrics.json");
  manifest.input(char_path);
  manifest.input(mapping_path);
  const ace::MotionDataset char_ds = ace::load_dataset(char_path);
  const ace::EEMapping mapping = mapping_from_file(mapping_path);

  // generated motions: positional files, a configured list, or a dataset file
  std::vector<std::pair<ace::Skeleton, ace::Trajectory>> generated;
  std::vector<std::string> gen_paths = motion_paths;
  for (const auto& p :
       ace::cfg::get_or<std::vector<std::string>>(config, "retargeted_motions", {}))
    gen_paths.push_back(p);
  for (const std::string& p : gen_paths) {
    manifest.input(p);
    generated.push_back(ace::load_motion(p));
  }
  const std::string gen_dataset_path =
      ace::cfg::get_or<std::string>(config, "retargeted_dataset", "");
  if (!gen_dataset_path.empty()) {
    manifest.input(gen_dataset_path);
    const ace::MotionDataset ds = ace::load_dataset(gen_dataset_path);
    for (const ace::Trajectory& t : ds.trajectories) generated.emplace_back(ds.skeleton, t);
  }
  ace::require(!generated.empty(), "eval: no generated motions given");

  ace::MetricsReport report;
  report.s_d = ace::cfg::get_or<std::size_t>(config, "s_d", 64);
  report.seed = ace::cfg::get_or<std::uint64_t>(config, "seed", 0);
  report.thresholds.penetration_depth = ace::cfg::get_or<double>(
      config, "thresholds.penetration_depth", report.thresholds.penetration_depth);
  report.thresholds.contact_height_scale = ace::cfg::get_or<double>(
      config, "thresholds.contact_height_scale", report.thresholds.contact_height_scale);
  report.thresholds.slide_speed =
      ace::cfg::get_or<double>(config, "thresholds.slide_speed", report.thresholds.slide_speed);
  report.thresholds.capsule_radius_scale = ace::cfg::get_or<double>(
      config, "thresholds.capsule_radius_scale", report.thresholds.capsule_radius_scale);

  // feature pools
  std::vector<std::vector<ace::FeatureVector>> generated_features;
  for (const auto& [skel, traj] : generated) {
    std::vector<ace::FeatureVector> seq;
    for (const ace::CharacterState& x : ace::extract_character_states(skel, traj))
      seq.push_back(ace::feature_of_character(x, skel));
    generated_features.push_back(std::move(seq));
  }
  std::vector<ace::FeatureVector> dataset_features;
  for (const ace::Trajectory& t : char_ds.trajectories)
    for (const ace::CharacterState& x : ace::extract_character_states(char_ds.skeleton, t))
      dataset_features.push_back(ace::feature_of_character(x, char_ds.skeleton));

  report.div = ace::diversity(generated_features, report.s_d, report.seed);
  std::vector<ace::FeatureVector> pooled_generated;
  for (const auto& seq : generated_features)
    pooled_generated.insert(pooled_generated.end(), seq.begin(), seq.end());
  report.fid = ace::frechet_distance(ace::GaussianStats::fit_features(dataset_features),
                                     ace::GaussianStats::fit_features(pooled_generated));

  // feature loss against paired human motions, when configured
  const auto human_paths =
      ace::cfg::get_or<std::vector<std::string>>(config, "human_motions", {});
  if (!human_paths.empty()) {
    ace::require(human_paths.size() == generated.size(),
                 "eval: human_motions and generated motions must pair up");
    double sum = 0;
    for (std::size_t i = 0; i < human_paths.size(); ++i) {
      manifest.input(human_paths[i]);
      auto [hskel, htraj] = ace::load_motion(human_paths[i]);
      sum += ace::feature_loss_metric(hskel, htraj, generated[i].first, generated[i].second,
                                      mapping);
    }
    report.feature_loss = sum / static_cast<double>(human_paths.size());
  }

  std::size_t flagged = 0, total = 0;
  for (const auto& [skel, traj] : generated) {
    const ace::UfrResult u = ace::unrealistic_frame_ratio(traj, skel, report.thresholds);
    report.per_frame_flags.insert(report.per_frame_flags.end(), u.flags.begin(), u.flags.end());
    for (const ace::FrameFlags& f : u.flags) flagged += f.any();
    total += u.flags.size();
  }
  report.ufr = static_cast<double>(flagged) / static_cast<double>(total);

  ace::write_file_atomic(out, ace::metrics_report_to_json(report).dump(1) + "\n");
  manifest.output(out);
  manifest.write();

  std::cout << "DIV " << report.div << "  FID " << report.fid << "  L_fea "
            << (report.feature_loss ? std::to_string(*report.feature_loss) : std::string("n/a"))
            << "  UFR " << 100.0 * report.ufr << "%\n";
  return 0;
}

int cmd_import_bvh(const CommonArgs& args, const std::string& bvh_path) {
  const Json config = ace::load_config(args.config_path, args.overrides);
  ManifestScope manifest("import-bvh", config);
  const std::string out = ace::cfg::get_or<std::string>(config, "out", "imported.json");
  const double scale = ace::cfg::get_or<double>(config, "scale", 1.0);
  manifest.input(bvh_path);
  const ace::BvhResult result = ace::import_bvh(ace::read_file(bvh_path), scale);
  ace::save_motion(out, result.skeleton, result.trajectory);
  manifest.output(out);
  manifest.write();
  std::cout << "imported " << result.trajectory.frames.size() << " frames, "
            << result.skeleton.joints.size() << " joints -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACE: adversarial correspondence embedding for cross-morphology motion retargeting"};
  app.set_version_flag("--version", ace::kVersion);
  app.require_subcommand(1);

  CommonArgs gen_args, pre_args, map_args, train_args, ret_args, eval_args, bvh_args;
  std::string human_motion_path, bvh_path;
  std::vector<std::string> eval_motions;

  add_common(app.add_subcommand("gen-data", "generate synthetic character/human datasets"),
             gen_args);
  add_common(app.add_subcommand("pretrain", "pretrain the character motion prior"), pre_args);
  add_common(app.add_subcommand("map-ee", "automatic end-effector correspondence"), map_args);
  add_common(app.add_subcommand("train", "adversarial training of the retargeting generator"),
             train_args);
  auto* ret = app.add_subcommand("retarget", "retarget a human motion file onto the character");
  add_common(ret, ret_args);
  ret->add_option("human_motion", human_motion_path, "human motion JSON file")->required();
  auto* ev = app.add_subcommand("eval", "evaluate generated motions (DIV, FID, L_fea, UFR)");
  add_common(ev, eval_args);
  ev->add_option("motions", eval_motions, "generated motion JSON files");
  auto* bvh = app.add_subcommand("import-bvh", "convert a BVH file to the JSON motion format");
  add_common(bvh, bvh_args);
  bvh->add_option("bvh_file", bvh_path, "BVH input file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("gen-data")) return cmd_gen_data(gen_args);
    if (app.got_subcommand("pretrain")) return cmd_pretrain(pre_args);
    if (app.got_subcommand("map-ee")) return cmd_map_ee(map_args);
    if (app.got_subcommand("train")) return cmd_train(train_args);
    if (app.got_subcommand("retarget")) return cmd_retarget(ret_args, human_motion_path);
    if (app.got_subcommand("eval")) return cmd_eval(eval_args, eval_motions);
    if (app.got_subcommand("import-bvh")) return cmd_import_bvh(bvh_args, bvh_path);
  } catch (const ace::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ace::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
