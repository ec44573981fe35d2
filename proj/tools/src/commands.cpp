// Copyright 2026 The hrtsc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrtsc/cli/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ios>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hrtsc/cli/model_file.hpp"
#include "hrtsc/data.hpp"
#include "hrtsc/errors.hpp"
#include "hrtsc/eval.hpp"
#include "hrtsc/tsc.hpp"

namespace hrtsc::cli {

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  std::string kind = "handshake";
  std::size_t n = 30;
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string data;
  Index states = 4;
  Index tsc_states = 3;
  double reg = 1e-2;
  int max_iter = 40;
  double tol = 1e-4;
  Index window = 2;
  std::string mode = "gate";
  bool base_only = false;
  std::string out;
};

struct ApplyArgs {
  std::string model;
  std::string data;
  std::string out;
};

struct EvalArgs {
  std::string data;
  ExperimentConfig cfg;
  std::string mode = "gate";
  std::string out;
};

void append_real(std::string& s, double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  s.append(buf.data(), ptr);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
  return f;
}

void finish(std::ofstream& f, const fs::path& path) {
  f.flush();
  if (!f) throw std::ios_base::failure("write to '" + path.string() + "' failed");
}

// "runs.csv" -> "runs.boundaries.csv"
fs::path boundaries_path(const fs::path& data) {
  fs::path p = data;
  p.replace_extension();
  p += ".boundaries.csv";
  return p;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto corpus = synth_generate(parse_interaction_kind(a.kind), a.n, a.noise, a.seed);
  save_csv(a.out, corpus.dataset);
  const fs::path side = boundaries_path(a.out);
  auto f = open_out(side);
  write_boundaries_csv(f, corpus);
  finish(f, side);
  out << "wrote " << corpus.dataset.demos.size() << " " << a.kind << " demonstrations to "
      << a.out << " (boundaries: " << side.string() << ")\n";
  return kExitOk;
}

std::string echo(const TrainArgs& a) {
  std::ostringstream s;
  s << "states=" << a.states << " tsc_states=" << a.tsc_states << " reg=" << a.reg
    << " max_iter=" << a.max_iter << " tol=" << a.tol << " window=" << a.window
    << " mode=" << a.mode;
  return s.str();
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const Dataset ds = load_csv(a.data);
  const auto frames = build_feature_frames(ds);
  ModelFile file;
  try {
    const BaumWelchOptions bw_opts{a.max_iter, a.tol, a.reg};
    auto bw = baum_welch(init_temporal_bins(frames, a.states, a.reg, feature_split()), frames,
                         bw_opts);
    out << "base log-likelihood: " << bw.loglik_history.back() << " after " << bw.iterations
        << " iterations" << (bw.converged ? "" : " (not converged)") << '\n';
    if (a.base_only) {
      file.kind = ModelKind::kHmm;
      file.model.base = std::move(bw.model);
    } else {
      TscOptions opts;
      opts.transition_states = a.tsc_states;
      opts.window = a.window;
      opts.reg_eps = a.reg;
      opts.max_iter = a.max_iter;
      opts.tol = a.tol;
      opts.mode = parse_combine_mode(a.mode);
      file.model = fit_tsc(bw.model, frames, opts);
      out << "transition samples: " << file.model.transition_samples
          << (file.model.fallback ? " (too few, using the base model only)" : "") << '\n';
    }
  } catch (const NumericalError& e) {
    throw TrainingError(std::string(e.what()) + " [" + echo(a) + "]");
  } catch (const DimensionError& e) {
    // The feature layout is fixed here, so this means too little data for the state counts.
    throw TrainingError(std::string(e.what()) + " [" + echo(a) + "]");
  } catch (const TrainingError& e) {
    throw TrainingError(std::string(e.what()) + " [" + echo(a) + "]");
  }
  save_model(a.out, file);
  out << "wrote " << to_string(file.kind) << " model to " << a.out << '\n';
  return kExitOk;
}

// The command-line tools work on the fixed 12-column feature layout.
void check_layout(const TscModel& m) {
  const DimensionSplit want = feature_split();
  if (m.base.dim() != kFeatureDim || m.base.split.human != want.human ||
      m.base.split.robot != want.robot) {
    throw DimensionError("model has dimension " + std::to_string(m.base.dim()) +
                         " with a different human/robot split; expected the " +
                         std::to_string(kFeatureDim) + "-column feature layout");
  }
}

int cmd_predict(const ApplyArgs& a, std::ostream& out) {
  const ModelFile file = load_model(a.model);
  check_layout(file.model);
  const Dataset ds = load_csv(a.data);
  auto f = open_out(a.out);
  std::string buf = "demo_id,t,rx_pred,ry_pred,rz_pred,rx,ry,rz\n";
  for (std::size_t id = 0; id < ds.demos.size(); ++id) {
    const FeatureSequence fs = build_features(ds.demos[id]);
    const Matrix pred = predict(file.model, fs.human());
    const Matrix& truth = ds.demos[id].robot_pos;
    for (Index t = 0; t < pred.rows(); ++t) {
      buf += std::to_string(id);
      buf += ',';
      buf += std::to_string(t);
      for (Index c = 0; c < 3; ++c) {
        buf += ',';
        append_real(buf, pred(t, c));
      }
      for (Index c = 0; c < 3; ++c) {
        buf += ',';
        append_real(buf, truth(t, c));
      }
      buf += '\n';
    }
  }
  f << buf;
  finish(f, a.out);
  out << "wrote predictions for " << ds.demos.size() << " demonstrations to " << a.out << '\n';
  return kExitOk;
}

int cmd_segment(const ApplyArgs& a, std::ostream& out) {
  const ModelFile file = load_model(a.model);
  check_layout(file.model);
  const Dataset ds = load_csv(a.data);
  auto f = open_out(a.out);
  std::string buf = "demo_id,t,joint,human,mismatch,transition\n";
  for (std::size_t id = 0; id < ds.demos.size(); ++id) {
    const FeatureSequence fs = build_features(ds.demos[id]);
    const SegmentLabels seg = segment(file.model.base, fs.frames, file.model.window);
    for (std::size_t t = 0; t < seg.joint.size(); ++t) {
      buf += std::to_string(id) + ',' + std::to_string(t) + ',' + std::to_string(seg.joint[t]) +
             ',' + std::to_string(seg.human[t]) + ',' + (seg.mismatch[t] ? '1' : '0') + ',' +
             (seg.transition[t] ? '1' : '0') + '\n';
    }
  }
  f << buf;
  finish(f, a.out);
  out << "wrote segmentation for " << ds.demos.size() << " demonstrations to " << a.out << '\n';
  return kExitOk;
}

int cmd_eval(EvalArgs a, std::ostream& out) {
  Dataset ds = load_csv(a.data);
  // Generated corpora carry the interaction kind in every label.
  if (!ds.demos.empty() && !ds.demos.front().label.empty() &&
      std::all_of(ds.demos.begin(), ds.demos.end(),
                  [&](const Demonstration& d) { return d.label == ds.demos.front().label; })) {
    ds.name = ds.demos.front().label;
  }
  a.cfg.mode = parse_combine_mode(a.mode);
  ExperimentReport report;
  report.interactions.push_back(run_experiment(ds, a.cfg));
  const InteractionReport& r = report.interactions.front();
  out << render_table(report);
  out << r.n_runs << " runs, " << r.n_failed << " failed, " << r.n_fallback
      << " without transition states, " << r.seconds_per_run << " s per run\n";
  for (const auto& msg : r.failures) out << "  failed: " << msg << '\n';
  if (!a.out.empty()) {
    auto f = open_out(a.out);
    f << render_csv(report);
    finish(f, a.out);
    out << "wrote report to " << a.out << '\n';
  }
  return kExitOk;
}

void add_model_flags(CLI::App& sub, TrainArgs& a) {
  sub.add_option("--states", a.states, "Base HMM states")->check(CLI::PositiveNumber);
  sub.add_option("--tsc-states", a.tsc_states, "Transition-state HMM states")
      ->check(CLI::PositiveNumber);
  sub.add_option("--reg", a.reg, "Covariance regularization added to every state")
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--max-iter", a.max_iter, "Baum-Welch iteration cap")
      ->check(CLI::PositiveNumber);
  sub.add_option("--tol", a.tol, "Stop when the log-likelihood gain falls below this")
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--window", a.window, "Frames masked on each side of a mismatch")
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--mode", a.mode, "How transition states join prediction")
      ->check(CLI::IsMember({"gate", "blend"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transition state clustering for learning human-robot interactions", "hrtsc"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic paired-interaction corpus");
  s->add_option("--kind", synth.kind, "Interaction archetype")
      ->check(CLI::IsMember({"handshake", "rocket_fistbump", "parachute_fistbump"}));
  s->add_option("--n", synth.n, "Number of demonstrations")->check(CLI::PositiveNumber);
  s->add_option("--noise", synth.noise, "Position noise std in metres")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--seed", synth.seed, "Generator seed");
  s->add_option("--out", synth.out, "Output dataset CSV")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Fit the base HMM and the transition-state HMM");
  t->add_option("--data", train.data, "Dataset CSV")->required();
  add_model_flags(*t, train);
  t->add_flag("--base-only", train.base_only, "Skip transition states, save an hmm model");
  t->add_option("--out", train.out, "Output model JSON")->required();

  ApplyArgs pred;
  auto* p = app.add_subcommand("predict", "Predict robot positions from the human motion");
  p->add_option("--model", pred.model, "Model JSON")->required();
  p->add_option("--data", pred.data, "Dataset CSV")->required();
  p->add_option("--out", pred.out, "Output CSV")->required();

  ApplyArgs seg;
  auto* g = app.add_subcommand("segment", "Per-frame joint and human-only segment labels");
  g->add_option("--model", seg.model, "Model JSON")->required();
  g->add_option("--data", seg.data, "Dataset CSV")->required();
  g->add_option("--out", seg.out, "Output CSV")->required();

  EvalArgs ev;
  TrainArgs ev_model;
  auto* e = app.add_subcommand("eval", "Random-batch experiment, HMM against TSC-HMM");
  e->add_option("--data", ev.data, "Dataset CSV")->required();
  add_model_flags(*e, ev_model);
  e->add_option("--batch", ev.cfg.batch_size, "Training demonstrations per seed")
      ->check(CLI::PositiveNumber);
  e->add_option("--seeds", ev.cfg.n_seeds, "Seeds 0..n-1, one random batch each")
      ->check(CLI::PositiveNumber);
  e->add_option("--threads", ev.cfg.threads, "Worker threads, 0 for all cores");
  e->add_option("--out", ev.out, "Report CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (t->parsed()) return cmd_train(train, out);
    if (p->parsed()) return cmd_predict(pred, out);
    if (g->parsed()) return cmd_segment(seg, out);
    ev.cfg.base_states = ev_model.states;
    ev.cfg.tsc_states = ev_model.tsc_states;
    ev.cfg.reg_eps = ev_model.reg;
    ev.cfg.max_iter = ev_model.max_iter;
    ev.cfg.tol = ev_model.tol;
    ev.cfg.window = ev_model.window;
    ev.mode = ev_model.mode;
    return cmd_eval(ev, out);
  } catch (const ModelFormatError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& ex) {
    err << "dimension mismatch: " << ex.what() << '\n';
    return kExitDimension;
  } catch (const TrainingError& ex) {
    err << "training failed: " << ex.what() << '\n';
    return kExitTraining;
  } catch (const NumericalError& ex) {
    err << "numerical failure: " << ex.what() << '\n';
    return kExitTraining;
  } catch (const DataError& ex) {
    err << "bad input: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::ios_base::failure& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "unexpected error: " << ex.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace hrtsc::cli
