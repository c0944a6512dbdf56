// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smcebm/format.hpp"

namespace smcebm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(const std::string& origin, int line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& origin, int line, std::string_view key,
                    std::string_view value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    bad(origin, line, "key '" + std::string(key) + "' needs a number, got '" +
                          std::string(value) + "'");
  return out;
}

std::int64_t parse_int(const std::string& origin, int line, std::string_view key,
                       std::string_view value) {
  std::int64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    bad(origin, line, "key '" + std::string(key) + "' needs an integer, got '" +
                          std::string(value) + "'");
  return out;
}

int parse_int32(const std::string& origin, int line, std::string_view key,
                std::string_view value) {
  const auto v = parse_int(origin, line, key, value);
  if (v < INT32_MIN || v > INT32_MAX)
    bad(origin, line, "key '" + std::string(key) + "' out of range");
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& origin, int line, std::string_view key,
                        std::string_view value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    bad(origin, line, "key '" + std::string(key) +
                          "' needs a nonnegative integer, got '" +
                          std::string(value) + "'");
  return out;
}

}  // namespace

ExperimentKind parse_kind(std::string_view name) {
  if (name == "train") return ExperimentKind::train;
  if (name == "dynamics1d") return ExperimentKind::dynamics1d;
  throw ConfigError("unknown experiment kind: " + std::string(name));
}

std::string_view kind_name(ExperimentKind k) {
  return k == ExperimentKind::train ? "train" : "dynamics1d";
}

std::vector<double> ModelSpec::teacher_theta() const {
  if (name == "gmm") {
    std::vector<double> theta(2 * static_cast<std::size_t>(dim) + 1, 0.0);
    theta[0] = teacher_a1;
    theta[static_cast<std::size_t>(dim)] = teacher_b1;
    theta[2 * static_cast<std::size_t>(dim)] = teacher_z;
    return theta;
  }
  if (name == "gmm1d-z") return {teacher_z};
  if (name == "gaussian") {
    std::vector<double> theta(static_cast<std::size_t>(dim), 0.0);
    theta[0] = teacher_a1;
    return theta;
  }
  throw ConfigError("unknown model: " + name);
}

ExperimentConfig parse_config_text(std::string_view text,
                                   const std::string& origin) {
  ExperimentConfig cfg;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') bad(origin, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "data" && section != "init" &&
          section != "train" && section != "dynamics1d" && section != "output")
        bad(origin, line_no, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      bad(origin, line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) bad(origin, line_no, "empty key");
    const std::string k(key);
    const std::string v(value);

    const auto unknown = [&]() {
      bad(origin, line_no,
          "unknown key '" + k + "'" +
              (section.empty() ? std::string(" at top level")
                               : " in section [" + section + "]"));
    };
    const auto enum_error = [&](const std::exception& e) {
      bad(origin, line_no, e.what());
    };

    try {
      if (section.empty()) {
        if (k == "kind")
          cfg.kind = parse_kind(v);
        else if (k == "preset")
          cfg.preset = v;
        else
          unknown();
      } else if (section == "model") {
        if (k == "name")
          cfg.model.name = v;
        else if (k == "dim")
          cfg.model.dim = parse_int32(origin, line_no, key, v);
        else if (k == "teacher_a1")
          cfg.model.teacher_a1 = parse_double(origin, line_no, key, v);
        else if (k == "teacher_b1")
          cfg.model.teacher_b1 = parse_double(origin, line_no, key, v);
        else if (k == "teacher_z")
          cfg.model.teacher_z = parse_double(origin, line_no, key, v);
        else
          unknown();
      } else if (section == "data") {
        if (k == "n")
          cfg.n_data = parse_int(origin, line_no, key, v);
        else if (k == "file")
          cfg.data_file = v;
        else
          unknown();
      } else if (section == "init") {
        if (k == "a1")
          cfg.init.a1 = parse_double(origin, line_no, key, v);
        else if (k == "b1")
          cfg.init.b1 = parse_double(origin, line_no, key, v);
        else if (k == "z")
          cfg.init.z = parse_double(origin, line_no, key, v);
        else if (k == "perturb_scale")
          cfg.init.perturb_scale = parse_double(origin, line_no, key, v);
        else
          unknown();
      } else if (section == "train") {
        if (k == "algorithm")
          cfg.train.algorithm = parse_algorithm(v);
        else if (k == "iterations")
          cfg.train.iterations = parse_int32(origin, line_no, key, v);
        else if (k == "h")
          cfg.train.h = parse_double(origin, line_no, key, v);
        else if (k == "lr_mean")
          cfg.train.lr_mean = parse_double(origin, line_no, key, v);
        else if (k == "lr_z")
          cfg.train.lr_z = parse_double(origin, line_no, key, v);
        else if (k == "walkers")
          cfg.train.walkers = parse_int32(origin, line_no, key, v);
        else if (k == "walker_batch")
          cfg.train.walker_batch = parse_int32(origin, line_no, key, v);
        else if (k == "data_batch")
          cfg.train.data_batch = parse_int32(origin, line_no, key, v);
        else if (k == "resampler")
          cfg.train.resampler = parse_resampler(v);
        else if (k == "ess_threshold")
          cfg.train.ess_threshold = parse_double(origin, line_no, key, v);
        else if (k == "cd_steps")
          cfg.train.cd_steps = parse_int32(origin, line_no, key, v);
        else if (k == "seed")
          cfg.train.seed = parse_u64(origin, line_no, key, v);
        else if (k == "optimizer")
          cfg.train.optimizer = parse_optimizer(v);
        else if (k == "adam_beta1")
          cfg.train.adam_beta1 = parse_double(origin, line_no, key, v);
        else if (k == "adam_beta2")
          cfg.train.adam_beta2 = parse_double(origin, line_no, key, v);
        else if (k == "adam_eps")
          cfg.train.adam_eps = parse_double(origin, line_no, key, v);
        else
          unknown();
      } else if (section == "dynamics1d") {
        if (k == "regime") {
          if (v == "all") {
            cfg.dyn_all_regimes = true;
          } else {
            cfg.dyn_all_regimes = false;
            cfg.dyn.regime = parse_regime(v);
          }
        } else if (k == "a")
          cfg.dyn.a = parse_double(origin, line_no, key, v);
        else if (k == "b")
          cfg.dyn.b = parse_double(origin, line_no, key, v);
        else if (k == "z0")
          cfg.dyn.z0 = parse_double(origin, line_no, key, v);
        else if (k == "z_star")
          cfg.dyn.z_star = parse_double(origin, line_no, key, v);
        else if (k == "n")
          cfg.dyn.n = parse_int32(origin, line_no, key, v);
        else if (k == "alpha")
          cfg.dyn.alpha = parse_double(origin, line_no, key, v);
        else if (k == "dt")
          cfg.dyn.dt = parse_double(origin, line_no, key, v);
        else if (k == "t_final")
          cfg.dyn.t_final = parse_double(origin, line_no, key, v);
        else if (k == "record_stride")
          cfg.dyn.record_stride = parse_int32(origin, line_no, key, v);
        else if (k == "seed")
          cfg.dyn.seed = parse_u64(origin, line_no, key, v);
        else
          unknown();
      } else {  // output
        if (k == "dir")
          cfg.out_dir = v;
        else
          unknown();
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      enum_error(e);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "kind = " << kind_name(cfg.kind) << "\n";
  out << "preset = " << cfg.preset << "\n";
  out << "\n[model]\n";
  out << "name = " << cfg.model.name << "\n";
  out << "dim = " << cfg.model.dim << "\n";
  out << "teacher_a1 = " << g17(cfg.model.teacher_a1) << "\n";
  out << "teacher_b1 = " << g17(cfg.model.teacher_b1) << "\n";
  out << "teacher_z = " << g17(cfg.model.teacher_z) << "\n";
  out << "\n[data]\n";
  out << "n = " << cfg.n_data << "\n";
  out << "file = " << cfg.data_file << "\n";
  out << "\n[init]\n";
  out << "a1 = " << g17(cfg.init.a1) << "\n";
  out << "b1 = " << g17(cfg.init.b1) << "\n";
  out << "z = " << g17(cfg.init.z) << "\n";
  out << "perturb_scale = " << g17(cfg.init.perturb_scale) << "\n";
  out << "\n[train]\n";
  out << "algorithm = " << algorithm_name(cfg.train.algorithm) << "\n";
  out << "iterations = " << cfg.train.iterations << "\n";
  out << "h = " << g17(cfg.train.h) << "\n";
  out << "lr_mean = " << g17(cfg.train.lr_mean) << "\n";
  out << "lr_z = " << g17(cfg.train.lr_z) << "\n";
  out << "walkers = " << cfg.train.walkers << "\n";
  out << "walker_batch = " << cfg.train.walker_batch << "\n";
  out << "data_batch = " << cfg.train.data_batch << "\n";
  out << "resampler = " << resampler_name(cfg.train.resampler) << "\n";
  out << "ess_threshold = " << g17(cfg.train.ess_threshold) << "\n";
  out << "cd_steps = " << cfg.train.cd_steps << "\n";
  out << "seed = " << cfg.train.seed << "\n";
  out << "optimizer = " << optimizer_name(cfg.train.optimizer) << "\n";
  out << "adam_beta1 = " << g17(cfg.train.adam_beta1) << "\n";
  out << "adam_beta2 = " << g17(cfg.train.adam_beta2) << "\n";
  out << "adam_eps = " << g17(cfg.train.adam_eps) << "\n";
  out << "\n[dynamics1d]\n";
  out << "regime = "
      << (cfg.dyn_all_regimes ? std::string_view("all")
                              : regime_name(cfg.dyn.regime))
      << "\n";
  out << "a = " << g17(cfg.dyn.a) << "\n";
  out << "b = " << g17(cfg.dyn.b) << "\n";
  out << "z0 = " << g17(cfg.dyn.z0) << "\n";
  out << "z_star = " << g17(cfg.dyn.z_star) << "\n";
  out << "n = " << cfg.dyn.n << "\n";
  out << "alpha = " << g17(cfg.dyn.alpha) << "\n";
  out << "dt = " << g17(cfg.dyn.dt) << "\n";
  out << "t_final = " << g17(cfg.dyn.t_final) << "\n";
  out << "record_stride = " << cfg.dyn.record_stride << "\n";
  out << "seed = " << cfg.dyn.seed << "\n";
  out << "\n[output]\n";
  out << "dir = " << cfg.out_dir << "\n";
  return out.str();
}

void validate_experiment(const ExperimentConfig& cfg) {
  const auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (cfg.model.name != "gmm" && cfg.model.name != "gaussian" &&
      cfg.model.name != "gmm1d-z")
    fail("unknown model: " + cfg.model.name);
  if (cfg.model.dim < 1) fail("model dim must be >= 1");
  if (cfg.model.name == "gmm1d-z" && cfg.model.dim != 1)
    fail("gmm1d-z is one-dimensional");
  if (!std::isfinite(cfg.model.teacher_a1) ||
      !std::isfinite(cfg.model.teacher_b1) ||
      !std::isfinite(cfg.model.teacher_z))
    fail("teacher parameters must be finite");
  if (cfg.kind == ExperimentKind::train) {
    if (cfg.data_file.empty() && cfg.n_data < 1)
      fail("data n must be >= 1 when generating from the teacher");
    if (!(cfg.init.perturb_scale >= 0.0) ||
        !std::isfinite(cfg.init.perturb_scale))
      fail("init perturb_scale must be >= 0");
    if (!std::isfinite(cfg.init.a1) || !std::isfinite(cfg.init.b1) ||
        !std::isfinite(cfg.init.z))
      fail("init parameters must be finite");
    // Structural TrainConfig checks; the data-dependent ones run at load.
    if (cfg.train.iterations < 0) fail("train iterations must be >= 0");
    if (!(cfg.train.h > 0.0)) fail("train h must be positive");
    if (cfg.train.walkers < 1) fail("train walkers must be >= 1");
    if (!(cfg.train.ess_threshold >= 0.0 && cfg.train.ess_threshold < 1.0))
      fail("train ess_threshold must lie in [0,1)");
  } else {
    if (cfg.model.name != "gmm1d-z" && cfg.model.dim != 1)
      fail("dynamics1d experiments are one-dimensional");
    if (cfg.dyn.n < 2) fail("dynamics1d n must be >= 2");
    if (!(cfg.dyn.dt > 0.0)) fail("dynamics1d dt must be positive");
    if (!(cfg.dyn.t_final >= 0.0)) fail("dynamics1d t_final must be >= 0");
    if (cfg.dyn.record_stride < 1) fail("dynamics1d record_stride must be >= 1");
  }
  if (cfg.out_dir.empty()) fail("output dir must be nonempty");
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "gmm50-full") {
    cfg.kind = ExperimentKind::train;
    cfg.preset = name;
    cfg.model.name = "gmm";
    cfg.model.dim = 50;
    cfg.n_data = 100000;
    cfg.train.algorithm = Algorithm::jarzynski;
    cfg.train.iterations = 8000;
    cfg.train.h = 0.1;
    cfg.train.lr_mean = 0.2;
    cfg.train.lr_z = 1.0;
    cfg.train.walkers = 100000;
    cfg.train.walker_batch = 10000;
    cfg.train.resampler = Resampler::systematic;
    cfg.train.ess_threshold = 1.0 / 1.05;
    cfg.out_dir = "runs/gmm50-full";
    return cfg;
  }
  if (name == "gmm-scaled") {
    cfg.kind = ExperimentKind::train;
    cfg.preset = name;
    cfg.model.name = "gmm";
    cfg.model.dim = 10;
    cfg.n_data = 10000;
    cfg.train.algorithm = Algorithm::jarzynski;
    cfg.train.iterations = 8000;
    cfg.train.h = 0.1;
    cfg.train.lr_mean = 0.2;
    cfg.train.lr_z = 1.0;
    cfg.train.walkers = 10000;
    cfg.train.walker_batch = 0;  // full batch
    cfg.train.resampler = Resampler::systematic;
    // At this scale frequent resampling re-anchors the walker mode split and
    // stalls the log-odds recovery; resample sparingly instead.
    cfg.train.ess_threshold = 0.5;
    cfg.out_dir = "runs/gmm-scaled";
    return cfg;
  }
  if (name == "appendixC-fig8") {
    cfg.kind = ExperimentKind::dynamics1d;
    cfg.preset = name;
    cfg.model.name = "gmm1d-z";
    cfg.model.dim = 1;
    cfg.model.teacher_a1 = -5.0;
    cfg.model.teacher_b1 = 5.0;
    cfg.dyn.a = -5.0;
    cfg.dyn.b = 5.0;
    cfg.dyn.n = 200;
    cfg.dyn.dt = 0.01;
    cfg.dyn.t_final = 300.0;
    cfg.dyn.record_stride = 10;
    cfg.dyn_all_regimes = true;
    cfg.out_dir = "runs/appendixC-fig8";
    return cfg;
  }
  throw ConfigError("unknown preset: " + name +
                    " (available: gmm50-full, gmm-scaled, appendixC-fig8)");
}

std::vector<std::string> preset_names() {
  return {"gmm50-full", "gmm-scaled", "appendixC-fig8"};
}

}  // namespace smcebm
