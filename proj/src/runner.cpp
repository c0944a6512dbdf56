// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/runner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "smcebm/format.hpp"

namespace smcebm {

namespace {

namespace fs = std::filesystem;

std::string csv_field(double v) { return std::isfinite(v) ? g17(v) : std::string(); }

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

// Euclidean distance between a slice of theta and the teacher's mean, whose
// only nonzero coordinate is the first.
double mean_error(std::span<const double> theta, std::size_t off, int d,
                  double first) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = theta[off + static_cast<std::size_t>(i)] - (i == 0 ? first : 0.0);
    s += diff * diff;
  }
  return std::sqrt(s);
}

struct SummaryWriter {
  std::ostringstream out;

  void put(std::string_view key, const std::string& value) {
    out << key << " = " << value << "\n";
  }
  void put(std::string_view key, double value) { put(key, csv_field(value)); }
  void put(std::string_view key, std::int64_t value) {
    put(key, std::to_string(value));
  }
};

void warn_step_size(const ExperimentConfig& cfg, const EnergyModel& model,
                    std::span<const double> theta0, std::ostream& err) {
  const auto bound = model.hessian_bound(theta0);
  if (!bound || !(*bound > 0.0)) return;
  const double limit = 2.0 / *bound;
  if (cfg.train.h >= limit)
    err << "warning: step size h = " << cfg.train.h
        << " is at or above the stability limit 2/L = " << limit
        << " for the initial parameters; the walkers may diverge\n";
}

int run_train(const ExperimentConfig& cfg, std::ostream& err) {
  const auto model = make_model(cfg.model.name, cfg.model.dim,
                                cfg.model.teacher_a1, cfg.model.teacher_b1);
  const auto teacher = cfg.model.teacher_theta();
  const Dataset data =
      cfg.data_file.empty()
          ? sample_dataset(*model, teacher, cfg.n_data, cfg.train.seed)
          : load_dataset(cfg.data_file, model->dimension());
  const auto theta0 = initial_theta(cfg, *model);

  try {
    validate_config(cfg.train, *model, data);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  warn_step_size(cfg, *model, theta0, err);

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "config.ini",
                  "# smcebm " + std::string(kCodeVersion) + "\n" + to_ini(cfg));

  std::ofstream diag(dir / "diagnostics.csv", std::ios::binary);
  if (!diag) throw std::runtime_error("cannot write diagnostics.csv");
  const bool wide_theta = model->param_count() <= 8;
  diag << "k,ess,log_z_est,ce_est,ce_exact,p_k,resampled";
  if (wide_theta)
    for (int i = 0; i < model->param_count(); ++i) diag << ",theta_" << i;
  diag << "\n";

  const RecordSink sink = [&](const TrainRecord& r) {
    diag << r.k << ',' << csv_field(r.ess) << ',' << csv_field(r.log_z_est)
         << ',' << csv_field(r.ce_est) << ',' << csv_field(r.ce_exact) << ','
         << csv_field(r.mode_mass) << ',' << (r.resampled ? 1 : 0);
    if (wide_theta)
      for (const double t : r.theta) diag << ',' << g17(t);
    diag << '\n';
    diag.flush();
  };

  const TrainResult result = train(*model, theta0, data, cfg.train, sink);
  diag.close();

  {
    std::ofstream wout(dir / "walkers.csv", std::ios::binary);
    dump_walkers(result.population, wout);
  }
  {
    std::ostringstream tout;
    for (const double t : result.theta) tout << g17(t) << "\n";
    write_text_file(dir / "theta.csv", tout.str());
  }

  SummaryWriter sw;
  sw.put("kind", "train");
  sw.put("code_version", std::string(kCodeVersion));
  sw.put("algorithm", std::string(algorithm_name(cfg.train.algorithm)));
  sw.put("model", cfg.model.name);
  sw.put("dim", static_cast<std::int64_t>(cfg.model.dim));
  sw.put("teacher_a1", cfg.model.teacher_a1);
  sw.put("teacher_b1", cfg.model.teacher_b1);
  sw.put("teacher_z", cfg.model.teacher_z);
  sw.put("seed", static_cast<std::int64_t>(cfg.train.seed));
  sw.put("iterations_completed",
         static_cast<std::int64_t>(result.history.size()));
  sw.put("resample_count", static_cast<std::int64_t>(result.resample_count));

  const auto p_final = model->mode_mass(result.theta);
  sw.put("p_final", p_final ? *p_final : std::nan(""));
  double err_a = std::nan(""), err_b = std::nan("");
  if (cfg.model.name == "gmm") {
    const int d = model->dimension();
    err_a = mean_error(result.theta, 0, d, cfg.model.teacher_a1);
    err_b = mean_error(result.theta, static_cast<std::size_t>(d), d,
                       cfg.model.teacher_b1);
  }
  sw.put("err_a", err_a);
  sw.put("err_b", err_b);

  // Final KL estimate against the teacher: exact cross-entropy difference
  // when the partition function is available in closed form.
  double kl_final = std::nan(""), ce_final = std::nan(""), ce_target = std::nan("");
  const auto lz_final = model->exact_log_partition(result.theta);
  const auto lz_target = model->exact_log_partition(teacher);
  if (lz_final && lz_target) {
    const auto mean_energy = [&](std::span<const double> th) {
      double s = 0.0;
      for (std::int64_t j = 0; j < data.size(); ++j)
        s += model->energy(th, data.point(j));
      return s / static_cast<double>(data.size());
    };
    ce_final = *lz_final + mean_energy(result.theta);
    ce_target = *lz_target + mean_energy(teacher);
    kl_final = ce_final - ce_target;
  }
  sw.put("ce_exact_final", ce_final);
  sw.put("ce_exact_target", ce_target);
  sw.put("kl_final", kl_final);
  if (!result.history.empty() && cfg.train.algorithm == Algorithm::jarzynski) {
    sw.put("ess_final", result.history.back().ess);
    sw.put("log_z_final", result.history.back().log_z_est);
  }
  sw.put("aborted", static_cast<std::int64_t>(result.aborted ? 1 : 0));
  sw.put("abort_reason", result.aborted ? result.abort_reason : std::string());
  sw.put("status", result.aborted ? std::string("aborted") : std::string("ok"));
  write_text_file(dir / "summary.txt", sw.out.str());

  if (result.aborted) {
    err << "numerical abort: " << result.abort_reason << "\n";
    return 3;
  }
  return 0;
}

int run_dynamics(const ExperimentConfig& cfg, std::ostream& err) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "config.ini",
                  "# smcebm " + std::string(kCodeVersion) + "\n" + to_ini(cfg));

  std::vector<Regime> regimes;
  if (cfg.dyn_all_regimes)
    regimes = {Regime::unweighted, Regime::pcd, Regime::jarzynski};
  else
    regimes = {cfg.dyn.regime};

  SummaryWriter sw;
  sw.put("kind", "dynamics1d");
  sw.put("code_version", std::string(kCodeVersion));
  sw.put("seed", static_cast<std::int64_t>(cfg.dyn.seed));
  bool any_abort = false;
  std::string first_reason;

  for (const Regime regime : regimes) {
    Dyn1dConfig dyn = cfg.dyn;
    dyn.regime = regime;
    const Dyn1dResult res = empirical_1d_dynamics(dyn);
    const std::string tag(regime_name(regime));

    {
      std::ostringstream csv;
      csv << "t,z,q\n";
      for (std::size_t i = 0; i < res.time.size(); ++i)
        csv << g17(res.time[i]) << ',' << g17(res.z[i]) << ',' << g17(res.q[i])
            << '\n';
      write_text_file(dir / ("dynamics_" + tag + ".csv"), csv.str());
    }
    {
      std::ostringstream csv;
      csv << "x_1,A,hopped\n";
      for (std::size_t i = 0; i < res.final_positions.size(); ++i)
        csv << g17(res.final_positions[i]) << ','
            << g17(res.final_log_weights[i]) << ','
            << int(res.walker_hopped[i]) << '\n';
      write_text_file(dir / ("walkers_" + tag + ".csv"), csv.str());
    }

    sw.put(tag + ".q0_hat", res.q0_hat);
    sw.put(tag + ".q_star_hat", res.q_star_hat);
    sw.put(tag + ".z_star_hat", res.z_star_hat);
    sw.put(tag + ".z_tilde", res.z_tilde);
    sw.put(tag + ".z_final", res.z.empty() ? std::nan("") : res.z.back());
    sw.put(tag + ".q_final", res.q.empty() ? std::nan("") : res.q.back());
    sw.put(tag + ".hop_count", static_cast<std::int64_t>(res.hop_count));
    sw.put(tag + ".hopped_walkers",
           static_cast<std::int64_t>(res.hopped_walkers));
    sw.put(tag + ".aborted", static_cast<std::int64_t>(res.aborted ? 1 : 0));
    if (res.aborted && !any_abort) {
      any_abort = true;
      first_reason = tag + ": " + res.abort_reason;
    }
  }
  sw.put("aborted", static_cast<std::int64_t>(any_abort ? 1 : 0));
  sw.put("abort_reason", first_reason);
  sw.put("status", any_abort ? std::string("aborted") : std::string("ok"));
  write_text_file(dir / "summary.txt", sw.out.str());

  if (any_abort) {
    err << "numerical abort: " << first_reason << "\n";
    return 3;
  }
  return 0;
}

std::map<std::string, std::string> read_summary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace

std::vector<double> initial_theta(const ExperimentConfig& cfg,
                                  const EnergyModel& model) {
  const int d = model.dimension();
  std::vector<double> theta(static_cast<std::size_t>(model.param_count()), 0.0);
  CounterRng rng(cfg.train.seed, Stream::theta_init);
  if (cfg.model.name == "gmm") {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (i == 0)
        theta[i] = cfg.init.a1;
      else if (i == static_cast<std::size_t>(d))
        theta[i] = cfg.init.b1;
      else if (i == 2 * static_cast<std::size_t>(d))
        theta[i] = cfg.init.z;
      else
        theta[i] = cfg.init.perturb_scale * rng.normal();
    }
  } else if (cfg.model.name == "gaussian") {
    for (std::size_t i = 0; i < theta.size(); ++i)
      theta[i] = (i == 0) ? cfg.init.a1 : cfg.init.perturb_scale * rng.normal();
  } else {  // gmm1d-z
    theta[0] = cfg.init.z;
  }
  return theta;
}

Dataset sample_dataset(const EnergyModel& model, std::span<const double> theta,
                       std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dataset size must be >= 1");
  if (!model.has_exact_sampler())
    throw std::invalid_argument("model '" + model.name() +
                                "' has no exact sampler to generate data");
  const int d = model.dimension();
  Dataset out;
  out.dim = d;
  out.flat.resize(static_cast<std::size_t>(n) * d);
  for (std::int64_t j = 0; j < n; ++j) {
    CounterRng rng(seed, Stream::data, static_cast<std::uint64_t>(j));
    model.sample_exact(theta, rng,
                       {out.flat.data() + j * d, static_cast<std::size_t>(d)});
  }
  return out;
}

Dataset load_dataset(const std::string& path, int dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file: " + path);
  Dataset out;
  out.dim = dim;
  std::string line;
  int line_no = 0;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(dim));
    std::size_t start = 0;
    bool ok = true;
    while (start <= line.size()) {
      auto comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      const std::string_view tok(line.data() + start, comma - start);
      double v = 0.0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || p != tok.data() + tok.size()) {
        ok = false;
        break;
      }
      row.push_back(v);
      start = comma + 1;
      if (comma == line.size()) break;
    }
    if (!ok) {
      if (!saw_data) continue;  // a single leading header line is fine
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": malformed data row");
    }
    if (static_cast<int>(row.size()) != dim)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " columns, got " +
                        std::to_string(row.size()));
    saw_data = true;
    out.flat.insert(out.flat.end(), row.begin(), row.end());
  }
  if (out.flat.empty()) throw ConfigError(path + ": no data rows");
  return out;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& err) {
  validate_experiment(cfg);
  return cfg.kind == ExperimentKind::train ? run_train(cfg, err)
                                           : run_dynamics(cfg, err);
}

std::string compare_runs(const std::vector<std::string>& dirs) {
  if (dirs.empty()) throw ConfigError("compare: no run directories given");

  struct Row {
    std::string dir, algorithm, p, err_a, err_b, kl;
  };
  std::vector<Row> rows;
  ExperimentConfig first;
  bool have_first = false;

  for (const auto& d : dirs) {
    const auto cfg = load_config((fs::path(d) / "config.ini").string());
    if (cfg.kind != ExperimentKind::train)
      throw ConfigError("compare: " + d + " is not a training run");
    if (!have_first) {
      first = cfg;
      have_first = true;
    } else if (cfg.model.name != first.model.name ||
               cfg.model.dim != first.model.dim ||
               cfg.model.teacher_a1 != first.model.teacher_a1 ||
               cfg.model.teacher_b1 != first.model.teacher_b1 ||
               cfg.model.teacher_z != first.model.teacher_z) {
      throw ConfigError("compare: " + d + " does not share the teacher of " +
                        dirs.front());
    }
    const auto kv = read_summary(fs::path(d) / "summary.txt");
    const auto get = [&](const char* key) {
      const auto it = kv.find(key);
      return it == kv.end() || it->second.empty() ? std::string("-")
                                                  : it->second;
    };
    rows.push_back({d, get("algorithm"), get("p_final"), get("err_a"),
                    get("err_b"), get("kl_final")});
  }

  // Rounded columns for reading; the summaries keep full precision.
  const auto short_num = [](const std::string& s) {
    if (s == "-") return s;
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return s;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };

  std::vector<std::array<std::string, 6>> cells;
  cells.push_back({"run", "algorithm", "p_final", "err_a", "err_b", "kl_final"});
  for (const auto& r : rows)
    cells.push_back({r.dir, r.algorithm, short_num(r.p), short_num(r.err_a),
                     short_num(r.err_b), short_num(r.kl)});

  std::array<std::size_t, 6> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 6; ++c)
      width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 6; ++c) {
      out << row[c];
      if (c + 1 < 6)
        out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace smcebm
