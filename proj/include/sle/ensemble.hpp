#pragma once

#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sle/bubbles.hpp"
#include "sle/crossings.hpp"
#include "sle/driving.hpp"
#include "sle/hitting.hpp"
#include "sle/trace.hpp"

namespace sle {

/// Detection tolerances; zero entries are derived from the data at run time
/// (see default_crossing_tolerances and collision_tolerance).
struct ToleranceSet {
  double delta = 0.0;
  double delta0 = 0.0;
  double eps_sep = 0.0;
  double collision = 0.0;
};

/// Flat, fully resolved run description.  Every output byte of an ensemble is
/// a function of this struct plus the task name.
struct RunConfig {
  double kappa = 6.0;
  double horizon = 1.0;
  std::size_t steps = 100000;
  std::vector<std::uint64_t> seeds = {1};
  double resolution = 1.0 / 512.0;
  Box box;
  ToleranceSet tolerances;
  double r = 0.1;
  std::size_t n = 1;
  std::size_t stride = 16;
  double future_horizon = 0.25;
  double a = -1.0;
  double c = 1.0;
  std::size_t trials = 1000;
  std::string output_dir = "out";
  std::size_t workers = 0;  // 0: hardware concurrency

  void validate() const {
    if (steps < 10) throw std::invalid_argument("config: steps must be >= 10");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (std::size_t j = i + 1; j < seeds.size(); ++j)
        if (seeds[i] == seeds[j]) throw std::invalid_argument("config: seeds must be distinct");
    if (!(resolution > 0.0)) throw std::invalid_argument("config: resolution must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("config: horizon must be > 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("config: kappa must be > 0");
    if (stride < 1) throw std::invalid_argument("config: stride must be >= 1");
  }
};

enum class Task { simulate, bubbles, crossings, hitprob };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::simulate: return "simulate";
    case Task::bubbles: return "bubbles";
    case Task::crossings: return "crossings";
    case Task::hitprob: return "hitprob";
  }
  return "?";
}

inline Task parse_task(const std::string& s) {
  if (s == "simulate") return Task::simulate;
  if (s == "bubbles") return Task::bubbles;
  if (s == "crossings") return Task::crossings;
  if (s == "hitprob") return Task::hitprob;
  throw std::invalid_argument("unknown task: " + s);
}

/// One observable value for one seed.  index is -1 for scalar observables and
/// the position for vector-valued ones; error is empty unless the seed's
/// pipeline failed, in which case the row records the message and nothing
/// else.
struct ReportRow {
  std::uint64_t seed = 0;
  std::string name;
  long index = -1;
  double value = 0.0;
  std::string error;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Run fn(i) for i in [0, count) on `workers` threads; exceptions inside fn
/// are the caller's business (fn must not throw).
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Serialize the config as sorted key = value lines (the config.snapshot
/// format, also accepted back by parse_config).
inline std::string serialize_config(const RunConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["a"] = detail::format_double(cfg.a);
  kv["box"] = detail::format_double(cfg.box.x_min) + "," + detail::format_double(cfg.box.x_max) +
              "," + detail::format_double(cfg.box.y_max);
  kv["c"] = detail::format_double(cfg.c);
  kv["collision_tol"] = detail::format_double(cfg.tolerances.collision);
  kv["delta"] = detail::format_double(cfg.tolerances.delta);
  kv["delta0"] = detail::format_double(cfg.tolerances.delta0);
  kv["eps_sep"] = detail::format_double(cfg.tolerances.eps_sep);
  kv["future_horizon"] = detail::format_double(cfg.future_horizon);
  kv["horizon"] = detail::format_double(cfg.horizon);
  kv["kappa"] = detail::format_double(cfg.kappa);
  kv["n"] = std::to_string(cfg.n);
  kv["out"] = cfg.output_dir;
  kv["r"] = detail::format_double(cfg.r);
  kv["resolution"] = detail::format_double(cfg.resolution);
  std::string seeds;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) seeds += ",";
    seeds += std::to_string(cfg.seeds[i]);
  }
  kv["seeds"] = seeds;
  kv["steps"] = std::to_string(cfg.steps);
  kv["stride"] = std::to_string(cfg.stride);
  kv["trials"] = std::to_string(cfg.trials);
  kv["workers"] = std::to_string(cfg.workers);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

/// Parse `key = value` lines ('#' starts a comment).  Unknown keys are
/// rejected.  The seeds value is either a comma list or `base:count`.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.seeds.clear();
  std::istringstream in(text);
  std::string line;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "kappa") cfg.kappa = std::stod(val);
    else if (key == "horizon") cfg.horizon = std::stod(val);
    else if (key == "steps") cfg.steps = std::stoull(val);
    else if (key == "resolution") cfg.resolution = std::stod(val);
    else if (key == "r") cfg.r = std::stod(val);
    else if (key == "n") cfg.n = std::stoull(val);
    else if (key == "stride") cfg.stride = std::stoull(val);
    else if (key == "future_horizon") cfg.future_horizon = std::stod(val);
    else if (key == "a") cfg.a = std::stod(val);
    else if (key == "c") cfg.c = std::stod(val);
    else if (key == "trials") cfg.trials = std::stoull(val);
    else if (key == "out") cfg.output_dir = val;
    else if (key == "workers") cfg.workers = std::stoull(val);
    else if (key == "delta") cfg.tolerances.delta = std::stod(val);
    else if (key == "delta0") cfg.tolerances.delta0 = std::stod(val);
    else if (key == "eps_sep") cfg.tolerances.eps_sep = std::stod(val);
    else if (key == "collision_tol") cfg.tolerances.collision = std::stod(val);
    else if (key == "box") {
      std::istringstream bs(val);
      std::string part;
      double vals[3];
      for (double& v : vals) {
        if (!std::getline(bs, part, ',')) throw std::invalid_argument("config: box needs 3 values");
        v = std::stod(part);
      }
      cfg.box = {vals[0], vals[1], vals[2]};
    } else if (key == "seeds") {
      if (const auto colon = val.find(':'); colon != std::string::npos) {
        const std::uint64_t base = std::stoull(val.substr(0, colon));
        const std::size_t count = std::stoull(val.substr(colon + 1));
        cfg.seeds = expand_seeds(base, count);
      } else {
        std::istringstream ss(val);
        std::string part;
        while (std::getline(ss, part, ',')) cfg.seeds.push_back(std::stoull(trim(part)));
      }
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  if (cfg.seeds.empty()) cfg.seeds = {1};
  return cfg;
}

namespace detail {

inline void rows_for_simulate(const RunConfig& cfg, std::uint64_t seed,
                              std::vector<ReportRow>& rows) {
  const auto path = sample_sle_driving(cfg.kappa, cfg.horizon, cfg.steps, seed);
  const auto tr = compute_trace(path, cfg.stride);
  const auto& tip = tr.points.back();
  rows.push_back({seed, "tip_re", -1, tip.real(), ""});
  rows.push_back({seed, "tip_im", -1, tip.imag(), ""});
  rows.push_back({seed, "trace_diameter", -1, diameter(tr.points), ""});
  rows.push_back({seed, "hcap", -1, 2.0 * path.horizon(), ""});
  rows.push_back({seed, "n_samples", -1, static_cast<double>(tr.points.size()), ""});
}

inline void rows_for_bubbles(const RunConfig& cfg, std::uint64_t seed,
                             std::vector<ReportRow>& rows) {
  const auto path = sample_sle_driving(cfg.kappa, cfg.horizon, cfg.steps, seed);
  const auto tr = compute_trace(path, cfg.stride);
  const auto bs = extract_bubbles(tr, cfg.box, cfg.resolution);
  long type_counts[4] = {0, 0, 0, 0};
  for (const auto& b : bs.bubbles) ++type_counts[b.type_code];
  rows.push_back({seed, "n_bubbles", -1, static_cast<double>(bs.bubbles.size()), ""});
  for (int t = 0; t < 4; ++t)
    rows.push_back({seed, "n_type" + std::to_string(t), -1, static_cast<double>(type_counts[t]), ""});
  rows.push_back(
      {seed, "anchor_index", -1, bs.anchor ? static_cast<double>(*bs.anchor) : -1.0, ""});
  if (bs.anchor)
    rows.push_back({seed, "anchor_diameter", -1, bs.bubbles[*bs.anchor].diameter, ""});
  if (type_counts[3] >= 2) {
    const auto ind = indicator_sequence(bs);
    for (std::size_t i = 0; i < ind.bits.size(); ++i)
      rows.push_back({seed, "indicator_bit", static_cast<long>(i),
                      static_cast<double>(ind.bits[i]), ""});
    rows.push_back({seed, "anchor_offset", -1,
                    ind.anchor_offset ? static_cast<double>(*ind.anchor_offset) : -1.0, ""});
  }
}

inline void rows_for_crossings(const RunConfig& cfg, std::uint64_t seed,
                               std::vector<ReportRow>& rows) {
  const auto path = sample_sle_driving(cfg.kappa, cfg.horizon, cfg.steps, seed);
  const auto tr = compute_trace(path, cfg.stride);
  CrossingTolerances tol = default_crossing_tolerances(tr);
  if (cfg.tolerances.delta > 0.0) tol.delta = cfg.tolerances.delta;
  if (cfg.tolerances.delta0 > 0.0) tol.delta0 = cfg.tolerances.delta0;
  const auto ct = crossing_times(tr, tol);
  rows.push_back({seed, "n_crossings", -1, static_cast<double>(ct.taus.size()), ""});
  const auto exc = select_excursion(ct, tr, cfg.r, cfg.n);
  rows.push_back({seed, "excursion_j", -1, static_cast<double>(exc.j), ""});
  rows.push_back({seed, "excursion_diameter", -1, exc.diam, ""});
  rows.push_back({seed, "tau_J", -1, exc.t_end, ""});
  const double eps_sep = cfg.tolerances.eps_sep > 0.0 ? cfg.tolerances.eps_sep : 2.0 * tol.delta0;
  const auto mps = marked_points(tr, path, exc, eps_sep, tol.delta0);
  for (std::size_t k = 0; k < mps.xs.size(); ++k)
    rows.push_back({seed, "marked_point", static_cast<long>(k), mps.xs[k], ""});
  if (mps.xs.size() >= 2 && exc.t_end + cfg.future_horizon <= path.horizon()) {
    const auto cv = crossing_counts(tr, path, mps, cfg.future_horizon, tol, cfg.stride);
    for (std::size_t k = 0; k < cv.counts.size(); ++k)
      rows.push_back(
          {seed, "count_N", static_cast<long>(k + 1), static_cast<double>(cv.counts[k]), ""});
    rows.push_back({seed, "endpoints_outside", -1, static_cast<double>(cv.outside), ""});
    rows.push_back({seed, "endpoints_total", -1, static_cast<double>(cv.total), ""});
  }
}

inline void rows_for_hitprob(const RunConfig& cfg, std::uint64_t seed,
                             std::vector<ReportRow>& rows) {
  const HittingQuery q{cfg.kappa, cfg.a, cfg.c};
  const auto est = mc_hitting(q, cfg.trials, cfg.steps, cfg.horizon, seed);
  rows.push_back({seed, "p_hat", -1, est.p_hat, ""});
  rows.push_back({seed, "stderr", -1, est.stderr_, ""});
  rows.push_back({seed, "f_theory", -1, est.f_theory, ""});
  rows.push_back({seed, "z_kappa", -1, est.z_kappa, ""});
  rows.push_back({seed, "n_resolved", -1, static_cast<double>(est.n_traces), ""});
  rows.push_back({seed, "n_unresolved", -1, static_cast<double>(est.unresolved), ""});
}

}  // namespace detail

/// Execute the per-seed pipeline of `task` for every configured seed,
/// concurrently, and return the rows merged in seed order.  A failure inside
/// one seed's pipeline becomes a single row with the error message; it never
/// aborts the ensemble.
inline std::vector<ReportRow> run_rows(const RunConfig& cfg, Task task) {
  cfg.validate();
  std::vector<std::vector<ReportRow>> per_seed(cfg.seeds.size());
  detail::parallel_for(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    try {
      switch (task) {
        case Task::simulate: detail::rows_for_simulate(cfg, seed, per_seed[i]); break;
        case Task::bubbles: detail::rows_for_bubbles(cfg, seed, per_seed[i]); break;
        case Task::crossings: detail::rows_for_crossings(cfg, seed, per_seed[i]); break;
        case Task::hitprob: detail::rows_for_hitprob(cfg, seed, per_seed[i]); break;
      }
    } catch (const std::exception& e) {
      per_seed[i].clear();
      per_seed[i].push_back({seed, "error", -1, 0.0, e.what()});
    }
  });
  std::vector<ReportRow> rows;
  for (auto& chunk : per_seed)
    for (auto& row : chunk) rows.push_back(std::move(row));
  return rows;
}

inline std::string render_csv(const RunConfig& cfg, const std::vector<ReportRow>& rows) {
  std::string out = "# sle-lab results schema v1\n";
  out += "seed,kappa,horizon,steps,name,index,value,error\n";
  const std::string meta = "," + detail::format_double(cfg.kappa) + "," +
                           detail::format_double(cfg.horizon) + "," + std::to_string(cfg.steps) +
                           ",";
  for (const auto& r : rows) {
    out += std::to_string(r.seed) + meta + r.name + ",";
    if (r.index >= 0) out += std::to_string(r.index);
    out += "," + detail::format_double(r.value) + "," + r.error + "\n";
  }
  return out;
}

inline std::string render_summary_json(const RunConfig& cfg, const std::vector<ReportRow>& rows) {
  struct Agg {
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, Agg> aggs;
  std::size_t errors = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++errors;
      continue;
    }
    auto& a = aggs[r.name];
    a.sum += r.value;
    a.sum2 += r.value * r.value;
    ++a.count;
  }
  std::string out = "{\n  \"schema\": \"sle-lab-summary-v1\",\n";
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(serialize_config(cfg))));
  out += "  \"config_hash\": \"" + std::string(hash) + "\",\n";
  out += "  \"error_rows\": " + std::to_string(errors) + ",\n";
  out += "  \"observables\": {\n";
  bool first = true;
  for (const auto& [name, a] : aggs) {
    if (!first) out += ",\n";
    first = false;
    const double mean = a.sum / static_cast<double>(a.count);
    double se = 0.0;
    if (a.count > 1) {
      const double var =
          std::max(0.0, (a.sum2 - a.sum * mean) / static_cast<double>(a.count - 1));
      se = std::sqrt(var / static_cast<double>(a.count));
    }
    out += "    \"" + name + "\": {\"mean\": " + detail::format_double(mean) +
           ", \"stderr\": " + detail::format_double(se) +
           ", \"count\": " + std::to_string(a.count) + "}";
  }
  out += "\n  }\n}\n";
  return out;
}

/// Run the ensemble and persist results.csv, summary.json and config.snapshot
/// under cfg.output_dir.  Output bytes depend only on (config, task).
inline void run_ensemble(const RunConfig& cfg, Task task) {
  const auto rows = run_rows(cfg, task);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec)
    throw std::runtime_error("run_ensemble: cannot create output dir " + cfg.output_dir + ": " +
                             ec.message());
  const auto write_file = [&](const std::string& name, const std::string& content) {
    const fs::path p = fs::path(cfg.output_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("run_ensemble: cannot open " + p.string());
    f << content;
    if (!f) throw std::runtime_error("run_ensemble: write failed for " + p.string());
  };
  write_file("results.csv", render_csv(cfg, rows));
  write_file("summary.json", render_summary_json(cfg, rows));
  write_file("config.snapshot", serialize_config(cfg));
}

}  // namespace sle
