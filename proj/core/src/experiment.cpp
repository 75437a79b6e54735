#include "lrmip/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "lrmip/errors.hpp"
#include "lrmip/rng.hpp"

#ifndef LRMIP_VERSION
#define LRMIP_VERSION "unknown"
#endif

namespace lrmip {

std::string version() { return LRMIP_VERSION; }

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ------------------------------------------------------------------ config

namespace {

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("key '" + key + "' has an invalid value");
  }
}

template <typename T>
std::vector<T> list(const YAML::Node& node, const std::string& key) {
  std::vector<T> out;
  if (node.IsScalar()) {
    out.push_back(scalar<T>(node, key));
  } else if (node.IsSequence()) {
    for (const YAML::Node& item : node) out.push_back(scalar<T>(item, key));
  } else {
    throw ConfigError("key '" + key + "' must be a number or a list");
  }
  return out;
}

SearchRange range(const YAML::Node& node, const std::string& key) {
  const auto v = list<double>(node, key);
  if (v.size() != 3) throw ConfigError("key '" + key + "' must be [lo, hi, step]");
  return {v[0], v[1], v[2]};
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + format_double(v[k]);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
  return out;
}

std::string range_text(const SearchRange& r) {
  return format_double(r.lo) + "," + format_double(r.hi) + "," + format_double(r.step);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("configuration must be a key-value table");
  for (const auto& kv : root) {
    const std::string key = scalar<std::string>(kv.first, "key");
    const YAML::Node& v = kv.second;
    if (key == "L") {
      c.sizes = list<int>(v, key);
    } else if (key == "alpha") {
      c.alphas = list<double>(v, key);
    } else if (key == "gamma") {
      c.gammas = list<double>(v, key);
    } else if (key == "N") {
      c.N = scalar<int>(v, key);
    } else if (key == "t_burn") {
      c.t_burn = scalar<double>(v, key);
    } else if (key == "t_sample") {
      c.t_sample = scalar<double>(v, key);
    } else if (key == "dt_sample") {
      c.dt_sample = scalar<double>(v, key);
    } else if (key == "n_traj") {
      c.n_traj = scalar<int>(v, key);
    } else if (key == "seed") {
      c.seed = scalar<std::uint64_t>(v, key);
    } else if (key == "update") {
      const auto name = scalar<std::string>(v, key);
      if (name == "eigendecomposition") {
        c.update = MeasurementUpdate::eigendecomposition;
      } else if (name == "householder") {
        c.update = MeasurementUpdate::householder;
      } else {
        throw ConfigError("unknown update '" + name + "'");
      }
    } else if (key == "observables") {
      c.observables = {false, false, false, false};
      for (const auto& name : list<std::string>(v, key)) {
        if (name == "profile") {
          c.observables.profile = true;
        } else if (name == "half") {
          c.observables.half = true;
        } else if (name == "mi_quarters") {
          c.observables.mi_quarters = true;
        } else if (name == "mi_far") {
          c.observables.mi_far = true;
        } else {
          throw ConfigError("unknown observable '" + name + "'");
        }
      }
    } else if (key == "fit_window") {
      const auto w = list<int>(v, key);
      if (w.size() != 2) throw ConfigError("fit_window must be [lo, hi]");
      c.fit_lo = w[0];
      c.fit_hi = w[1];
    } else if (key == "bandwidth") {
      c.collapse.bandwidth = scalar<double>(v, key);
    } else if (key == "natural_log") {
      c.collapse.natural_log = scalar<bool>(v, key);
    } else if (key == "gamma_c_range") {
      c.collapse.gamma_c = range(v, key);
    } else if (key == "nu_range") {
      c.collapse.nu = range(v, key);
    } else if (key == "beta_range") {
      c.collapse.beta = range(v, key);
    } else if (key == "refine_sweeps") {
      c.collapse.refine_sweeps = scalar<int>(v, key);
    } else if (key == "min_points") {
      c.collapse.min_points = scalar<int>(v, key);
    } else if (key == "norm_alpha") {
      c.norm_alphas = list<double>(v, key);
    } else if (key == "norm_L") {
      c.norm_sizes = list<int>(v, key);
    } else if (key == "workers") {
      c.workers = scalar<int>(v, key);
    } else if (key == "output_dir") {
      c.output_dir = scalar<std::string>(v, key);
    } else if (key == "save_jumps") {
      c.save_jumps = scalar<bool>(v, key);
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_yaml(buffer.str());
}

void ExperimentConfig::validate() const {
  if (sizes.empty()) throw ConfigError("L list is empty");
  if (alphas.empty()) throw ConfigError("alpha list is empty");
  if (gammas.empty()) throw ConfigError("gamma list is empty");
  if (!seed) throw ConfigError("seed is mandatory");
  if (n_traj < 2) throw ConfigError("n_traj must be at least 2");
  if (workers < 0) throw ConfigError("workers must be non-negative");
  for (int L : sizes) {
    for (double a : alphas) {
      for (double g : gammas) cell_config(*this, {L, a, g});
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream s;
  s << "L=" << join_ints(sizes) << "\n";
  s << "alpha=" << join_doubles(alphas) << "\n";
  s << "gamma=" << join_doubles(gammas) << "\n";
  s << "N=" << N << "\n";
  s << "t_burn=" << format_double(t_burn) << "\n";
  s << "t_sample=" << format_double(t_sample) << "\n";
  s << "dt_sample=" << format_double(dt_sample) << "\n";
  s << "n_traj=" << n_traj << "\n";
  s << "seed=" << (seed ? std::to_string(*seed) : "none") << "\n";
  s << "update=" << (update == MeasurementUpdate::householder ? "householder" : "eigendecomposition")
    << "\n";
  s << "observables=" << observables.profile << observables.half << observables.mi_quarters
    << observables.mi_far << "\n";
  s << "fit_window=" << fit_lo << "," << fit_hi << "\n";
  s << "bandwidth=" << format_double(collapse.bandwidth) << "\n";
  s << "natural_log=" << collapse.natural_log << "\n";
  s << "gamma_c_range=" << range_text(collapse.gamma_c) << "\n";
  s << "nu_range=" << range_text(collapse.nu) << "\n";
  s << "beta_range=" << range_text(collapse.beta) << "\n";
  s << "refine_sweeps=" << collapse.refine_sweeps << "\n";
  s << "min_points=" << collapse.min_points << "\n";
  s << "norm_alpha=" << join_doubles(norm_alphas) << "\n";
  s << "norm_L=" << join_ints(norm_sizes) << "\n";
  s << "save_jumps=" << save_jumps << "\n";
  return s.str();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(canonical()));
  return buf;
}

// -------------------------------------------------------------------- cells

std::string CellKey::label() const {
  return "L=" + std::to_string(L) + ";alpha=" + format_double(alpha) +
         ";gamma=" + format_double(gamma);
}

bool ResultSet::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

std::uint64_t cell_seed(std::uint64_t root, const CellKey& key) {
  return stream_seed(root, fnv1a64(key.label()));
}

TrajectoryConfig cell_config(const ExperimentConfig& config, const CellKey& key) {
  TrajectoryConfig t;
  try {
    t.spec = LatticeSpec::make(key.L, key.alpha, config.N);
  } catch (const DomainError& e) {
    throw ConfigError(key.label() + ": " + e.what());
  }
  t.gamma = key.gamma;
  t.t_burn = config.t_burn;
  t.t_sample = config.t_sample;
  t.dt_sample = config.dt_sample;
  t.seed = cell_seed(config.seed.value_or(0), key);
  t.n_traj = config.n_traj;
  t.update = config.update;
  t.observables = config.observables;
  return t.resolved();
}

// --------------------------------------------------------------------- run

namespace {

struct Item {
  std::size_t cell;
  int traj;
};

struct Done {
  std::size_t cell = 0;
  int traj = 0;
  TrajectoryResult result;
  std::string error;
};

nlohmann::json checkpoint_line(const Done& d, bool save_jumps) {
  nlohmann::json j;
  j["cell"] = d.cell;
  j["traj"] = d.traj;
  j["seed"] = d.result.record.seed;
  j["means"] = d.result.means;
  j["trace"] = d.result.max_trace_defect;
  j["ortho"] = d.result.max_orthonormality_defect;
  if (save_jumps) {
    nlohmann::json ev = nlohmann::json::array();
    for (const JumpEvent& e : d.result.record.events) ev.push_back({e.time, e.site});
    j["events"] = ev;
  }
  return j;
}

TrajectoryResult from_checkpoint(const nlohmann::json& j) {
  TrajectoryResult r;
  r.record.seed = j.at("seed").get<std::uint64_t>();
  r.record.trajectory_id = j.at("traj").get<std::uint64_t>();
  r.means = j.at("means").get<std::map<std::string, double>>();
  r.max_trace_defect = j.at("trace").get<double>();
  r.max_orthonormality_defect = j.at("ortho").get<double>();
  if (j.contains("events")) {
    for (const auto& e : j.at("events")) {
      r.record.events.push_back({e.at(0).get<double>(), e.at(1).get<int>()});
    }
  }
  return r;
}

void write_outputs(const ResultSet& rs, const ExperimentConfig& config,
                   const std::filesystem::path& dir) {
  {
    std::ofstream csv(dir / "results.csv", std::ios::binary);
    csv << kResultsHeader << "\n";
    for (const CellResult& c : rs.cells) {
      if (!c.ok) continue;
      for (const auto& [name, est] : c.ensemble.estimates) {
        csv << c.key.L << "," << format_double(c.key.alpha) << "," << format_double(c.key.gamma)
            << "," << name << "," << format_double(est.mean) << "," << format_double(est.std_error)
            << "," << c.ensemble.n_traj << "," << rs.config_hash << "\n";
      }
    }
  }
  {
    std::ofstream csv(dir / "trajectories.csv", std::ios::binary);
    csv << "L,alpha,gamma,trajectory,seed,observable,value,config_hash\n";
    for (const CellResult& c : rs.cells) {
      if (!c.ok) continue;
      for (const auto& [name, values] : c.ensemble.per_trajectory) {
        for (std::size_t k = 0; k < values.size(); ++k) {
          csv << c.key.L << "," << format_double(c.key.alpha) << ","
              << format_double(c.key.gamma) << "," << k << "," << c.ensemble.seeds[k] << ","
              << name << "," << format_double(values[k]) << "," << rs.config_hash << "\n";
        }
      }
    }
  }
  if (config.save_jumps) {
    std::ofstream csv(dir / "jumps.csv", std::ios::binary);
    csv << "L,alpha,gamma,trajectory,seed,event,time,site\n";
    for (const CellResult& c : rs.cells) {
      for (const JumpRecord& r : c.records) {
        for (std::size_t e = 0; e < r.events.size(); ++e) {
          csv << c.key.L << "," << format_double(c.key.alpha) << ","
              << format_double(c.key.gamma) << "," << r.trajectory_id << "," << r.seed << ","
              << e << "," << format_double(r.events[e].time) << "," << r.events[e].site << "\n";
        }
      }
    }
  }
  nlohmann::json j;
  j["config_hash"] = rs.config_hash;
  j["code_version"] = rs.code_version;
  j["complete"] = rs.complete;
  j["cells"] = nlohmann::json::array();
  for (const CellResult& c : rs.cells) {
    nlohmann::json cell;
    cell["L"] = c.key.L;
    cell["alpha"] = c.key.alpha;
    cell["gamma"] = c.key.gamma;
    cell["ok"] = c.ok;
    cell["cell_seed"] = c.cell_seed;
    if (!c.ok) {
      cell["error"] = c.error;
    } else {
      cell["n_traj"] = c.ensemble.n_traj;
      nlohmann::json est;
      for (const auto& [name, e] : c.ensemble.estimates) {
        est[name] = {{"mean", e.mean}, {"stderr", e.std_error}};
      }
      cell["estimates"] = est;
      cell["trajectory_seeds"] = c.ensemble.seeds;
      cell["max_trace_defect"] = c.ensemble.max_trace_defect;
      cell["max_orthonormality_defect"] = c.ensemble.max_orthonormality_defect;
    }
    j["cells"].push_back(cell);
  }
  std::ofstream out(dir / "results.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace

ResultSet run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const std::filesystem::path dir = options.out_dir.value_or(config.output_dir);
  std::filesystem::create_directories(dir);

  ResultSet rs;
  rs.config_hash = config.hash();
  rs.code_version = version();

  std::vector<CellKey> keys;
  for (int L : config.sizes) {
    for (double a : config.alphas) {
      for (double g : config.gammas) keys.push_back({L, a, g});
    }
  }
  std::vector<TrajectoryConfig> cells;
  std::map<std::pair<int, double>, std::size_t> hamiltonian_index;
  std::vector<SingleParticleHamiltonian> hamiltonians;
  std::vector<std::size_t> cell_h;
  for (const CellKey& k : keys) {
    cells.push_back(cell_config(config, k));
    auto [it, inserted] = hamiltonian_index.try_emplace({k.L, k.alpha}, hamiltonians.size());
    if (inserted) hamiltonians.push_back(build_hopping_matrix(cells.back().spec));
    cell_h.push_back(it->second);
  }

  const auto n_traj = static_cast<std::size_t>(config.n_traj);
  std::vector<std::vector<std::optional<TrajectoryResult>>> done(
      keys.size(), std::vector<std::optional<TrajectoryResult>>(n_traj));

  // Checkpoint: a header line with the config hash, then one line per
  // finished trajectory. A torn last line is ignored.
  const std::filesystem::path checkpoint = dir / "checkpoint.jsonl";
  if (options.resume && std::filesystem::exists(checkpoint)) {
    std::ifstream in(checkpoint);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        continue;
      }
      if (header) {
        if (j.value("config_hash", "") != rs.config_hash) {
          throw ConfigError("checkpoint was written by a different configuration");
        }
        header = false;
        continue;
      }
      const auto c = j.at("cell").get<std::size_t>();
      const auto t = j.at("traj").get<std::size_t>();
      if (c < keys.size() && t < n_traj) done[c][t] = from_checkpoint(j);
    }
  }
  std::ofstream ckpt;
  {
    const bool append = options.resume && std::filesystem::exists(checkpoint);
    ckpt.open(checkpoint, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary);
    if (!ckpt) throw ConfigError("cannot write to " + dir.string());
    if (!append) ckpt << nlohmann::json{{"config_hash", rs.config_hash}}.dump() << "\n";
    ckpt.flush();
  }

  std::vector<Item> items;
  for (std::size_t c = 0; c < keys.size(); ++c) {
    for (std::size_t t = 0; t < n_traj; ++t) {
      if (!done[c][t]) items.push_back({c, static_cast<int>(t)});
    }
  }

  int workers = options.workers >= 0 ? options.workers : config.workers;
  if (workers == 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(1, items.size()))));

  std::vector<std::atomic<bool>> cell_failed(keys.size());
  std::vector<std::string> cell_error(keys.size());
  std::vector<int> cell_error_traj(keys.size(), -1);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<Done> queue;
  int active = workers;

  auto work = [&] {
    for (std::size_t i = next++; i < items.size() && !stop; i = next++) {
      const Item item = items[i];
      Done d;
      d.cell = item.cell;
      d.traj = item.traj;
      if (cell_failed[item.cell]) continue;
      try {
        d.result = run_trajectory(cells[item.cell], hamiltonians[cell_h[item.cell]],
                                  static_cast<std::uint64_t>(item.traj));
        if (!config.save_jumps) d.result.record.events.clear();
      } catch (const std::exception& e) {
        d.error = e.what();
        cell_failed[item.cell] = true;
      }
      {
        std::lock_guard lock(mutex);
        queue.push_back(std::move(d));
      }
      cv.notify_one();
    }
    {
      std::lock_guard lock(mutex);
      --active;
    }
    cv.notify_one();
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);

  // This thread is the single writer.
  long persisted = 0;
  for (;;) {
    std::unique_lock lock(mutex);
    cv.wait(lock, [&] { return !queue.empty() || active == 0; });
    if (queue.empty() && active == 0) break;
    Done d = std::move(queue.front());
    queue.pop_front();
    lock.unlock();
    if (stop) continue;
    if (!d.error.empty()) {
      if (cell_error_traj[d.cell] < 0 || d.traj < cell_error_traj[d.cell]) {
        cell_error_traj[d.cell] = d.traj;
        cell_error[d.cell] = "trajectory " + std::to_string(d.traj) + ": " + d.error;
      }
      continue;
    }
    ckpt << checkpoint_line(d, config.save_jumps).dump() << "\n";
    ckpt.flush();
    done[d.cell][static_cast<std::size_t>(d.traj)] = std::move(d.result);
    ++persisted;
    if (options.stop_after >= 0 && persisted >= options.stop_after) stop = true;
  }
  for (auto& th : pool) th.join();
  ckpt.close();

  if (stop) {
    rs.complete = false;
    return rs;
  }

  for (std::size_t c = 0; c < keys.size(); ++c) {
    CellResult cell;
    cell.key = keys[c];
    cell.cell_seed = cells[c].seed;
    if (cell_error_traj[c] >= 0) {
      cell.ok = false;
      cell.error = cell_error[c];
    } else {
      std::vector<TrajectoryResult> results;
      results.reserve(n_traj);
      for (auto& r : done[c]) {
        if (config.save_jumps) cell.records.push_back(r->record);
        results.push_back(std::move(*r));
      }
      try {
        cell.ensemble = reduce_ensemble(results);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
    rs.cells.push_back(std::move(cell));
  }
  write_outputs(rs, config, dir);
  return rs;
}

// ---------------------------------------------------------------- reading

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw ConfigError(path.string() + " is not a results file");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 8) throw ConfigError("malformed row in " + path.string() + ": " + line);
    try {
      ResultRow r;
      r.L = std::stoi(f[0]);
      r.alpha = std::stod(f[1]);
      r.gamma = std::stod(f[2]);
      r.observable = f[3];
      r.mean = std::stod(f[4]);
      r.std_error = std::stod(f[5]);
      r.n_traj = std::stoi(f[6]);
      r.config_hash = f[7];
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError("malformed row in " + path.string() + ": " + line);
    }
  }
  return rows;
}

}  // namespace lrmip
