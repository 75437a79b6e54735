#include "lrmip/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "lrmip/errors.hpp"
#include "lrmip/observables.hpp"
#include "lrmip/oracle.hpp"

namespace lrmip {

AnalysisMode parse_analysis_mode(const std::string& name) {
  if (name == "crossing") return AnalysisMode::crossing;
  if (name == "bkt") return AnalysisMode::bkt;
  if (name == "powerlaw") return AnalysisMode::powerlaw;
  if (name == "cft") return AnalysisMode::cft;
  throw ConfigError("unknown analysis mode '" + name + "'");
}

namespace {

using nlohmann::json;

// alpha -> curve family for one observable.
std::map<double, CurveFamily> families(const std::vector<ResultRow>& rows,
                                       const std::string& observable) {
  std::map<double, std::map<int, std::vector<CurvePoint>>> grouped;
  for (const ResultRow& r : rows) {
    if (r.observable != observable) continue;
    grouped[r.alpha][r.L].push_back({r.gamma, r.mean, r.std_error});
  }
  std::map<double, CurveFamily> out;
  for (auto& [alpha, by_size] : grouped) {
    CurveFamily fam;
    for (auto& [L, points] : by_size) {
      std::sort(points.begin(), points.end(),
                [](const CurvePoint& a, const CurvePoint& b) { return a.gamma < b.gamma; });
      fam.curves.push_back({L, points});
    }
    out.emplace(alpha, std::move(fam));
  }
  if (out.empty()) throw ConfigError("no rows for observable '" + observable + "'");
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string alpha_tag(double alpha) { return "alpha=" + format_double(alpha); }

json analyze_crossing(const std::vector<ResultRow>& rows, const AnalysisOptions& o,
                      const std::string& observable) {
  json out = json::array();
  for (const auto& [alpha, fam] : families(rows, observable)) {
    json entry{{"alpha", alpha}, {"pairs", json::array()}};
    for (std::size_t k = 0; k + 1 < fam.curves.size(); ++k) {
      const Curve& small = fam.curves[k];
      const Curve& large = fam.curves[k + 1];
      const Crossing c = detect_crossing(small, large);
      const CrossingInterval ci =
          bootstrap_crossing_parametric(small, large, o.bootstrap_resamples, o.seed);
      entry["pairs"].push_back({{"L_small", small.L},
                                {"L_large", large.L},
                                {"gamma_c", optional_number(c.gamma)},
                                {"sign_changes", c.sign_changes},
                                {"ambiguous", c.ambiguous},
                                {"ci_lo", finite_or_null(ci.lo)},
                                {"ci_hi", finite_or_null(ci.hi)},
                                {"found_fraction", ci.found_fraction},
                                {"bounded", ci.bounded()}});
    }
    out.push_back(entry);
  }
  return out;
}

void write_collapse_points(const std::filesystem::path& file, const CurveFamily& fam,
                           const ScalingFitResult& fit, const CollapseOptions& o) {
  std::ofstream csv(file, std::ios::binary);
  csv << "L,gamma,x,y,y_error\n";
  for (const Curve& c : fam.curves) {
    const double L = c.L;
    for (const CurvePoint& p : c.points) {
      double x = 0.0, scale = 1.0;
      if (fit.method == CollapseMethod::bkt) {
        if (!(p.gamma > fit.gamma_c)) continue;
        const double logL = o.natural_log ? std::log(L) : std::log2(L);
        x = logL - fit.nu / std::sqrt(p.gamma - fit.gamma_c);
        scale = bkt_g(c.L, o.natural_log) * p.gamma;
      } else {
        x = (p.gamma - fit.gamma_c) * std::pow(L, 1.0 / fit.nu);
        scale = std::pow(L, fit.beta);
      }
      csv << c.L << "," << format_double(p.gamma) << "," << format_double(x) << ","
          << format_double(scale * p.value) << "," << format_double(scale * p.error) << "\n";
    }
  }
}

json analyze_collapse(const std::vector<ResultRow>& rows, const AnalysisOptions& o,
                      const std::string& observable, CollapseMethod method) {
  json out = json::array();
  for (const auto& [alpha, fam] : families(rows, observable)) {
    json entry{{"alpha", alpha}};
    try {
      const ScalingFitResult fit = method == CollapseMethod::bkt
                                       ? bkt_collapse_fit(fam, o.collapse)
                                       : power_law_collapse_fit(fam, o.collapse);
      entry["method"] = to_string(fit.method);
      entry[method == CollapseMethod::bkt ? "gamma_c" : "gamma_p"] = fit.gamma_c;
      entry["nu"] = fit.nu;
      if (method == CollapseMethod::power_law) entry["beta"] = fit.beta;
      entry["residual"] = fit.residual;
      entry["points_used"] = fit.points_used;
      entry["at_boundary"] = fit.at_boundary;
      if (o.plot_dir) {
        std::filesystem::create_directories(*o.plot_dir);
        write_collapse_points(*o.plot_dir / (to_string(method) + "_" + alpha_tag(alpha) + ".csv"),
                              fam, fit, o.collapse);
      }
    } catch (const Error& e) {
      entry["error"] = e.what();
    }
    out.push_back(entry);
  }
  return out;
}

json analyze_cft(const std::vector<ResultRow>& rows, const AnalysisOptions& o) {
  struct Key {
    int L;
    double alpha, gamma;
    bool operator<(const Key& k) const {
      return std::tie(L, alpha, gamma) < std::tie(k.L, k.alpha, k.gamma);
    }
  };
  std::map<Key, std::map<int, std::pair<double, double>>> profiles;
  for (const ResultRow& r : rows) {
    if (r.observable.rfind("S_", 0) != 0 || r.observable == "S_half") continue;
    int ell = 0;
    try {
      ell = std::stoi(r.observable.substr(2));
    } catch (const std::logic_error&) {
      continue;
    }
    profiles[{r.L, r.alpha, r.gamma}][ell] = {r.mean, r.std_error};
  }
  if (profiles.empty()) throw ConfigError("no entanglement profile rows (S_<l>) in the input");
  json out = json::array();
  for (const auto& [key, values] : profiles) {
    json entry{{"L", key.L}, {"alpha", key.alpha}, {"gamma", key.gamma}};
    EntanglementProfile p;
    p.L = key.L;
    bool complete = true;
    for (int ell = 1; ell <= key.L / 2; ++ell) {
      auto it = values.find(ell);
      if (it == values.end()) {
        complete = false;
        break;
      }
      p.values.push_back(it->second.first);
      p.errors.push_back(it->second.second);
    }
    if (!complete) {
      entry["error"] = "incomplete profile";
      out.push_back(entry);
      continue;
    }
    try {
      const int lo = o.fit_lo > 0 ? o.fit_lo : 3 * key.L / 8;
      const int hi = o.fit_hi > 0 ? o.fit_hi : key.L / 2;
      const CftFit fit = cft_fit(p, lo, hi);
      entry["c_eff"] = fit.c_eff;
      entry["c_eff_error"] = fit.c_eff_error;
      entry["constant"] = fit.constant;
      entry["r_squared"] = fit.r_squared;
      entry["points"] = fit.points;
      entry["window"] = {lo, hi};
      entry["S_half_minus_S_eighth"] = p.at(key.L / 2) - p.at(std::max(1, key.L / 8));
    } catch (const Error& e) {
      entry["error"] = e.what();
    }
    out.push_back(entry);
  }
  return out;
}

}  // namespace

nlohmann::json analyze(const std::vector<ResultRow>& rows, AnalysisMode mode,
                       const AnalysisOptions& options) {
  if (rows.empty()) throw ConfigError("no result rows to analyse");
  std::set<std::string> hashes;
  for (const ResultRow& r : rows) hashes.insert(r.config_hash);
  json report;
  report["config_hashes"] = hashes;
  switch (mode) {
    case AnalysisMode::crossing: {
      const std::string obs = options.observable.empty() ? "I_quarters" : options.observable;
      report["mode"] = "crossing";
      report["observable"] = obs;
      report["results"] = analyze_crossing(rows, options, obs);
      break;
    }
    case AnalysisMode::bkt: {
      const std::string obs = options.observable.empty() ? "I_quarters" : options.observable;
      report["mode"] = "bkt";
      report["observable"] = obs;
      report["results"] = analyze_collapse(rows, options, obs, CollapseMethod::bkt);
      break;
    }
    case AnalysisMode::powerlaw: {
      const std::string obs = options.observable.empty() ? "I_far" : options.observable;
      report["mode"] = "powerlaw";
      report["observable"] = obs;
      report["results"] = analyze_collapse(rows, options, obs, CollapseMethod::power_law);
      break;
    }
    case AnalysisMode::cft:
      report["mode"] = "cft";
      report["results"] = analyze_cft(rows, options);
      break;
  }
  return report;
}

std::vector<NormScalingSeries> run_norms(const std::vector<double>& alphas,
                                         const std::vector<int>& sizes,
                                         const std::filesystem::path& out_dir) {
  if (alphas.empty() || sizes.empty()) throw ConfigError("norms need alpha and L lists");
  std::vector<NormScalingSeries> series;
  for (double a : alphas) {
    try {
      series.push_back(norm_scaling_series(a, sizes));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream norms(out_dir / "norms.csv", std::ios::binary);
  norms << "alpha,L,norm\n";
  for (const NormScalingSeries& s : series) {
    for (std::size_t k = 0; k < s.sizes.size(); ++k) {
      norms << format_double(s.alpha) << "," << s.sizes[k] << "," << format_double(s.norms[k])
            << "\n";
    }
  }
  std::ofstream fits(out_dir / "norm_fits.csv", std::ios::binary);
  fits << "alpha,classification,growth_ratio,a,mu,b,mu_error,power_residual,p,q,log_residual,"
          "expected_mu\n";
  for (const NormScalingSeries& s : series) {
    fits << format_double(s.alpha) << "," << to_string(s.classification) << ","
         << format_double(s.growth_ratio) << "," << format_double(s.power.a) << ","
         << format_double(s.power.mu) << "," << format_double(s.power.b) << ","
         << format_double(s.power.mu_error) << "," << format_double(s.power.residual) << ","
         << format_double(s.log.p) << "," << format_double(s.log.q) << ","
         << format_double(s.log.residual) << "," << format_double(1.0 - s.alpha) << "\n";
  }
  return series;
}

nlohmann::json OracleCheckReport::to_json() const {
  return {{"passed", passed},
          {"trajectories", trajectories},
          {"total_jumps", total_jumps},
          {"samples", samples},
          {"max_correlation_deviation", max_correlation_deviation},
          {"max_entropy_deviation", max_entropy_deviation},
          {"max_mutual_information_deviation", max_mutual_information_deviation},
          {"max_occupation_deviation", max_occupation_deviation},
          {"max_trace_defect", max_trace_defect},
          {"max_orthonormality_defect", max_orthonormality_defect}};
}

OracleCheckReport run_oracle_check(const TrajectoryConfig& config,
                                   const OracleCheckOptions& options) {
  const TrajectoryConfig resolved = config.resolved();
  if (resolved.spec.L > kMaxDenseSites) {
    throw ConfigError("oracle check needs L <= " + std::to_string(kMaxDenseSites));
  }
  if (options.n_traj < 1) throw ConfigError("oracle check needs at least one trajectory");
  const SingleParticleHamiltonian h = build_hopping_matrix(resolved.spec);
  const FockSector H = dense_hamiltonian(resolved.spec);

  OracleCheckReport rep;
  TrajectoryOptions keep;
  keep.keep_samples = true;
  keep.keep_states = true;
  for (int id = 0; id < options.n_traj; ++id) {
    TrajectoryResult tr = run_trajectory(resolved, h, static_cast<std::uint64_t>(id), keep);
    if (options.inject_fault) {
      TrajectoryOptions faulty = keep;
      faulty.drop_alternate_measurements = true;
      JumpRecord record = tr.record;
      tr = replay_trajectory(resolved, h, record, faulty);
      tr.record = record;
    }
    const std::vector<DenseSample> dense = dense_trajectory_replay(tr.record, resolved, H);
    if (dense.size() != tr.samples.size()) throw Error("sample counts differ between engines");
    ++rep.trajectories;
    rep.total_jumps += static_cast<int>(tr.record.events.size());
    rep.max_trace_defect = std::max(rep.max_trace_defect, tr.max_trace_defect);
    rep.max_orthonormality_defect =
        std::max(rep.max_orthonormality_defect, tr.max_orthonormality_defect);
    for (std::size_t k = 0; k < dense.size(); ++k) {
      ++rep.samples;
      const Sample& g = tr.samples[k];
      const Eigen::MatrixXcd D = full_correlation_matrix(g.state).D;
      const double corr = (D - dense[k].correlations).cwiseAbs().maxCoeff();
      rep.max_correlation_deviation = std::max(rep.max_correlation_deviation, corr);
      const double occ =
          (D.diagonal().real() - dense[k].correlations.diagonal().real()).cwiseAbs().maxCoeff();
      rep.max_occupation_deviation = std::max(rep.max_occupation_deviation, occ);
      for (const auto& [name, value] : dense[k].values) {
        auto it = g.values.find(name);
        const double dev = it == g.values.end() ? INFINITY : std::abs(it->second - value);
        if (name.rfind("I_", 0) == 0) {
          rep.max_mutual_information_deviation = std::max(rep.max_mutual_information_deviation, dev);
        } else {
          rep.max_entropy_deviation = std::max(rep.max_entropy_deviation, dev);
        }
      }
    }
  }
  const double tol = options.tolerance;
  rep.passed = rep.max_correlation_deviation < tol && rep.max_entropy_deviation < tol &&
               rep.max_mutual_information_deviation < tol && rep.max_occupation_deviation < tol &&
               rep.max_trace_defect < 1e-9 && rep.max_orthonormality_defect < 1e-9;
  return rep;
}

}  // namespace lrmip
