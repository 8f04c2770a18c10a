#include "tcov/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tcov/crlb.hpp"
#include "tcov/matrix_io.hpp"

#ifndef TCOV_VERSION_STRING
#define TCOV_VERSION_STRING "unknown"
#endif

namespace tcov {

using nlohmann::json;

namespace {

// ---- JSON reading helpers ------------------------------------------------

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
  throw ValidationError("config key '" + key + "': " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    key_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  }
  for (const auto& [k, v] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
    if (!ok) key_error(join(prefix, k), "unknown key");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) key_error(key, "expected a number");
  return v.get<double>();
}

Index get_index(const json& v, const std::string& key) {
  if (!v.is_number_integer()) key_error(key, "expected an integer");
  return v.get<Index>();
}

std::uint64_t get_u64(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    key_error(key, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) key_error(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& key) {
  if (!v.is_array()) key_error(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Index> get_indices(const json& v, const std::string& key) {
  if (!v.is_array()) key_error(key, "expected an array of integers");
  std::vector<Index> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_index(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

StructureSpec get_structure(const json& v, const std::string& key) {
  const std::string text = get_string(v, key);
  try {
    return StructureSpec::parse(text);
  } catch (const std::exception& e) {
    key_error(key, e.what());
  }
}

RealVector to_vector(const std::vector<double>& v) {
  RealVector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

// Exactly one of `linear` and `db` must be present.
double linear_or_db(const json& obj, const std::string& prefix, const char* linear, const char* db) {
  const json* a = find(obj, linear);
  const json* b = find(obj, db);
  if (a && b) key_error(join(prefix, db), std::string("conflicts with '") + linear + "'");
  if (a) return get_number(*a, join(prefix, linear));
  if (b) return from_db(get_number(*b, join(prefix, db)));
  key_error(join(prefix, linear), "missing");
}

GroundTruthSpec parse_truth(const json& t) {
  const std::string p = "truth";
  check_keys(t, p,
             {"type", "m", "frequencies", "grid_size", "grid_bins", "powers", "structure", "seed",
              "jammers", "fractional_bandwidth", "noise_power", "noise_db", "sinc"});
  GroundTruthSpec g;
  const json* type = find(t, "type");
  if (!type) key_error("truth.type", "missing");
  const std::string kind = get_string(*type, "truth.type");
  const json* m = find(t, "m");
  if (!m) key_error("truth.m", "missing");
  g.m = get_index(*m, "truth.m");
  if (g.m < 1) key_error("truth.m", "must be at least 1");

  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (find(t, k)) key_error(join(p, k), "not used by truth type '" + kind + "'");
    }
  };

  if (kind == "frequencies") {
    g.kind = TruthKind::Frequencies;
    forbid({"structure", "seed", "jammers", "fractional_bandwidth", "noise_power", "noise_db", "sinc"});
    const json* f = find(t, "frequencies");
    const json* bins = find(t, "grid_bins");
    const json* size = find(t, "grid_size");
    if (f && (bins || size)) key_error("truth.grid_bins", "conflicts with 'frequencies'");
    if (f) {
      g.frequencies = to_vector(get_numbers(*f, "truth.frequencies"));
    } else {
      if (!bins || !size) key_error("truth.frequencies", "missing (or give grid_size and grid_bins)");
      const Index l = get_index(*size, "truth.grid_size");
      if (l < 1) key_error("truth.grid_size", "must be at least 1");
      const auto b = get_indices(*bins, "truth.grid_bins");
      g.frequencies.resize(static_cast<Index>(b.size()));
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 1 || b[i] > l) key_error("truth.grid_bins", "bins are 1-based and must lie in [1, grid_size]");
        // Bin k of an L-point DFT grid sits at 2π(k-1)/L.
        g.frequencies(static_cast<Index>(i)) =
            2.0 * std::numbers::pi * static_cast<double>(b[i] - 1) / static_cast<double>(l);
      }
    }
    for (Index i = 0; i < g.frequencies.size(); ++i) {
      const double w = g.frequencies(i);
      if (!(w >= 0.0 && w < 2.0 * std::numbers::pi)) key_error("truth.frequencies", "must lie in [0, 2π)");
    }
    const json* pw = find(t, "powers");
    if (!pw) key_error("truth.powers", "missing");
    g.powers = to_vector(get_numbers(*pw, "truth.powers"));
    if (g.powers.size() != g.frequencies.size()) key_error("truth.powers", "length differs from the frequencies");
    if (g.frequencies.size() > g.m) key_error("truth.frequencies", "more frequencies than m");
    for (Index i = 0; i < g.powers.size(); ++i) {
      if (!(g.powers(i) > 0.0)) key_error("truth.powers", "must be positive");
    }
  } else if (kind == "random_structured") {
    g.kind = TruthKind::RandomStructured;
    forbid({"frequencies", "grid_size", "grid_bins", "powers", "jammers", "fractional_bandwidth",
            "noise_power", "noise_db", "sinc"});
    const json* s = find(t, "structure");
    if (!s) key_error("truth.structure", "missing");
    g.structure = get_structure(*s, "truth.structure");
    if (g.structure.kind != StructureKind::BandedToeplitz && g.structure.kind != StructureKind::TBT) {
      key_error("truth.structure", "random_structured needs a banded or tbt structure");
    }
    try {
      g.structure.validate(g.m);
    } catch (const std::exception& e) {
      key_error("truth.structure", e.what());
    }
    if (const json* sd = find(t, "seed")) g.seed = get_u64(*sd, "truth.seed");
  } else if (kind == "jammer") {
    g.kind = TruthKind::Jammer;
    forbid({"frequencies", "grid_size", "grid_bins", "powers", "structure", "seed"});
    RadarScenario& sc = g.radar;
    sc.m = g.m;
    const json* js = find(t, "jammers");
    if (!js || !js->is_array()) key_error("truth.jammers", "expected an array of jammers");
    for (std::size_t i = 0; i < js->size(); ++i) {
      const std::string jp = "truth.jammers[" + std::to_string(i) + "]";
      const json& j = (*js)[i];
      check_keys(j, jp, {"angle_deg", "power", "power_db"});
      Jammer jam;
      const json* a = find(j, "angle_deg");
      if (!a) key_error(jp + ".angle_deg", "missing");
      jam.angle_deg = get_number(*a, jp + ".angle_deg");
      jam.power = linear_or_db(j, jp, "power", "power_db");
      sc.jammers.push_back(jam);
    }
    if (const json* bf = find(t, "fractional_bandwidth")) {
      sc.fractional_bandwidth = get_number(*bf, "truth.fractional_bandwidth");
    }
    sc.noise_power = linear_or_db(t, p, "noise_power", "noise_db");
    if (const json* s = find(t, "sinc")) {
      const std::string c = get_string(*s, "truth.sinc");
      if (c == "unnormalized") {
        sc.sinc = SincConvention::Unnormalized;
      } else if (c == "normalized") {
        sc.sinc = SincConvention::Normalized;
      } else {
        key_error("truth.sinc", "expected 'unnormalized' or 'normalized'");
      }
    }
    try {
      sc.validate();
    } catch (const std::exception& e) {
      key_error("truth.jammers", e.what());
    }
  } else {
    key_error("truth.type", "unknown truth type '" + kind + "'");
  }
  return g;
}

EstimatorName parse_estimator_name(const std::string& s, const std::string& key) {
  if (s == "atom1") return EstimatorName::Atom1;
  if (s == "atom2") return EstimatorName::Atom2;
  if (s == "atom2_pocs") return EstimatorName::Atom2Pocs;
  if (s == "scm") return EstimatorName::Scm;
  key_error(key, "unknown estimator '" + s + "'");
}

EstimatorSpec parse_estimator(const json& e, std::size_t i) {
  const std::string p = "estimators[" + std::to_string(i) + "]";
  EstimatorSpec out;
  if (e.is_string()) {
    out.name = parse_estimator_name(e.get<std::string>(), p);
  } else {
    check_keys(e, p, {"name", "structure", "label"});
    const json* n = find(e, "name");
    if (!n) key_error(p + ".name", "missing");
    out.name = parse_estimator_name(get_string(*n, p + ".name"), p + ".name");
    if (const json* s = find(e, "structure")) out.structure = get_structure(*s, p + ".structure");
    if (const json* l = find(e, "label")) out.label = get_string(*l, p + ".label");
  }
  if (out.label.empty()) out.label = to_string(out.name);
  return out;
}

EstimatorConfig parse_solver(const json& s) {
  check_keys(s, "solver",
             {"rho", "outer_tol", "outer_max_iter", "inner_tol", "inner_max_iter", "normalize_scale", "working_scale",
              "multiplier_seed"});
  EstimatorConfig c;
  if (const json* v = find(s, "rho")) c.rho = get_number(*v, "solver.rho");
  if (const json* v = find(s, "outer_tol")) c.outer_tol = get_number(*v, "solver.outer_tol");
  if (const json* v = find(s, "outer_max_iter")) c.outer_max_iter = get_index(*v, "solver.outer_max_iter");
  if (const json* v = find(s, "inner_tol")) c.inner_tol = get_number(*v, "solver.inner_tol");
  if (const json* v = find(s, "inner_max_iter")) c.inner_max_iter = get_index(*v, "solver.inner_max_iter");
  if (const json* v = find(s, "normalize_scale")) {
    if (!v->is_boolean()) key_error("solver.normalize_scale", "expected a boolean");
    c.normalize_scale = v->get<bool>();
  }
  if (const json* v = find(s, "working_scale")) c.working_scale = get_number(*v, "solver.working_scale");
  if (const json* v = find(s, "multiplier_seed")) c.multiplier_seed = get_u64(*v, "solver.multiplier_seed");
  try {
    c.validate();
  } catch (const std::exception& e) {
    key_error("solver", e.what());
  }
  return c;
}

std::vector<double> parse_angles(const json& a) {
  if (a.is_array()) return get_numbers(a, "look_angles_deg");
  check_keys(a, "look_angles_deg", {"start", "stop", "step"});
  const json* start = find(a, "start");
  const json* stop = find(a, "stop");
  const json* step = find(a, "step");
  if (!start || !stop || !step) key_error("look_angles_deg", "range needs start, stop and step");
  const double s0 = get_number(*start, "look_angles_deg.start");
  const double s1 = get_number(*stop, "look_angles_deg.stop");
  const double ds = get_number(*step, "look_angles_deg.step");
  if (!(ds > 0.0) || s1 < s0) key_error("look_angles_deg", "need step > 0 and stop >= start");
  std::vector<double> out;
  const auto count = static_cast<Index>(std::floor((s1 - s0) / ds + 1e-9));
  for (Index k = 0; k <= count; ++k) out.push_back(s0 + ds * static_cast<double>(k));
  return out;
}

// ---- JSON writing --------------------------------------------------------

json vector_json(const RealVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json truth_json(const GroundTruthSpec& g) {
  json t;
  t["m"] = g.m;
  switch (g.kind) {
    case TruthKind::Frequencies:
      t["type"] = "frequencies";
      t["frequencies"] = vector_json(g.frequencies);
      t["powers"] = vector_json(g.powers);
      break;
    case TruthKind::RandomStructured:
      t["type"] = "random_structured";
      t["structure"] = g.structure.to_string();
      t["seed"] = g.seed;
      break;
    case TruthKind::Jammer: {
      t["type"] = "jammer";
      json js = json::array();
      for (const auto& j : g.radar.jammers) js.push_back({{"angle_deg", j.angle_deg}, {"power", j.power}});
      t["jammers"] = js;
      t["fractional_bandwidth"] = g.radar.fractional_bandwidth;
      t["noise_power"] = g.radar.noise_power;
      t["sinc"] = g.radar.sinc == SincConvention::Normalized ? "normalized" : "unnormalized";
      break;
    }
  }
  return t;
}

// ---- running -------------------------------------------------------------

// Runs body(k) for k in [0, count) on up to `threads` workers. The first
// exception thrown by any task is rethrown after all workers finish.
void parallel_for(Index count, Index threads, const std::function<void(Index)>& body) {
  const Index workers = std::max<Index>(1, std::min(threads, count));
  if (workers == 1) {
    for (Index k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (Index k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResultTable make_table(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  ResultTable t;
  t.set_meta("kind", to_string(cfg.kind));
  t.set_meta("seed", std::to_string(cfg.seed));
  t.set_meta("version", version_string());
  // The output path is left out so the same run written to two files matches.
  ExperimentConfig echo = cfg;
  echo.output.clear();
  t.set_meta("config", config_to_json(echo));
  t.set_meta(kTimestampKey, iso_timestamp());
  t.columns = std::move(columns);
  return t;
}

ResultTable run_convergence(const ExperimentConfig& cfg) {
  ResultTable t = make_table(cfg, {"estimator", "iter", "nll", "logdet_x"});
  const HermitianMatrix truth = make_truth(*cfg.truth);
  const DataSet data = sample_dataset(truth, cfg.n_grid.front(), cfg.seed);
  std::vector<Estimate> results(cfg.estimators.size(), Estimate{HermitianMatrix::zero(1), {}});
  parallel_for(static_cast<Index>(cfg.estimators.size()), cfg.threads,
               [&](Index e) { results[e] = run_estimator(cfg.estimators[e], data, cfg.solver); });
  for (std::size_t e = 0; e < results.size(); ++e) {
    const auto& est = cfg.estimators[e];
    const MMTrace& tr = results[e].trace;
    for (const auto& rec : tr.records) {
      t.add_row({est.label, static_cast<double>(rec.iter), rec.nll, rec.logdet_x});
    }
    t.set_meta(est.label + ".stop", to_string(tr.stop));
    t.set_meta(est.label + ".inner_warning", tr.inner_warning ? "true" : "false");
  }
  return t;
}

CrlbReport crlb_at(const StructureSpec& spec, const HermitianMatrix& truth, double n) {
  ThetaParam p;
  p.structure = spec;
  p.dim = truth.dim();
  p.theta = theta_from_covariance(spec, truth);
  p.n = n;
  return crlb_report(p, truth);
}

// estimates[trial][n index][estimator]
using EstimateCube = std::vector<std::vector<std::vector<HermitianMatrix>>>;

EstimateCube monte_carlo(const ExperimentConfig& cfg, const HermitianMatrix& truth, Index* guard_stops) {
  const Index nmax = cfg.n_grid.back();
  EstimateCube cube(static_cast<std::size_t>(cfg.trials));
  std::vector<Index> stops(static_cast<std::size_t>(cfg.trials), 0);
  parallel_for(cfg.trials, cfg.threads, [&](Index k) {
    // One draw per trial; smaller n use its leading snapshots.
    const Matrix y = draw_snapshots(truth, nmax, cfg.seed + static_cast<std::uint64_t>(k));
    auto& slot = cube[static_cast<std::size_t>(k)];
    for (const Index n : cfg.n_grid) {
      const DataSet data = build_dataset(y.leftCols(n));
      std::vector<HermitianMatrix> row;
      for (const auto& est : cfg.estimators) {
        Estimate r = run_estimator(est, data, cfg.solver);
        if (r.trace.stop == StopReason::NoDescent) ++stops[static_cast<std::size_t>(k)];
        row.push_back(std::move(r.r));
      }
      slot.push_back(std::move(row));
    }
  });
  if (guard_stops) {
    *guard_stops = 0;
    for (const Index s : stops) *guard_stops += s;
  }
  return cube;
}

ResultTable run_mse(const ExperimentConfig& cfg) {
  std::vector<std::string> cols{"n"};
  for (const auto& e : cfg.estimators) cols.push_back(e.label);
  cols.emplace_back("crlb_sum");
  cols.emplace_back("crlb_mean");
  ResultTable t = make_table(cfg, cols);
  const HermitianMatrix truth = make_truth(*cfg.truth);
  Index guard = 0;
  const EstimateCube cube = monte_carlo(cfg, truth, &guard);
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const Index n = cfg.n_grid[ni];
    std::vector<Cell> row{static_cast<double>(n)};
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
      std::vector<HermitianMatrix> list;
      for (const auto& trial : cube) list.push_back(trial[ni][e]);
      row.emplace_back(mse_first_row(truth, list));
    }
    const CrlbReport rep = crlb_at(cfg.crlb_structure, truth, static_cast<double>(n));
    row.emplace_back(rep.sum_bound);
    row.emplace_back(rep.mean_bound);
    t.add_row(std::move(row));
  }
  t.set_meta("no_descent_stops", std::to_string(guard));
  return t;
}

ResultTable run_sinr(const ExperimentConfig& cfg) {
  std::vector<std::string> cols{"n", "theta_deg"};
  for (const auto& e : cfg.estimators) cols.push_back(e.label);
  cols.emplace_back("bound");
  ResultTable t = make_table(cfg, cols);
  const HermitianMatrix truth = make_truth(*cfg.truth);
  const EstimateCube cube = monte_carlo(cfg, truth, nullptr);
  Index excluded = 0;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    std::vector<std::vector<HermitianMatrix>> lists(cfg.estimators.size());
    for (const auto& trial : cube) {
      for (std::size_t e = 0; e < lists.size(); ++e) lists[e].push_back(trial[ni][e]);
    }
    for (const double theta : cfg.look_angles) {
      std::vector<Cell> row{static_cast<double>(cfg.n_grid[ni]), theta};
      double bound = 0.0;
      for (const auto& list : lists) {
        const SinrResult s = sinr_avg_and_bound(truth, list, theta);
        excluded += s.excluded;
        row.emplace_back(s.avg_sinr);
        bound = s.bound;
      }
      if (lists.empty()) bound = sinr_avg_and_bound(truth, {truth}, theta).bound;
      row.emplace_back(bound);
      t.add_row(std::move(row));
    }
  }
  t.set_meta("excluded_estimates", std::to_string(excluded));
  return t;
}

ResultTable run_crlb_table(const ExperimentConfig& cfg) {
  ResultTable t = make_table(cfg, {"coeff_index", "bound"});
  const HermitianMatrix truth = make_truth(*cfg.truth);
  const CrlbReport rep = crlb_at(cfg.crlb_structure, truth, static_cast<double>(cfg.n_grid.front()));
  for (Index i = 0; i < rep.bounds.size(); ++i) t.add_row({static_cast<double>(i + 1), rep.bounds(i)});
  t.add_row({std::string("sum_bound"), rep.sum_bound});
  t.add_row({std::string("mean_bound"), rep.mean_bound});
  return t;
}

// Full-grid Caratheodory truth: all 2m-1 DFT bins, powers uniform in [1, 10].
HermitianMatrix runtime_truth(Index m, std::uint64_t seed) {
  const Index l = 2 * m - 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(1.0, 10.0);
  RealVector w(l);
  RealVector p(l);
  for (Index k = 0; k < l; ++k) {
    w(k) = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(l);
    p(k) = unif(rng);
  }
  // More frequencies than m: build from the first row directly.
  Vector row = Vector::Zero(m);
  for (Index k = 0; k < l; ++k) {
    for (Index g = 0; g < m; ++g) row(g) += p(k) * std::polar(1.0, -w(k) * static_cast<double>(g));
  }
  return toeplitz_from_first_row(row);
}

ResultTable run_runtime(const ExperimentConfig& cfg) {
  ResultTable t = make_table(cfg, {"m", "estimator", "mean_seconds", "mean_outer_iters"});
  const Index n = cfg.n_grid.front();
  for (const Index m : cfg.m_grid) {
    const HermitianMatrix truth = runtime_truth(m, cfg.seed + static_cast<std::uint64_t>(m));
    for (const auto& est : cfg.estimators) {
      // Sequential on purpose: timings from concurrent trials would interfere.
      double seconds = 0.0;
      double iters = 0.0;
      for (Index k = 0; k < cfg.trials; ++k) {
        const DataSet data = sample_dataset(truth, n, cfg.seed + static_cast<std::uint64_t>(k));
        const auto t0 = std::chrono::steady_clock::now();
        const Estimate r = run_estimator(est, data, cfg.solver);
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        iters += static_cast<double>(r.trace.records.empty() ? 0 : r.trace.records.size() - 1);
      }
      const double k = static_cast<double>(cfg.trials);
      t.add_row({static_cast<double>(m), est.label, seconds / k, iters / k});
    }
  }
  return t;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Convergence:
      return "convergence";
    case ExperimentKind::MseVsN:
      return "mse_vs_n";
    case ExperimentKind::Sinr:
      return "sinr";
    case ExperimentKind::CrlbTable:
      return "crlb_table";
    case ExperimentKind::Runtime:
      return "runtime";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (const auto k : {ExperimentKind::Convergence, ExperimentKind::MseVsN, ExperimentKind::Sinr,
                       ExperimentKind::CrlbTable, ExperimentKind::Runtime}) {
    if (text == to_string(k)) return k;
  }
  throw ValidationError("unknown experiment kind '" + std::string(text) + "'");
}

std::string to_string(EstimatorName name) {
  switch (name) {
    case EstimatorName::Atom1:
      return "atom1";
    case EstimatorName::Atom2:
      return "atom2";
    case EstimatorName::Atom2Pocs:
      return "atom2_pocs";
    case EstimatorName::Scm:
      return "scm";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (trials < 1) key_error("trials", "must be at least 1");
  if (threads < 1) key_error("threads", "must be at least 1");
  if (n_grid.empty()) key_error("n_grid", "must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) key_error("n_grid", "entries must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) key_error("n_grid", "must be strictly increasing");
  }
  const bool needs_estimators = kind != ExperimentKind::CrlbTable;
  if (needs_estimators && estimators.empty()) key_error("estimators", "must not be empty");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    const auto& e = estimators[i];
    const std::string p = "estimators[" + std::to_string(i) + "]";
    if (!labels.insert(e.label).second) key_error(p + ".label", "duplicate label '" + e.label + "'");
    if (e.label.find_first_of(",\n\r") != std::string::npos) key_error(p + ".label", "must not contain commas");
    if (e.name == EstimatorName::Atom1 && e.structure.kind != StructureKind::Toeplitz) {
      key_error(p + ".structure", "atom1 supports only the toeplitz structure, got '" + e.structure.to_string() + "'");
    }
    if (e.name == EstimatorName::Scm && e.structure.kind != StructureKind::Toeplitz) {
      key_error(p + ".structure", "scm takes no structure");
    }
    if (e.name == EstimatorName::Atom2 && e.structure.kind == StructureKind::LowRankPlusScalar) {
      key_error(p + ".structure", "lowrank needs atom2_pocs (the set is not convex)");
    }
    if (kind == ExperimentKind::Convergence && e.name == EstimatorName::Scm) {
      key_error(p + ".name", "scm has no iterations to trace");
    }
    if (kind != ExperimentKind::Runtime && truth) {
      try {
        e.structure.validate(truth->m);
      } catch (const std::exception& ex) {
        key_error(p + ".structure", ex.what());
      }
    }
  }
  if (kind == ExperimentKind::Runtime) {
    if (m_grid.empty()) key_error("m_grid", "must not be empty for runtime");
    for (const Index m : m_grid) {
      if (m < 1) key_error("m_grid", "entries must be positive");
    }
    if (truth) key_error("truth", "runtime draws its own truths; remove the key");
  } else {
    if (!truth) key_error("truth", "missing");
    if (!m_grid.empty()) key_error("m_grid", "only used by runtime");
  }
  if (kind == ExperimentKind::Convergence) {
    if (n_grid.size() != 1) key_error("n_grid", "convergence takes a single n");
    if (trials != 1) key_error("trials", "convergence runs a single trial");
  }
  if (kind == ExperimentKind::CrlbTable || kind == ExperimentKind::Runtime) {
    if (n_grid.size() != 1) key_error("n_grid", to_string(kind) + " takes a single n");
  }
  if (kind == ExperimentKind::Sinr) {
    if (look_angles.empty()) key_error("look_angles_deg", "must not be empty for sinr");
    for (const double a : look_angles) {
      if (!(std::abs(a) < 90.0)) key_error("look_angles_deg", "angles must satisfy |θ| < 90");
    }
  } else if (!look_angles.empty()) {
    key_error("look_angles_deg", "only used by sinr");
  }
  if (kind == ExperimentKind::MseVsN || kind == ExperimentKind::CrlbTable) {
    const auto k = crlb_structure.kind;
    if (k != StructureKind::Toeplitz && k != StructureKind::BandedToeplitz && k != StructureKind::TBT) {
      key_error("crlb_structure", "must be toeplitz, banded or tbt");
    }
    try {
      crlb_structure.validate(truth->m);
    } catch (const std::exception& ex) {
      key_error("crlb_structure", ex.what());
    }
  }
  try {
    solver.validate();
  } catch (const std::exception& ex) {
    key_error("solver", ex.what());
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"kind", "truth", "estimators", "n_grid", "trials", "seed", "solver", "crlb_structure",
              "look_angles_deg", "m_grid", "threads", "output"});
  ExperimentConfig cfg;
  const json* kind = find(root, "kind");
  if (!kind) key_error("kind", "missing");
  try {
    cfg.kind = parse_experiment_kind(get_string(*kind, "kind"));
  } catch (const ValidationError& e) {
    key_error("kind", e.what());
  }
  if (const json* t = find(root, "truth")) cfg.truth = parse_truth(*t);
  if (const json* es = find(root, "estimators")) {
    if (!es->is_array()) key_error("estimators", "expected an array");
    for (std::size_t i = 0; i < es->size(); ++i) cfg.estimators.push_back(parse_estimator((*es)[i], i));
  }
  if (const json* v = find(root, "n_grid")) {
    if (v->is_number_integer()) {
      cfg.n_grid = {v->get<Index>()};
    } else {
      cfg.n_grid = get_indices(*v, "n_grid");
    }
  }
  if (const json* v = find(root, "trials")) cfg.trials = get_index(*v, "trials");
  if (const json* v = find(root, "seed")) cfg.seed = get_u64(*v, "seed");
  if (const json* v = find(root, "solver")) cfg.solver = parse_solver(*v);
  if (const json* v = find(root, "crlb_structure")) cfg.crlb_structure = get_structure(*v, "crlb_structure");
  if (const json* v = find(root, "look_angles_deg")) cfg.look_angles = parse_angles(*v);
  if (const json* v = find(root, "m_grid")) cfg.m_grid = get_indices(*v, "m_grid");
  if (const json* v = find(root, "threads")) cfg.threads = get_index(*v, "threads");
  if (const json* v = find(root, "output")) cfg.output = get_string(*v, "output");
  // ADMM penalty defaults to m; runtime varies m so it keeps the per-run default.
  if (!cfg.solver.rho && cfg.truth) cfg.solver.rho = static_cast<double>(cfg.truth->m);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["kind"] = to_string(cfg.kind);
  if (cfg.truth) root["truth"] = truth_json(*cfg.truth);
  json es = json::array();
  for (const auto& e : cfg.estimators) {
    es.push_back({{"name", to_string(e.name)}, {"structure", e.structure.to_string()}, {"label", e.label}});
  }
  root["estimators"] = es;
  root["n_grid"] = cfg.n_grid;
  root["trials"] = cfg.trials;
  root["seed"] = cfg.seed;
  json s;
  if (cfg.solver.rho) s["rho"] = *cfg.solver.rho;
  s["outer_tol"] = cfg.solver.outer_tol;
  s["outer_max_iter"] = cfg.solver.outer_max_iter;
  s["inner_tol"] = cfg.solver.inner_tol;
  s["inner_max_iter"] = cfg.solver.inner_max_iter;
  s["normalize_scale"] = cfg.solver.normalize_scale;
  s["working_scale"] = cfg.solver.working_scale;
  if (cfg.solver.multiplier_seed) s["multiplier_seed"] = *cfg.solver.multiplier_seed;
  root["solver"] = s;
  if (cfg.kind == ExperimentKind::MseVsN || cfg.kind == ExperimentKind::CrlbTable) {
    root["crlb_structure"] = cfg.crlb_structure.to_string();
  }
  if (!cfg.look_angles.empty()) root["look_angles_deg"] = cfg.look_angles;
  if (!cfg.m_grid.empty()) root["m_grid"] = cfg.m_grid;
  root["threads"] = cfg.threads;
  if (!cfg.output.empty()) root["output"] = cfg.output;
  return root.dump();
}

EstimatorConfig solver_for(const EstimatorSpec& est, const EstimatorConfig& base) {
  EstimatorConfig c = base;
  switch (est.name) {
    case EstimatorName::Atom1:
      c.inner_mode = InnerMode::ADMM;
      break;
    case EstimatorName::Atom2:
      c.inner_mode = InnerMode::Dykstra;
      break;
    case EstimatorName::Atom2Pocs:
      c.inner_mode = InnerMode::POCS;
      break;
    case EstimatorName::Scm:
      break;
  }
  return c;
}

Estimate run_estimator(const EstimatorSpec& est, const DataSet& data, const EstimatorConfig& base) {
  if (est.name == EstimatorName::Scm) return Estimate{scm_estimate(data), {}};
  return estimate(data, est.structure, solver_for(est, base));
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case ExperimentKind::Convergence:
      return run_convergence(cfg);
    case ExperimentKind::MseVsN:
      return run_mse(cfg);
    case ExperimentKind::Sinr:
      return run_sinr(cfg);
    case ExperimentKind::CrlbTable:
      return run_crlb_table(cfg);
    case ExperimentKind::Runtime:
      return run_runtime(cfg);
  }
  throw ValidationError("unknown experiment kind");
}

const char* version_string() { return TCOV_VERSION_STRING; }

}  // namespace tcov
