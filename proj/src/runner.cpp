#include "fotd/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <set>
#include <thread>

#include <json.hpp>

#include "fotd/engine.hpp"
#include "fotd/models/kuramoto_sivashinsky.hpp"
#include "fotd/models/reactive_transport.hpp"
#include "fotd/models/rossler.hpp"
#include "fotd/oracle.hpp"
#include "fotd/tensor.hpp"

namespace fotd {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kVersion = "0.1.0";

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

/// Problem sizes known without building the model.
struct Dimensions {
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  double dt = 0;
  double horizon = 0;
  Integrator integrator = Integrator::rk4;
};

KsConfig ks_config(const RunConfig& c) {
  KsConfig k = KsConfig::preset(c.preset);
  if (c.dt) k.dt = *c.dt;
  if (c.horizon) k.horizon = *c.horizon;
  if (c.ks_n) k.n = *c.ks_n;
  k.seed = c.seed;
  return k;
}

ReactiveConfig reactive_config(const RunConfig& c) {
  ReactiveConfig r = ReactiveConfig::preset(c.preset);
  if (c.dt) r.dt = *c.dt;
  if (c.horizon) r.horizon = *c.horizon;
  if (c.grid_n1) r.grid.n1 = *c.grid_n1;
  if (c.grid_n2) r.grid.n2 = *c.grid_n2;
  r.velocity_file = c.velocity_file;
  return r;
}

Dimensions dimensions(const RunConfig& c) {
  Dimensions d;
  switch (c.kind) {
    case CaseKind::rossler:
      if (c.preset != "desk") throw ConfigError("unknown rossler preset '" + c.preset + "' (expected desk)");
      d = {3, 3, c.dt.value_or(1e-3), c.horizon.value_or(10.0), Integrator::rk4};
      break;
    case CaseKind::ks: {
      const KsConfig k = ks_config(c);
      k.validate();
      d = {k.n, k.param_count(), k.dt, k.horizon, Integrator::etdrk4};
      break;
    }
    case CaseKind::reactive: {
      const ReactiveConfig r = reactive_config(c);
      r.validate();
      d = {r.grid.size(), ReactionNetwork::kSpecies * ReactionNetwork::kParameters, r.dt, r.horizon, Integrator::rk4};
      break;
    }
  }
  if (c.integrator) d.integrator = *c.integrator;
  return d;
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::configuration || code == ErrorCode::memory_guard ? 2 : 3;
}

json config_json(const RunConfig& c, const Dimensions& dims) {
  json j;
  j["case"] = to_string(c.kind);
  j["preset"] = c.preset;
  j["ranks"] = c.ranks;
  j["dt"] = dims.dt;
  j["horizon"] = dims.horizon;
  j["integrator"] = to_string(dims.integrator);
  j["stride"] = c.stride;
  j["extra_singulars"] = c.extra_singulars;
  j["regularization"] = c.regularization;
  j["init_resolution"] = c.init_resolution;
  j["toggles"] = {{"oracle", c.oracle}, {"otd_baseline", c.otd_baseline}, {"fd_check", c.fd_check}};
  j["coeff_times"] = c.coeff_times;
  j["seeds"] = {{"initial_condition", c.seed}, {"padding", c.padding_seed}};
  j["state_dim"] = dims.n;
  j["quasimatrix_columns"] = dims.d;
  return j;
}

/// The model plus the mapping from full sensitivities to the reduced layout.
struct CaseSetup {
  std::unique_ptr<Model> model;
  const SpeciesTransportModel* species = nullptr;
  Vector weights;
  std::function<Matrix(const Matrix&)> layout;
  json details;
  std::vector<std::string> warnings;
  std::vector<FdProbe> probes;
  double fd_time = 0.0;
  double fd_step = 1e-5;
};

CaseSetup build_case(const RunConfig& c, const Dimensions& dims) {
  CaseSetup s;
  s.layout = [](const Matrix& m) { return m; };
  switch (c.kind) {
    case CaseKind::rossler: {
      const RosslerParams p;
      auto m = std::make_unique<RosslerModel>(p);
      s.details = {{"alpha", {p.a1, p.a2, p.a3}}, {"initial_state", {1.0, 1.0, 1.0}}};
      for (int j = 0; j < 3; ++j) s.probes.push_back({j, 0, -1, "alpha_" + std::to_string(j + 1)});
      s.fd_time = std::min(5.0, dims.horizon);
      s.model = std::move(m);
      break;
    }
    case CaseKind::ks: {
      const KsConfig k = ks_config(c);
      auto m = std::make_unique<KuramotoSivashinskyModel>(k);
      s.details = {{"nu", k.nu},           {"length", k.length},   {"n", k.n},
                   {"forcing_window", k.forcing_window},         {"warmup", k.warmup},
                   {"parameters", m->param_dim()}};
      const Eigen::Index d = m->param_dim();
      for (Eigen::Index j : {Eigen::Index(0), d / 4, d / 2}) {
        s.probes.push_back({j, 0, -1, "alpha_" + std::to_string(j + 1)});
      }
      s.fd_time = std::min(k.forcing_window, dims.horizon);
      s.model = std::move(m);
      break;
    }
    case CaseKind::reactive: {
      const ReactiveConfig r = reactive_config(c);
      auto m = std::make_unique<ReactiveTransportModel>(r);
      s.warnings = m->warnings();
      s.details = {{"grid", {r.grid.n1, r.grid.n2}},
                   {"extent", {r.grid.x1_min, r.grid.x1_max, r.grid.x2_min, r.grid.x2_max}},
                   {"channel_height", r.channel_height},
                   {"inlet_steepness", r.inlet_steepness},
                   {"velocity", r.velocity_file.empty()
                                    ? json{{"kind", "analytic"},
                                           {"mean", r.velocity.mean},
                                           {"amplitude", r.velocity.amplitude},
                                           {"wavelength", r.velocity.wavelength}}
                                    : json{{"kind", "file"}, {"path", r.velocity_file}}},
                   {"diffusion", std::vector<double>(r.diffusion.data(), r.diffusion.data() + r.diffusion.size())},
                   {"source_scale", r.source_scale},
                   {"scheme", r.scheme == AdvectionScheme::central ? "central" : "upwind"},
                   {"max_grid_peclet", m->max_grid_peclet()}};
      const Eigen::Index n = m->grid_size();
      const FlattenMap map = m->flatten_map();
      s.layout = [map, n](const Matrix& sens) { return flatten_sensitivities(sens, map, n); };
      s.weights = m->grid_weights();
      // (species, parameter) pairs, 1-based, with a direct source dependence.
      for (auto [i, j] : {std::pair{1, 3}, {15, 16}, {17, 31}, {13, 28}, {21, 34}}) {
        s.probes.push_back({j - 1, (i - 1) * n, n, "species_" + std::to_string(i) + "_alpha_" + std::to_string(j)});
      }
      s.fd_time = std::min(0.1, dims.horizon);
      // Rate constants span 1e-9..1e5; a larger relative step keeps the
      // differences of the smallest ones above roundoff.
      s.fd_step = 1e-3;
      s.species = m.get();
      s.model = std::move(m);
      break;
    }
  }
  if (s.weights.size() == 0) s.weights = s.model->weights();
  return s;
}

struct Member {
  int rank = 0;
  fs::path dir;
  std::ofstream errors;
  std::ofstream singulars;
  std::optional<FotdState> fotd;
  std::optional<FotdState> otd;
  std::function<FotdState(const FotdState&)> step_fotd;
  std::function<FotdState(const FotdState&)> step_otd;
  double init_time = std::numeric_limits<double>::quiet_NaN();
  double wall = 0.0;
  Eigen::Index oracle_columns = 0;
};

void write_coefficients(const Member& m, const CaseSetup& setup, double t) {
  const RankedDecomposition ranked = rank_decomposition(*m.fotd);
  if (setup.species != nullptr) {
    const FlattenMap map = setup.species->flatten_map();
    for (Eigen::Index k = 0; k < ranked.coeffs_ranked.cols(); ++k) {
      std::ofstream out(m.dir / ("coeffs_t" + time_tag(t) + "_mode" + std::to_string(k + 1) + ".csv"));
      const Matrix heat = coeff_heatmap(ranked, k, map);
      out << "species";
      for (Eigen::Index j = 0; j < map.n_r; ++j) out << ",alpha_" << j + 1;
      out << '\n';
      for (Eigen::Index i = 0; i < map.n_s; ++i) {
        out << i + 1;
        for (Eigen::Index j = 0; j < map.n_r; ++j) out << ',' << num(heat(i, j));
        out << '\n';
      }
    }
    return;
  }
  std::ofstream out(m.dir / ("coeffs_t" + time_tag(t) + ".csv"));
  out << "param";
  for (Eigen::Index k = 0; k < ranked.coeffs_ranked.cols(); ++k) out << ",yhat_" << k + 1;
  out << '\n';
  for (Eigen::Index j = 0; j < ranked.coeffs_ranked.rows(); ++j) {
    out << j + 1;
    for (Eigen::Index k = 0; k < ranked.coeffs_ranked.cols(); ++k) out << ',' << num(ranked.coeffs_ranked(j, k));
    out << '\n';
  }
}

void write_error_record(const fs::path& dir, const std::string& code, const std::string& message,
                        const std::vector<std::string>& violations, int exit_code) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "error.json");
  json j{{"error", code}, {"message", message}, {"exit_code", exit_code}};
  if (!violations.empty()) j["violations"] = violations;
  out << j.dump(2) << '\n';
}

}  // namespace

std::string to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::rossler: return "rossler";
    case CaseKind::ks: return "ks";
    case CaseKind::reactive: return "reactive";
  }
  return "unknown";
}

CaseKind parse_case(const std::string& name) {
  if (name == "rossler") return CaseKind::rossler;
  if (name == "ks") return CaseKind::ks;
  if (name == "reactive") return CaseKind::reactive;
  throw ConfigError("unknown case '" + name + "' (expected rossler, ks or reactive)");
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> v;
  Dimensions dims;
  try {
    dims = dimensions(c);
  } catch (const Error& e) {
    v.push_back(e.what());
    return v;
  }
  if (c.ranks.empty()) v.push_back("at least one rank is required");
  std::set<int> seen;
  for (int r : c.ranks) {
    if (r < 1) v.push_back("rank " + std::to_string(r) + " must be at least 1");
    if (r > dims.d) v.push_back("rank exceeds parameter count (" + std::to_string(r) + " > " + std::to_string(dims.d) + ")");
    if (r > dims.n) v.push_back("rank exceeds state dimension (" + std::to_string(r) + " > " + std::to_string(dims.n) + ")");
    if (!seen.insert(r).second) v.push_back("rank " + std::to_string(r) + " listed twice");
  }
  if (!(dims.dt > 0.0)) v.push_back("time step must be positive");
  if (!(dims.horizon > 0.0)) v.push_back("horizon must be positive");
  if (c.stride < 1) v.push_back("snapshot stride must be at least 1");
  if (dims.dt > 0.0 && dims.horizon > 0.0 && c.stride >= 1) {
    const double steps = dims.horizon / dims.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) {
      v.push_back("horizon is not a whole number of time steps");
    } else if (std::llround(steps) % c.stride != 0) {
      v.push_back("horizon steps must be a multiple of the snapshot stride");
    }
    for (double t : c.coeff_times) {
      const double k = t / dims.dt;
      if (t < 0.0 || t > dims.horizon + 0.5 * dims.dt || std::abs(k - std::round(k)) > 1e-6) {
        v.push_back("coefficient time " + std::to_string(t) + " is not a step time within the horizon");
      }
    }
  }
  if (dims.integrator == Integrator::etdrk4 && c.kind != CaseKind::ks) {
    v.push_back("etdrk4 requires a spectral model (ks)");
  }
  if (c.otd_baseline && c.kind == CaseKind::reactive) {
    v.push_back("the OTD baseline is not defined for the flattened species operator");
  }
  if (c.extra_singulars < 0) v.push_back("extra singular count must be non-negative");
  if (!(c.regularization > 0.0 && c.regularization < 1.0)) v.push_back("regularization must lie in (0, 1)");
  if (!(c.init_resolution >= 0.0 && c.init_resolution < 1.0)) v.push_back("init resolution must lie in [0, 1)");
  if (c.kind != CaseKind::reactive && !c.velocity_file.empty()) v.push_back("velocity file applies to reactive only");
  if (!c.velocity_file.empty() && !fs::exists(c.velocity_file)) {
    v.push_back("velocity file '" + c.velocity_file + "' does not exist");
  }
  const double full_entries = static_cast<double>(dims.n) * static_cast<double>(dims.d);
  if (full_entries > kDefaultMemoryCap) v.push_back("full sensitivity ensemble exceeds the memory cap");
  return v;
}

std::string resolve_output(const RunConfig& config) {
  fs::path out(config.output);
  const char* root = std::getenv("FOTD_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0' && out.is_relative()) out = fs::path(root) / out;
  return out.string();
}

RunResult run(const RunConfig& config) {
  const fs::path out_dir = resolve_output(config);
  RunResult result;
  result.output_dir = out_dir.string();

  const std::vector<std::string> violations = validate(config);
  if (!violations.empty()) {
    result.exit_code = 2;
    result.message = "invalid configuration: " + violations.front();
    write_error_record(out_dir, "configuration", result.message, violations, 2);
    return result;
  }

  const auto started = Clock::now();
  json manifest;
  try {
    const Dimensions dims = dimensions(config);
    CaseSetup setup = build_case(config, dims);
    const Model& model = *setup.model;
    check_memory(model, kDefaultMemoryCap);

    const long steps = std::lround(dims.horizon / dims.dt);
    const double dt = dims.dt;
    fs::create_directories(out_dir);

    FotdOptions options;
    options.integrator = dims.integrator;
    options.regularization = config.regularization;
    options.padding_seed = config.padding_seed;
    options.init_resolution = config.init_resolution;
    FotdOptions otd_options = options;
    otd_options.forced_modes = false;

    std::vector<std::unique_ptr<Member>> members;
    for (int r : config.ranks) {
      auto m = std::make_unique<Member>();
      m->rank = r;
      m->dir = out_dir / ("r" + std::to_string(r));
      fs::create_directories(m->dir);
      if (setup.species != nullptr) {
        auto stepper = std::make_shared<TensorFotdStepper>(*setup.species, dt, options);
        m->step_fotd = [stepper](const FotdState& s) { return stepper->step(s); };
      } else {
        auto stepper = std::make_shared<FotdStepper>(model, dt, r, options);
        m->step_fotd = [stepper](const FotdState& s) { return stepper->step(s); };
        if (config.otd_baseline) {
          auto otd = std::make_shared<FotdStepper>(model, dt, r, otd_options);
          m->step_otd = [otd](const FotdState& s) { return otd->step(s); };
        }
      }
      m->oracle_columns = std::min<Eigen::Index>(r + config.extra_singulars, std::min(dims.n, dims.d));

      if (config.oracle) {
        m->errors.open(m->dir / "errors.csv");
        m->errors << "t,e,e_r,e_u,pct_e,pct_er,pct_eu,energy_pct";
        if (config.otd_baseline) m->errors << ",otd_e,otd_pct_e";
        m->errors << ",pct_defined,fotd_active\n";
      }
      m->singulars.open(m->dir / "singulars.csv");
      m->singulars << 't';
      for (int k = 1; k <= r; ++k) m->singulars << ",fotd_sigma_" << k;
      if (config.oracle) {
        for (Eigen::Index k = 1; k <= m->oracle_columns; ++k) m->singulars << ",oracle_sigma_" << k;
      }
      m->singulars << '\n';
      members.push_back(std::move(m));
    }
    const int max_rank = *std::max_element(config.ranks.begin(), config.ranks.end());

    std::vector<double> coeff_times = config.coeff_times;
    if (coeff_times.empty()) coeff_times.push_back(static_cast<double>(steps) * dt);

    const auto on_time = [dt](double t, double target) { return std::abs(t - target) < 0.5 * dt; };

    // Snapshot rows for every member at time t; `e` is current only when the oracle is on.
    auto snapshot = [&](double t, const EnsembleState& e) {
      Matrix sens;
      std::optional<TruncatedSvd> svd;
      if (config.oracle) {
        sens = setup.layout(e.sens);
        svd = truncated_svd(sens, std::min<Eigen::Index>(max_rank, std::min(sens.rows(), sens.cols())), setup.weights);
      }
      for (auto& m : members) {
        Vector fotd_sigma = Vector::Constant(m->rank, std::numeric_limits<double>::quiet_NaN());
        if (m->fotd) fotd_sigma = rank_decomposition(*m->fotd).singulars;
        if (config.oracle) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          ErrorReport rep;
          double otd_e = nan, otd_pct = nan;
          if (m->fotd) {
            rep = error_report(*m->fotd, sens, *svd, t, 0.5 * dt);
            if (m->otd) {
              const ErrorReport o = error_report(*m->otd, sens, *svd, t, 0.5 * dt);
              otd_e = o.e;
              otd_pct = o.pct_e;
            }
          } else {
            // Not yet initialized: only the oracle columns are meaningful.
            const double norm = weighted_norm(sens, setup.weights);
            const Eigen::Index tail = svd->all_singular.size() - m->rank;
            rep.e = rep.e_r = nan;
            rep.e_u = tail > 0 ? svd->all_singular.tail(tail).norm() : 0.0;
            rep.pct_defined = norm > 0.0;
            rep.pct_e = rep.pct_er = nan;
            rep.pct_eu = norm > 0.0 ? 100.0 * rep.e_u / norm : nan;
            const double total = svd->all_singular.squaredNorm();
            rep.energy_pct = total > 0.0 ? 100.0 * svd->all_singular.head(m->rank).squaredNorm() / total : nan;
          }
          m->errors << num(t) << ',' << num(rep.e) << ',' << num(rep.e_r) << ',' << num(rep.e_u) << ','
                    << num(rep.pct_e) << ',' << num(rep.pct_er) << ',' << num(rep.pct_eu) << ','
                    << num(rep.energy_pct);
          if (config.otd_baseline) m->errors << ',' << num(otd_e) << ',' << num(otd_pct);
          m->errors << ',' << (rep.pct_defined ? 1 : 0) << ',' << (m->fotd ? 1 : 0) << '\n';
        }
        m->singulars << num(t);
        for (Eigen::Index k = 0; k < m->rank; ++k) m->singulars << ',' << num(fotd_sigma(k));
        if (config.oracle) {
          for (Eigen::Index k = 0; k < m->oracle_columns; ++k) {
            m->singulars << ',' << num(k < svd->all_singular.size() ? svd->all_singular(k) : 0.0);
          }
        }
        m->singulars << '\n';
        for (double tc : coeff_times) {
          if (m->fotd && on_time(t, tc)) write_coefficients(*m, setup, t);
        }
      }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                                : std::min<unsigned>(hw, static_cast<unsigned>(members.size()));
    auto advance_members = [&] {
      auto work = [&](Member& m) {
        const auto t0 = Clock::now();
        m.fotd = m.step_fotd(*m.fotd);
        if (m.otd) m.otd = m.step_otd(*m.otd);
        m.wall += seconds_since(t0);
      };
      std::vector<Member*> active;
      for (auto& m : members) {
        if (m->fotd) active.push_back(m.get());
      }
      if (threads <= 1 || active.size() <= 1) {
        for (Member* m : active) work(*m);
        return;
      }
      std::vector<std::future<void>> jobs;
      for (Member* m : active) jobs.push_back(std::async(std::launch::async, work, std::ref(*m)));
      for (auto& j : jobs) j.get();
    };

    auto oracle_start = Clock::now();
    double oracle_wall = 0.0;
    const EnsembleStepper oracle(model, dt, dims.integrator);
    EnsembleState ens = zero_ensemble(model);
    snapshot(0.0, ens);
    for (long k = 1; k <= steps; ++k) {
      const bool pending = std::any_of(members.begin(), members.end(), [](const auto& m) { return !m->fotd; });
      if (config.oracle || pending) {
        oracle_start = Clock::now();
        ens = oracle.step(ens);
        ens.t = static_cast<double>(k) * dt;
        oracle_wall += seconds_since(oracle_start);
      }
      advance_members();
      if (pending) {
        const Matrix sens = setup.layout(ens.sens);
        const TruncatedSvd svd = truncated_svd(sens, max_rank, setup.weights);
        for (auto& m : members) {
          if (m->fotd) continue;
          const double s1 = svd.all_singular(0);
          if (!(s1 > 0.0) || svd.singular(m->rank - 1) < options.init_resolution * s1) continue;
          m->fotd = initialize_from_ensemble(ens.state, sens, ens.t, setup.weights, m->rank, options);
          if (m->step_otd) m->otd = m->fotd;
          m->init_time = ens.t;
        }
      }
      if (k % config.stride == 0) snapshot(static_cast<double>(k) * dt, ens);
    }
    for (auto& m : members) {
      if (!m->fotd) {
        throw Error(ErrorCode::rank_deficient, "rank " + std::to_string(m->rank) +
                                                   " never became resolved over the horizon; lower the rank");
      }
    }

    json fd;
    if (config.fd_check) {
      const auto t0 = Clock::now();
      const FdCheckResult res = fd_gradient_check(model, setup.fd_step, setup.fd_time, dt, setup.probes, dims.integrator);
      fd = {{"h", setup.fd_step}, {"t_check", setup.fd_time}, {"max_relative", res.max_relative}, {"warnings", res.warnings}};
      for (std::size_t i = 0; i < setup.probes.size(); ++i) fd["probes"][setup.probes[i].label] = res.relative[i];
      fd["wall_seconds"] = seconds_since(t0);
      std::ofstream(out_dir / "fd_check.json") << fd.dump(2) << '\n';
    }

    manifest["version"] = kVersion;
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["compiler"] = __VERSION__;
    manifest["config"] = config_json(config, dims);
    manifest["config"]["model"] = setup.details;
    manifest["warnings"] = setup.warnings;
    for (const auto& m : members) {
      manifest["runs"].push_back({{"rank", m->rank},
                                  {"directory", m->dir.filename().string()},
                                  {"init_time", m->init_time},
                                  {"wall_seconds", m->wall}});
    }
    manifest["oracle_wall_seconds"] = oracle_wall;
    if (config.fd_check) manifest["fd_check"] = fd;
    manifest["wall_seconds"] = seconds_since(started);
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
    result.message = "ok";
    return result;
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    result.message = e.what();
    write_error_record(out_dir, to_string(e.code()), e.what(), {}, result.exit_code);
  } catch (const std::exception& e) {
    result.exit_code = 3;
    result.message = e.what();
    write_error_record(out_dir, "internal", e.what(), {}, 3);
  }
  return result;
}

}  // namespace fotd
