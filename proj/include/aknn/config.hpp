#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "aknn/error.hpp"
#include "aknn/harness.hpp"
#include "aknn/lowerbound.hpp"
#include "aknn/worlds.hpp"

// JSON experiment configs. Field names follow ExperimentConfig; unknown keys
// are rejected. Example:
//
//   {
//     "world": {"features": {"kind": "laplace", "dim": 1}, "eta": "cos5x",
//               "task": "classification"},
//     "method": "adaptive", "A": 1.0,
//     "N_grid": [500, 1000, 2000, 4000], "trials": 200, "base_seed": 7,
//     "tuning": {"at_N": 500, "trials": 100}
//   }
//
// Cube-family worlds are written either by construction parameters
//   {"kind": "cube_family", "k_target": 30, "N": 3000, "variant": "fixed_size"}
// or explicitly
//   {"kind": "cube_family", "n_cubes": 50, "half_width": 1, "low_density": 0.0016}.
namespace aknn {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown(const json& obj, std::string_view where,
                           std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error("unknown key '" + key + "' in " + std::string(where));
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("invalid value for '") + key + "'");
  }
}

template <class T>
T require_key(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) throw Error("missing key '" + std::string(key) + "' in " + std::string(where));
  return get_or<T>(obj, key, T{});
}

inline std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw Error(std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace detail

inline std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Uniform: return "uniform";
    case FeatureKind::Gaussian: return "gaussian";
    case FeatureKind::Laplace: return "laplace";
    case FeatureKind::StudentT: return "student_t";
    case FeatureKind::Cauchy: return "cauchy";
  }
  return "?";
}

inline FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "uniform") return FeatureKind::Uniform;
  if (s == "gaussian" || s == "normal") return FeatureKind::Gaussian;
  if (s == "laplace") return FeatureKind::Laplace;
  if (s == "student_t" || s == "t") return FeatureKind::StudentT;
  if (s == "cauchy") return FeatureKind::Cauchy;
  throw Error("unknown feature distribution '" + std::string(s) + "'");
}

inline std::string_view to_string(EtaKind k) {
  switch (k) {
    case EtaKind::Cos5x: return "cos5x";
    case EtaKind::PiecewisePeriodic: return "piecewise_periodic";
    case EtaKind::Cos2Sum: return "cos2sum";
    case EtaKind::Cos2First: return "cos2first";
    case EtaKind::Sinx: return "sinx";
    case EtaKind::Identity: return "identity";
    case EtaKind::Constant: return "constant";
    case EtaKind::CubeSign: return "cube_sign";
  }
  return "?";
}

inline EtaKind parse_eta_kind(std::string_view s) {
  for (auto k : {EtaKind::Cos5x, EtaKind::PiecewisePeriodic, EtaKind::Cos2Sum, EtaKind::Cos2First,
                 EtaKind::Sinx, EtaKind::Identity, EtaKind::Constant, EtaKind::CubeSign})
    if (to_string(k) == s) return k;
  throw Error("unknown regression function '" + std::string(s) + "'");
}

inline std::string_view to_string(Task t) {
  return t == Task::Classification ? "classification" : "regression";
}

inline Task parse_task(std::string_view s) {
  if (s == "classification") return Task::Classification;
  if (s == "regression") return Task::Regression;
  throw Error("unknown task '" + std::string(s) + "'");
}

inline std::string default_world_name(const WorldSpec& w) {
  if (const auto* f = std::get_if<FeatureDist>(&w.features)) {
    std::string name(to_string(f->kind));
    if (f->kind == FeatureKind::StudentT) {
      const double nu = f->nu;
      name = nu == std::floor(nu) ? "t" + std::to_string(static_cast<long long>(nu)) : "t" + std::to_string(nu);
    }
    return name + "_d" + std::to_string(f->dim) + "_" + std::string(to_string(w.eta.kind));
  }
  return "cube_family";
}

// ---------------------------------------------------------------------------
// WorldSpec <-> JSON
// ---------------------------------------------------------------------------

inline json to_json(const WorldSpec& w) {
  json j;
  j["name"] = w.name;
  if (const auto* cubes = std::get_if<CubeFamily>(&w.features)) {
    j["kind"] = "cube_family";
    j["n_cubes"] = cubes->n_cubes;
    j["half_width"] = cubes->half_width;
    j["low_density"] = cubes->low_density;
    j["dim"] = cubes->dim;
    j["eta_amplitude"] = cubes->eta_amplitude;
    return j;
  }
  const auto& f = std::get<FeatureDist>(w.features);
  json feat{{"kind", to_string(f.kind)}, {"dim", f.dim}};
  if (f.kind == FeatureKind::Uniform) {
    feat["a"] = f.a;
    feat["b"] = f.b;
  }
  if (f.kind == FeatureKind::StudentT) feat["nu"] = f.nu;
  j["features"] = feat;
  if (w.eta.kind == EtaKind::Constant)
    j["eta"] = json{{"kind", "constant"}, {"value", w.eta.value}};
  else
    j["eta"] = to_string(w.eta.kind);
  j["task"] = to_string(w.task);
  if (w.task == Task::Regression) j["noise_sigma"] = w.noise_sigma;
  return j;
}

inline WorldSpec world_from_json(const json& j) {
  if (!j.is_object()) throw Error("world must be a JSON object");
  const std::string kind = detail::get_or<std::string>(j, "kind", "synthetic");
  if (kind == "cube_family") {
    detail::reject_unknown(j, "cube_family world",
                           {"kind", "name", "k_target", "N", "variant", "delta", "n_cubes", "dim",
                            "half_width", "low_density", "eta_amplitude"});
    const std::size_t dim = detail::get_count(j, "dim", 1);
    WorldSpec w;
    if (j.contains("k_target")) {
      const std::string variant = detail::get_or<std::string>(j, "variant", "fixed_size");
      CubeVariant v;
      if (variant == "fixed_size")
        v = FixedSize{};
      else if (variant == "adaptive_size")
        v = AdaptiveSize{detail::get_or<double>(j, "delta", 0.5)};
      else
        throw Error("unknown cube variant '" + variant + "'");
      std::optional<std::size_t> n;
      if (j.contains("n_cubes")) n = detail::get_count(j, "n_cubes", 0);
      w = make_cube_world(detail::get_count(j, "k_target", 0),
                          detail::require_key<std::size_t>(j, "N", "cube_family world"), v, n, dim)
              .world;
    } else {
      CubeFamily fam;
      fam.dim = dim;
      fam.n_cubes = detail::get_count(j, "n_cubes", 0);
      fam.half_width = detail::require_key<double>(j, "half_width", "cube_family world");
      fam.low_density = detail::get_or<double>(j, "low_density", 0.0);
      fam.eta_amplitude = detail::get_or<double>(j, "eta_amplitude", 1.0);
      fam.validate();
      w.features = fam;
      w.eta = EtaFunc{EtaKind::CubeSign, 0.0};
      w.task = Task::Classification;
      w.name = "cube_family";
    }
    if (j.contains("name")) w.name = detail::get_or<std::string>(j, "name", w.name);
    w.validate();
    return w;
  }
  if (kind != "synthetic") throw Error("unknown world kind '" + kind + "'");

  detail::reject_unknown(j, "world", {"kind", "name", "features", "eta", "task", "noise_sigma"});
  if (!j.contains("features")) throw Error("missing key 'features' in world");
  const json& fj = j.at("features");
  detail::reject_unknown(fj, "features", {"kind", "dim", "a", "b", "nu"});
  FeatureDist f;
  f.kind = parse_feature_kind(detail::require_key<std::string>(fj, "kind", "features"));
  f.dim = detail::get_count(fj, "dim", 1);
  f.a = detail::get_or<double>(fj, "a", f.a);
  f.b = detail::get_or<double>(fj, "b", f.b);
  f.nu = detail::get_or<double>(fj, "nu", f.nu);

  WorldSpec w;
  w.features = f;
  if (!j.contains("eta")) throw Error("missing key 'eta' in world");
  const json& ej = j.at("eta");
  if (ej.is_string()) {
    w.eta.kind = parse_eta_kind(ej.get<std::string>());
  } else {
    detail::reject_unknown(ej, "eta", {"kind", "value"});
    w.eta.kind = parse_eta_kind(detail::require_key<std::string>(ej, "kind", "eta"));
    w.eta.value = detail::get_or<double>(ej, "value", 0.0);
  }
  if (w.eta.kind == EtaKind::CubeSign) throw Error("cube_sign needs a cube_family world");
  w.task = parse_task(detail::require_key<std::string>(j, "task", "world"));
  w.noise_sigma = detail::get_or<double>(j, "noise_sigma", 0.5);
  w.name = detail::get_or<std::string>(j, "name", default_world_name(w));
  w.validate();
  return w;
}

// ---------------------------------------------------------------------------
// ExperimentConfig <-> JSON
// ---------------------------------------------------------------------------

inline ExperimentConfig config_from_json(const json& j) {
  detail::reject_unknown(j, "config",
                         {"world", "method", "k", "anchor_N", "K", "q", "A", "N_grid", "trials",
                          "n_test", "base_seed", "tuning", "norm", "rate_params", "risk_estimator",
                          "workers"});
  ExperimentConfig c;
  if (!j.contains("world")) throw Error("missing key 'world' in config");
  c.world = world_from_json(j.at("world"));
  c.method = parse_method(detail::require_key<std::string>(j, "method", "config"));
  c.k = detail::get_count(j, "k", c.k);
  c.anchor_N = detail::get_count(j, "anchor_N", c.anchor_N);
  c.K = detail::get_or<double>(j, "K", c.K);
  if (j.contains("q")) c.q = detail::get_or<double>(j, "q", 0.0);
  c.A = detail::get_or<double>(j, "A", c.A);
  if (j.contains("N_grid")) {
    if (!j.at("N_grid").is_array()) throw Error("'N_grid' must be an array");
    c.N_grid.clear();
    for (const auto& v : j.at("N_grid")) {
      if (!v.is_number_integer() || v.get<long long>() <= 0)
        throw Error("'N_grid' entries must be positive integers");
      c.N_grid.push_back(v.get<std::size_t>());
    }
  }
  c.trials = detail::get_count(j, "trials", c.trials);
  c.n_test = detail::get_count(j, "n_test", c.n_test);
  if (j.contains("base_seed")) {
    if (!j.at("base_seed").is_number_integer()) throw Error("'base_seed' must be an integer");
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
  }
  if (j.contains("tuning")) {
    const json& tj = j.at("tuning");
    if (tj.is_string() && tj.get<std::string>() == "none") {
      c.tuning.reset();
    } else {
      detail::reject_unknown(tj, "tuning", {"at_N", "grid", "trials"});
      TuningSpec t;
      t.at_N = detail::get_count(tj, "at_N", t.at_N);
      t.trials = detail::get_count(tj, "trials", t.trials);
      if (tj.contains("grid")) t.grid = detail::get_or<std::vector<double>>(tj, "grid", {});
      c.tuning = t;
    }
  }
  if (j.contains("norm")) c.norm = parse_norm(detail::get_or<std::string>(j, "norm", ""));
  if (j.contains("rate_params")) {
    const json& rj = j.at("rate_params");
    detail::reject_unknown(rj, "rate_params", {"alpha", "beta", "beta_prime"});
    theory::RateParams p;
    p.alpha = detail::get_or<double>(rj, "alpha", p.alpha);
    p.beta = detail::get_or<double>(rj, "beta", p.beta);
    p.beta_prime = detail::get_or<double>(rj, "beta_prime", p.beta);
    c.rate_params = p;
  }
  if (j.contains("risk_estimator")) {
    const auto s = detail::get_or<std::string>(j, "risk_estimator", "");
    if (s == "plugin")
      c.risk_estimator = ClsRiskEstimator::PlugIn;
    else if (s == "empirical")
      c.risk_estimator = ClsRiskEstimator::EmpiricalMinusBayes;
    else
      throw Error("unknown risk_estimator '" + s + "'");
  }
  c.workers = static_cast<unsigned>(detail::get_count(j, "workers", 0));
  c.validate();
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["world"] = to_json(c.world);
  j["method"] = to_string(c.method);
  j["k"] = c.k;
  j["anchor_N"] = c.anchor_N;
  j["K"] = c.K;
  if (c.q) j["q"] = *c.q;
  j["A"] = c.A;
  j["N_grid"] = c.N_grid;
  j["trials"] = c.trials;
  j["n_test"] = c.n_test;
  j["base_seed"] = c.base_seed;
  if (c.tuning) {
    j["tuning"] = json{{"at_N", c.tuning->at_N}, {"trials", c.tuning->trials}};
    if (!c.tuning->grid.empty()) j["tuning"]["grid"] = c.tuning->grid;
  } else {
    j["tuning"] = "none";
  }
  if (c.norm) j["norm"] = to_string(*c.norm);
  if (c.rate_params)
    j["rate_params"] = json{{"alpha", c.rate_params->alpha},
                            {"beta", c.rate_params->beta},
                            {"beta_prime", c.rate_params->beta_prime}};
  j["risk_estimator"] = c.risk_estimator == ClsRiskEstimator::PlugIn ? "plugin" : "empirical";
  if (c.workers) j["workers"] = c.workers;
  return j;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    throw ConfigError("invalid config '" + path + "': " + e.what());
  }
}

}  // namespace aknn
