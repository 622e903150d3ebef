#include "gvm/serialize.hpp"

#include <algorithm>

#include "gvm/error.hpp"

namespace gvm {

namespace {

double get_number(const Json& j, const char* key, std::string_view ctx) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(std::string(ctx) + "." + key + " must be a number");
  return v.get<double>();
}

std::string get_string(const Json& j, const char* key, std::string_view ctx) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw SchemaError(std::string(ctx) + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!j.is_object()) throw SchemaError(std::string(context) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw SchemaError("unknown key '" + it.key() + "' in " + std::string(context));
    }
  }
}

Json to_json(const KernelModel& m) {
  Json j;
  j["family"] = std::string(to_string(m.family().id));
  Json comps = Json::array();
  for (const auto& c : m.components()) comps.push_back({{"magnitude", c.magnitude}, {"location", c.location}, {"scale", c.scale}});
  j["components"] = comps;
  j["noise_variance"] = m.noise_variance();
  return j;
}

KernelModel kernel_model_from_json(const Json& j) {
  require_keys(j, {"family", "components", "noise_variance"}, "kernel");
  if (!j.contains("family") || !j.contains("components")) throw SchemaError("kernel needs family and components");
  const FamilyId id = parse_family(get_string(j, "family", "kernel"));
  const auto& arr = j.at("components");
  if (!arr.is_array() || arr.empty()) throw SchemaError("kernel.components must be a non-empty array");
  std::vector<Component> comps;
  for (const auto& c : arr) {
    require_keys(c, {"magnitude", "location", "scale"}, "kernel component");
    Component k;
    if (c.contains("magnitude")) k.magnitude = get_number(c, "magnitude", "component");
    if (c.contains("location")) k.location = get_number(c, "location", "component");
    if (c.contains("scale")) k.scale = get_number(c, "scale", "component");
    comps.push_back(k);
  }
  const double noise = j.contains("noise_variance") ? get_number(j, "noise_variance", "kernel") : 0.0;
  try {
    return KernelModel(KernelFamily{id, comps.size()}, comps, noise);
  } catch (const ParameterDomainError& e) {
    throw SchemaError(std::string("invalid kernel: ") + e.what());
  }
}

Json to_json(const FitConfig& cfg) {
  Json j;
  j["divergence"] = to_string(cfg.divergence);
  j["family"] = std::string(to_string(cfg.family.id));
  j["components"] = cfg.family.component_count;
  j["optimizer"] = std::string(to_string(cfg.optimizer));
  j["max_iters"] = cfg.max_iters;
  j["tolerance"] = cfg.tolerance;
  if (cfg.init) j["init"] = *cfg.init;
  if (cfg.init_noise) j["init_noise"] = *cfg.init_noise;
  j["fit_noise"] = cfg.fit_noise;
  j["seed"] = cfg.seed;
  return j;
}

FitConfig fit_config_from_json(const Json& j) {
  require_keys(j, {"divergence", "family", "components", "optimizer", "max_iters", "tolerance", "init", "init_noise",
                   "fit_noise", "seed"},
               "fit");
  FitConfig cfg;
  if (j.contains("divergence")) cfg.divergence = parse_divergence(get_string(j, "divergence", "fit"));
  if (j.contains("family")) cfg.family.id = parse_family(get_string(j, "family", "fit"));
  if (j.contains("components")) {
    const auto& c = j.at("components");
    if (!c.is_number_integer() || c.get<long long>() < 1) throw SchemaError("fit.components must be a positive integer");
    cfg.family.component_count = c.get<std::size_t>();
  }
  cfg.optimizer = is_location_scale(cfg.family.id) && cfg.divergence == DivergenceId{Domain::Spectral, Metric::W2}
                      ? Optimizer::Exact
                      : Optimizer::NelderMead;
  if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(get_string(j, "optimizer", "fit"));
  if (j.contains("max_iters")) {
    const auto& v = j.at("max_iters");
    if (!v.is_number_integer()) throw SchemaError("fit.max_iters must be an integer");
    cfg.max_iters = v.get<int>();
  }
  if (j.contains("tolerance")) cfg.tolerance = get_number(j, "tolerance", "fit");
  if (j.contains("init")) {
    const auto& v = j.at("init");
    if (!v.is_array()) throw SchemaError("fit.init must be an array of numbers");
    std::vector<double> init;
    for (const auto& x : v) {
      if (!x.is_number()) throw SchemaError("fit.init must be an array of numbers");
      init.push_back(x.get<double>());
    }
    cfg.init = init;
  }
  if (j.contains("init_noise")) cfg.init_noise = get_number(j, "init_noise", "fit");
  if (j.contains("fit_noise")) {
    if (!j.at("fit_noise").is_boolean()) throw SchemaError("fit.fit_noise must be a boolean");
    cfg.fit_noise = j.at("fit_noise").get<bool>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw SchemaError("fit.seed must be an integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  validate(cfg);
  return cfg;
}

Json to_json(const Diagnostics& d) {
  Json j = Json::object();
  for (const auto& [k, v] : d.values) j[k] = v;
  if (!d.warnings.empty()) j["warnings"] = d.warnings;
  return j;
}

Json to_json(const FitResult& r) {
  Json j;
  j["success"] = r.success;
  if (r.success) j["model"] = to_json(r.model);
  j["theta_star"] = r.theta_star;
  j["noise_variance"] = r.noise_variance;
  j["loss"] = r.loss;
  j["divergence"] = r.divergence;
  j["optimizer"] = r.optimizer;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["converged"] = r.converged;
  j["diagnostics"] = to_json(r.diagnostics);
  j["loss_history"] = r.loss_history;
  j["timing"] = {{"elapsed", r.elapsed}};
  return j;
}

}  // namespace gvm
