#include "negcurv/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace negcurv {

namespace {

using json = nlohmann::json;

template <typename E>
struct Named {
  E value;
  const char* name;
};

constexpr Named<Experiment> kExperiments[] = {
    {Experiment::kCurvatureAudit, "curvature-audit"}, {Experiment::kComparison, "comparison"},
    {Experiment::kPrimitive, "primitive"},            {Experiment::kContact, "contact"},
    {Experiment::kHorizon, "horizon"},                {Experiment::kKaehlerPrimitive, "kaehler-primitive"},
};
constexpr Named<ModelKind> kModels[] = {
    {ModelKind::kEuclidean, "euclidean"},
    {ModelKind::kHyperbolic, "hyperbolic"},
    {ModelKind::kComplexHyperbolic, "chn"},
    {ModelKind::kWarped, "warped"},
};
constexpr Named<FormFixture> kForms[] = {
    {FormFixture::kAuto, "auto"},
    {FormFixture::kVolume, "volume"},
    {FormFixture::kCoordinate, "coordinate"},
    {FormFixture::kKaehler, "kaehler"},
};
constexpr Named<OutputFormat> kFormats[] = {{OutputFormat::kCsv, "csv"}, {OutputFormat::kJson, "json"}};

template <typename E, std::size_t N>
const char* name_of(const Named<E> (&table)[N], E v) {
  for (const auto& t : table)
    if (t.value == v) return t.name;
  return "?";
}

template <typename E, std::size_t N>
std::string choices(const Named<E> (&table)[N]) {
  std::string s;
  for (const auto& t : table) s += (s.empty() ? "" : ", ") + std::string(t.name);
  return s;
}

struct ToleranceField {
  const char* name;
  double Tolerances::*member;
};

constexpr ToleranceField kToleranceFields[] = {
    {"curvature_closed", &Tolerances::curvature_closed},
    {"curvature_fd", &Tolerances::curvature_fd},
    {"curvature_interval", &Tolerances::curvature_interval},
    {"holomorphic", &Tolerances::holomorphic},
    {"monotonicity", &Tolerances::monotonicity},
    {"equality", &Tolerances::equality},
    {"richardson", &Tolerances::richardson},
    {"exactness", &Tolerances::exactness},
    {"bound_slack", &Tolerances::bound_slack},
    {"closed_form", &Tolerances::closed_form},
    {"closedness", &Tolerances::closedness},
    {"quadrature", &Tolerances::quadrature},
    {"beta_norm", &Tolerances::beta_norm},
    {"levi", &Tolerances::levi},
    {"hessian", &Tolerances::hessian},
    {"horizon_fit", &Tolerances::horizon_fit},
    {"overlap", &Tolerances::overlap},
    {"equicontinuity", &Tolerances::equicontinuity},
};

class Issues {
 public:
  void add(const std::string& s) { list_.push_back(s); }
  const std::vector<std::string>& list() const { return list_; }
  void raise() const {
    if (list_.empty()) return;
    std::string msg = "invalid configuration: ";
    for (std::size_t i = 0; i < list_.size(); ++i) msg += (i ? "; " : "") + list_[i];
    throw Error(ErrorCode::kInvalidArgument, msg);
  }

 private:
  std::vector<std::string> list_;
};

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

template <typename E, std::size_t N>
void set_enum(const Named<E> (&table)[N], E& out, const json& v, const std::string& key, Issues& issues) {
  if (!v.is_string()) {
    issues.add(key + ": expected a string");
    return;
  }
  for (const auto& t : table) {
    if (v.get<std::string>() == t.name) {
      out = t.value;
      return;
    }
  }
  issues.add(key + ": unknown value '" + v.get<std::string>() + "' (expected one of " + choices(table) + ")");
}

void set_int(int& out, const json& v, const std::string& key, Issues& issues) {
  if (!v.is_number_integer()) {
    issues.add(key + ": expected an integer");
    return;
  }
  const auto x = v.get<std::int64_t>();
  if (x < -1000000000 || x > 1000000000) {
    issues.add(key + ": out of range");
    return;
  }
  out = static_cast<int>(x);
}

template <typename U>
void set_unsigned(U& out, const json& v, const std::string& key, Issues& issues) {
  if (v.is_number_unsigned()) {
    out = static_cast<U>(v.get<std::uint64_t>());
  } else if (v.is_number_integer()) {
    issues.add(key + ": must be non-negative");
  } else {
    issues.add(key + ": expected a non-negative integer");
  }
}

void set_double(double& out, const json& v, const std::string& key, Issues& issues) {
  if (!v.is_number()) {
    issues.add(key + ": expected a number");
    return;
  }
  out = v.get<double>();
}

void set_optional(std::optional<double>& out, const json& v, const std::string& key, Issues& issues) {
  if (v.is_null()) {
    out.reset();
    return;
  }
  double x = 0.0;
  Issues local;
  set_double(x, v, key, local);
  if (local.list().empty()) {
    out = x;
  } else {
    for (const auto& s : local.list()) issues.add(s);
  }
}

void set_tolerance(Tolerances& tol, const std::string& name, const json& v, Issues& issues) {
  for (const auto& f : kToleranceFields) {
    if (name == f.name) {
      set_double(tol.*(f.member), v, "tolerances." + name, issues);
      return;
    }
  }
  issues.add("tolerances: unknown key '" + name + "'");
}

void apply(ExperimentConfig& cfg, const std::string& raw_key, const json& v, Issues& issues) {
  const std::string key = normalize_key(raw_key);
  if (key == "experiment") {
    set_enum(kExperiments, cfg.experiment, v, key, issues);
  } else if (key == "model") {
    set_enum(kModels, cfg.model, v, key, issues);
  } else if (key == "form") {
    set_enum(kForms, cfg.form, v, key, issues);
  } else if (key == "format") {
    set_enum(kFormats, cfg.format, v, key, issues);
  } else if (key == "dim") {
    set_int(cfg.dim, v, key, issues);
  } else if (key == "k") {
    set_int(cfg.k, v, key, issues);
  } else if (key == "r_steps") {
    set_int(cfg.r_steps, v, key, issues);
  } else if (key == "quad_order") {
    set_int(cfg.quad_order, v, key, issues);
  } else if (key == "levi_samples") {
    set_int(cfg.levi_samples, v, key, issues);
  } else if (key == "exactness_samples") {
    set_int(cfg.exactness_samples, v, key, issues);
  } else if (key == "jobs") {
    set_int(cfg.jobs, v, key, issues);
  } else if (key == "samples") {
    set_unsigned(cfg.samples, v, key, issues);
  } else if (key == "seed") {
    set_unsigned(cfg.seed, v, key, issues);
  } else if (key == "r_min") {
    set_optional(cfg.r_min, v, key, issues);
  } else if (key == "r_max") {
    set_optional(cfg.r_max, v, key, issues);
  } else if (key == "fd_step") {
    set_double(cfg.fd_step, v, key, issues);
  } else if (key == "out") {
    if (v.is_string()) {
      cfg.out = v.get<std::string>();
    } else {
      issues.add("out: expected a string");
    }
  } else if (key == "tolerances") {
    if (!v.is_object()) {
      issues.add("tolerances: expected an object");
      return;
    }
    for (auto it = v.begin(); it != v.end(); ++it) set_tolerance(cfg.tol, it.key(), it.value(), issues);
  } else if (key.rfind("tol.", 0) == 0) {
    set_tolerance(cfg.tol, key.substr(4), v, issues);
  } else {
    issues.add("unknown key '" + raw_key + "'");
  }
}

double default_chart_radius(ModelKind m) { return m == ModelKind::kWarped ? 4.0 : 8.0; }

int real_dim(const ExperimentConfig& cfg) {
  return cfg.model == ModelKind::kComplexHyperbolic ? 2 * cfg.dim : cfg.dim;
}

FormFixture resolved_form(const ExperimentConfig& cfg) {
  if (cfg.form != FormFixture::kAuto) return cfg.form;
  if (cfg.experiment == Experiment::kKaehlerPrimitive) return FormFixture::kKaehler;
  if (cfg.model == ModelKind::kComplexHyperbolic && cfg.k == 2) return FormFixture::kKaehler;
  return cfg.k == real_dim(cfg) ? FormFixture::kVolume : FormFixture::kCoordinate;
}

}  // namespace

const char* experiment_name(Experiment e) { return name_of(kExperiments, e); }
const char* model_name(ModelKind m) { return name_of(kModels, m); }
const char* form_name(FormFixture f) { return name_of(kForms, f); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("invalid configuration: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidArgument, "invalid configuration: top level must be an object");
  ExperimentConfig cfg;
  Issues issues;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key().find('-') != std::string::npos || it.key().rfind("tol.", 0) == 0) {
      issues.add("unknown key '" + it.key() + "'");
      continue;
    }
    apply(cfg, it.key(), it.value(), issues);
  }
  issues.raise();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  // String-valued keys keep the raw flag text.
  const std::string k = normalize_key(key);
  if ((k == "experiment" || k == "model" || k == "form" || k == "format" || k == "out") && !v.is_string()) v = value;
  Issues issues;
  apply(cfg, key, v, issues);
  issues.raise();
}

ExperimentConfig resolve(const ExperimentConfig& in) {
  ExperimentConfig cfg = in;
  const double radius = default_chart_radius(cfg.model);
  double lo = 0.0;
  switch (cfg.experiment) {
    case Experiment::kComparison: lo = 0.5; break;
    case Experiment::kContact:
    case Experiment::kHorizon: lo = 2.0; break;
    default: break;
  }
  if (!cfg.r_min) cfg.r_min = lo;
  if (!cfg.r_max) cfg.r_max = radius;
  if (cfg.experiment == Experiment::kPrimitive || cfg.experiment == Experiment::kKaehlerPrimitive) {
    cfg.form = resolved_form(cfg);
  }
  if (cfg.experiment == Experiment::kKaehlerPrimitive) cfg.k = 2;
  return cfg;
}

std::vector<std::string> validate(const ExperimentConfig& in) {
  const ExperimentConfig cfg = resolve(in);
  Issues issues;
  const bool chn = cfg.model == ModelKind::kComplexHyperbolic;
  const int max_dim = chn ? 4 : 8;
  const int min_dim = chn ? 1 : 2;
  if (cfg.dim < min_dim || cfg.dim > max_dim) {
    issues.add("dim: must lie in [" + std::to_string(min_dim) + ", " + std::to_string(max_dim) + "] for model " +
               model_name(cfg.model));
  }
  const int m = real_dim(cfg);
  const double radius = default_chart_radius(cfg.model);
  const double r_min = *cfg.r_min, r_max = *cfg.r_max;
  if (!std::isfinite(r_min) || r_min < 0.0) issues.add("r_min: must be >= 0");
  if (!std::isfinite(r_max) || !(r_max > 0.0) || r_max > radius) {
    std::ostringstream os;
    os << "r_max: must lie in (0, " << radius << "] (chart radius)";
    issues.add(os.str());
  }
  if (r_min > r_max) issues.add("r_min: must not exceed r_max");
  if (cfg.r_steps < 1 || cfg.r_steps > 1000) issues.add("r_steps: must lie in [1, 1000]");
  if (cfg.samples < 1 || cfg.samples > 10000000) issues.add("samples: must lie in [1, 1e7]");
  if (cfg.quad_order < 1 || cfg.quad_order > 512) issues.add("quad_order: must lie in [1, 512]");
  if (!(cfg.fd_step > 0.0 && cfg.fd_step <= 0.1)) issues.add("fd_step: must lie in (0, 0.1]");
  if (cfg.levi_samples < 1) issues.add("levi_samples: must be >= 1");
  if (cfg.exactness_samples < 0) issues.add("exactness_samples: must be >= 0");
  if (cfg.jobs < 1 || cfg.jobs > 256) issues.add("jobs: must lie in [1, 256]");
  for (const auto& f : kToleranceFields) {
    const double t = cfg.tol.*(f.member);
    if (!(std::isfinite(t) && t > 0.0)) issues.add(std::string("tolerances.") + f.name + ": must be positive and finite");
  }
  if (!(cfg.tol.levi < 1.0)) issues.add("tolerances.levi: must be < 1");

  const char* ex = experiment_name(cfg.experiment);
  switch (cfg.experiment) {
    case Experiment::kCurvatureAudit: break;
    case Experiment::kComparison:
      if (cfg.model == ModelKind::kEuclidean) issues.add("comparison: the model must have curvature <= -1");
      if (!(r_min > 0.0)) issues.add("comparison: r_min must be > 0 (the ratio is undefined at r = 0)");
      break;
    case Experiment::kPrimitive:
      if (cfg.k < 2 || cfg.k > m) issues.add("k: must lie in [2, " + std::to_string(m) + "]");
      if (cfg.form == FormFixture::kKaehler && (!chn || cfg.k != 2)) issues.add("form: kaehler needs model chn and k = 2");
      if (cfg.form == FormFixture::kVolume && cfg.k != m) issues.add("form: volume needs k = real dimension");
      break;
    case Experiment::kContact:
    case Experiment::kHorizon:
    case Experiment::kKaehlerPrimitive:
      if (!chn) issues.add(std::string(ex) + ": requires model chn");
      if (cfg.experiment != Experiment::kKaehlerPrimitive && !(r_min > 0.0)) {
        issues.add(std::string(ex) + ": r_min must be > 0");
      }
      if (cfg.experiment == Experiment::kHorizon) {
        if (cfg.r_steps < 3) issues.add("horizon: r_steps must be >= 3");
        if (!(r_min < r_max)) issues.add("horizon: r_min must be < r_max");
      }
      break;
  }
  return issues.list();
}

void require_valid(const ExperimentConfig& cfg) {
  Issues issues;
  for (const auto& s : validate(cfg)) issues.add(s);
  issues.raise();
}

std::string canonical_json(const ExperimentConfig& in) {
  const ExperimentConfig cfg = resolve(in);
  json j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["model"] = model_name(cfg.model);
  j["dim"] = cfg.dim;
  j["k"] = cfg.k;
  j["form"] = form_name(cfg.form);
  j["r_min"] = *cfg.r_min;
  j["r_max"] = *cfg.r_max;
  j["r_steps"] = cfg.r_steps;
  j["samples"] = static_cast<std::uint64_t>(cfg.samples);
  j["seed"] = cfg.seed;
  j["quad_order"] = cfg.quad_order;
  j["fd_step"] = cfg.fd_step;
  j["levi_samples"] = cfg.levi_samples;
  j["exactness_samples"] = cfg.exactness_samples;
  json tol = json::object();
  for (const auto& f : kToleranceFields) tol[f.name] = cfg.tol.*(f.member);
  j["tolerances"] = tol;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "fnv1a64:" << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(canonical_json(cfg));
  return os.str();
}

SpacePtr make_model(const ExperimentConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::kEuclidean: return make_euclidean(cfg.dim);
    case ModelKind::kHyperbolic: return make_hyperbolic(cfg.dim);
    case ModelKind::kComplexHyperbolic: return make_complex_hyperbolic(cfg.dim);
    case ModelKind::kWarped: return make_warped_profile(cfg.dim);
  }
  throw Error(ErrorCode::kInternal, "make_model: unknown model");
}

}  // namespace negcurv
