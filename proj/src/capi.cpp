#include "negcurv/negcurv.h"

#include "negcurv/connection.hpp"
#include "negcurv/contact.hpp"
#include "negcurv/forms.hpp"
#include "negcurv/harness.hpp"
#include "negcurv/primitive.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <new>
#include <optional>
#include <string>

using namespace negcurv;

struct ncv_space {
  SpacePtr space;
  std::mutex mutex;
  std::optional<PrimitiveProblem> volume;
  std::optional<PrimitiveProblem> kaehler;
};

struct ncv_config {
  ExperimentConfig cfg;
  std::string hash;
  std::string json;
};

struct ncv_result {
  ResultRecord rec;
  std::string summary;
  std::string json;
  std::string csv;
};

namespace {

thread_local std::string last_error;

ncv_status to_status(ErrorCode c) { return static_cast<ncv_status>(static_cast<int>(c)); }

ncv_status fail(ncv_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <typename F>
ncv_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return NCV_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(NCV_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NCV_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

Vector vec(const double* p, int m) { return Eigen::Map<const Vector>(p, m); }

void copy_out(const Vector& v, double* out) { Eigen::Map<Vector>(out, v.size()) = v; }

DerivativePath path_of(ncv_path p) {
  require(p == NCV_CLOSED_FORM || p == NCV_FINITE_DIFFERENCE, "unknown derivative path");
  return p == NCV_FINITE_DIFFERENCE ? DerivativePath::kFiniteDifference : DerivativePath::kClosedForm;
}

const PrimitiveProblem& volume_problem(ncv_space* s) {
  std::lock_guard<std::mutex> lock(s->mutex);
  if (!s->volume) s->volume.emplace(s->space, Vector::Zero(s->space->dim()), volume_form(*s->space));
  return *s->volume;
}

const PrimitiveProblem& kaehler_problem_of(ncv_space* s) {
  std::lock_guard<std::mutex> lock(s->mutex);
  if (!s->kaehler) s->kaehler.emplace(kaehler_problem(s->space));
  return *s->kaehler;
}

}  // namespace

extern "C" {

const char* ncv_version(void) { return library_version(); }

const char* ncv_convention(void) { return convention_tag(); }

const char* ncv_status_name(ncv_status status) {
  switch (status) {
    case NCV_OK: return "ok";
    case NCV_INVALID_ARGUMENT: return "invalid argument";
    case NCV_DOMAIN: return "domain error";
    case NCV_TRUNCATION: return "truncation";
    case NCV_DEGENERATE: return "degenerate input";
    case NCV_CONVERGENCE: return "convergence failure";
    case NCV_KIND_MISMATCH: return "kind mismatch";
    case NCV_IO: return "io error";
    case NCV_SCHEMA: return "schema mismatch";
    case NCV_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ncv_last_error(void) { return last_error.c_str(); }

ncv_status ncv_space_create(const char* kind, int dim, ncv_space** out) {
  return guarded([&] {
    require(kind != nullptr && out != nullptr, "ncv_space_create: null argument");
    *out = nullptr;
    const std::string k = kind;
    SpacePtr sp;
    if (k == "euclidean") {
      sp = make_euclidean(dim);
    } else if (k == "hyperbolic") {
      sp = make_hyperbolic(dim);
    } else if (k == "chn") {
      sp = make_complex_hyperbolic(dim);
    } else if (k == "warped") {
      sp = make_warped_profile(dim);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown space kind '" + k + "'");
    }
    auto h = std::make_unique<ncv_space>();
    h->space = std::move(sp);
    *out = h.release();
  });
}

void ncv_space_free(ncv_space* space) { delete space; }

int ncv_space_dim(const ncv_space* space) { return space ? space->space->dim() : 0; }

double ncv_space_chart_radius(const ncv_space* space) {
  return space ? space->space->chart_radius() : std::numeric_limits<double>::quiet_NaN();
}

ncv_status ncv_space_metric(const ncv_space* space, const double* x, double* g) {
  return guarded([&] {
    require(space && x && g, "ncv_space_metric: null argument");
    const int m = space->space->dim();
    const Matrix gm = space->space->metric_at(vec(x, m));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(g, m, m) = gm;
  });
}

ncv_status ncv_space_distance(const ncv_space* space, const double* x, double* r) {
  return guarded([&] {
    require(space && x && r, "ncv_space_distance: null argument");
    *r = distance_function(*space->space, vec(x, space->space->dim()));
  });
}

ncv_status ncv_space_exp(const ncv_space* space, const double* v, double* x) {
  return guarded([&] {
    require(space && v && x, "ncv_space_exp: null argument");
    copy_out(space->space->exp_origin(vec(v, space->space->dim())), x);
  });
}

ncv_status ncv_sectional_curvature(const ncv_space* space, const double* x, const double* u, const double* v,
                                   ncv_path path, double* value) {
  return guarded([&] {
    require(space && x && u && v && value, "ncv_sectional_curvature: null argument");
    const int m = space->space->dim();
    *value = sectional_curvature(*space->space, vec(x, m), vec(u, m), vec(v, m), path_of(path));
  });
}

ncv_status ncv_form_norm(const ncv_space* space, int degree, const double* x, const double* components,
                         double* value) {
  return guarded([&] {
    require(space && x && components && value, "ncv_form_norm: null argument");
    const int m = space->space->dim();
    require(degree >= 0 && degree <= m, "ncv_form_norm: degree out of range");
    const Vector c = vec(components, static_cast<int>(binomial(m, degree)));
    *value = h_norm_components(space->space->metric_at(vec(x, m)), degree, c);
  });
}

ncv_status ncv_volume_primitive(const ncv_space* space, const double* x, double* phi) {
  return guarded([&] {
    require(space && x && phi, "ncv_volume_primitive: null argument");
    ncv_space* s = const_cast<ncv_space*>(space);
    copy_out(primitive_at(volume_problem(s), vec(x, s->space->dim())), phi);
  });
}

ncv_status ncv_kaehler_primitive(const ncv_space* space, const double* x, double* phi) {
  return guarded([&] {
    require(space && x && phi, "ncv_kaehler_primitive: null argument");
    ncv_space* s = const_cast<ncv_space*>(space);
    copy_out(primitive_at(kaehler_problem_of(s), vec(x, s->space->dim())), phi);
  });
}

ncv_status ncv_sinh_ratio_bound(int k, double r, double* value) {
  return guarded([&] {
    require(value != nullptr, "ncv_sinh_ratio_bound: null argument");
    *value = sinh_ratio_bound(k, r);
  });
}

ncv_status ncv_beta(const ncv_space* space, const double* x, double* beta) {
  return guarded([&] {
    require(space && x && beta, "ncv_beta: null argument");
    copy_out(beta_at(*space->space, vec(x, space->space->dim())), beta);
  });
}

ncv_status ncv_hessian_r(const ncv_space* space, const double* x, const double* X, ncv_path path, double* value) {
  return guarded([&] {
    require(space && x && X && value, "ncv_hessian_r: null argument");
    const int m = space->space->dim();
    *value = hessian_r(*space->space, vec(x, m), vec(X, m), path_of(path));
  });
}

ncv_status ncv_levi(const ncv_space* space, const double* x, const double* X, double* value) {
  return guarded([&] {
    require(space && x && X && value, "ncv_levi: null argument");
    const int m = space->space->dim();
    *value = levi_positivity(*space->space, vec(x, m), vec(X, m));
  });
}

ncv_status ncv_contact_defect(const ncv_space* space, const double* x, ncv_path path, double* value) {
  return guarded([&] {
    require(space && x && value, "ncv_contact_defect: null argument");
    const std::vector<ChartPoint> pts{vec(x, space->space->dim())};
    *value = contact_defect(*space->space, pts, path_of(path) == DerivativePath::kFiniteDifference).min_value;
  });
}

ncv_status ncv_config_create(ncv_config** out) {
  return guarded([&] {
    require(out != nullptr, "ncv_config_create: null argument");
    *out = new ncv_config();
  });
}

ncv_status ncv_config_parse(const char* json_text, ncv_config** out) {
  return guarded([&] {
    require(json_text && out, "ncv_config_parse: null argument");
    *out = nullptr;
    auto h = std::make_unique<ncv_config>();
    h->cfg = parse_config(json_text);
    *out = h.release();
  });
}

ncv_status ncv_config_load(const char* path, ncv_config** out) {
  return guarded([&] {
    require(path && out, "ncv_config_load: null argument");
    *out = nullptr;
    auto h = std::make_unique<ncv_config>();
    h->cfg = load_config(path);
    *out = h.release();
  });
}

void ncv_config_free(ncv_config* config) { delete config; }

ncv_status ncv_config_set(ncv_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "ncv_config_set: null argument");
    set_config_value(config->cfg, key, value);
  });
}

ncv_status ncv_config_validate(const ncv_config* config) {
  return guarded([&] {
    require(config != nullptr, "ncv_config_validate: null argument");
    require_valid(config->cfg);
  });
}

const char* ncv_config_hash(ncv_config* config) {
  if (!config) return "";
  config->hash = config_hash(config->cfg);
  return config->hash.c_str();
}

const char* ncv_config_json(ncv_config* config) {
  if (!config) return "";
  config->json = canonical_json(config->cfg);
  return config->json.c_str();
}

const char* ncv_config_out(const ncv_config* config) { return config ? config->cfg.out.c_str() : ""; }

ncv_format ncv_config_format(const ncv_config* config) {
  return config && config->cfg.format == OutputFormat::kCsv ? NCV_FORMAT_CSV : NCV_FORMAT_JSON;
}

int ncv_config_point_dim(const ncv_config* config) {
  if (!config || !validate(config->cfg).empty()) return 0;
  try {
    return make_model(config->cfg)->dim();
  } catch (const Error&) {
    return 0;
  }
}

ncv_status ncv_run(const ncv_config* config, ncv_result** out) {
  return guarded([&] {
    require(config && out, "ncv_run: null argument");
    *out = nullptr;
    auto h = std::make_unique<ncv_result>();
    h->rec = run(config->cfg);
    *out = h.release();
  });
}

ncv_status ncv_replay(const ncv_config* config, const double* point, size_t n, ncv_result** out) {
  return guarded([&] {
    require(config && point && out, "ncv_replay: null argument");
    *out = nullptr;
    auto h = std::make_unique<ncv_result>();
    h->rec = replay(config->cfg, Eigen::Map<const Vector>(point, static_cast<Eigen::Index>(n)));
    *out = h.release();
  });
}

void ncv_result_free(ncv_result* result) { delete result; }

int ncv_result_passed(const ncv_result* result) { return result && result->rec.passed ? 1 : 0; }

const char* ncv_result_experiment_id(const ncv_result* result) {
  return result ? result->rec.experiment_id.c_str() : "";
}

const char* ncv_result_config_hash(const ncv_result* result) { return result ? result->rec.config_hash.c_str() : ""; }

double ncv_result_wall_time(const ncv_result* result) { return result ? result->rec.wall_time_s : 0.0; }

const char* ncv_result_summary(ncv_result* result) {
  if (!result) return "";
  if (result->summary.empty()) result->summary = summary_text(result->rec);
  return result->summary.c_str();
}

const char* ncv_result_json(ncv_result* result) {
  if (!result) return "";
  if (result->json.empty()) result->json = to_json(result->rec);
  return result->json.c_str();
}

const char* ncv_result_csv(ncv_result* result) {
  if (!result) return "";
  if (result->csv.empty()) result->csv = to_csv(result->rec);
  return result->csv.c_str();
}

size_t ncv_result_row_count(const ncv_result* result) { return result ? result->rec.rows.size() : 0; }

ncv_status ncv_result_row(const ncv_result* result, size_t i, ncv_row* row) {
  return guarded([&] {
    require(result && row, "ncv_result_row: null argument");
    require(i < result->rec.rows.size(), "ncv_result_row: index out of range");
    const ResultRow& r = result->rec.rows[i];
    *row = ncv_row{r.index,         r.quantity.c_str(), r.relation.c_str(), r.r,
                   r.point.data(),  static_cast<size_t>(r.point.size()), r.measured, r.bound,
                   r.margin,        r.ok ? 1 : 0};
  });
}

size_t ncv_result_check_count(const ncv_result* result) { return result ? result->rec.checks.size() : 0; }

ncv_status ncv_result_check(const ncv_result* result, size_t i, ncv_check* check) {
  return guarded([&] {
    require(result && check, "ncv_result_check: null argument");
    require(i < result->rec.checks.size(), "ncv_result_check: index out of range");
    const CheckResult& c = result->rec.checks[i];
    *check = ncv_check{c.name.c_str(), c.relation.c_str(), c.worst, c.bound, c.margin, c.passed ? 1 : 0,
                       c.worst_index, c.worst_point.data(), static_cast<size_t>(c.worst_point.size())};
  });
}

size_t ncv_result_statistic_count(const ncv_result* result) { return result ? result->rec.statistics.size() : 0; }

ncv_status ncv_result_statistic(const ncv_result* result, size_t i, const char** name, double* value) {
  return guarded([&] {
    require(result && name && value, "ncv_result_statistic: null argument");
    require(i < result->rec.statistics.size(), "ncv_result_statistic: index out of range");
    auto it = result->rec.statistics.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(i));
    *name = it->first.c_str();
    *value = it->second;
  });
}

ncv_status ncv_result_statistic_by_name(const ncv_result* result, const char* name, double* value) {
  return guarded([&] {
    require(result && name && value, "ncv_result_statistic_by_name: null argument");
    const auto it = result->rec.statistics.find(name);
    require(it != result->rec.statistics.end(), "ncv_result_statistic_by_name: no such statistic");
    *value = it->second;
  });
}

double ncv_summary_distance(const ncv_result* a, const ncv_result* b) {
  if (!a || !b) return std::numeric_limits<double>::infinity();
  return summary_distance(a->rec, b->rec);
}

ncv_status ncv_result_write(const ncv_result* result, const char* path, ncv_format format, int force) {
  return guarded([&] {
    require(result && path, "ncv_result_write: null argument");
    require(format == NCV_FORMAT_CSV || format == NCV_FORMAT_JSON, "ncv_result_write: unknown format");
    write_result(result->rec, path, format == NCV_FORMAT_CSV ? OutputFormat::kCsv : OutputFormat::kJson, force != 0);
  });
}

}  // extern "C"
