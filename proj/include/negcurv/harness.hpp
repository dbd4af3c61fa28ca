#pragma once

#include "negcurv/model_space.hpp"
#include "negcurv/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace negcurv {

enum class Experiment { kCurvatureAudit, kComparison, kPrimitive, kContact, kHorizon, kKaehlerPrimitive };
enum class ModelKind { kEuclidean, kHyperbolic, kComplexHyperbolic, kWarped };
enum class OutputFormat { kCsv, kJson };
// Source form for the primitive experiment. kAuto picks the Kaehler form on
// CH^n with k = 2, the volume form when k = dim, and dx_0 ^ ... ^ dx_{k-1}
// otherwise.
enum class FormFixture { kAuto, kVolume, kCoordinate, kKaehler };

const char* experiment_name(Experiment e);
const char* model_name(ModelKind m);
const char* form_name(FormFixture f);

struct Tolerances {
  double curvature_closed = 1e-6;    // space forms, closed-form path
  double curvature_fd = 1e-2;        // finite-difference path
  double curvature_interval = 1e-2;  // widening of [-a^2, -1] for pinched models
  double holomorphic = 1e-2;         // |K(u, Ju) + 4| on CH^n
  double monotonicity = 1e-6;        // eta(s) decrease allowed
  double equality = 1e-5;            // |eta(s) - eta(r)| on hyperbolic space
  double richardson = 1e-4;          // relative step-halving estimate of the Jacobi integration
  double exactness = 1e-4;           // |d Phi - Psi| <= exactness (1 + sup |Psi|)
  double bound_slack = 1e-3;         // sup |Phi| <= ratio sup |Psi| (1 + slack)
  double closed_form = 1e-4;         // |Phi| against a closed form, where known
  double closedness = 1e-5;          // audit of the source form
  double quadrature = 1e-8;          // order-doubling check
  double beta_norm = 1e-6;
  double levi = 1e-3;                // Levi >= 2 |X|^2 (1 - levi)
  double hessian = 1e-3;             // interval widening and dual-path agreement
  double horizon_fit = 1e-2;
  double overlap = 1e-8;
  double equicontinuity = 1e-2;      // |nabla beta| <= a (1 + equicontinuity)
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kCurvatureAudit;
  ModelKind model = ModelKind::kHyperbolic;
  int dim = 2;  // real dimension; complex dimension for chn
  int k = 2;
  FormFixture form = FormFixture::kAuto;
  std::optional<double> r_min;  // unset: experiment default
  std::optional<double> r_max;
  int r_steps = 7;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  int quad_order = 32;
  double fd_step = 1e-3;
  int levi_samples = 200;
  int exactness_samples = 100;
  Tolerances tol;
  // Run-invariant fields, excluded from the hash.
  int jobs = 1;
  OutputFormat format = OutputFormat::kJson;
  std::string out;
};

// Strict JSON: unknown keys and ill-typed values are errors. All problems are
// reported together in one kInvalidArgument error.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
// Flag-style override: key as in the JSON file (dashes allowed), tolerances
// as "tol.<name>".
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> validate(const ExperimentConfig& cfg);
void require_valid(const ExperimentConfig& cfg);
// Fills in the experiment-dependent r range.
ExperimentConfig resolve(const ExperimentConfig& cfg);
// Sorted-key JSON of the resolved, hashed fields.
std::string canonical_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);
SpacePtr make_model(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

constexpr int kSchemaVersion = 1;
const char* library_version();
// Sign and orientation conventions shared by every record.
const char* convention_tag();

struct ResultRow {
  std::size_t index = 0;
  std::string quantity;
  std::string relation;  // "<=", ">=", "<", ">", or empty for reported values
  double r = 0.0;
  Vector point;          // may be empty for grid-level rows
  double measured = 0.0;
  double bound = 0.0;    // NaN when nothing is asserted
  double margin = 0.0;   // >= 0 (> 0 for strict checks) when the row passes
  bool ok = true;
};

struct CheckResult {
  std::string name;
  std::string relation;
  double worst = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool passed = false;
  std::size_t worst_index = 0;
  Vector worst_point;
};

struct ResultRecord {
  int schema_version = kSchemaVersion;
  std::string version;
  std::string experiment;
  std::string experiment_id;
  std::string config_json;
  std::string config_hash;
  std::string convention;
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<CheckResult> checks;
  std::map<std::string, double> statistics;
  std::map<std::string, std::string> notes;
  bool passed = false;
  double wall_time_s = 0.0;
};

ResultRecord run(const ExperimentConfig& cfg);
// Re-evaluates a single sample at the given point (a unit sphere direction
// for the horizon experiment).
ResultRecord replay(const ExperimentConfig& cfg, const Vector& point);

// Largest difference between the check values and statistics of two records;
// +inf if they do not have the same entries.
double summary_distance(const ResultRecord& a, const ResultRecord& b);
std::string summary_text(const ResultRecord& rec);

std::string to_json(const ResultRecord& rec);
std::string to_csv(const ResultRecord& rec);
// Atomic: writes a temporary file next to `path` and renames it. An existing
// file with a different (or unreadable) schema version is only replaced with
// force.
void write_result(const ResultRecord& rec, const std::string& path, OutputFormat format, bool force = false);
// Schema version recorded in an existing result file, or nullopt.
std::optional<int> result_file_schema(const std::string& path);

struct CsvResult {
  std::map<std::string, std::string> metadata;
  std::map<std::string, double> summary;
  std::vector<std::string> columns;
  std::vector<ResultRow> rows;
};
CsvResult read_result_csv(const std::string& path);
CsvResult parse_result_csv(const std::string& text);

}  // namespace negcurv
