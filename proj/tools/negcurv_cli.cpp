#include "negcurv/negcurv.h"

#include <CLI11.hpp>

#include <cctype>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Subcommand {
  const char* name;
  const char* experiment;
  const char* help;
};

constexpr Subcommand kSubcommands[] = {
    {"curvature-audit", "curvature-audit", "Sectional curvature audit against the pinching interval"},
    {"verify-comparison", "comparison", "Jacobi field comparison eta(s) = |J(s)| / sinh(s)"},
    {"verify-primitive", "primitive", "Bounded primitive certificate for a closed k-form"},
    {"verify-contact", "contact", "Contact form beta = J^T dr on geodesic spheres of CH^n"},
    {"horizon-limit", "horizon", "Pulled-back beta on the sphere at infinity"},
    {"kaehler-primitive", "kaehler-primitive", "Bounded primitive of the Kaehler form on CH^n"},
};

// Flag name and the matching configuration key.
constexpr std::pair<const char*, const char*> kValueFlags[] = {
    {"--model", "model"},
    {"--dim", "dim"},
    {"--k", "k"},
    {"--form", "form"},
    {"--r-min", "r_min"},
    {"--r-max", "r_max"},
    {"--r-steps", "r_steps"},
    {"--samples", "samples"},
    {"--seed", "seed"},
    {"--quad-order", "quad_order"},
    {"--fd-step", "fd_step"},
    {"--levi-samples", "levi_samples"},
    {"--exactness-samples", "exactness_samples"},
    {"--jobs", "jobs"},
    {"--out", "out"},
    {"--format", "format"},
};

struct Invocation {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::string> tolerances;
  std::string replay;
  bool force = false;
  bool quiet = false;
};

struct ConfigDeleter {
  void operator()(ncv_config* c) const { ncv_config_free(c); }
};
struct ResultDeleter {
  void operator()(ncv_result* r) const { ncv_result_free(r); }
};
using ConfigHandle = std::unique_ptr<ncv_config, ConfigDeleter>;
using ResultHandle = std::unique_ptr<ncv_result, ResultDeleter>;

int report(ncv_status s) {
  std::cerr << "negcurv: " << ncv_status_name(s) << ": " << ncv_last_error() << "\n";
  switch (s) {
    case NCV_INVALID_ARGUMENT:
    case NCV_IO:
    case NCV_SCHEMA: return kExitUsage;
    default: return kExitFail;
  }
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used == 0 || used != cell.size()) throw CLI::ValidationError("--replay", "bad coordinate '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--replay", "no coordinates");
  return out;
}

int execute(const char* experiment, const Invocation& inv) {
  ncv_config* raw = nullptr;
  const ncv_status made = inv.config_path.empty() ? ncv_config_create(&raw) : ncv_config_load(inv.config_path.c_str(), &raw);
  if (made != NCV_OK) return report(made);
  ConfigHandle cfg(raw);

  if (ncv_status s = ncv_config_set(cfg.get(), "experiment", experiment); s != NCV_OK) return report(s);
  for (const auto& [key, value] : inv.values) {
    if (ncv_status s = ncv_config_set(cfg.get(), key.c_str(), value.c_str()); s != NCV_OK) return report(s);
  }
  for (const auto& t : inv.tolerances) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "negcurv: --tol expects name=value, got '" << t << "'\n";
      return kExitUsage;
    }
    const std::string key = "tol." + t.substr(0, eq);
    if (ncv_status s = ncv_config_set(cfg.get(), key.c_str(), t.substr(eq + 1).c_str()); s != NCV_OK) return report(s);
  }
  if (ncv_status s = ncv_config_validate(cfg.get()); s != NCV_OK) return report(s);

  ncv_result* res_raw = nullptr;
  ncv_status ran = NCV_OK;
  if (inv.replay.empty()) {
    ran = ncv_run(cfg.get(), &res_raw);
  } else {
    std::vector<double> point;
    try {
      point = parse_point(inv.replay);
    } catch (const CLI::Error& e) {
      std::cerr << "negcurv: " << e.what() << "\n";
      return kExitUsage;
    }
    const int dim = ncv_config_point_dim(cfg.get());
    if (static_cast<int>(point.size()) != dim) {
      std::cerr << "negcurv: --replay expects " << dim << " coordinates, got " << point.size() << "\n";
      return kExitUsage;
    }
    ran = ncv_replay(cfg.get(), point.data(), point.size(), &res_raw);
  }
  if (ran != NCV_OK) return report(ran);
  ResultHandle res(res_raw);

  if (!inv.quiet) std::cout << ncv_result_summary(res.get());
  const std::string out = ncv_config_out(cfg.get());
  if (!out.empty()) {
    const ncv_status w = ncv_result_write(res.get(), out.c_str(), ncv_config_format(cfg.get()), inv.force ? 1 : 0);
    if (w != NCV_OK) return report(w);
    if (!inv.quiet) std::cout << "wrote " << out << "\n";
  }
  return ncv_result_passed(res.get()) ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical certificates for bounded primitives and contact structures on negatively curved spaces"};
  app.set_version_flag("--version", std::string(ncv_version()));
  app.require_subcommand(1);
  app.footer(
      "Exit status: 0 when every check passes, 1 when any check fails or a computation aborts, "
      "2 on usage, configuration or output errors.");

  Invocation inv;
  std::map<std::string, std::string> raw_values;
  const char* chosen = nullptr;
  for (const auto& sc : kSubcommands) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    sub->add_option("--config", inv.config_path, "JSON configuration file; flags override its values");
    for (const auto& [flag, key] : kValueFlags) {
      std::string k = key;
      sub->add_option(flag, raw_values[k]);
    }
    sub->get_option("--model")->description("euclidean, hyperbolic, chn or warped");
    sub->get_option("--dim")->description("real dimension (complex dimension for chn)");
    sub->get_option("--form")->description("auto, volume, coordinate or kaehler");
    sub->get_option("--format")->description("csv or json");
    sub->add_option("--tol", inv.tolerances, "tolerance override name=value (repeatable)");
    sub->add_option("--replay", inv.replay, "re-evaluate one sample at comma-separated chart coordinates");
    sub->add_flag("--force", inv.force, "replace an output file written with another schema version");
    sub->add_flag("--quiet", inv.quiet, "suppress the summary");
    sub->callback([&chosen, &sc] { chosen = sc.experiment; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    for (const auto& [flag, key] : kValueFlags) {
      if (sub->get_option(flag)->count() > 0) inv.values[key] = raw_values[key];
    }
  }
  return execute(chosen, inv);
}
