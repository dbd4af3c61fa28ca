#include "test_main.hpp"

#include "negcurv/negcurv.h"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

namespace {

double norm_of_primitive(ncv_space* s, const std::vector<double>& x, bool kaehler, int degree) {
  std::vector<double> phi(x.size() * (x.size() - 1) / 2 + x.size());
  const ncv_status st = kaehler ? ncv_kaehler_primitive(s, x.data(), phi.data()) : ncv_volume_primitive(s, x.data(), phi.data());
  REQUIRE(st == NCV_OK);
  double n = 0.0;
  REQUIRE(ncv_form_norm(s, degree, x.data(), phi.data(), &n) == NCV_OK);
  return n;
}

std::string temp_path(const char* name) { return "/tmp/negcurv_capi_" + std::to_string(::getpid()) + "_" + name; }

}  // namespace

TEST_CASE("status reporting") {
  CHECK(std::string(ncv_version()).size() > 0);
  CHECK(std::string(ncv_convention()).find("R = -R_std") != std::string::npos);
  CHECK(std::string(ncv_status_name(NCV_SCHEMA)) == "schema mismatch");
  ncv_space* s = nullptr;
  CHECK(ncv_space_create("sphere", 2, &s) == NCV_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  CHECK(std::string(ncv_last_error()).find("sphere") != std::string::npos);
  CHECK(ncv_space_create("hyperbolic", 2, nullptr) == NCV_INVALID_ARGUMENT);
  REQUIRE(ncv_space_create("hyperbolic", 2, &s) == NCV_OK);
  CHECK(std::string(ncv_last_error()).empty());
  const double outside[2] = {9.0, 0.0};
  double r = 0.0;
  CHECK(ncv_space_distance(s, outside, &r) == NCV_DOMAIN);
  double beta[2];
  CHECK(ncv_beta(s, outside, beta) != NCV_OK);
  const double x[2] = {1.0, 0.5};
  CHECK(ncv_beta(s, x, beta) == NCV_KIND_MISMATCH);
  ncv_space_free(s);
  ncv_space_free(nullptr);
}

TEST_CASE("geometry through the C API") {
  ncv_space* h = nullptr;
  REQUIRE(ncv_space_create("hyperbolic", 3, &h) == NCV_OK);
  CHECK(ncv_space_dim(h) == 3);
  CHECK(ncv_space_chart_radius(h) == 8.0);
  const double v[3] = {0.6, -0.8, 1.2};
  double x[3];
  REQUIRE(ncv_space_exp(h, v, x) == NCV_OK);
  double r = 0.0;
  REQUIRE(ncv_space_distance(h, x, &r) == NCV_OK);
  CHECK(r == doctest::Approx(std::sqrt(0.36 + 0.64 + 1.44)).epsilon(1e-12));
  double g[9];
  const double origin[3] = {0.0, 0.0, 0.0};
  REQUIRE(ncv_space_metric(h, origin, g) == NCV_OK);
  for (int i = 0; i < 9; ++i) CHECK(g[i] == doctest::Approx(i % 4 == 0 ? 1.0 : 0.0));
  const double u[3] = {1.0, 0.0, 0.0}, w[3] = {0.2, 1.0, -0.3};
  double k_cf = 0.0, k_fd = 0.0;
  REQUIRE(ncv_sectional_curvature(h, x, u, w, NCV_CLOSED_FORM, &k_cf) == NCV_OK);
  REQUIRE(ncv_sectional_curvature(h, x, u, w, NCV_FINITE_DIFFERENCE, &k_fd) == NCV_OK);
  CHECK(k_cf == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(k_fd == doctest::Approx(-1.0).epsilon(1e-2));
  ncv_space_free(h);
}

TEST_CASE("primitives through the C API") {
  ncv_space* h = nullptr;
  REQUIRE(ncv_space_create("hyperbolic", 2, &h) == NCV_OK);
  for (double r : {0.5, 3.0, 7.0}) {
    CHECK(norm_of_primitive(h, {r * 0.6, r * 0.8}, false, 1) == doctest::Approx(std::tanh(0.5 * r)).epsilon(1e-9));
  }
  ncv_space_free(h);

  ncv_space* ch = nullptr;
  REQUIRE(ncv_space_create("chn", 1, &ch) == NCV_OK);
  for (double r : {0.5, 3.0}) {
    const double rho = std::tanh(r);
    CHECK(norm_of_primitive(ch, {rho * 0.6, -rho * 0.8}, true, 1) == doctest::Approx(0.5 * std::tanh(r)).epsilon(1e-9));
  }
  ncv_space_free(ch);

  double b = 0.0;
  REQUIRE(ncv_sinh_ratio_bound(3, 2.0, &b) == NCV_OK);
  CHECK(b == doctest::Approx((std::sinh(4.0) / 4.0 - 1.0) / std::pow(std::sinh(2.0), 2)).epsilon(1e-12));
  CHECK(ncv_sinh_ratio_bound(1, 2.0, &b) == NCV_INVALID_ARGUMENT);
}

TEST_CASE("contact structure through the C API") {
  ncv_space* ch = nullptr;
  REQUIRE(ncv_space_create("chn", 2, &ch) == NCV_OK);
  const double rho = std::tanh(2.5);
  const double x[4] = {rho, 0.0, 0.0, 0.0};
  double beta[4];
  REQUIRE(ncv_beta(ch, x, beta) == NCV_OK);
  double n = 0.0;
  REQUIRE(ncv_form_norm(ch, 1, x, beta, &n) == NCV_OK);
  CHECK(n == doctest::Approx(1.0).epsilon(1e-9));
  double cf = 0.0, fd = 0.0;
  REQUIRE(ncv_contact_defect(ch, x, NCV_CLOSED_FORM, &cf) == NCV_OK);
  REQUIRE(ncv_contact_defect(ch, x, NCV_FINITE_DIFFERENCE, &fd) == NCV_OK);
  CHECK(cf == doctest::Approx(2.0 / std::tanh(2.5)).epsilon(1e-7));
  CHECK(fd == doctest::Approx(cf).epsilon(1e-4));
  // (0, 0, 1, 0) is tangent to the sphere and orthogonal to J grad r there.
  double g[16];
  REQUIRE(ncv_space_metric(ch, x, g) == NCV_OK);
  const double X[4] = {0.0, 0.0, 1.0 / std::sqrt(g[10]), 0.0};
  double hess = 0.0, levi = 0.0;
  REQUIRE(ncv_hessian_r(ch, x, X, NCV_CLOSED_FORM, &hess) == NCV_OK);
  CHECK(hess == doctest::Approx(1.0 / std::tanh(2.5)).epsilon(1e-9));
  REQUIRE(ncv_levi(ch, x, X, &levi) == NCV_OK);
  CHECK(levi == doctest::Approx(2.0 / std::tanh(2.5)).epsilon(1e-9));
  ncv_space_free(ch);
}

TEST_CASE("configuration handles") {
  ncv_config* c = nullptr;
  CHECK(ncv_config_parse(R"({"experiment": "contact", "bogus": 1, "seed": -4})", &c) == NCV_INVALID_ARGUMENT);
  CHECK(c == nullptr);
  const std::string msg = ncv_last_error();
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(msg.find("seed") != std::string::npos);
  CHECK(ncv_config_load("/nonexistent/negcurv.json", &c) == NCV_IO);

  REQUIRE(ncv_config_create(&c) == NCV_OK);
  const std::string h0 = ncv_config_hash(c);
  REQUIRE(ncv_config_set(c, "tol.curvature_fd", "0.02") == NCV_OK);
  CHECK(std::string(ncv_config_hash(c)) != h0);
  CHECK(std::string(ncv_config_json(c)).find("\"curvature_fd\":0.02") != std::string::npos);
  CHECK(ncv_config_set(c, "samples", "lots") == NCV_INVALID_ARGUMENT);
  REQUIRE(ncv_config_set(c, "experiment", "comparison") == NCV_OK);
  REQUIRE(ncv_config_set(c, "r-min", "0") == NCV_OK);
  CHECK(ncv_config_validate(c) == NCV_INVALID_ARGUMENT);
  CHECK(ncv_config_point_dim(c) == 0);
  REQUIRE(ncv_config_set(c, "r-min", "1") == NCV_OK);
  CHECK(ncv_config_validate(c) == NCV_OK);
  CHECK(ncv_config_point_dim(c) == 2);
  REQUIRE(ncv_config_set(c, "format", "csv") == NCV_OK);
  CHECK(ncv_config_format(c) == NCV_FORMAT_CSV);
  REQUIRE(ncv_config_set(c, "out", "result.csv") == NCV_OK);
  CHECK(std::string(ncv_config_out(c)) == "result.csv");
  ncv_config_free(c);
}

TEST_CASE("runs, records and replay through the C API") {
  ncv_config* c = nullptr;
  REQUIRE(ncv_config_parse(R"({"experiment": "curvature-audit", "model": "chn", "dim": 2, "samples": 30})", &c) == NCV_OK);
  ncv_result* a = nullptr;
  ncv_result* b = nullptr;
  REQUIRE(ncv_run(c, &a) == NCV_OK);
  REQUIRE(ncv_config_set(c, "jobs", "2") == NCV_OK);
  REQUIRE(ncv_run(c, &b) == NCV_OK);
  CHECK(ncv_result_passed(a) == 1);
  CHECK(ncv_summary_distance(a, b) == 0.0);
  CHECK(std::string(ncv_result_config_hash(a)) == ncv_config_hash(c));
  CHECK(std::string(ncv_result_experiment_id(a)).find("curvature-audit-chn2") == 0);
  CHECK(ncv_result_wall_time(a) >= 0.0);

  REQUIRE(ncv_result_row_count(a) == 30 * 5);
  ncv_row row{};
  REQUIRE(ncv_result_row(a, 3, &row) == NCV_OK);
  CHECK(std::string(row.quantity) == "holomorphic_closed");
  CHECK(row.point_dim == 4);
  CHECK(row.ok == 1);
  CHECK(ncv_result_row(a, 10000, &row) == NCV_INVALID_ARGUMENT);

  REQUIRE(ncv_result_check_count(a) == 4);
  ncv_check chk{};
  REQUIRE(ncv_result_check(a, 0, &chk) == NCV_OK);
  CHECK(std::string(chk.name) == "sectional_closed");
  CHECK(chk.passed == 1);
  CHECK(chk.margin >= 0.0);

  REQUIRE(ncv_result_statistic_count(a) == 3);
  const char* name = nullptr;
  double value = 0.0;
  REQUIRE(ncv_result_statistic(a, 0, &name, &value) == NCV_OK);
  CHECK(std::string(name) == "basis_discrepancy_max");
  REQUIRE(ncv_result_statistic_by_name(a, "sectional_min", &value) == NCV_OK);
  CHECK(value >= -4.01);
  CHECK(ncv_result_statistic_by_name(a, "nothing", &value) == NCV_INVALID_ARGUMENT);

  CHECK(std::string(ncv_result_json(a)).find("\"schema_version\": 1") != std::string::npos);
  CHECK(std::string(ncv_result_csv(a)).rfind("# negcurv-result schema_version=1", 0) == 0);
  CHECK(std::string(ncv_result_summary(a)).find("RESULT PASS") != std::string::npos);

  const std::string path = temp_path("run.json");
  REQUIRE(ncv_result_write(a, path.c_str(), NCV_FORMAT_JSON, 0) == NCV_OK);
  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("{\"schema_version\": 7}", f);
  std::fclose(f);
  CHECK(ncv_result_write(a, path.c_str(), NCV_FORMAT_JSON, 0) == NCV_SCHEMA);
  CHECK(ncv_result_write(a, path.c_str(), NCV_FORMAT_JSON, 1) == NCV_OK);
  std::remove(path.c_str());

  ncv_result* one = nullptr;
  REQUIRE(ncv_replay(c, row.point, row.point_dim, &one) == NCV_OK);
  ncv_row again{};
  REQUIRE(ncv_result_row(one, 3, &again) == NCV_OK);
  CHECK(std::string(again.quantity) == row.quantity);
  CHECK(again.measured == row.measured);
  const double bad[2] = {0.0, 0.0};
  ncv_result* none = nullptr;
  CHECK(ncv_replay(c, bad, 2, &none) == NCV_INVALID_ARGUMENT);
  CHECK(none == nullptr);

  ncv_result_free(one);
  ncv_result_free(a);
  ncv_result_free(b);
  ncv_config_free(c);
}
