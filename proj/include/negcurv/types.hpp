#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace negcurv {

// Chart coordinates. Points and tangent vectors share a representation; the
// aliases document intent at call sites.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ChartPoint = Vector;
using ChartVector = Vector;

enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDomain = 2,
  kTruncation = 3,
  kDegenerate = 4,
  kConvergence = 5,
  kKindMismatch = 6,
  kIo = 7,
  kSchema = 8,
  kInternal = 9,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown when a geodesic leaves the truncated chart. Carries the last state
// that was still inside the domain.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double reached, Vector x, Vector v)
      : Error(ErrorCode::kTruncation, what), reached_(reached), x_(std::move(x)), v_(std::move(v)) {}
  double reached_param() const noexcept { return reached_; }
  const Vector& partial_point() const noexcept { return x_; }
  const Vector& partial_velocity() const noexcept { return v_; }

 private:
  double reached_;
  Vector x_;
  Vector v_;
};

// Dense rank-3 tensor, index order (a, b, c) row-major.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}
  int dim() const { return n_; }
  double& operator()(int a, int b, int c) { return data_[idx(a, b, c)]; }
  double operator()(int a, int b, int c) const { return data_[idx(a, b, c)]; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t idx(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * n_ + b) * n_ + c;
  }
  int n_ = 0;
  std::vector<double> data_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
  int dim() const { return n_; }
  double& operator()(int a, int b, int c, int d) { return data_[idx(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return data_[idx(a, b, c, d)]; }

 private:
  std::size_t idx(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d;
  }
  int n_ = 0;
  std::vector<double> data_;
};

// Which of the two independent derivative routes to use.
enum class DerivativePath { kClosedForm, kFiniteDifference };

}  // namespace negcurv
