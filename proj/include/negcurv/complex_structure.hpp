#pragma once

#include "negcurv/types.hpp"

namespace negcurv {

// Standard complex structure on R^{2n} with interleaved coordinates
// (x_1, y_1, ..., x_n, y_n): J(d/dx_i) = d/dy_i, J(d/dy_i) = -d/dx_i.
class ComplexStructure {
 public:
  explicit ComplexStructure(int complex_dim);

  int complex_dim() const { return n_; }
  int real_dim() const { return 2 * n_; }

  ChartVector apply(const ChartVector& v) const;
  const Matrix& matrix() const { return mat_; }

 private:
  int n_;
  Matrix mat_;
};

}  // namespace negcurv
