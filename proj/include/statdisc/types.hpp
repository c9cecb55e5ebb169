#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace statdisc {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

enum class ErrorCode {
  invalid_input,
  degenerate_elimination,
  winding_unresolved,
  unstructured,
  kernel_ambiguous,
  not_converged,
  linearization_singular,
  singular_jacobian,
  ambiguous_recovery,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace statdisc
