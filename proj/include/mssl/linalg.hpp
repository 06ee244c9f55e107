#pragma once

#include <Eigen/Dense>

#include "mssl/tensor.hpp"

namespace mssl {

Eigen::MatrixXd to_eigen(const Tensor& t);
Tensor from_eigen(const Eigen::MatrixXd& m);

/// Thin SVD with singular values in descending order.
struct Svd {
  Eigen::MatrixXd u;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd v;
};
Svd thin_svd(const Eigen::MatrixXd& m);

}  // namespace mssl
