#pragma once

#include <Eigen/Dense>

namespace metacomment {

// Sample-by-feature design matrix.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace metacomment
