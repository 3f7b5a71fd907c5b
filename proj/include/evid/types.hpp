#pragma once

#include <Eigen/Dense>

namespace evid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace evid
