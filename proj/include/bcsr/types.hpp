#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace bcsr {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using Point2 = Eigen::Vector2d;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

}  // namespace bcsr
