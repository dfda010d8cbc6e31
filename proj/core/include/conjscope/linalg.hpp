#pragma once

#include <Eigen/Dense>

namespace conjscope {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace conjscope
