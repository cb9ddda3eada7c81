#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

#include "datapolicy/errors.hpp"

namespace datapolicy {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entry");
}

inline void require_size(Index actual, Index expected, std::string_view what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

}  // namespace datapolicy
