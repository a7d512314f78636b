// Copyright 2026 The qembound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <string>

#include "doctest.h"
#include "qembound/numkit.hpp"

namespace qembound::testing {

using numkit::Complex;
using numkit::DensityMatrix;
using numkit::Matrix;

inline Matrix ket0() { return DensityMatrix::basis(2, 0).mat(); }

inline DensityMatrix zero() { return DensityMatrix::basis(2, 0); }
inline DensityMatrix one() { return DensityMatrix::basis(2, 1); }
inline DensityMatrix plus() {
  numkit::Vector v(2);
  v << 1.0, 1.0;
  return DensityMatrix::pure(v);
}
inline DensityMatrix mixed(Eigen::Index d) { return DensityMatrix::maximally_mixed(d); }

inline Matrix diag(std::initializer_list<double> values) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                          static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

inline double max_diff(const Matrix& a, const Matrix& b) {
  return numkit::max_abs_entry(a - b);
}

#define CHECK_THROWS_CODE(expr, expected)                    \
  do {                                                       \
    bool thrown_ = false;                                    \
    try {                                                    \
      (void)(expr);                                          \
    } catch (const ::qembound::Error& e_) {                  \
      thrown_ = true;                                        \
      CHECK_EQ(::qembound::to_string(e_.code()),             \
               std::string(::qembound::to_string(expected))); \
    }                                                        \
    CHECK_MESSAGE(thrown_, "expected an exception");        \
  } while (0)

}  // namespace qembound::testing
