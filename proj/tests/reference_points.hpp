#pragma once

#include "relucert/types.hpp"

namespace relucert::testutil {

// Two known spurious local minima of the standard-basis problem, printed to
// four decimals. Row i of the returned WeightPoint is neuron i. Both points
// need a short reconvergence before certification: the printed rounding moves
// them ~1e-4 away from the exact minima.

inline WeightPoint known_minimum_k6_n6() {
  Matrix cols(6, 6);
  cols << -0.6015, 0.3080, 0.3080, 0.3080, 0.3080, 0.3080,
           0.2245, 0.9867, -0.0504, -0.0504, -0.0504, -0.0504,
           0.2245, -0.0504, 0.9867, -0.0504, -0.0504, -0.0504,
           0.2245, -0.0504, -0.0504, 0.9867, -0.0504, -0.0504,
           0.2245, -0.0504, -0.0504, -0.0504, 0.9867, -0.0504,
           0.2245, -0.0504, -0.0504, -0.0504, -0.0504, 0.9867;
  // Neurons are the columns; our convention stores them as rows.
  return WeightPoint(Matrix(cols.transpose()));
}

inline WeightPoint known_minimum_k8_n9() {
  Matrix cols(8, 9);
  cols <<  0.9841, -0.0298, -0.0298, -0.0298, -0.0298, -0.0298, -0.0298, 0.1263, 0.0687,
          -0.0298,  0.9841, -0.0298, -0.0298, -0.0298, -0.0298, -0.0298, 0.1263, 0.0687,
          -0.0298, -0.0298,  0.9841, -0.0298, -0.0298, -0.0298, -0.0298, 0.1263, 0.0687,
          -0.0298, -0.0298, -0.0298,  0.9841, -0.0298, -0.0298, -0.0298, 0.1263, 0.0687,
          -0.0298, -0.0298, -0.0298, -0.0298,  0.9841, -0.0298, -0.0298, 0.1263, 0.0687,
          -0.0298, -0.0298, -0.0298, -0.0298, -0.0298,  0.9841, -0.0298, 0.1263, 0.0687,
          -0.0298, -0.0298, -0.0298, -0.0298, -0.0298, -0.0298,  0.9841, 0.1263, 0.0687,
           0.2301,  0.2301,  0.2301,  0.2301,  0.2301,  0.2301,  0.2301, -0.1890, -0.4862;
  return WeightPoint(Matrix(cols.transpose()));
}

}  // namespace relucert::testutil
