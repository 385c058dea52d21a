#pragma once

#include "ddgroup/dataset.hpp"
#include "ddgroup/neighbors.hpp"
#include "ddgroup/numerics.hpp"

#include <vector>

namespace ddgroup {

struct CoreGroup {
  std::vector<int> members;  // k training rows, nearest-first from the anchor
  int anchor = -1;
  LinearFit fit;
  Eigen::VectorXd center;  // mean of the member feature vectors
};

// Fits every row's k-nearest-neighbor set (the anchor belongs to its own
// set) and returns the set with the smallest training MSE. Equal MSEs
// resolve to the smaller anchor index; anchors whose neighborhood feature
// matrix is rank deficient are skipped. The scan over anchors may run on
// several threads; the reduction is by (MSE, anchor index), so the result
// does not depend on the job count. Requires d < k <= n.
CoreGroup find_core_group(const Dataset& train, int k, const KnnIndex& index, int jobs = 1);

// Core size from a fraction of the training size: round(fraction * n),
// never below d + 1.
int core_size(long n, long d, double fraction);

}  // namespace ddgroup
