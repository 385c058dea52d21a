#include "ddgroup/coregroup.hpp"

#include "ddgroup/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddgroup {

int core_size(long n, long d, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("core_size: fraction outside (0, 1]");
  long k = std::lround(fraction * static_cast<double>(n));
  k = std::max(k, d + 1);
  if (k > n) throw std::invalid_argument("core_size: fraction gives k > n");
  return static_cast<int>(k);
}

CoreGroup find_core_group(const Dataset& train, int k, const KnnIndex& index, int jobs) {
  train.validate();
  const long n = train.n();
  const long d = train.d();
  if (index.size() != n || index.dim() != d)
    throw std::invalid_argument("find_core_group: index does not match the training set");
  if (k <= d || k > n) throw std::invalid_argument("find_core_group: need d < k <= n");

  struct Candidate {
    double mse = std::numeric_limits<double>::infinity();
    int anchor = -1;
    CoreGroup group;
  };

  const int threads = std::max(1, jobs);
  std::vector<Candidate> best_per_thread(static_cast<size_t>(threads));
  const long chunk = (n + threads - 1) / threads;

  parallel_for(threads, threads, [&](long t) {
    Candidate& best = best_per_thread[static_cast<size_t>(t)];
    const long begin = t * chunk;
    const long end = std::min(n, begin + chunk);
    Eigen::MatrixXd X(k, d);
    Eigen::VectorXd Y(k);
    for (long anchor = begin; anchor < end; ++anchor) {
      std::vector<Neighbor> nbrs = index.query(train.features.row(anchor).transpose(), k);
      for (int i = 0; i < k; ++i) {
        X.row(i) = train.features.row(nbrs[static_cast<size_t>(i)].index);
        Y(i) = train.targets(nbrs[static_cast<size_t>(i)].index);
      }
      LinearFit fit;
      try {
        fit = ols(X, Y, OlsMode::strict);
      } catch (const std::runtime_error&) {
        continue;  // rank-deficient neighborhood
      }
      if (fit.train_mse < best.mse || (fit.train_mse == best.mse && anchor < best.anchor)) {
        best.mse = fit.train_mse;
        best.anchor = static_cast<int>(anchor);
        best.group.members.resize(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) best.group.members[static_cast<size_t>(i)] = nbrs[static_cast<size_t>(i)].index;
        best.group.anchor = static_cast<int>(anchor);
        best.group.fit = fit;
        best.group.center = X.colwise().mean();
      }
    }
  });

  Candidate winner;
  for (const Candidate& c : best_per_thread) {
    if (c.anchor < 0) continue;
    if (c.mse < winner.mse || (c.mse == winner.mse && c.anchor < winner.anchor)) winner = c;
  }
  if (winner.anchor < 0) throw std::runtime_error("find_core_group: every neighborhood is rank deficient");
  return winner.group;
}

}  // namespace ddgroup
