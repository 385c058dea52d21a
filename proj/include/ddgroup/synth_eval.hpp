#pragma once

#include "ddgroup/dataset.hpp"
#include "ddgroup/pipeline.hpp"
#include "ddgroup/region.hpp"

#include <vector>

namespace ddgroup {

// One planted subgroup: inside `region` the target is beta . x plus
// Gaussian noise of scale sigma_in.
struct PlantedRegion {
  Box region;
  Eigen::VectorXd beta;
  double sigma_in = 0.0;
};

struct SynthConfig {
  Box domain;  // features are sampled uniformly here
  std::vector<PlantedRegion> regions;
  double sigma_out = 0.0;  // background targets are N(0, sigma_out^2)
  long n = 0;
  unsigned long seed = 0;
  std::vector<std::string> feature_names;  // defaults to x1..xd

  void validate() const;
};

struct SynthData {
  Dataset data;
  std::vector<int> region_label;  // planted-region index per row, -1 background
};

// Deterministic under seed: identical configs give identical bytes.
SynthData generate(const SynthConfig& config);

struct RegionScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Volume overlap of an estimated box against the truth: precision
// vol(E and T) / vol(E), recall vol(E and T) / vol(T), F1 their harmonic
// mean (zero unless both are positive). A zero-volume estimate scores zero
// precision.
RegionScore score_region(const Box& estimate, const Box& truth);

// Rectangular planted region [-1/3, 1/3] x [-2/3, 2/3] on the square domain
// [-1, 1]^2 with a constant third feature, noise scales 0.3 and 5.0.
SynthConfig make_demo_instance(long n, unsigned long seed);

// Square planted region [-1/3, 1/3]^2, otherwise like the demo instance;
// the benchmark protocol samples from this one.
SynthConfig make_bench_instance(long n, unsigned long seed);

struct RobustnessPoint {
  double offset = 0.0;
  double mean_misspecification = 0.0;  // supplied-core fraction outside the truth
  double mean_precision = 0.0, sem_precision = 0.0;
  double mean_recall = 0.0, sem_recall = 0.0;
  double mean_f1 = 0.0, sem_f1 = 0.0;
};

// Stress test of phases two and three with a deliberately misplaced core.
// For each offset the core is every point inside a box of the given
// half-widths centered at the first planted region's center shifted by the
// offset along each non-degenerate domain dimension. Scores are averaged
// over `seeds` datasets drawn from fresh seeds. The supplied core must keep
// at least d + 1 points.
std::vector<RobustnessPoint> robustness_sweep(const SynthConfig& base,
                                              const std::vector<double>& offsets,
                                              const Eigen::VectorXd& core_halfwidth,
                                              const ThresholdRule& rule, int seeds = 50,
                                              double shrink = 0.0);

// Half of the first planted region's side lengths, the default stress-core
// footprint.
Eigen::VectorXd default_core_halfwidth(const SynthConfig& config);

}  // namespace ddgroup
