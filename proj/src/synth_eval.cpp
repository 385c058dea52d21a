#include "ddgroup/synth_eval.hpp"

#include "ddgroup/numerics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ddgroup {

void SynthConfig::validate() const {
  if (n < 1) throw std::invalid_argument("synth: n must be positive");
  if (domain.dims() < 1) throw std::invalid_argument("synth: empty domain");
  if (domain.empty()) throw std::invalid_argument("synth: domain box is empty");
  if (!(sigma_out > 0.0)) throw std::invalid_argument("synth: sigma_out must be positive");
  if (regions.empty()) throw std::invalid_argument("synth: need at least one planted region");
  if (!feature_names.empty() && static_cast<long>(feature_names.size()) != domain.dims())
    throw std::invalid_argument("synth: feature_names length differs from dimension");
  for (const PlantedRegion& pr : regions) {
    if (pr.region.dims() != domain.dims()) throw std::invalid_argument("synth: region dimension mismatch");
    if (pr.region.empty()) throw std::invalid_argument("synth: planted region is empty");
    for (long j = 0; j < domain.dims(); ++j)
      if (pr.region.lo(j) < domain.lo(j) || pr.region.hi(j) > domain.hi(j))
        throw std::invalid_argument("synth: planted region leaves the domain");
    if (pr.beta.size() != domain.dims()) throw std::invalid_argument("synth: beta dimension mismatch");
    if (pr.beta.norm() == 0.0) throw std::invalid_argument("synth: beta must be nonzero");
    if (!(pr.sigma_in >= 0.0)) throw std::invalid_argument("synth: sigma_in must be nonnegative");
    if (!(pr.sigma_in < sigma_out))
      throw std::invalid_argument("synth: sigma_in must be below sigma_out");
  }
  for (size_t a = 0; a < regions.size(); ++a)
    for (size_t b = a + 1; b < regions.size(); ++b)
      if (intersect(regions[a].region, regions[b].region).volume() > 0.0)
        throw std::invalid_argument("synth: planted regions overlap");
}

SynthData generate(const SynthConfig& config) {
  config.validate();
  const long n = config.n;
  const long d = config.domain.dims();

  SynthData out;
  out.data.features.resize(n, d);
  out.data.targets.resize(n);
  out.region_label.assign(static_cast<size_t>(n), -1);

  std::mt19937_64 gen(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (long i = 0; i < n; ++i)
    for (long j = 0; j < d; ++j) {
      const double lo = config.domain.lo(j);
      const double hi = config.domain.hi(j);
      out.data.features(i, j) = hi > lo ? lo + (hi - lo) * unif(gen) : lo;
    }

  for (long i = 0; i < n; ++i) {
    int label = -1;
    for (size_t g = 0; g < config.regions.size(); ++g) {
      if (config.regions[g].region.contains(out.data.features.row(i).transpose())) {
        label = static_cast<int>(g);
        break;
      }
    }
    out.region_label[static_cast<size_t>(i)] = label;
    const double z = normal(gen);
    if (label >= 0) {
      const PlantedRegion& pr = config.regions[static_cast<size_t>(label)];
      out.data.targets(i) = pr.beta.dot(out.data.features.row(i)) + pr.sigma_in * z;
    } else {
      out.data.targets(i) = config.sigma_out * z;
    }
  }

  if (config.feature_names.empty()) {
    for (long j = 0; j < d; ++j) out.data.feature_names.push_back("x" + std::to_string(j + 1));
  } else {
    out.data.feature_names = config.feature_names;
  }
  for (long j = 0; j < d; ++j)
    if (config.domain.lo(j) == 1.0 && config.domain.hi(j) == 1.0 && out.data.intercept_column < 0)
      out.data.intercept_column = static_cast<int>(j);
  out.data.validate();
  return out;
}

RegionScore score_region(const Box& estimate, const Box& truth) {
  if (estimate.dims() != truth.dims()) throw std::invalid_argument("score_region: dimension mismatch");
  if (truth.empty() || truth.volume() <= 0.0)
    throw std::invalid_argument("score_region: truth region has no volume");
  RegionScore s;
  const double vol_est = estimate.volume();
  const double vol_inter = intersect(estimate, truth).volume();
  s.precision = vol_est > 0.0 ? vol_inter / vol_est : 0.0;
  s.recall = vol_inter / truth.volume();
  s.f1 = (s.precision > 0.0 && s.recall > 0.0)
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

namespace {

SynthConfig make_planted_instance(long n, unsigned long seed, double half_x2) {
  SynthConfig cfg;
  cfg.domain.lo = Eigen::Vector3d(-1.0, -1.0, 1.0);
  cfg.domain.hi = Eigen::Vector3d(1.0, 1.0, 1.0);
  PlantedRegion pr;
  pr.region.lo = Eigen::Vector3d(-1.0 / 3.0, -half_x2, 1.0);
  pr.region.hi = Eigen::Vector3d(1.0 / 3.0, half_x2, 1.0);
  pr.beta = Eigen::Vector3d(2.0, 1.0, 0.5);
  pr.sigma_in = 0.3;
  cfg.regions.push_back(pr);
  cfg.sigma_out = 5.0;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

SynthConfig make_demo_instance(long n, unsigned long seed) {
  return make_planted_instance(n, seed, 2.0 / 3.0);
}

SynthConfig make_bench_instance(long n, unsigned long seed) {
  return make_planted_instance(n, seed, 1.0 / 3.0);
}

Eigen::VectorXd default_core_halfwidth(const SynthConfig& config) {
  config.validate();
  const Box& truth = config.regions.front().region;
  return (truth.hi - truth.lo) / 4.0;
}

std::vector<RobustnessPoint> robustness_sweep(const SynthConfig& base,
                                              const std::vector<double>& offsets,
                                              const Eigen::VectorXd& core_halfwidth,
                                              const ThresholdRule& rule, int seeds,
                                              double shrink) {
  base.validate();
  rule.validate();
  if (offsets.empty()) throw std::invalid_argument("robustness_sweep: empty offset list");
  if (seeds < 1) throw std::invalid_argument("robustness_sweep: need at least one seed");
  if (core_halfwidth.size() != base.domain.dims())
    throw std::invalid_argument("robustness_sweep: half-width dimension mismatch");

  const Box& truth = base.regions.front().region;
  const Eigen::VectorXd truth_center = (truth.lo + truth.hi) / 2.0;
  const long d = base.domain.dims();

  std::vector<RobustnessPoint> table;
  for (double offset : offsets) {
    Box core_box;
    core_box.lo = truth_center - core_halfwidth;
    core_box.hi = truth_center + core_halfwidth;
    for (long j = 0; j < d; ++j) {
      if (base.domain.hi(j) > base.domain.lo(j)) {  // shift only free dimensions
        core_box.lo(j) += offset;
        core_box.hi(j) += offset;
      }
    }

    RobustnessPoint point;
    point.offset = offset;
    std::vector<double> ps, rs, fs;
    double misspec_sum = 0.0;
    for (int t = 0; t < seeds; ++t) {
      SynthConfig cfg = base;
      cfg.seed = base.seed + static_cast<unsigned long>(t);
      SynthData synth = generate(cfg);
      const Dataset& train = synth.data;

      std::vector<int> core_rows;
      long outside = 0;
      for (long i = 0; i < train.n(); ++i) {
        if (!core_box.contains(train.features.row(i).transpose())) continue;
        core_rows.push_back(static_cast<int>(i));
        if (!truth.contains(train.features.row(i).transpose())) ++outside;
      }
      if (core_rows.size() < static_cast<size_t>(d) + 1)
        throw std::runtime_error("robustness_sweep: supplied core smaller than d + 1");
      misspec_sum += static_cast<double>(outside) / static_cast<double>(core_rows.size());

      // phases two and three only; the core is supplied, not searched
      Dataset core_data = train.subset(core_rows);
      LinearFit core_fit = ols(core_data.features, core_data.targets, OlsMode::strict);
      Eigen::VectorXd center = core_data.features.colwise().mean();

      const std::vector<unsigned char> labels = reject_labels(core_fit, train, rule);
      long count = 0;
      for (unsigned char l : labels) count += l;
      Eigen::MatrixXd rejected(count, train.d());
      long r = 0;
      for (long i = 0; i < train.n(); ++i)
        if (labels[static_cast<size_t>(i)]) rejected.row(r++) = train.features.row(i);
      Region region = grow_box(center, rejected, axis_directions(Eigen::VectorXd::Ones(train.d())),
                               shrink, bounding_box(train.features));

      RegionScore score = score_region(box_of(region), truth);
      ps.push_back(score.precision);
      rs.push_back(score.recall);
      fs.push_back(score.f1);
    }

    auto mean_sem = [](const std::vector<double>& xs, double& mean, double& sem) {
      mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      if (xs.size() < 2) {
        sem = 0.0;
        return;
      }
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(xs.size() - 1);
      sem = std::sqrt(var / static_cast<double>(xs.size()));
    };
    mean_sem(ps, point.mean_precision, point.sem_precision);
    mean_sem(rs, point.mean_recall, point.sem_recall);
    mean_sem(fs, point.mean_f1, point.sem_f1);
    point.mean_misspecification = misspec_sum / static_cast<double>(seeds);
    table.push_back(point);
  }
  return table;
}

}  // namespace ddgroup
