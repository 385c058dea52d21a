#include "ddgroup/serialize.hpp"

namespace ddgroup {

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd json_vec(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  long i = 0;
  for (const auto& x : a) v(i++) = x.get<double>();
  return v;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void to_json(nlohmann::json& j, const Box& box) {
  j = nlohmann::json{{"lo", vec_json(box.lo)}, {"hi", vec_json(box.hi)}};
}

void from_json(const nlohmann::json& j, Box& box) {
  box.lo = json_vec(j.at("lo"));
  box.hi = json_vec(j.at("hi"));
  if (box.lo.size() != box.hi.size())
    throw std::invalid_argument("box: lo and hi lengths differ");
}

void to_json(nlohmann::json& j, const Region& region) {
  nlohmann::json constraints = nlohmann::json::array();
  for (const Constraint& c : region.constraints)
    constraints.push_back(nlohmann::json{
        {"direction", region.directions[static_cast<size_t>(c.direction)].label},
        {"value", c.value}});
  j = nlohmann::json{{"center", vec_json(region.center)},
                     {"constraints", constraints},
                     {"bounds", region.bounds}};
}

void to_json(nlohmann::json& j, const LinearFit& fit) {
  j = nlohmann::json{{"beta", vec_json(fit.beta)},
                     {"train_mse", fit.train_mse},
                     {"sigma_hat", opt_json(fit.sigma_hat)},
                     {"dof", fit.dof}};
}

void to_json(nlohmann::json& j, const GroupReport& report) {
  j = nlohmann::json{{"method", report.method},
                     {"rule", report.rule},
                     {"shrink", report.shrink},
                     {"speeds", report.speeds},
                     {"box", report.box},
                     {"region", report.region},
                     {"fit", report.fit},
                     {"core_center", vec_json(report.core_center)},
                     {"core_anchor", report.core_anchor},
                     {"core_k", report.core_k},
                     {"sigma_core", report.sigma_core},
                     {"train_fraction", report.train_fraction},
                     {"val_fraction", opt_json(report.val_fraction)},
                     {"test_fraction", opt_json(report.test_fraction)},
                     {"train_mse", opt_json(report.train_mse)},
                     {"val_mse", opt_json(report.val_mse)},
                     {"test_mse", opt_json(report.test_mse)},
                     {"val_q90", opt_json(report.val_q90)},
                     {"volume", report.volume},
                     {"rejected_count", report.rejected_count},
                     {"grid_index", report.grid_index},
                     {"round", report.round},
                     {"seed", report.seed},
                     {"flags", report.flags}};
}

void to_json(nlohmann::json& j, const RegionScore& score) {
  j = nlohmann::json{
      {"precision", score.precision}, {"recall", score.recall}, {"f1", score.f1}};
}

void to_json(nlohmann::json& j, const PlantedRegion& region) {
  j = nlohmann::json{{"region", region.region},
                     {"beta", vec_json(region.beta)},
                     {"sigma_in", region.sigma_in}};
}

void from_json(const nlohmann::json& j, PlantedRegion& region) {
  region.region = j.at("region").get<Box>();
  region.beta = json_vec(j.at("beta"));
  region.sigma_in = j.at("sigma_in").get<double>();
}

void to_json(nlohmann::json& j, const SynthConfig& config) {
  j = nlohmann::json{{"domain", config.domain},
                     {"regions", config.regions},
                     {"sigma_out", config.sigma_out},
                     {"n", config.n},
                     {"seed", config.seed},
                     {"feature_names", config.feature_names}};
}

void from_json(const nlohmann::json& j, SynthConfig& config) {
  config.domain = j.at("domain").get<Box>();
  config.regions = j.at("regions").get<std::vector<PlantedRegion>>();
  config.sigma_out = j.at("sigma_out").get<double>();
  config.n = j.at("n").get<long>();
  config.seed = j.at("seed").get<unsigned long>();
  config.feature_names = j.value("feature_names", std::vector<std::string>{});
}

std::string json_string(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string report_json_string(const GroupReport& report) {
  return json_string(nlohmann::json(report));
}

std::string reports_json_string(const std::vector<GroupReport>& reports) {
  return json_string(nlohmann::json(reports));
}

}  // namespace ddgroup
