#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "liefm/errors.hpp"
#include "liefm/training.hpp"

using namespace liefm;

TEST_CASE("cfm_sample: point masses give a zero target") {
  const auto group = make_group("se2");
  const Distribution point = make_distribution(*group, "point:at=0.3");
  Rng rng(1);
  const CfmSample s = cfm_sample(*group, 64, point, point, 1e-3, rng);
  CHECK(s.batch.targets.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cfm_sample on R^1 from 0 to 1 has target 1 at every time") {
  const auto group = make_group("r1");
  const Distribution zero = make_distribution(*group, "point:at=0");
  const Distribution one = make_distribution(*group, "point:at=1");
  Rng rng(2);
  const CfmSample s = cfm_sample(*group, 256, zero, one, 1e-3, rng);
  for (Eigen::Index j = 0; j < s.batch.size(); ++j) {
    CHECK(s.batch.targets(0, j) == 1.0);
    CHECK(s.batch.features(0, j) == doctest::Approx(s.batch.times[j]).epsilon(1e-15));
  }
}

TEST_CASE("cfm_sample: T is uniform on [0, 1 - eps]") {
  const auto group = make_group("r1");
  const Distribution zero = make_distribution(*group, "point:at=0");
  const double eps = 0.1;
  Rng rng(3);
  const CfmSample s = cfm_sample(*group, 100000, zero, zero, eps, rng);
  const double mean = s.batch.times.mean();
  const double sd = (1.0 - eps) / std::sqrt(12.0) / std::sqrt(100000.0);
  CHECK(std::abs(mean - (1.0 - eps) / 2.0) < 3.0 * sd);
  CHECK(s.batch.times.minCoeff() >= 0.0);
  CHECK(s.batch.times.maxCoeff() < 1.0 - eps);
}

TEST_CASE("cfm_sample target equals the conditional field at the interpolant") {
  for (const char* id : {"se2", "so3", "se2xr2"}) {
    CAPTURE(id);
    const auto group = make_group(id);
    const Distribution source = make_distribution(*group, "hline");
    const Distribution target = make_distribution(*group, "vline");
    Rng rng(4);
    const CfmSample s = cfm_sample(*group, 128, source, target, 1e-3, rng);
    for (Eigen::Index j = 0; j < s.batch.size(); ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const double t = s.batch.times[j];
      CHECK(distance(*group, s.gt[jj], exp_curve(*group, s.g0[jj], s.g1[jj], t)) < 1e-12);
      const AlgebraVector u = conditional_field(*group, s.gt[jj], s.g1[jj], t);
      CHECK((u - s.batch.targets.col(j)).cwiseAbs().maxCoeff() < 1e-6);
      CHECK((group->features(s.gt[jj]) - s.batch.features.col(j)).norm() == 0.0);
    }
  }
}

TEST_CASE("point-mass training stays at zero loss") {
  TrainConfig config;
  config.group = "se2";
  config.source = "point:at=0.2";
  config.target = "point:at=0.2";
  config.steps = 200;
  config.batch = 32;
  const TrainResult result = train(config);
  REQUIRE(result.losses.size() == 200);
  CHECK(result.losses.back() < 1e-6);
}

TEST_CASE("R^1 delta-to-delta training learns the constant field on the segment") {
  // Short run; the acceptance suite checks the whole [0,1] x [0,0.9] square
  // after default-length training.
  TrainConfig config;
  config.group = "r1";
  config.source = "point:at=0";
  config.target = "point:at=1";
  config.steps = 1500;
  config.batch = 64;
  config.width = 32;
  config.hidden_layers = 2;
  const TrainResult result = train(config);
  double worst = 0.0;
  for (int k = 0; k <= 18; ++k) {
    const double t = 0.05 * k;
    worst = std::max(worst, std::abs(forward(result.net, Eigen::VectorXd::Constant(1, t), t)[0] - 1.0));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("training is deterministic in the seed") {
  TrainConfig config;
  config.group = "so3";
  config.steps = 20;
  config.batch = 16;
  config.seed = 42;
  const TrainResult a = train(config);
  const TrainResult b = train(config);
  CHECK(a.losses == b.losses);
  CHECK(a.net.flat_parameters() == b.net.flat_parameters());
  config.seed = 43;
  CHECK(train(config).losses != a.losses);
}

TEST_CASE("training aborts on a non-finite loss and reports the step") {
  TrainConfig config;
  config.group = "se2";
  config.steps = 5;
  config.batch = 8;
  config.metric_weights = {1e308, 1e308, 1e308};
  try {
    train(config);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  TrainConfig config;
  config.steps = 0;
  CHECK_THROWS_AS(config.validate(), UsageError);
  config = {};
  config.epsilon = 1.0;
  CHECK_THROWS_AS(config.validate(), UsageError);
  config = {};
  config.metric_weights = {1.0, 2.0};
  CHECK_THROWS_AS(config.weights(3), UsageError);
  CHECK(config.weights(2).values() == Eigen::Vector2d(1.0, 2.0));
}

TEST_CASE("loss log round trip and smoothing") {
  const std::vector<double> losses = {3.25, 1.0 / 3.0, 1e-300, 0.1 + 0.2};
  const auto path = std::filesystem::temp_directory_path() / "liefm_test_loss.csv";
  write_loss_log(losses, path);
  CHECK(read_loss_log(path) == losses);
  std::filesystem::remove(path);
  const auto s = smooth({1.0, 2.0, 3.0, 4.0}, 2);
  CHECK(s == std::vector<double>{1.0, 1.5, 2.5, 3.5});
}
