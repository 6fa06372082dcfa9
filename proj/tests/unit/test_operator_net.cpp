#include <doctest.h>

#include <cmath>

#include "feoc/errors.hpp"
#include "feoc/io.hpp"
#include "feoc/operator_net.hpp"
#include "feoc/trajopt.hpp"
#include "fixtures.hpp"

using namespace feoc;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

// 4x4 PointMass2D target grid in [1, 2]^2 with a few oracle trajectories each.
const std::vector<TaskDataset>& grid_datasets() {
  static const std::vector<TaskDataset> data = [] {
    const auto p = point_mass_2d();
    SolveOptions o;
    o.n_starts = 3;
    std::vector<TaskDataset> out;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const auto task = target_task(p, vec({1.0 + i / 3.0, 1.0 + j / 3.0}));
        out.push_back(generate_task_dataset(p, task, 8, 1000 + 4 * i + j, o).dataset);
      }
    return out;
  }();
  return data;
}

// Basis trained on every grid task except the (2, 2) corner.
const BasisSet& grid_basis() {
  static const BasisSet basis = [] {
    const auto& all = grid_datasets();
    const std::vector<TaskDataset> train(all.begin(), all.end() - 1);
    FeTrainConfig cfg;
    cfg.p = 8;
    cfg.hidden = {32, 32};
    cfg.steps = 1500;
    cfg.samples = 64;
    cfg.seed = 5;
    return fe_train(train, cfg).basis;
  }();
  return basis;
}

}  // namespace

TEST_SUITE("operator_net") {

TEST_CASE("eta encoding normalizes to the training box") {
  const auto pm = point_mass_2d();
  const EtaBox box2{vec({1, 1}), vec({2, 2})};
  CHECK(encode_eta(target_task(pm, vec({1, 2})), box2) == vec({0, 1}));
  const auto quad = quadcopter_12d();
  const EtaBox box3{vec({1, 1, 1}), vec({4, 4, 4})};
  CHECK(encode_eta(target_task(quad, vec({1, 4, 2.5})), box3) == vec({0, 1, 0.5}));
  const auto bike = bicycle_4d();
  CHECK_THROWS_AS(encode_eta(obstacle_task(bike, {Obstacle{30, {2, 2}, 0.5}}), box2), UnsupportedTaskKind);
  CHECK_THROWS_AS(eta_dim(ProblemKind::Bicycle4D), UnsupportedTaskKind);
}

TEST_CASE("box spans the training targets") {
  const auto pm = point_mass_2d();
  const EtaBox box = eta_box_for(ProblemKind::PointMass2D, {target_task(pm, vec({1, 1.5})), target_task(pm, vec({2, 1.2}))});
  CHECK(box.lo == vec({1, 1.2}));
  CHECK(box.hi == vec({2, 1.5}));
}

TEST_CASE("single task is memorized") {
  const BasisSet b = grid_basis();
  OperatorTrainConfig cfg;
  cfg.steps = 500;
  const OperatorTrainResult r = operator_train(b, {grid_datasets()[5]}, cfg, true);
  const Vector c = operator_infer(r.net, b, grid_datasets()[5].task).c;
  CHECK((c - r.targets[0]).cwiseAbs().maxCoeff() < 1e-3);
  CHECK_THROWS(operator_train(b, {grid_datasets()[5]}, cfg));
}

TEST_CASE("operator training on the grid") {
  const BasisSet& b = grid_basis();
  const std::uint64_t before = basis_checksum(b);
  std::vector<TaskDataset> train;
  for (std::size_t k = 0; k + 1 < grid_datasets().size(); ++k) train.push_back(grid_datasets()[k]);
  OperatorTrainConfig cfg;
  cfg.steps = 3000;
  cfg.seed = 3;
  const OperatorTrainResult r = operator_train(b, train, cfg);
  CHECK(basis_checksum(b) == before);

  SUBCASE("cached targets are the least-squares coefficients") {
    for (std::size_t k = 0; k < train.size(); ++k) {
      const Vector c = infer_coefficients_ls(b, train[k], b.lambda_tik).c;
      CHECK((c - r.targets[k]).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("held-out corner is predicted within 25%") {
    const TaskDataset& corner = grid_datasets().back();
    const Vector c_ls = infer_coefficients_ls(b, corner, b.lambda_tik).c;
    const Vector c_op = operator_infer(r.net, b, corner.task).c;
    CHECK((c_op - c_ls).norm() / c_ls.norm() < 0.25);
  }
  SUBCASE("training targets are reproduced") {
    for (std::size_t k = 0; k < train.size(); ++k) {
      const Vector c = operator_infer(r.net, b, train[k].task).c;
      CHECK((c - r.targets[k]).norm() / r.targets[k].norm() < 0.05);
    }
  }
  SUBCASE("inference is deterministic and continuous") {
    const auto pm = point_mass_2d();
    const TaskSpec t = target_task(pm, vec({1.37, 1.81}));
    const Vector a = operator_infer(r.net, b, t).c;
    CHECK(a == operator_infer(r.net, b, t).c);
    const TaskSpec t2 = target_task(pm, vec({1.37 + 1e-6, 1.81 - 1e-6}));
    CHECK((operator_infer(r.net, b, t2).c - a).cwiseAbs().maxCoeff() <= 1e-3);
  }
  SUBCASE("a different basis is rejected") {
    BasisSet other = b;
    other.lambda_tik = 2e-3;
    CHECK_THROWS_AS(operator_infer(r.net, other, train[0].task), BasisMismatch);
  }
}

TEST_CASE("zero-step training returns the initialized network") {
  const BasisSet b = grid_basis();
  OperatorTrainConfig cfg;
  cfg.steps = 0;
  cfg.seed = 17;
  const std::vector<TaskDataset> two{grid_datasets()[0], grid_datasets()[1]};
  const OperatorTrainResult r = operator_train(b, two, cfg);
  std::vector<int> widths{2};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  CHECK(r.net.params.flatten() == mlp_init(widths, cfg.activation, 8, 1, 17).flatten());
  CHECK(r.loss_curve.empty());
}

TEST_CASE("operator training rejects obstacle tasks") {
  const BasisSet b = fixtures::random_basis(ProblemKind::Bicycle4D, 4, {8}, 1);
  const TaskDataset d = fixtures::random_inputs(ProblemKind::Bicycle4D, 10, 1);
  CHECK_THROWS_AS(operator_train(b, {d, d}, OperatorTrainConfig{}), UnsupportedTaskKind);
}

}  // TEST_SUITE
