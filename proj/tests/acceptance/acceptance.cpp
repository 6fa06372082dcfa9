// Acceptance checks. Each criterion prints one PASS/FAIL line and returns
// non-zero on failure. Pipeline runs are cached under the cache directory so
// that criteria sharing a run (3, 4 and 10) train only once.
//
//   feoc_acceptance <criterion> [--cache DIR]
//   feoc_acceptance all [--cache DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "feoc/cli.hpp"
#include "feoc/config.hpp"
#include "feoc/errors.hpp"
#include "feoc/evaluation.hpp"
#include "feoc/io.hpp"
#include "feoc/tape.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace feoc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Cached CLI pipelines

struct ReportRow {
  std::string task_id, group, method;
  double true_objective = 0, predicted_objective = 0, control_cost = 0, obstacle_cost = 0;
  double terminal_deviation = 0, oracle_control_cost = 0, oracle_obstacle_cost = 0;
  double oracle_terminal_deviation = 0;
  int diverged = 0;
};

std::vector<ReportRow> read_report(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("missing report " + csv.string());
  std::string line;
  std::getline(in, line);
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() < 16) throw IoError("malformed report line: " + line);
    ReportRow r;
    r.task_id = f[0];
    r.group = f[1];
    r.method = f[2];
    r.true_objective = std::stod(f[3]);
    r.predicted_objective = std::stod(f[4]);
    r.control_cost = std::stod(f[6]);
    r.obstacle_cost = std::stod(f[7]);
    r.terminal_deviation = std::stod(f[9]);
    r.oracle_control_cost = std::stod(f[10]);
    r.oracle_obstacle_cost = std::stod(f[11]);
    r.oracle_terminal_deviation = std::stod(f[12]);
    r.diverged = std::stoi(f[14]);
    rows.push_back(r);
  }
  return rows;
}

fs::path config_file(const std::string& name) {
  return fs::path(FEOC_SOURCE_DIR) / "configs" / (name + ".json");
}

/// Runs datagen, train-fe, [train-op,] eval for a shipped config unless the
/// cache already holds a completed run of the same configuration.
fs::path run_pipeline(const std::string& name, const fs::path& cache, bool with_operator) {
  const fs::path cfg = config_file(name);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(load_config(cfg))));
  const fs::path out = cache / (name + "-" + hash);
  fs::create_directories(out);
  std::vector<std::string> stages{"datagen", "train-fe"};
  if (with_operator) stages.push_back("train-op");
  stages.push_back("eval");
  for (const auto& stage : stages) {
    const fs::path stamp = out / (stage + ".done");
    if (fs::exists(stamp)) continue;
    const auto t0 = Clock::now();
    std::cout << "  [" << name << "] " << stage << " ..." << std::flush;
    std::ostringstream sink;
    const int code = run_cli({stage, "--config", cfg.string(), "--out", out.string()}, sink, std::cerr);
    std::cout << " " << fmt("%.1f", seconds_since(t0)) << " s" << std::endl;
    if (code != 0) throw Error(name + " " + stage + " exited with " + std::to_string(code));
    std::ofstream(stamp) << fmt("%.1f", seconds_since(t0)) << "\n";
  }
  return out;
}

double stage_seconds(const fs::path& out) {
  double total = 0.0;
  for (const char* s : {"datagen", "train-fe", "train-op", "eval"}) {
    std::ifstream in(out / (std::string(s) + ".done"));
    double v = 0.0;
    if (in >> v) total += v;
  }
  return total;
}

// ---------------------------------------------------------------------------
// 1. Autodiff correctness

Outcome autodiff_correctness(const fs::path&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> width(2, 6), depth(1, 3), heads(1, 4), rows(1, 5);
  std::normal_distribution<double> n01;
  const Activation acts[] = {Activation::Tanh, Activation::Gelu};
  double worst = 0.0;
  std::size_t coords = 0;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<int> widths{width(rng)};
    for (int l = depth(rng); l > 0; --l) widths.push_back(width(rng));
    const int h = heads(rng), hd = heads(rng);
    const MlpParams p = mlp_init(widths, acts[inst % 2], h, hd, 1000 + static_cast<std::uint64_t>(inst));
    DenseMatrix in(rows(rng), widths.front());
    DenseMatrix target(in.rows(), h * hd);
    for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = n01(rng);
    for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = n01(rng);

    ad::Tape tape;
    const MlpVariables vars = record_variables(tape, p);
    const ad::Expr out = mlp_forward(vars, p.activation, tape.constant(in));
    const ad::Expr loss = ad::sum_squares(out - tape.constant(target));
    const Vector g = flatten_gradients(tape.grad(loss));

    auto f = [&](const std::vector<double>& v) {
      MlpParams q = p;
      q.assign(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
      return (mlp_forward_batch(q, in) - target).squaredNorm();
    };
    const Vector theta = p.flatten();
    const std::vector<double> flat(theta.data(), theta.data() + theta.size());
    // Richardson-extrapolated central differences (fourth order).
    const auto d1 = oracle::central_diff(f, flat, 1e-3);
    const auto d2 = oracle::central_diff(f, flat, 5e-4);
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double fd = (4.0 * d2[i] - d1[i]) / 3.0;
      const double a = g(static_cast<Eigen::Index>(i));
      const double rel = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
      worst = std::max(worst, rel);
      ++coords;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 10.0,
          "100 losses, " + std::to_string(coords) + " coordinates, max rel err " +
              fmt("%.2e", worst) + " (< 1e-5), " + fmt("%.2f", secs) + " s (< 10 s)"};
}

// ---------------------------------------------------------------------------
// 2. Trajopt oracle vs closed form

Outcome trajopt_closed_form(const fs::path&) {
  const auto t0 = Clock::now();
  ControlProblem p = point_mass_2d();
  p.fixed_obstacle = false;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-2.5, 0.0), uy(0.5, 2.5);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    Vector x0(2), y(2);
    x0 << ux(rng), ux(rng);
    y << uy(rng), uy(rng);
    const TaskSpec task = target_task(p, y);
    const Vector u = 100.0 * (y - x0) / (1.0 + 100.0 * p.horizon);
    DenseMatrix grid(p.n_steps, 2);
    for (int i = 0; i < p.n_steps; ++i) grid.row(i) = u.transpose();
    const double optimum = discretized_objective(p, task, grid, x0);
    const Trajectory tr = solve_open_loop(p, task, x0, SolveOptions{});
    worst = std::max(worst, std::abs(tr.objective - optimum) / optimum);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-3 && secs < 30.0, "10 random (x0, y), max relative gap " + fmt("%.2e", worst) +
                                            " (<= 1e-3), " + fmt("%.2f", secs) + " s (< 30 s)"};
}

// ---------------------------------------------------------------------------
// 3. 2D benchmark and 4. method ordering

Outcome point_mass_benchmark(const fs::path& cache) {
  const fs::path out = run_pipeline("point_mass_2d", cache, true);
  const auto rows = read_report(out / "report.csv");
  std::map<std::string, std::vector<double>> ratios;
  std::vector<double> truth;
  for (const auto& r : rows) {
    if (r.method != "ls") continue;
    ratios[r.group].push_back(r.predicted_objective / r.true_objective);
    truth.push_back(r.true_objective);
  }
  const double seen = mean(ratios["seen"]), interp = mean(ratios["interpolation"]),
               extrap = mean(ratios["extrapolation"]), jt = mean(truth);
  const double secs = stage_seconds(out);
  const bool ratios_ok = !ratios["seen"].empty() && seen <= 1.10 && interp <= 1.10 && extrap <= 1.20;
  const bool scale_ok = jt >= 0.5 * 4.86 && jt <= 1.5 * 4.86;
  std::string d = "LS ratio seen " + fmt("%.4f", seen) + ", interpolation " + fmt("%.4f", interp) +
                  " (<= 1.10), extrapolation " + fmt("%.4f", extrap) + " (<= 1.20); true J mean " +
                  fmt("%.3f", jt) + " (4.86 +/- 50%: " + (scale_ok ? "ok" : "out of range") + "); " +
                  fmt("%.0f", secs) + " s";
  return {ratios_ok && scale_ok, d};
}

Outcome method_ordering(const fs::path& cache) {
  const fs::path out = run_pipeline("point_mass_2d", cache, true);
  std::vector<double> ls, op;
  for (const auto& r : read_report(out / "report.csv")) {
    (r.method == "ls" ? ls : op).push_back(r.predicted_objective);
  }
  const double mls = mean(ls), mop = mean(op);
  return {!ls.empty() && !op.empty() && mop >= mls * 0.99,
          "mean operator J " + fmt("%.4f", mop) + " >= mean LS J " + fmt("%.4f", mls) + " x 0.99"};
}

// ---------------------------------------------------------------------------
// 5. Coefficient error rate in M

Outcome coefficient_rate(const fs::path&) {
  const auto t0 = Clock::now();
  const int p = 6;
  const double sigma = 0.2;
  const BasisSet basis = fixtures::random_basis(ProblemKind::PointMass2D, p, {16}, 11);
  const int ms[] = {50, 200, 800, 3200};
  std::vector<double> lx, ly;
  std::string medians;
  for (int M : ms) {
    std::vector<double> errs;
    for (int s = 0; s < 50; ++s) {
      const std::uint64_t seed = mix_seed(static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(s));
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> n01;
      Vector c_star(p);
      for (int j = 0; j < p; ++j) c_star(j) = n01(rng);
      TaskDataset d = fixtures::random_inputs(ProblemKind::PointMass2D, M, mix_seed(seed, 1));
      fixtures::label_with(d, basis, c_star);
      for (Eigen::Index i = 0; i < d.controls.size(); ++i) d.controls.data()[i] += sigma * n01(rng);
      const Vector c = infer_coefficients_ls(basis, d, 1e-10).c;
      errs.push_back((c - c_star).norm());
    }
    const double med = median(errs);
    medians += (medians.empty() ? "" : ", ") + std::to_string(M) + ": " + fmt("%.4f", med);
    lx.push_back(std::log(static_cast<double>(M)));
    ly.push_back(std::log(med));
  }
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  const double secs = seconds_since(t0);
  return {std::abs(slope + 0.5) <= 0.15 && secs < 300.0,
          "median error {" + medians + "}, slope " + fmt("%.3f", slope) + " (-0.5 +/- 0.15), " +
              fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------------------
// 6. Reconstruction loss against basis count

Outcome basis_count_trend(const fs::path& cache) {
  const auto t0 = Clock::now();
  const ControlProblem prob = point_mass_2d();
  SolveOptions opts;
  opts.n_starts = 3;
  const fs::path dir = cache / "basis_count";
  fs::create_directories(dir);
  std::vector<TaskDataset> data;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const fs::path f = dir / ("task_" + std::to_string(3 * i + j) + ".fedata");
      if (!fs::exists(f)) {
        Vector y(2);
        y << 1.0 + 0.5 * i, 1.0 + 0.5 * j;
        save_dataset(generate_task_dataset(prob, target_task(prob, y), 10,
                                           500 + static_cast<std::uint64_t>(3 * i + j), opts)
                         .dataset,
                     f);
      }
      data.push_back(load_dataset(f));
    }
  std::vector<double> med;
  std::string detail;
  for (int p : {4, 16, 64}) {
    std::vector<double> losses;
    for (std::uint64_t seed : {1, 2, 3}) {
      FeTrainConfig cfg;
      cfg.p = p;
      cfg.hidden = {64, 64};
      cfg.steps = 1500;
      cfg.samples = 128;
      cfg.seed = seed;
      losses.push_back(fe_reconstruction_loss(fe_train(data, cfg).basis, data));
    }
    med.push_back(median(losses));
    detail += (detail.empty() ? "" : ", ") + ("p=" + std::to_string(p) + ": " + fmt("%.3e", med.back()));
  }
  const bool ok = med[1] <= med[0] && med[2] <= med[1];
  return {ok, "median reconstruction loss {" + detail + "} non-increasing; " +
                  fmt("%.0f", seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------------------
// 7. Bicycle single obstacle

Outcome bicycle_benchmark(const fs::path& cache) {
  const fs::path out = run_pipeline("bicycle_4d", cache, false);
  std::vector<double> dev, odev, cost, ocost;
  for (const auto& r : read_report(out / "report.csv")) {
    dev.push_back(r.terminal_deviation);
    odev.push_back(r.oracle_terminal_deviation);
    cost.push_back(r.control_cost + r.obstacle_cost);
    ocost.push_back(r.oracle_control_cost + r.oracle_obstacle_cost);
  }
  const double d = mean(dev), od = mean(odev), c = mean(cost), oc = mean(ocost);
  const double gap = std::abs(c - oc) / oc;
  return {!dev.empty() && d < 0.05 && gap <= 0.15,
          "terminal deviation " + fmt("%.4f", d) + " (< 0.05; oracle " + fmt("%.4f", od) +
              "), control+obstacle cost " + fmt("%.4f", c) + " vs oracle " + fmt("%.4f", oc) +
              " (gap " + fmt("%.1f", 100 * gap) + "% <= 15%); " + fmt("%.0f", stage_seconds(out)) + " s"};
}

// ---------------------------------------------------------------------------
// 8. Quadcopter smoke test

Outcome quadcopter_smoke(const fs::path& cache) {
  const ControlProblem quad = quadcopter_12d();
  Vector x0 = Vector::Zero(12);
  x0.head(3) << 1.0, -2.0, 3.0;
  Vector hover = Vector::Zero(4);
  hover(0) = 9.8;
  const Trajectory tr = rk4_rollout(quad, x0, [&](const Vector&, double) { return hover; });
  double drift = 0.0;
  for (Eigen::Index k = 0; k < tr.states.rows(); ++k) {
    drift = std::max(drift, (tr.states.row(k).transpose() - x0).cwiseAbs().maxCoeff());
  }
  if (drift > 1e-14) return {false, "hover drift " + fmt("%.2e", drift) + " exceeds machine precision"};

  const fs::path out = run_pipeline("quadcopter_12d", cache, false);
  std::vector<double> ratios;
  for (const auto& r : read_report(out / "report.csv")) {
    ratios.push_back(r.predicted_objective / r.true_objective);
  }
  const double worst = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  const double m = mean(ratios);
  return {ratios.size() == 4 && m <= 1.10,
          "hover drift " + fmt("%.1e", drift) + "; " + std::to_string(ratios.size()) +
              " held-out targets, mean predicted/true " + fmt("%.4f", m) + " (<= 1.10), worst " +
              fmt("%.4f", worst) + "; " + fmt("%.0f", stage_seconds(out)) + " s"};
}

// ---------------------------------------------------------------------------
// 9. Exact-structure property suite

Outcome structure_suite(const fs::path&) {
  std::map<std::string, int> violations;
  std::map<std::string, int> checks;
  auto expect = [&](const std::string& name, bool ok) {
    ++checks[name];
    if (!ok) ++violations[name];
  };
  const ProblemKind kinds[] = {ProblemKind::PointMass2D, ProblemKind::Quadcopter12D,
                               ProblemKind::Bicycle4D};
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;

  for (int inst = 0; inst < 30; ++inst) {
    const ProblemKind kind = kinds[inst % 3];
    const int p = 2 + inst % 7;
    const BasisSet b = fixtures::random_basis(kind, p, {8}, 300 + static_cast<std::uint64_t>(inst));
    TaskDataset d = fixtures::random_inputs(kind, 10 + inst, 600 + static_cast<std::uint64_t>(inst));
    for (Eigen::Index i = 0; i < d.controls.size(); ++i) d.controls.data()[i] = n01(rng);

    const GramSystem gs = gram_and_rhs(b, d);
    expect("gram symmetric", (gs.gram - gs.gram.transpose()).cwiseAbs().maxCoeff() <=
                                 1e-14 * std::max(1.0, gs.gram.cwiseAbs().maxCoeff()));
    const double min_eig = Eigen::SelfAdjointEigenSolver<DenseMatrix>(gs.gram).eigenvalues().minCoeff();
    expect("gram psd", min_eig >= -1e-12 * std::max(1.0, gs.gram.norm()));

    const Vector c = infer_coefficients_ls(b, d, 1e-3).c;
    const double best = regularized_ls_loss(b, d, c, 1e-3);
    for (int k = 0; k < 20; ++k) {
      Vector delta(p);
      for (int j = 0; j < p; ++j) delta(j) = 1e-3 * n01(rng);
      expect("ls optimality", regularized_ls_loss(b, d, c + delta, 1e-3) >= best - 1e-12);
    }

    Vector c1(p), c2(p), x(b.input_dim() - 1);
    for (int j = 0; j < p; ++j) c1(j) = n01(rng), c2(j) = n01(rng);
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = n01(rng);
    const double a = n01(rng), bb = n01(rng), t = 0.3;
    const Vector lhs = policy_eval(b, a * c1 + bb * c2, x, t);
    const Vector rhs = a * policy_eval(b, c1, x, t) + bb * policy_eval(b, c2, x, t);
    expect("policy linearity", (lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, rhs.norm()));

    expect("dataset round trip", encode_dataset(decode_dataset(encode_dataset(d))) == encode_dataset(d));
    const Provenance prov{static_cast<std::uint64_t>(inst), 1, 2};
    const std::string bytes = encode_basis(b, prov);
    const std::string tmp = (fs::temp_directory_path() / "feoc_acceptance_basis.feckpt").string();
    write_file(tmp, bytes);
    const BasisCheckpoint back = load_basis(tmp);
    expect("checkpoint round trip", encode_basis(back.basis, back.provenance) == bytes);
  }

  for (int inst = 0; inst < 9; ++inst) {
    const ControlProblem prob = make_problem(kinds[inst % 3]);
    const Vector x0 = sample_initial_state(prob, static_cast<std::uint64_t>(inst));
    TaskSpec task;
    if (prob.kind == ProblemKind::Bicycle4D) {
      task = obstacle_task(prob, {Obstacle{30.0 + inst, {2.0, 2.5}, 0.5}});
    } else {
      Vector y = Vector::Constant(prob.kind == ProblemKind::Quadcopter12D ? 3 : 2, 1.0 + 0.1 * inst);
      task = target_task(prob, y);
    }
    DenseMatrix u(prob.n_steps, prob.control_dim);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = 0.5 * n01(rng);
    const Trajectory tr = trajectory_from_controls(prob, task, x0, u);
    for (auto q : {Quadrature::Left, Quadrature::Trapezoid}) {
      const CostBreakdown cb = cost_breakdown(prob, task, tr, q);
      const double j = discretized_objective(prob, task, u, x0, q);
      expect("objective decomposition", std::abs(cb.total() - j) <= 1e-10 * std::max(1.0, std::abs(j)));
    }
  }

  {
    const ControlProblem prob = point_mass_2d();
    Vector y(2);
    y << 1.5, 1.5;
    SolveOptions o;
    o.n_starts = 2;
    const auto r1 = generate_task_dataset(prob, target_task(prob, y), 3, 42, o);
    const auto r2 = generate_task_dataset(prob, target_task(prob, y), 3, 42, o);
    expect("deterministic datagen", encode_dataset(r1.dataset) == encode_dataset(r2.dataset));
    FeTrainConfig cfg;
    cfg.p = 4;
    cfg.hidden = {8};
    cfg.steps = 50;
    cfg.samples = 32;
    cfg.seed = 5;
    const BasisSet b1 = fe_train({r1.dataset}, cfg).basis, b2 = fe_train({r2.dataset}, cfg).basis;
    expect("deterministic training", encode_basis(b1, {}) == encode_basis(b2, {}));
    EvalPlan plan;
    plan.n_init = 2;
    plan.solver.n_starts = 1;
    plan.tasks = {{"t-0", "t", target_task(prob, y)}};
    const EvalReport e1 = evaluate_plan(prob, b1, nullptr, plan), e2 = evaluate_plan(prob, b1, nullptr, plan);
    expect("deterministic evaluation", e1.rows[0].predicted_objective == e2.rows[0].predicted_objective &&
                                           e1.rows[0].true_objective == e2.rows[0].true_objective);
  }

  int total = 0, bad = 0;
  std::string failing;
  for (const auto& [name, n] : checks) {
    total += n;
    const int v = violations[name];
    bad += v;
    if (v > 0) failing += " " + name + "(" + std::to_string(v) + ")";
  }
  return {bad == 0, std::to_string(total) + " checks over " + std::to_string(checks.size()) +
                        " properties, " + std::to_string(bad) + " violations" + failing};
}

// ---------------------------------------------------------------------------
// 10. Oracle dominance over every cached evaluation

Outcome oracle_dominance(const fs::path& cache) {
  int reports = 0, rows = 0;
  std::vector<std::string> bad;
  if (fs::exists(cache)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(cache)) {
      if (entry.path().filename() == "report.csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      ++reports;
      for (const auto& r : read_report(f)) {
        ++rows;
        if (r.predicted_objective < r.true_objective * (1.0 - 0.01)) {
          bad.push_back(f.parent_path().filename().string() + ":" + r.task_id + "/" + r.method);
        }
      }
    }
  }
  std::string d = std::to_string(rows) + " rows in " + std::to_string(reports) + " reports, " +
                  std::to_string(bad.size()) + " below oracle - 1%";
  for (const auto& b : bad) d += " " + b;
  return {reports > 0 && bad.empty(), d};
}

struct Criterion {
  const char* id;
  const char* name;
  std::function<Outcome(const fs::path&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {"1", "autodiff correctness", autodiff_correctness},
      {"2", "trajopt oracle vs closed form", trajopt_closed_form},
      {"3", "2D benchmark replication", point_mass_benchmark},
      {"4", "method ordering", method_ordering},
      {"5", "coefficient error rate", coefficient_rate},
      {"6", "loss trend in basis count", basis_count_trend},
      {"7", "bicycle single obstacle", bicycle_benchmark},
      {"8", "quadcopter smoke test", quadcopter_smoke},
      {"9", "exact-structure properties", structure_suite},
      {"10", "oracle dominance", oracle_dominance},
  };
  return list;
}

int run_one(const Criterion& c, const fs::path& cache) {
  Outcome o;
  try {
    o = c.run(cache);
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  std::cout << "criterion " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL") << " - "
            << o.detail << std::endl;
  return o.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  fs::path cache = fs::current_path() / "acceptance_cache";
  std::string which = "all";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--cache" && i + 1 < args.size()) {
      cache = args[++i];
    } else {
      which = args[i];
    }
  }
  int failed = 0;
  bool found = false;
  for (const auto& c : criteria()) {
    if (which != "all" && which != c.id) continue;
    found = true;
    failed += run_one(c, cache);
  }
  if (!found) {
    std::cerr << "unknown criterion '" << which << "'\n";
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
