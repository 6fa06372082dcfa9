#include "feoc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "feoc/io.hpp"

namespace feoc {

namespace {

constexpr double kPanel = 320.0;
constexpr double kMargin = 36.0;
constexpr double kTitle = 24.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  void finish() {
    if (!std::isfinite(x0)) *this = Box{-1, -1, 1, 1};
    // Square the box so circles stay circles.
    const double span = std::max({x1 - x0, y1 - y0, 1e-6}) * 1.1;
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    x0 = cx - span / 2;
    x1 = cx + span / 2;
    y0 = cy - span / 2;
    y1 = cy + span / 2;
  }
};

struct Frame {
  Box box;
  double ox = 0.0, oy = 0.0;  // panel origin in the document
  double sx(double x) const { return ox + kMargin + (x - box.x0) / (box.x1 - box.x0) * (kPanel - 2 * kMargin); }
  double sy(double y) const { return oy + kPanel - kMargin - (y - box.y0) / (box.y1 - box.y0) * (kPanel - 2 * kMargin); }
  double scale() const { return (kPanel - 2 * kMargin) / (box.x1 - box.x0); }
};

constexpr double kRingLevels[] = {0.8, 0.6, 0.4, 0.2, 0.05};

Box plot_box(const ControlProblem& problem, const TaskSpec& task,
             const std::vector<Trajectory>& oracle, const std::vector<Trajectory>& policy) {
  Box box;
  box.add(problem.init_mean(0), problem.init_mean(1));
  if (task.target.size() >= 2) box.add(task.target(0), task.target(1));
  for (const auto& o : plotted_obstacles(problem, task)) {
    const double r = o.sigma * std::sqrt(2.0 * std::log(1.0 / kRingLevels[2]));
    box.add(o.center.x() - r, o.center.y() - r);
    box.add(o.center.x() + r, o.center.y() + r);
  }
  for (const auto* set : {&oracle, &policy}) {
    for (const auto& tr : *set) {
      for (Eigen::Index k = 0; k < tr.states.rows(); ++k) box.add(tr.states(k, 0), tr.states(k, 1));
    }
  }
  box.finish();
  return box;
}

void panel(std::string& s, const Frame& f, const ControlProblem& problem, const TaskSpec& task,
           const std::vector<Trajectory>& trajs, const char* stroke, const char* dash,
           const std::string& label) {
  s += "<g>\n";
  s += "<rect x=\"" + num(f.ox + kMargin) + "\" y=\"" + num(f.oy + kMargin) + "\" width=\"" +
       num(kPanel - 2 * kMargin) + "\" height=\"" + num(kPanel - 2 * kMargin) +
       "\" fill=\"white\" stroke=\"#444\"/>\n";
  // Axis labels at the corners of the data box.
  s += "<text x=\"" + num(f.ox + kMargin) + "\" y=\"" + num(f.oy + kPanel - kMargin + 14) +
       "\" font-size=\"10\">" + num(f.box.x0) + "</text>\n";
  s += "<text x=\"" + num(f.ox + kPanel - kMargin) + "\" y=\"" + num(f.oy + kPanel - kMargin + 14) +
       "\" font-size=\"10\" text-anchor=\"end\">" + num(f.box.x1) + "</text>\n";
  s += "<text x=\"" + num(f.ox + kMargin - 4) + "\" y=\"" + num(f.oy + kPanel - kMargin) +
       "\" font-size=\"10\" text-anchor=\"end\">" + num(f.box.y0) + "</text>\n";
  s += "<text x=\"" + num(f.ox + kMargin - 4) + "\" y=\"" + num(f.oy + kMargin + 8) +
       "\" font-size=\"10\" text-anchor=\"end\">" + num(f.box.y1) + "</text>\n";
  s += "<text x=\"" + num(f.ox + kPanel / 2) + "\" y=\"" + num(f.oy + kMargin - 8) +
       "\" font-size=\"12\" text-anchor=\"middle\">" + escape(label) + "</text>\n";
  for (const auto& o : plotted_obstacles(problem, task)) {
    for (double level : kRingLevels) {
      const double r = o.sigma * std::sqrt(2.0 * std::log(1.0 / level));
      s += "<circle cx=\"" + num(f.sx(o.center.x())) + "\" cy=\"" + num(f.sy(o.center.y())) +
           "\" r=\"" + num(r * f.scale()) + "\" fill=\"#d33\" fill-opacity=\"0.08\" stroke=\"#d33\" stroke-width=\"0.6\"/>\n";
    }
  }
  for (const auto& tr : trajs) {
    if (tr.states.rows() == 0) continue;
    s += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"1\" stroke-opacity=\"0.7\"";
    if (dash[0] != '\0') s += " stroke-dasharray=\"" + std::string(dash) + "\"";
    s += " points=\"";
    for (Eigen::Index k = 0; k < tr.states.rows(); ++k) {
      if (k > 0) s += ' ';
      s += num(f.sx(tr.states(k, 0))) + "," + num(f.sy(tr.states(k, 1)));
    }
    s += "\"/>\n";
    s += "<circle cx=\"" + num(f.sx(tr.states(0, 0))) + "\" cy=\"" + num(f.sy(tr.states(0, 1))) +
         "\" r=\"1.5\" fill=\"" + std::string(stroke) + "\"/>\n";
  }
  if (task.target.size() >= 2) {
    const double tx = f.sx(task.target(0)), ty = f.sy(task.target(1));
    s += "<path d=\"M" + num(tx - 5) + " " + num(ty - 5) + " L" + num(tx + 5) + " " + num(ty + 5) +
         " M" + num(tx - 5) + " " + num(ty + 5) + " L" + num(tx + 5) + " " + num(ty - 5) +
         "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  s += "</g>\n";
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\">\n";
}

void task_pair(std::string& s, double oy, const ControlProblem& problem, const TaskSpec& task,
               const std::vector<Trajectory>& oracle, const std::vector<Trajectory>& policy,
               const std::string& title) {
  const Box box = plot_box(problem, task, oracle, policy);
  if (!title.empty()) {
    s += "<text x=\"" + num(kPanel) + "\" y=\"" + num(oy + 16) +
         "\" font-size=\"14\" text-anchor=\"middle\">" + escape(title) + "</text>\n";
  }
  Frame left{box, 0.0, oy + kTitle};
  Frame right{box, kPanel, oy + kTitle};
  panel(s, left, problem, task, oracle, "#1f4e9c", "", "oracle");
  panel(s, right, problem, task, policy, "#e07b00", "4 2", "policy");
}

}  // namespace

std::vector<Obstacle> plotted_obstacles(const ControlProblem& problem, const TaskSpec& task) {
  std::vector<Obstacle> out = task.obstacles;
  if (problem.kind == ProblemKind::PointMass2D && problem.fixed_obstacle) {
    // 50 exp(-1.25 |x|^2) is a Gaussian with sigma^2 = 0.4.
    out.push_back(Obstacle{50.0, Eigen::Vector2d::Zero(), std::sqrt(0.4)});
  }
  return out;
}

std::string render_task_svg(const ControlProblem& problem, const TaskSpec& task,
                            const std::vector<Trajectory>& oracle,
                            const std::vector<Trajectory>& policy, const std::string& title) {
  std::string s = header(2 * kPanel, kPanel + kTitle);
  task_pair(s, 0.0, problem, task, oracle, policy, title);
  s += "</svg>\n";
  return s;
}

std::vector<std::filesystem::path> emit_svg_plots(const ControlProblem& problem,
                                                  const std::vector<RowTrajectories>& rows,
                                                  const std::filesystem::path& out_dir) {
  std::vector<std::string> groups;
  for (const auto& r : rows) {
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& g : groups) {
    std::vector<const RowTrajectories*> members;
    for (const auto& r : rows) {
      if (r.group == g) members.push_back(&r);
    }
    const double h = static_cast<double>(members.size()) * (kPanel + kTitle);
    std::string s = header(2 * kPanel, h);
    double oy = 0.0;
    for (const auto* r : members) {
      task_pair(s, oy, problem, r->task, r->oracle, r->policy, r->task_id + " (" + to_string(r->method) + ")");
      oy += kPanel + kTitle;
    }
    s += "</svg>\n";
    const auto path = out_dir / (g + ".svg");
    write_file(path, s);
    written.push_back(path);
  }
  return written;
}

}  // namespace feoc
