#pragma once

// Trajectory fan plots in plain SVG. Output depends only on the inputs, so a
// re-run with the same report produces byte-identical files.

#include <filesystem>
#include <string>
#include <vector>

#include "feoc/evaluation.hpp"

namespace feoc {

/// Obstacles drawn for a task, including the fixed PointMass2D obstacle.
std::vector<Obstacle> plotted_obstacles(const ControlProblem& problem, const TaskSpec& task);

/// One task: oracle fan (left) and policy fan (right) over obstacle contours.
/// Empty trajectory sets still produce axes, obstacle rings and the target.
std::string render_task_svg(const ControlProblem& problem, const TaskSpec& task,
                            const std::vector<Trajectory>& oracle,
                            const std::vector<Trajectory>& policy,
                            const std::string& title = "");

/// One file per task group ("<group>.svg"), one panel pair per row. Returns
/// the written paths in group first-appearance order.
std::vector<std::filesystem::path> emit_svg_plots(const ControlProblem& problem,
                                                  const std::vector<RowTrajectories>& rows,
                                                  const std::filesystem::path& out_dir);

}  // namespace feoc
