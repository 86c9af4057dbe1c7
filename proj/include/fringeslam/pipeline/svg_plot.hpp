#pragma once

#include <filesystem>

#include "fringeslam/localization/trajectory.hpp"

namespace fringeslam::pipeline {

// Standalone top-down (world x against z) plot of one or two trajectories:
// the estimate as a solid line with per-frame dots, the optional ground truth
// dashed. Pure SVG text, no display or font dependencies beyond defaults.
void write_trajectory_svg(const std::filesystem::path& path,
                          const localization::Trajectory& estimated,
                          const localization::Trajectory* truth = nullptr);

}  // namespace fringeslam::pipeline
