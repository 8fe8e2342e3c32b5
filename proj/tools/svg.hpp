// Copyright 2026 The strfkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal SVG rendering for the analysis figures.

#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <vector>

#include "strfkit/gaborkit.hpp"
#include "strfkit/modanalysis.hpp"
#include "strfkit/taskdist.hpp"

namespace strfkit::cli {

// Line segment in lattice coordinates (column, row), fractional.
struct Segment {
  std::array<double, 2> a;
  std::array<double, 2> b;
};

// Marching squares iso-line of a lattice at one level. Saddle cells are
// resolved with the cell-centre average.
std::vector<Segment> contour_segments(const Eigen::MatrixXd& values, double level);

// Scatter of the population in the (omega, Omega) plane with density
// contours (if given) and the low-modulation box outline.
std::string modulation_figure(std::span<const ModulationPoint> points, const DensityGrid* density,
                              const ConversionRates& rates, const LowBox& box, const std::string& metadata);

std::string dendrogram_figure(const Dendrogram& tree, const std::string& metadata);

}  // namespace strfkit::cli
