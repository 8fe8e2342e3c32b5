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

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

namespace strfkit::cli {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(int w, int h, const std::string& metadata) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
     << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!metadata.empty()) os << "<metadata>" << escape(metadata) << "</metadata>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

// Edge crossing between corner values va at pa and vb at pb.
std::array<double, 2> cross(std::array<double, 2> pa, std::array<double, 2> pb, double va, double vb, double level) {
  const double t = (va == vb) ? 0.5 : (level - va) / (vb - va);
  return {pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])};
}

}  // namespace

std::vector<Segment> contour_segments(const Eigen::MatrixXd& values, double level) {
  std::vector<Segment> out;
  for (Eigen::Index r = 0; r + 1 < values.rows(); ++r) {
    for (Eigen::Index c = 0; c + 1 < values.cols(); ++c) {
      // corners counter-clockwise: 0 (c, r), 1 (c+1, r), 2 (c+1, r+1), 3 (c, r+1)
      const double x = static_cast<double>(c), y = static_cast<double>(r);
      const std::array<std::array<double, 2>, 4> p{{{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}}};
      const std::array<double, 4> v{values(r, c), values(r, c + 1), values(r + 1, c + 1), values(r + 1, c)};
      int mask = 0;
      for (int k = 0; k < 4; ++k)
        if (v[static_cast<std::size_t>(k)] >= level) mask |= 1 << k;
      if (mask == 0 || mask == 15) continue;
      auto edge = [&](int e) {
        const auto i = static_cast<std::size_t>(e), j = static_cast<std::size_t>((e + 1) % 4);
        return cross(p[i], p[j], v[i], v[j], level);
      };
      // edges: e0 between corners 0-1, e1 1-2, e2 2-3, e3 3-0
      std::vector<std::pair<int, int>> pairs;
      switch (mask) {
        case 1: case 14: pairs = {{3, 0}}; break;
        case 2: case 13: pairs = {{0, 1}}; break;
        case 3: case 12: pairs = {{3, 1}}; break;
        case 4: case 11: pairs = {{1, 2}}; break;
        case 6: case 9: pairs = {{0, 2}}; break;
        case 7: case 8: pairs = {{2, 3}}; break;
        case 5: case 10: {
          const bool centre_high = (v[0] + v[1] + v[2] + v[3]) / 4.0 >= level;
          // corners 0 and 2 high for mask 5
          if ((mask == 5) == centre_high)
            pairs = {{0, 1}, {2, 3}};
          else
            pairs = {{3, 0}, {1, 2}};
          break;
        }
        default: break;
      }
      for (auto [e1, e2] : pairs) out.push_back({edge(e1), edge(e2)});
    }
  }
  return out;
}

std::string modulation_figure(std::span<const ModulationPoint> points, const DensityGrid* density,
                              const ConversionRates& rates, const LowBox& box, const std::string& metadata) {
  const int w = 560, h = 380, ml = 60, mr = 20, mt = 20, mb = 50;
  const double pw = w - ml - mr, ph = h - mt - mb;
  const double wmax = rates.frame_rate / 2.0, Wmax = rates.channels_per_octave / 2.0;
  auto sx = [&](double omega) { return ml + (omega + wmax) / (2.0 * wmax) * pw; };
  auto sy = [&](double Omega) { return mt + ph - Omega / Wmax * ph; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << header(w, h, metadata);
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double omega = -wmax + i * wmax / 2.0, Omega = i * Wmax / 4.0;
    os << "<text x=\"" << sx(omega) << "\" y=\"" << mt + ph + 15 << "\" text-anchor=\"middle\">"
       << std::setprecision(1) << omega << "</text>\n";
    os << "<text x=\"" << ml - 5 << "\" y=\"" << sy(Omega) + 4 << "\" text-anchor=\"end\">" << Omega
       << "</text>\n" << std::setprecision(2);
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 10
     << "\" text-anchor=\"middle\">temporal modulation (Hz)</text>\n";
  os << "<text transform=\"translate(15," << mt + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">spectral modulation (cyc/oct)</text>\n";

  if (density != nullptr && density->values.size() > 0) {
    const auto& g = *density;
    const double vmax = g.values.maxCoeff();
    const double dx = g.omega_axis.size() > 1 ? g.omega_axis[1] - g.omega_axis[0] : 0.0;
    const double dy = g.Omega_axis.size() > 1 ? g.Omega_axis[1] - g.Omega_axis[0] : 0.0;
    for (int lv = 1; lv <= 5; ++lv) {
      const double level = vmax * lv / 6.0;
      os << "<path fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" d=\"";
      for (const auto& s : contour_segments(g.values, level)) {
        os << 'M' << sx(g.omega_axis.front() + s.a[0] * dx) << ',' << sy(g.Omega_axis.front() + s.a[1] * dy) << 'L'
           << sx(g.omega_axis.front() + s.b[0] * dx) << ',' << sy(g.Omega_axis.front() + s.b[1] * dy);
      }
      os << "\"/>\n";
    }
  }

  const double bx0 = sx(std::max(-box.delta_t, -wmax)), bx1 = sx(std::min(box.delta_t, wmax));
  const double by = sy(std::min(box.delta_f, Wmax));
  os << "<rect x=\"" << bx0 << "\" y=\"" << by << "\" width=\"" << bx1 - bx0 << "\" height=\"" << mt + ph - by
     << "\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4,3\"/>\n";
  for (const auto& p : points) {
    os << "<circle cx=\"" << sx(std::clamp(p.omega, -wmax, wmax)) << "\" cy=\""
       << sy(std::clamp(p.Omega, 0.0, Wmax)) << "\" r=\"3\" fill=\"firebrick\" fill-opacity=\"0.7\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string dendrogram_figure(const Dendrogram& tree, const std::string& metadata) {
  const auto leaves = tree.root.leaves();
  const int n = static_cast<int>(leaves.size());
  const int w = std::max(300, 80 * n + 80), h = 360, ml = 60, mr = 20, mt = 20, mb = 60;
  const double pw = w - ml - mr, ph = h - mt - mb;
  const double top = tree.root.merge_height > 0.0 ? tree.root.merge_height : 1.0;
  auto sy = [&](double height) { return mt + ph - height / top * ph; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << header(w, h, metadata);
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = top * i / 4.0;
    os << "<text x=\"" << ml - 5 << "\" y=\"" << sy(v) + 4 << "\" text-anchor=\"end\">" << std::setprecision(3) << v
       << "</text>\n" << std::setprecision(2);
  }
  os << "<text transform=\"translate(15," << mt + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">merge distance</text>\n";

  int next_leaf = 0;
  const double step = pw / n;
  // Returns the x position of the node.
  std::function<double(const DendrogramNode&)> draw = [&](const DendrogramNode& node) -> double {
    if (node.is_leaf()) {
      const double x = ml + step * (next_leaf++ + 0.5);
      os << "<text x=\"" << x << "\" y=\"" << mt + ph + 15 << "\" text-anchor=\"middle\">" << escape(node.name)
         << "</text>\n";
      return x;
    }
    const double xl = draw(node.children[0]);
    const double xr = draw(node.children[1]);
    const double y = sy(node.merge_height);
    const double yl = sy(node.children[0].merge_height), yr = sy(node.children[1].merge_height);
    os << "<path fill=\"none\" stroke=\"black\" d=\"M" << xl << ',' << yl << "V" << y << "H" << xr << "V" << yr
       << "\"/>\n";
    return (xl + xr) / 2.0;
  };
  draw(tree.root);
  os << "</svg>\n";
  return os.str();
}

}  // namespace strfkit::cli
