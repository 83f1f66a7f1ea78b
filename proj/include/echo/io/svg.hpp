// svg.hpp - static vector-graphics plots of sweep datasets
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "echo/types.hpp"

namespace echo::io {

struct PlotSeries {
    SweepCurve data;
    // optional smooth overlay (already in the curve's units)
    std::vector<double> overlay_x;
    std::vector<double> overlay_y;
    std::string name;
};

struct PlotOptions {
    std::string title;
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 440;
    std::string provenance;   // embedded as a comment (manifest hash)
};

/// Render one or more series into an SVG document. All series must share
/// abscissa and ordinate dimensions; a mismatch raises UnitError. An empty
/// dataset raises ValidationError before any output is produced.
std::string render_svg(const std::vector<PlotSeries>& series,
                       const PlotOptions& options);

void write_svg(const std::filesystem::path& path,
               const std::vector<PlotSeries>& series,
               const PlotOptions& options);

}  // namespace echo::io
