#pragma once

// Minimal static-SVG emission for the pipeline's three figure shapes: line
// charts (loss versus latent count), color-mapped scatter (2-D embeddings
// colored by an auxiliary quantity), and heatmaps (loss versus time and
// latent count).  Output is self-contained SVG 1.1 with axes, optional log
// scales, and the generating configuration embedded as a comment.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace spinobs {

struct PlotTable {
    std::vector<std::string> columns;  // one name per column of values
    Eigen::MatrixXd values;            // one row per record
};

enum class PlotKind {
    line,           // column 0 = x; every later column is one polyline
    scatter_color,  // columns (x, y, c): c mapped through the colormap
    heatmap,        // columns (x, y, value): complete rectangular grid
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 440;
    std::string config;  // provenance text embedded as an SVG comment
};

// Renders the plot to an SVG document string.  Throws std::invalid_argument
// for an empty table, a column count that does not match the plot kind, a
// non-positive value on a log-scaled axis (the message names the row), or an
// incomplete heatmap grid.
std::string render_svg(const PlotTable& table, PlotKind kind, const PlotOptions& opt = {});

// render_svg followed by an atomic single write; the file is not created when
// validation fails.
void emit_svg(const PlotTable& table, PlotKind kind, const std::string& path,
              const PlotOptions& opt = {});

}  // namespace spinobs
