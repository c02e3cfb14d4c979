#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "spinobs/svg.hpp"

using namespace spinobs;
using Eigen::MatrixXd;

namespace {

PlotTable small_line() {
    PlotTable t;
    t.columns = {"x", "loss"};
    t.values.resize(2, 2);
    t.values << 0.0, 1.0, 1.0, 3.0;
    return t;
}

int count_of(const std::string& hay, const std::string& needle) {
    int n = 0;
    for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("svg") {

TEST_CASE("two-point line table renders a well-formed document") {
    const std::string doc = render_svg(small_line(), PlotKind::line);
    CHECK(doc.rfind("<svg", 0) == 0);
    CHECK(doc.find("</svg>") != std::string::npos);
    CHECK(count_of(doc, "<polyline") == 1);
    CHECK(count_of(doc, "<circle") == 2);  // one marker per point
    CHECK(count_of(doc, "<text") == count_of(doc, "</text>"));  // tags balance
}

TEST_CASE("empty tables are rejected") {
    PlotTable t;
    CHECK_THROWS_AS(render_svg(t, PlotKind::line), std::invalid_argument);
    t.columns = {"x", "y"};
    t.values.resize(0, 2);
    CHECK_THROWS_AS(render_svg(t, PlotKind::line), std::invalid_argument);
    t.values.resize(3, 2);
    t.values.setZero();
    t.columns = {"x"};
    CHECK_THROWS_AS(render_svg(t, PlotKind::line), std::invalid_argument);
}

TEST_CASE("log axes reject non-positive values and name the row") {
    PlotTable t;
    t.columns = {"t", "loss"};
    t.values.resize(3, 2);
    t.values << 1.0, 0.1, 2.0, 0.0, 3.0, 0.3;
    PlotOptions opt;
    opt.log_y = true;
    bool threw = false;
    try {
        render_svg(t, PlotKind::line, opt);
    } catch (const std::invalid_argument& e) {
        threw = true;
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    CHECK(threw);

    // good values pass on both axes
    t.values(1, 1) = 0.2;
    opt.log_x = true;
    CHECK(render_svg(t, PlotKind::line, opt).find("</svg>") != std::string::npos);
}

TEST_CASE("color-mapped scatter spans the colormap") {
    PlotTable t;
    t.columns = {"u", "v", "energy"};
    t.values.resize(100, 3);
    for (int i = 0; i < 100; ++i) t.values.row(i) << i * 0.01, std::sin(i * 0.2), i * 1.0;
    const std::string doc = render_svg(t, PlotKind::scatter_color);
    CHECK(count_of(doc, "<circle") == 100);
    CHECK(doc.find("#440154") != std::string::npos);  // colormap low end
    CHECK(doc.find("#fde725") != std::string::npos);  // colormap high end
    CHECK(doc.find("energy") != std::string::npos);   // colorbar label
}

TEST_CASE("heatmap needs a complete grid and renders one cell per row") {
    PlotTable t;
    t.columns = {"time", "latents", "loss"};
    t.values.resize(12, 3);
    int r = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) t.values.row(r++) << std::pow(10.0, i), j + 1.0, i * 0.1 + j;
    PlotOptions opt;
    opt.log_x = true;
    const std::string doc = render_svg(t, PlotKind::heatmap, opt);
    // 12 cells + background + frame + 24 colorbar steps + colorbar frame
    CHECK(count_of(doc, "<rect") == 12 + 1 + 1 + 24 + 1);

    PlotTable incomplete = t;
    incomplete.values.conservativeResize(11, 3);
    CHECK_THROWS_AS(render_svg(incomplete, PlotKind::heatmap, opt), std::invalid_argument);

    PlotTable dup = t;
    dup.values.row(11) = dup.values.row(0);
    CHECK_THROWS_AS(render_svg(dup, PlotKind::heatmap, opt), std::invalid_argument);
}

TEST_CASE("emitted files embed the configuration and are deterministic") {
    PlotOptions opt;
    opt.config = "seed=7 --nc 2";
    opt.title = "sweep";
    const std::string a = render_svg(small_line(), PlotKind::line, opt);
    const std::string b = render_svg(small_line(), PlotKind::line, opt);
    CHECK(a == b);
    CHECK(a.find("seed=7") != std::string::npos);
    CHECK(a.find("- -nc") != std::string::npos);  // "--" sanitized inside the comment
    CHECK(a.find("--nc") == std::string::npos);

    const std::string path = "svg_test_out.svg";
    emit_svg(small_line(), PlotKind::line, path, opt);
    std::ifstream in(path, std::ios::binary);
    std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(file == a);
    std::remove(path.c_str());
}

TEST_CASE("validation failures do not create output files") {
    PlotTable t;
    const std::string path = "svg_should_not_exist.svg";
    CHECK_THROWS_AS(emit_svg(t, PlotKind::line, path), std::invalid_argument);
    std::ifstream in(path);
    CHECK_FALSE(in.good());
}

}  // TEST_SUITE
