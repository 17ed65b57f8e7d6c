// heatmap.hpp: PNG color maps of sweep grids (needs libpng)

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "lambqed/io.hpp"
#include "lambqed/sweep.hpp"

namespace lambqed {

struct HeatmapStyle {
    int cell_px{0};           // 0 → fit the plot area to about 600 px
    bool log_scale{false};
    bool show_flags{true};    // hatch flagged cells instead of coloring them
    std::string title{};      // empty → channel name
};

struct HeatmapReport {
    int width{0};
    int height{0};
    double vmin{0.0};
    double vmax{0.0};
    std::size_t flagged_cells{0};
    std::vector<std::string> warnings;
};

namespace detail {

struct Rgb {
    std::uint8_t r, g, b;
};

/// Viridis sampled at nine stops.
inline Rgb colormap(double u) {
    static constexpr std::array<std::array<double, 3>, 9> stops{{
        {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530}, {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558},
        {0.128, 0.567, 0.551}, {0.135, 0.659, 0.518}, {0.478, 0.821, 0.318}, {0.993, 0.906, 0.144},
    }};
    u = std::clamp(u, 0.0, 1.0) * (stops.size() - 1);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(u), stops.size() - 2);
    const double f = u - static_cast<double>(i);
    auto ch = [&](int c) { return static_cast<std::uint8_t>(std::lround(255.0 * ((1 - f) * stops[i][c] + f * stops[i + 1][c]))); };
    return {ch(0), ch(1), ch(2)};
}

/// Classic 5×7 column-major glyphs for ASCII 32..126; bit 0 is the top row.
inline const std::array<std::array<std::uint8_t, 5>, 95>& font5x7() {
    static constexpr std::array<std::array<std::uint8_t, 5>, 95> glyphs{{
        {0x00, 0x00, 0x00, 0x00, 0x00}, {0x00, 0x00, 0x5F, 0x00, 0x00}, {0x00, 0x07, 0x00, 0x07, 0x00},
        {0x14, 0x7F, 0x14, 0x7F, 0x14}, {0x24, 0x2A, 0x7F, 0x2A, 0x12}, {0x23, 0x13, 0x08, 0x64, 0x62},
        {0x36, 0x49, 0x55, 0x22, 0x50}, {0x00, 0x05, 0x03, 0x00, 0x00}, {0x00, 0x1C, 0x22, 0x41, 0x00},
        {0x00, 0x41, 0x22, 0x1C, 0x00}, {0x08, 0x2A, 0x1C, 0x2A, 0x08}, {0x08, 0x08, 0x3E, 0x08, 0x08},
        {0x00, 0x50, 0x30, 0x00, 0x00}, {0x08, 0x08, 0x08, 0x08, 0x08}, {0x00, 0x60, 0x60, 0x00, 0x00},
        {0x20, 0x10, 0x08, 0x04, 0x02}, {0x3E, 0x51, 0x49, 0x45, 0x3E}, {0x00, 0x42, 0x7F, 0x40, 0x00},
        {0x42, 0x61, 0x51, 0x49, 0x46}, {0x21, 0x41, 0x45, 0x4B, 0x31}, {0x18, 0x14, 0x12, 0x7F, 0x10},
        {0x27, 0x45, 0x45, 0x45, 0x39}, {0x3C, 0x4A, 0x49, 0x49, 0x30}, {0x01, 0x71, 0x09, 0x05, 0x03},
        {0x36, 0x49, 0x49, 0x49, 0x36}, {0x06, 0x49, 0x49, 0x29, 0x1E}, {0x00, 0x36, 0x36, 0x00, 0x00},
        {0x00, 0x56, 0x36, 0x00, 0x00}, {0x00, 0x08, 0x14, 0x22, 0x41}, {0x14, 0x14, 0x14, 0x14, 0x14},
        {0x41, 0x22, 0x14, 0x08, 0x00}, {0x02, 0x01, 0x51, 0x09, 0x06}, {0x32, 0x49, 0x79, 0x41, 0x3E},
        {0x7E, 0x11, 0x11, 0x11, 0x7E}, {0x7F, 0x49, 0x49, 0x49, 0x36}, {0x3E, 0x41, 0x41, 0x41, 0x22},
        {0x7F, 0x41, 0x41, 0x22, 0x1C}, {0x7F, 0x49, 0x49, 0x49, 0x41}, {0x7F, 0x09, 0x09, 0x01, 0x01},
        {0x3E, 0x41, 0x41, 0x51, 0x32}, {0x7F, 0x08, 0x08, 0x08, 0x7F}, {0x00, 0x41, 0x7F, 0x41, 0x00},
        {0x20, 0x40, 0x41, 0x3F, 0x01}, {0x7F, 0x08, 0x14, 0x22, 0x41}, {0x7F, 0x40, 0x40, 0x40, 0x40},
        {0x7F, 0x02, 0x04, 0x02, 0x7F}, {0x7F, 0x04, 0x08, 0x10, 0x7F}, {0x3E, 0x41, 0x41, 0x41, 0x3E},
        {0x7F, 0x09, 0x09, 0x09, 0x06}, {0x3E, 0x41, 0x51, 0x21, 0x5E}, {0x7F, 0x09, 0x19, 0x29, 0x46},
        {0x46, 0x49, 0x49, 0x49, 0x31}, {0x01, 0x01, 0x7F, 0x01, 0x01}, {0x3F, 0x40, 0x40, 0x40, 0x3F},
        {0x1F, 0x20, 0x40, 0x20, 0x1F}, {0x7F, 0x20, 0x18, 0x20, 0x7F}, {0x63, 0x14, 0x08, 0x14, 0x63},
        {0x03, 0x04, 0x78, 0x04, 0x03}, {0x61, 0x51, 0x49, 0x45, 0x43}, {0x00, 0x00, 0x7F, 0x41, 0x41},
        {0x02, 0x04, 0x08, 0x10, 0x20}, {0x41, 0x41, 0x7F, 0x00, 0x00}, {0x04, 0x02, 0x01, 0x02, 0x04},
        {0x40, 0x40, 0x40, 0x40, 0x40}, {0x00, 0x01, 0x02, 0x04, 0x00}, {0x20, 0x54, 0x54, 0x54, 0x78},
        {0x7F, 0x48, 0x44, 0x44, 0x38}, {0x38, 0x44, 0x44, 0x44, 0x20}, {0x38, 0x44, 0x44, 0x48, 0x7F},
        {0x38, 0x54, 0x54, 0x54, 0x18}, {0x08, 0x7E, 0x09, 0x01, 0x02}, {0x08, 0x14, 0x54, 0x54, 0x3C},
        {0x7F, 0x08, 0x04, 0x04, 0x78}, {0x00, 0x44, 0x7D, 0x40, 0x00}, {0x20, 0x40, 0x44, 0x3D, 0x00},
        {0x00, 0x7F, 0x10, 0x28, 0x44}, {0x00, 0x41, 0x7F, 0x40, 0x00}, {0x7C, 0x04, 0x18, 0x04, 0x78},
        {0x7C, 0x08, 0x04, 0x04, 0x78}, {0x38, 0x44, 0x44, 0x44, 0x38}, {0x7C, 0x14, 0x14, 0x14, 0x08},
        {0x08, 0x14, 0x14, 0x18, 0x7C}, {0x7C, 0x08, 0x04, 0x04, 0x08}, {0x48, 0x54, 0x54, 0x54, 0x20},
        {0x04, 0x3F, 0x44, 0x40, 0x20}, {0x3C, 0x40, 0x40, 0x20, 0x7C}, {0x1C, 0x20, 0x40, 0x20, 0x1C},
        {0x3C, 0x40, 0x30, 0x40, 0x3C}, {0x44, 0x28, 0x10, 0x28, 0x44}, {0x0C, 0x50, 0x50, 0x50, 0x3C},
        {0x44, 0x64, 0x54, 0x4C, 0x44}, {0x00, 0x08, 0x36, 0x41, 0x00}, {0x00, 0x00, 0x7F, 0x00, 0x00},
        {0x00, 0x41, 0x36, 0x08, 0x00}, {0x08, 0x04, 0x08, 0x10, 0x08},
    }};
    return glyphs;
}

class Canvas {
public:
    Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 255) {}

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
        auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    void fill(int x0, int y0, int x1, int y1, Rgb c) {
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) set(x, y, c);
    }

    /// Text at scale s; `vertical` rotates it 90° counterclockwise with (x, y) the bottom-left.
    void text(int x, int y, const std::string& s, int scale = 2, bool vertical = false, Rgb c = {0, 0, 0}) {
        const auto& font = font5x7();
        int pen = 0;
        for (char ch : s) {
            const int code = (ch < 32 || ch > 126) ? '?' : ch;
            const auto& g = font[static_cast<std::size_t>(code - 32)];
            for (int col = 0; col < 5; ++col)
                for (int row = 0; row < 7; ++row) {
                    if (!((g[col] >> row) & 1)) continue;
                    for (int dy = 0; dy < scale; ++dy)
                        for (int dx = 0; dx < scale; ++dx) {
                            const int gx = pen + col * scale + dx;
                            const int gy = row * scale + dy;
                            if (vertical) set(x + gy, y - gx, c);
                            else set(x + gx, y + gy, c);
                        }
                }
            pen += 6 * scale;
        }
    }

    static int text_width(const std::string& s, int scale = 2) { return static_cast<int>(s.size()) * 6 * scale; }

    void write_png(const std::string& path) const {
        std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
        if (!fp) throw IoError("cannot open '" + path + "' for writing");
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw IoError("libpng initialization failed");
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw IoError("libpng failed while writing '" + path + "'");
        }
        png_init_io(png, fp.get());
        png_set_IHDR(png, info, static_cast<png_uint_32>(w_), static_cast<png_uint_32>(h_), 8, PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int y = 0; y < h_; ++y) {
            png_write_row(png, const_cast<png_bytep>(&px_[static_cast<std::size_t>(y) * w_ * 3]));
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }

    [[nodiscard]] Rgb get(int x, int y) const {
        const auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
        return {p[0], p[1], p[2]};
    }
    [[nodiscard]] int width() const noexcept { return w_; }
    [[nodiscard]] int height() const noexcept { return h_; }

private:
    int w_, h_;
    std::vector<std::uint8_t> px_;
};

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string axis_label(const std::string& name) {
    if (name == "t") return "t [1/omega]";
    if (name == "kappa" || name == "gamma" || name == "gamma_phi" || name == "g") return name + " [omega]";
    return name;
}

}  // namespace detail

/// Flagged cells are drawn as a magenta/white checkerboard, a pattern the
/// colormap never produces, so they cannot be confused with value 0.
inline detail::Canvas render_heatmap(const SweepGrid& grid, const std::string& channel, const HeatmapStyle& style,
                                     HeatmapReport& report) {
    using detail::Rgb;
    if (grid.cell_count() == 0) throw std::invalid_argument("render_heatmap: empty grid");
    const auto& vals = grid.channel_values(channel);
    const int nx = static_cast<int>(grid.x.size());
    const int ny = static_cast<int>(grid.y.size());

    auto transform = [&](double v) { return style.log_scale ? std::log10(std::max(v, 1e-300)) : v; };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    report.flagged_cells = 0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const bool flagged = style.show_flags && grid.flags[k] != cell_ok;
        if (flagged) ++report.flagged_cells;
        if (flagged || !std::isfinite(vals[k])) continue;
        lo = std::min(lo, transform(vals[k]));
        hi = std::max(hi, transform(vals[k]));
    }
    if (!std::isfinite(lo)) {
        report.warnings.push_back("no unflagged finite values; color scale undefined");
        lo = 0.0;
        hi = 1.0;
    } else if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
        report.warnings.push_back("degenerate color scale: all values equal " + detail::tick_label(hi));
    }
    report.vmin = lo;
    report.vmax = hi;
    const double span = hi - lo > 0.0 ? hi - lo : 1.0;

    const int cw = style.cell_px > 0 ? style.cell_px : std::max(1, 600 / nx);
    const int ch = style.cell_px > 0 ? style.cell_px : std::max(1, 400 / ny);
    const int left = 90, top = 40, bottom = 70, bar_gap = 20, bar_w = 24, right = 90;
    const int plot_w = cw * nx, plot_h = ch * ny;
    detail::Canvas img(left + plot_w + bar_gap + bar_w + right, top + plot_h + bottom);
    report.width = img.width();
    report.height = img.height();

    const Rgb magenta{230, 0, 230}, white{255, 255, 255}, black{0, 0, 0};
    for (int iy = 0; iy < ny; ++iy) {
        const int y0 = top + (ny - 1 - iy) * ch;  // y grows upward
        for (int ix = 0; ix < nx; ++ix) {
            const std::size_t k = grid.index(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
            const int x0 = left + ix * cw;
            const bool flagged = (style.show_flags && grid.flags[k] != cell_ok) || !std::isfinite(vals[k]);
            if (flagged) {
                for (int y = y0; y < y0 + ch; ++y)
                    for (int x = x0; x < x0 + cw; ++x) img.set(x, y, ((x / 3 + y / 3) % 2) ? magenta : white);
            } else {
                img.fill(x0, y0, x0 + cw, y0 + ch, detail::colormap((transform(vals[k]) - lo) / span));
            }
        }
    }

    // frame and ticks
    img.fill(left - 1, top - 1, left + plot_w + 1, top, black);
    img.fill(left - 1, top + plot_h, left + plot_w + 1, top + plot_h + 1, black);
    img.fill(left - 1, top, left, top + plot_h, black);
    img.fill(left + plot_w, top, left + plot_w + 1, top + plot_h, black);
    const int ticks = 5;
    for (int i = 0; i < ticks; ++i) {
        const double f = static_cast<double>(i) / (ticks - 1);
        const int ix = static_cast<int>(std::lround(f * (nx - 1)));
        const int px = left + ix * cw + cw / 2;
        img.fill(px, top + plot_h, px + 1, top + plot_h + 6, black);
        const std::string xl = detail::tick_label(grid.x.values[static_cast<std::size_t>(ix)]);
        img.text(px - detail::Canvas::text_width(xl, 1) / 2, top + plot_h + 9, xl, 1);
        const int iy = static_cast<int>(std::lround(f * (ny - 1)));
        const int py = top + (ny - 1 - iy) * ch + ch / 2;
        img.fill(left - 6, py, left, py + 1, black);
        const std::string yl = detail::tick_label(grid.y.values[static_cast<std::size_t>(iy)]);
        img.text(left - 9 - detail::Canvas::text_width(yl, 1), py - 3, yl, 1);
    }
    const std::string xlabel = detail::axis_label(grid.x.name);
    img.text(left + plot_w / 2 - detail::Canvas::text_width(xlabel) / 2, top + plot_h + 30, xlabel, 2);
    const std::string ylabel = detail::axis_label(grid.y.name);
    img.text(12, top + plot_h / 2 + detail::Canvas::text_width(ylabel) / 2, ylabel, 2, true);
    const std::string title = style.title.empty() ? channel + (style.log_scale ? " (log10)" : "") : style.title;
    img.text(left, 12, title, 2);

    // color bar
    const int bx = left + plot_w + bar_gap;
    for (int y = 0; y < plot_h; ++y) img.fill(bx, top + y, bx + bar_w, top + y + 1, detail::colormap(1.0 - static_cast<double>(y) / std::max(1, plot_h - 1)));
    img.text(bx + bar_w + 4, top, detail::tick_label(hi), 1);
    img.text(bx + bar_w + 4, top + plot_h - 7, detail::tick_label(lo), 1);
    if (report.flagged_cells > 0) {
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < bar_w; ++x) img.set(bx + x, top + plot_h + 30 + y, ((x / 3 + y / 3) % 2) ? magenta : white);
        img.text(bx - 10, top + plot_h + 46, "flagged", 1);
    }
    return img;
}

inline HeatmapReport emit_heatmap(const SweepGrid& grid, const std::string& channel, const std::string& path,
                                  const HeatmapStyle& style = {}) {
    HeatmapReport report;
    render_heatmap(grid, channel, style, report).write_png(path);
    return report;
}

}  // namespace lambqed
