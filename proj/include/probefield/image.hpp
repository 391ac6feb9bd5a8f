#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "probefield/geom.hpp"
#include "probefield/parallel.hpp"
#include "probefield/shape.hpp"

namespace probefield {

// 2D mask with values in [0,1]; 1 = inside the object.
struct SilhouetteImage {
    int width = 0, height = 0;
    std::vector<double> values;  // row-major, values[y * width + x]

    SilhouetteImage() = default;
    SilhouetteImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }

    // Border-replicated access.
    double at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return at(x, y);
    }
};

// Bilinear blend of the 4 surrounding pixel centers; coordinates outside the
// pixel-center range clamp to the border.
inline double bilinear_sample(const SilhouetteImage& img, double px, double py) {
    double gx = px - 0.5, gy = py - 0.5;
    int x0 = static_cast<int>(std::floor(gx));
    int y0 = static_cast<int>(std::floor(gy));
    double fx = gx - x0, fy = gy - y0;
    double v00 = img.at_clamped(x0, y0), v10 = img.at_clamped(x0 + 1, y0);
    double v01 = img.at_clamped(x0, y0 + 1), v11 = img.at_clamped(x0 + 1, y0 + 1);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

// 5-point Laplacian magnitude with border replication; flags contour pixels.
inline SilhouetteImage contour_weights_2d(const SilhouetteImage& img) {
    SilhouetteImage w(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double lap = 4.0 * img.at(x, y) - img.at_clamped(x - 1, y) - img.at_clamped(x + 1, y) -
                         img.at_clamped(x, y - 1) - img.at_clamped(x, y + 1);
            w.at(x, y) = std::abs(lap);
        }
    return w;
}

// Binary silhouette of an analytic shape: a pixel is 1 iff its center ray
// passes through the shape, tested by marching across the world box.
inline SilhouetteImage render_silhouette(const AnalyticShape& shape, const Camera& cam,
                                         double march_step = 1e-3, int n_threads = 1) {
    SilhouetteImage img(cam.width, cam.height);
    parallel_for(static_cast<std::int64_t>(cam.height), n_threads,
                 [&](std::int64_t y0, std::int64_t y1, int) {
                     for (std::int64_t y = y0; y < y1; ++y) {
                         for (int x = 0; x < cam.width; ++x) {
                             Ray ray = camera_ray(cam, x + 0.5, y + 0.5);
                             auto range = ray_box_range(ray);
                             if (!range) continue;
                             for (double t = range->first; t <= range->second; t += march_step) {
                                 if (inside(shape, ray.origin + ray.direction * t)) {
                                     img.at(x, static_cast<int>(y)) = 1.0;
                                     break;
                                 }
                             }
                         }
                     }
                 });
    return img;
}

// --- PGM (P5, maxval 255) I/O; value >= 128 means inside ---

inline void write_pgm(const SilhouetteImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<size_t>(img.width));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            row[static_cast<size_t>(x)] =
                static_cast<std::uint8_t>(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0 + 0.5);
        out.write(reinterpret_cast<const char*>(row.data()), img.width);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline SilhouetteImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("not a P5 PGM: " + path);
    auto skip_ws_comments = [&in]() {
        while (true) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
    };
    int w, h, maxval;
    skip_ws_comments();
    in >> w;
    skip_ws_comments();
    in >> h;
    skip_ws_comments();
    in >> maxval;
    in.get();  // single whitespace before raster
    if (w < 1 || h < 1 || maxval != 255) throw std::runtime_error("unsupported PGM: " + path);
    SilhouetteImage img(w, h);
    std::vector<std::uint8_t> raster(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!in) throw std::runtime_error("truncated PGM: " + path);
    for (size_t i = 0; i < raster.size(); ++i) img.values[i] = raster[i] >= 128 ? 1.0 : 0.0;
    return img;
}

}  // namespace probefield
