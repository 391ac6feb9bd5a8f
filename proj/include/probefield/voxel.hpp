#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "probefield/geom.hpp"
#include "probefield/image.hpp"
#include "probefield/parallel.hpp"

namespace probefield {

// Scalar grid over [-0.5, 0.5]^3 with cell centers on a uniform lattice,
// stored x-fastest.
struct VoxelGrid {
    int n = 0;
    std::vector<double> values;

    VoxelGrid() = default;
    explicit VoxelGrid(int resolution, double fill = 0.0)
        : n(resolution), values(static_cast<size_t>(resolution) * resolution * resolution, fill) {
        if (resolution < 2) throw std::invalid_argument("voxel grid resolution must be >= 2");
    }

    size_t index(int i, int j, int k) const {
        return (static_cast<size_t>(k) * n + j) * n + i;
    }
    double at(int i, int j, int k) const { return values[index(i, j, k)]; }
    double& at(int i, int j, int k) { return values[index(i, j, k)]; }

    double at_clamped(int i, int j, int k) const {
        i = std::clamp(i, 0, n - 1);
        j = std::clamp(j, 0, n - 1);
        k = std::clamp(k, 0, n - 1);
        return at(i, j, k);
    }

    Vec3 center(int i, int j, int k) const {
        double step = 1.0 / n;
        return {-kWorldHalfExtent + (i + 0.5) * step, -kWorldHalfExtent + (j + 0.5) * step,
                -kWorldHalfExtent + (k + 0.5) * step};
    }

    // Nearest-voxel index for a world point; clamped at the borders.
    void cell_of(const Vec3& p, int& i, int& j, int& k) const {
        i = std::clamp(static_cast<int>(std::floor((p.x + kWorldHalfExtent) * n)), 0, n - 1);
        j = std::clamp(static_cast<int>(std::floor((p.y + kWorldHalfExtent) * n)), 0, n - 1);
        k = std::clamp(static_cast<int>(std::floor((p.z + kWorldHalfExtent) * n)), 0, n - 1);
    }

    double voxel_diagonal() const { return std::sqrt(3.0) / n; }
};

// Space carving: a voxel survives iff its center projects onto silhouette
// mass (bilinear sample >= 0.5) in every view; off-image projections count
// as outside.
inline VoxelGrid visual_hull(const std::vector<SilhouetteImage>& sils,
                             const std::vector<Camera>& cams, int resolution, int n_threads = 1) {
    if (sils.size() != cams.size())
        throw std::invalid_argument("visual_hull: silhouette/camera count mismatch");
    if (sils.empty()) throw std::invalid_argument("visual_hull: need at least one view");
    std::vector<CameraFrame> frames;
    frames.reserve(cams.size());
    for (const auto& c : cams) frames.push_back(look_at_frame(c));

    VoxelGrid hull(resolution, 1.0);
    parallel_for(static_cast<std::int64_t>(resolution), n_threads,
                 [&](std::int64_t k0, std::int64_t k1, int) {
                     for (std::int64_t k = k0; k < k1; ++k)
                         for (int j = 0; j < resolution; ++j)
                             for (int i = 0; i < resolution; ++i) {
                                 Vec3 p = hull.center(i, j, static_cast<int>(k));
                                 for (size_t v = 0; v < cams.size(); ++v) {
                                     auto pix = project_to_pixel(cams[v], frames[v], p);
                                     bool in = false;
                                     if (pix && pix->first >= 0.0 && pix->first <= cams[v].width &&
                                         pix->second >= 0.0 && pix->second <= cams[v].height)
                                         in = bilinear_sample(sils[v], pix->first, pix->second) >= 0.5;
                                     if (!in) {
                                         hull.at(i, j, static_cast<int>(k)) = 0.0;
                                         break;
                                     }
                                 }
                             }
                 });
    return hull;
}

// 3x3x3 box mean with border replication.
inline VoxelGrid box_mean_filter(const VoxelGrid& g) {
    VoxelGrid out(g.n);
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                double sum = 0.0;
                for (int dk = -1; dk <= 1; ++dk)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int di = -1; di <= 1; ++di)
                            sum += g.at_clamped(i + di, j + dj, k + dk);
                out.at(i, j, k) = sum / 27.0;
            }
    return out;
}

// Boundary-concentrated sampling weights: W_p = 4 m (1 - m) of the mean-
// filtered hull, peaking where the filtered value crosses 0.5 and vanishing
// on constant regions.
inline VoxelGrid contour_weights_3d(const VoxelGrid& hull) {
    VoxelGrid m = box_mean_filter(hull);
    VoxelGrid w(hull.n);
    for (size_t i = 0; i < m.values.size(); ++i) w.values[i] = 4.0 * m.values[i] * (1.0 - m.values[i]);
    return w;
}

// --- raw debug format: magic "PFVG", u32 N, then N^3 f64 values x-fastest ---

inline void write_voxel_grid(const VoxelGrid& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("PFVG", 4);
    std::uint32_t n = static_cast<std::uint32_t>(g.n);
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(g.values.data()),
              static_cast<std::streamsize>(g.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline VoxelGrid read_voxel_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PFVG", 4) != 0)
        throw std::runtime_error("not a PFVG file: " + path);
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    VoxelGrid g(static_cast<int>(n));
    in.read(reinterpret_cast<char*>(g.values.data()),
            static_cast<std::streamsize>(g.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated PFVG file: " + path);
    return g;
}

}  // namespace probefield
