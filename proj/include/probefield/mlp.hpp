#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "probefield/geom.hpp"
#include "probefield/parallel.hpp"

namespace probefield {

// Occupancy decoder: fully-connected layers over concat(z, p) with ReLU
// hidden activations and a sigmoid output. All arithmetic in double.
struct MlpLayer {
    int in = 0, out = 0;
    std::vector<double> W;  // row-major [out][in]
    std::vector<double> b;  // [out]
};

struct MlpField {
    int d_z = 0;
    std::vector<MlpLayer> layers;  // last layer has out == 1
    std::vector<double> z;

    int input_dim() const { return d_z + 3; }
    int n_layers() const { return static_cast<int>(layers.size()); }

    size_t param_count() const {
        size_t n = z.size();
        for (const auto& l : layers) n += l.W.size() + l.b.size();
        return n;
    }

    double operator()(const Vec3& p) const;
};

// Per-parameter accumulators mirroring MlpField.
struct Gradients {
    std::vector<std::vector<double>> dW, db;
    std::vector<double> dz;

    void init_like(const MlpField& f) {
        dW.assign(f.layers.size(), {});
        db.assign(f.layers.size(), {});
        for (size_t l = 0; l < f.layers.size(); ++l) {
            dW[l].assign(f.layers[l].W.size(), 0.0);
            db[l].assign(f.layers[l].b.size(), 0.0);
        }
        dz.assign(f.z.size(), 0.0);
    }

    void set_zero() {
        for (auto& w : dW) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : db) std::fill(b.begin(), b.end(), 0.0);
        std::fill(dz.begin(), dz.end(), 0.0);
    }

    void add(const Gradients& o) {
        for (size_t l = 0; l < dW.size(); ++l) {
            for (size_t i = 0; i < dW[l].size(); ++i) dW[l][i] += o.dW[l][i];
            for (size_t i = 0; i < db[l].size(); ++i) db[l][i] += o.db[l][i];
        }
        for (size_t i = 0; i < dz.size(); ++i) dz[i] += o.dz[i];
    }
};

namespace detail {

inline double dot_n(const double* a, const double* b, int n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        s4 += a[i + 4] * b[i + 4];
        s5 += a[i + 5] * b[i + 5];
        s6 += a[i + 6] * b[i + 6];
        s7 += a[i + 7] * b[i + 7];
    }
    double tail = 0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7)) + tail;
}

inline void axpy_n(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double sigmoid(double y) {
    if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
    double e = std::exp(y);
    return e / (1.0 + e);
}

constexpr int kBatchTile = 32;

}  // namespace detail

// Scratch buffers for one chunk; reusable across calls and private per thread.
struct MlpWorkspace {
    std::vector<std::vector<double>> act;    // act[l]: [count][out_l], post-activation
    std::vector<std::vector<double>> delta;
    std::vector<double> h1z;                 // layer-0 bias plus latent contribution
    std::vector<double> colsum0;
    int cached_count = -1;
};

// Forward pass over a chunk of points, retaining activations for a matching
// backward call. phi_out may be null when only the cache is wanted.
inline void mlp_forward_chunk(const MlpField& f, const Vec3* pts, int count, MlpWorkspace& ws,
                              double* phi_out) {
    const int L = f.n_layers();
    ws.act.resize(L);
    for (int l = 0; l < L; ++l) ws.act[l].resize(static_cast<size_t>(count) * f.layers[l].out);
    ws.cached_count = count;

    // The latent part of layer 0 is shared by every point in the chunk.
    const MlpLayer& l0 = f.layers[0];
    ws.h1z.assign(l0.out, 0.0);
    for (int o = 0; o < l0.out; ++o)
        ws.h1z[o] = l0.b[o] + detail::dot_n(&l0.W[static_cast<size_t>(o) * l0.in], f.z.data(), f.d_z);

    double* a0 = ws.act[0].data();
    for (int b = 0; b < count; ++b) {
        const Vec3& p = pts[b];
        double* row = a0 + static_cast<size_t>(b) * l0.out;
        for (int o = 0; o < l0.out; ++o) {
            const double* w = &l0.W[static_cast<size_t>(o) * l0.in + f.d_z];
            row[o] = ws.h1z[o] + w[0] * p.x + w[1] * p.y + w[2] * p.z;
        }
        if (L > 1)
            for (int o = 0; o < l0.out; ++o) row[o] = row[o] > 0.0 ? row[o] : 0.0;
    }

    for (int l = 1; l < L; ++l) {
        const MlpLayer& lay = f.layers[l];
        const double* prev = ws.act[l - 1].data();
        double* cur = ws.act[l].data();
        const bool last = (l == L - 1);
        for (int bt = 0; bt < count; bt += detail::kBatchTile) {
            int be = std::min(count, bt + detail::kBatchTile);
            for (int o = 0; o < lay.out; ++o) {
                const double* w = &lay.W[static_cast<size_t>(o) * lay.in];
                for (int b = bt; b < be; ++b) {
                    double y = lay.b[o] + detail::dot_n(w, prev + static_cast<size_t>(b) * lay.in,
                                                        lay.in);
                    cur[static_cast<size_t>(b) * lay.out + o] = last ? y : (y > 0.0 ? y : 0.0);
                }
            }
        }
    }

    // Sigmoid on the output layer.
    double* out = ws.act[L - 1].data();
    const int out_w = f.layers[L - 1].out;
    for (int b = 0; b < count; ++b) {
        double y = out[static_cast<size_t>(b) * out_w];
        if (!std::isfinite(y)) throw std::runtime_error("numerical overflow in forward pass");
        double phi = detail::sigmoid(y);
        out[static_cast<size_t>(b) * out_w] = phi;
        if (phi_out) phi_out[b] = phi;
    }
}

// Reverse-mode gradients for a chunk previously run through
// mlp_forward_chunk with the same workspace and points.
inline void mlp_backward_chunk(const MlpField& f, const Vec3* pts, int count, const double* dphi,
                               MlpWorkspace& ws, Gradients& g) {
    if (ws.cached_count != count)
        throw std::runtime_error("mlp_backward: cache does not match batch");
    const int L = f.n_layers();
    ws.delta.resize(L);
    for (int l = 0; l < L; ++l) ws.delta[l].resize(static_cast<size_t>(count) * f.layers[l].out);

    // Output delta through the sigmoid.
    {
        double* d = ws.delta[L - 1].data();
        const double* phi = ws.act[L - 1].data();
        for (int b = 0; b < count; ++b) d[b] = dphi[b] * phi[b] * (1.0 - phi[b]);
    }

    for (int l = L - 1; l >= 1; --l) {
        const MlpLayer& lay = f.layers[l];
        const double* d = ws.delta[l].data();
        const double* prev_act = ws.act[l - 1].data();
        double* d_prev = ws.delta[l - 1].data();
        std::fill(ws.delta[l - 1].begin(), ws.delta[l - 1].end(), 0.0);
        double* gw = g.dW[l].data();
        double* gb = g.db[l].data();
        for (int bt = 0; bt < count; bt += detail::kBatchTile) {
            int be = std::min(count, bt + detail::kBatchTile);
            for (int o = 0; o < lay.out; ++o) {
                const double* w = &lay.W[static_cast<size_t>(o) * lay.in];
                double* gwo = gw + static_cast<size_t>(o) * lay.in;
                double bias_acc = 0.0;
                for (int b = bt; b < be; ++b) {
                    double db_ = d[static_cast<size_t>(b) * lay.out + o];
                    if (db_ == 0.0) continue;
                    bias_acc += db_;
                    detail::axpy_n(db_, prev_act + static_cast<size_t>(b) * lay.in, gwo, lay.in);
                    detail::axpy_n(db_, w, d_prev + static_cast<size_t>(b) * lay.in, lay.in);
                }
                gb[o] += bias_acc;
            }
        }
        // ReLU mask of the producing layer.
        for (size_t i = 0; i < ws.delta[l - 1].size(); ++i)
            if (prev_act[i] <= 0.0) d_prev[i] = 0.0;
    }

    // Layer 0: the latent part reduces to a column sum because z is shared.
    const MlpLayer& l0 = f.layers[0];
    const double* d0 = ws.delta[0].data();
    ws.colsum0.assign(l0.out, 0.0);
    double* gw0 = g.dW[0].data();
    for (int b = 0; b < count; ++b) {
        const Vec3& p = pts[b];
        const double* drow = d0 + static_cast<size_t>(b) * l0.out;
        for (int o = 0; o < l0.out; ++o) {
            double db_ = drow[o];
            if (db_ == 0.0) continue;
            ws.colsum0[o] += db_;
            double* gwo = gw0 + static_cast<size_t>(o) * l0.in + f.d_z;
            gwo[0] += db_ * p.x;
            gwo[1] += db_ * p.y;
            gwo[2] += db_ * p.z;
        }
    }
    for (int o = 0; o < l0.out; ++o) {
        double cs = ws.colsum0[o];
        if (cs == 0.0) continue;
        detail::axpy_n(cs, f.z.data(), gw0 + static_cast<size_t>(o) * l0.in, f.d_z);
        detail::axpy_n(cs, &l0.W[static_cast<size_t>(o) * l0.in], g.dz.data(), f.d_z);
        g.db[0][o] += cs;
    }
}

inline double MlpField::operator()(const Vec3& p) const {
    thread_local MlpWorkspace ws;
    double phi;
    mlp_forward_chunk(*this, &p, 1, ws, &phi);
    return phi;
}

// Batch API used by the spec-level operations and tests.
inline std::vector<double> mlp_forward(const MlpField& f, std::span<const Vec3> pts,
                                       MlpWorkspace& ws) {
    std::vector<double> phi(pts.size());
    mlp_forward_chunk(f, pts.data(), static_cast<int>(pts.size()), ws, phi.data());
    return phi;
}

inline Gradients mlp_backward(const MlpField& f, std::span<const Vec3> pts,
                              std::span<const double> dphi, MlpWorkspace& ws) {
    if (dphi.size() != pts.size()) throw std::runtime_error("mlp_backward: cache does not match batch");
    Gradients g;
    g.init_like(f);
    mlp_backward_chunk(f, pts.data(), static_cast<int>(pts.size()), dphi.data(), ws, g);
    return g;
}

// Multi-threaded forward over a large point set; chunked per worker.
inline void mlp_forward_batch(const MlpField& f, const Vec3* pts, std::int64_t n, double* out,
                              int n_threads, int chunk = 512) {
    std::int64_t n_chunks = (n + chunk - 1) / chunk;
    parallel_for(n_chunks, n_threads, [&](std::int64_t c0, std::int64_t c1, int) {
        MlpWorkspace ws;
        for (std::int64_t c = c0; c < c1; ++c) {
            std::int64_t b = c * chunk;
            int cnt = static_cast<int>(std::min<std::int64_t>(chunk, n - b));
            mlp_forward_chunk(f, pts + b, cnt, ws, out + b);
        }
    });
}

// Fused forward+backward over a large point set; per-thread gradient
// accumulators are merged in thread order so a fixed thread count is
// reproducible and --threads 1 is bit-exact.
inline void mlp_forward_backward_batch(const MlpField& f, const Vec3* pts, const double* dphi,
                                       std::int64_t n, Gradients& g, int n_threads,
                                       int chunk = 512) {
    n_threads = resolve_threads(n_threads);
    std::int64_t n_chunks = (n + chunk - 1) / chunk;
    int workers = static_cast<int>(std::min<std::int64_t>(n_threads, std::max<std::int64_t>(n_chunks, 1)));
    std::vector<Gradients> partial(static_cast<size_t>(workers > 1 ? workers : 0));
    for (auto& p : partial) p.init_like(f);
    parallel_for(n_chunks, workers, [&](std::int64_t c0, std::int64_t c1, int tid) {
        Gradients& acc = workers > 1 ? partial[static_cast<size_t>(tid)] : g;
        MlpWorkspace ws;
        for (std::int64_t c = c0; c < c1; ++c) {
            std::int64_t b = c * chunk;
            int cnt = static_cast<int>(std::min<std::int64_t>(chunk, n - b));
            mlp_forward_chunk(f, pts + b, cnt, ws, nullptr);
            mlp_backward_chunk(f, pts + b, cnt, dphi + b, ws, acc);
        }
    });
    for (auto& p : partial) g.add(p);
}

// Xavier-uniform weights, zero biases, z ~ N(0, 0.01); reproducible by seed.
// widths lists every layer's output width and must end with 1.
inline MlpField init_mlp(std::uint64_t seed, const std::vector<int>& widths, int d_z) {
    if (widths.empty()) throw std::invalid_argument("init_mlp: widths must be nonempty");
    if (widths.back() != 1) throw std::invalid_argument("init_mlp: last output width must be 1");
    if (d_z < 0) throw std::invalid_argument("init_mlp: D_z must be >= 0");
    MlpField f;
    f.d_z = d_z;
    std::mt19937_64 rng(seed);
    int in = d_z + 3;
    for (int w : widths) {
        if (w < 1) throw std::invalid_argument("init_mlp: widths must be positive");
        MlpLayer l;
        l.in = in;
        l.out = w;
        l.W.resize(static_cast<size_t>(in) * w);
        l.b.assign(static_cast<size_t>(w), 0.0);
        double bound = std::sqrt(6.0 / (in + w));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (auto& v : l.W) v = u(rng);
        f.layers.push_back(std::move(l));
        in = w;
    }
    std::normal_distribution<double> nz(0.0, 0.01);
    f.z.resize(static_cast<size_t>(d_z));
    for (auto& v : f.z) v = nz(rng);
    return f;
}

// --- checkpoint: "PFLD", u32 version, u32 layer count, u32 widths, u32 D_z,
// then all parameters and z as little-endian f64 in declaration order ---

inline void save_checkpoint(const MlpField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("PFLD", 4);
    auto w32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    w32(1);
    w32(static_cast<std::uint32_t>(f.layers.size()));
    for (const auto& l : f.layers) w32(static_cast<std::uint32_t>(l.out));
    w32(static_cast<std::uint32_t>(f.d_z));
    auto wvec = [&out](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    for (const auto& l : f.layers) {
        wvec(l.W);
        wvec(l.b);
    }
    wvec(f.z);
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline MlpField load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PFLD", 4) != 0)
        throw std::runtime_error("not a PFLD checkpoint: " + path);
    auto r32 = [&in]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    std::uint32_t version = r32();
    if (version != 1) throw std::runtime_error("unsupported PFLD version in " + path);
    std::uint32_t n_layers = r32();
    std::vector<int> widths(n_layers);
    for (auto& w : widths) w = static_cast<int>(r32());
    int d_z = static_cast<int>(r32());
    if (!in) throw std::runtime_error("truncated PFLD header: " + path);

    MlpField f;
    f.d_z = d_z;
    int din = d_z + 3;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        MlpLayer layer;
        layer.in = din;
        layer.out = widths[l];
        layer.W.resize(static_cast<size_t>(din) * widths[l]);
        layer.b.resize(static_cast<size_t>(widths[l]));
        f.layers.push_back(std::move(layer));
        din = widths[l];
    }
    f.z.resize(static_cast<size_t>(d_z));
    auto rvec = [&in, &path](std::vector<double>& v) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw std::runtime_error("truncated PFLD payload: " + path);
    };
    for (auto& l : f.layers) {
        rvec(l.W);
        rvec(l.b);
    }
    rvec(f.z);
    return f;
}

}  // namespace probefield
