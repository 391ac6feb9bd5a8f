#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace probefield {

// The canonical shape domain is the cube [-0.5, 0.5]^3.
inline constexpr double kWorldHalfExtent = 0.5;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

    double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    return v / n;
}

inline Vec3 axis_unit(int axis) {
    Vec3 e{};
    e[axis] = 1.0;
    return e;
}

inline bool in_world_box(const Vec3& p) {
    return std::abs(p.x) <= kWorldHalfExtent && std::abs(p.y) <= kWorldHalfExtent &&
           std::abs(p.z) <= kWorldHalfExtent;
}

inline Vec3 clamp_to_world_box(Vec3 p) {
    for (int a = 0; a < 3; ++a)
        p[a] = std::min(kWorldHalfExtent, std::max(-kWorldHalfExtent, p[a]));
    return p;
}

struct Camera {
    Vec3 position;
    Vec3 look_at;
    Vec3 up{0.0, 1.0, 0.0};
    double vertical_fov = 0.0;  // radians
    int width = 0, height = 0;
};

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
};

struct CameraFrame {
    Vec3 right, up, forward;
};

// Orthonormal frame with forward from position toward look_at; right-handed
// as (right, up, -forward).
inline CameraFrame look_at_frame(const Camera& cam) {
    Vec3 fwd = cam.look_at - cam.position;
    double fn = norm(fwd);
    if (fn < 1e-12) throw std::invalid_argument("degenerate camera frame");
    fwd = fwd / fn;
    Vec3 right = cross(fwd, cam.up);
    double rn = norm(right);
    if (rn < 1e-9) throw std::invalid_argument("degenerate camera frame");
    right = right / rn;
    Vec3 up = cross(right, fwd);
    return {right, up, fwd};
}

// Pinhole ray through a continuous pixel coordinate; (u+0.5, v+0.5) is the
// center of integer pixel (u, v). Square pixels, vertical fov.
inline Ray camera_ray(const Camera& cam, double px, double py) {
    CameraFrame f = look_at_frame(cam);
    double s = std::tan(0.5 * cam.vertical_fov) / (0.5 * cam.height);
    double cx = (px - 0.5 * cam.width) * s;
    double cy = (0.5 * cam.height - py) * s;
    Vec3 dir = f.forward + f.right * cx + f.up * cy;
    return {cam.position, normalized(dir)};
}

// Projects a world point to continuous pixel coordinates. Returns nullopt for
// points at or behind the camera plane.
inline std::optional<std::pair<double, double>> project_to_pixel(const Camera& cam,
                                                                 const CameraFrame& f,
                                                                 const Vec3& p) {
    Vec3 rel = p - cam.position;
    double depth = dot(rel, f.forward);
    if (depth <= 1e-12) return std::nullopt;
    double s = std::tan(0.5 * cam.vertical_fov) / (0.5 * cam.height);
    double px = 0.5 * cam.width + dot(rel, f.right) / (depth * s);
    double py = 0.5 * cam.height - dot(rel, f.up) / (depth * s);
    return std::make_pair(px, py);
}

// Closest-approach parameter t* = dot(center - origin, dir) counts as a hit
// when the perpendicular distance is <= radius (tangent inclusive) and
// t* >= 0; anchors behind the origin never hit.
inline std::optional<double> ray_sphere_intersect(const Ray& ray, const Vec3& center,
                                                  double radius) {
    Vec3 oc = center - ray.origin;
    double t = dot(oc, ray.direction);
    if (t < 0.0) return std::nullopt;
    Vec3 closest = oc - ray.direction * t;
    if (dot(closest, closest) > radius * radius) return std::nullopt;
    return t;
}

// Parameter range over which the ray overlaps the axis-aligned box
// [-half-h, h]^3 inflated by `pad`. Empty optional when it misses.
inline std::optional<std::pair<double, double>> ray_box_range(const Ray& ray, double pad = 0.0) {
    double h = kWorldHalfExtent + pad;
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        double o = ray.origin[a], d = ray.direction[a];
        if (std::abs(d) < 1e-15) {
            if (o < -h || o > h) return std::nullopt;
            continue;
        }
        double ta = (-h - o) / d, tb = (h - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return std::make_pair(t0, t1);
}

}  // namespace probefield
