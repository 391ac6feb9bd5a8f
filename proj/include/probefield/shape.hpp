#pragma once

#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "probefield/geom.hpp"

namespace probefield {

// Analytic ground-truth occupancy shapes. All are strict-inside tests; the
// union is a logical OR over its children.
struct Sphere {
    Vec3 center;
    double radius = 0.0;
};

struct Torus {
    Vec3 center;
    double major_radius = 0.0;  // distance from center to tube core circle
    double minor_radius = 0.0;  // tube radius
    int axis = 2;               // symmetry axis: 0=x, 1=y, 2=z
};

struct Box {
    Vec3 min, max;
};

struct AnalyticShape;

struct Union {
    std::vector<AnalyticShape> shapes;
};

struct AnalyticShape {
    std::variant<Sphere, Torus, Box, Union> node;
};

inline bool inside(const AnalyticShape& shape, const Vec3& p);

inline bool inside(const Sphere& s, const Vec3& p) {
    Vec3 d = p - s.center;
    return dot(d, d) < s.radius * s.radius;
}

inline bool inside(const Torus& t, const Vec3& p) {
    Vec3 d = p - t.center;
    int a = t.axis;
    int u = (a + 1) % 3, v = (a + 2) % 3;
    double ring = std::sqrt(d[u] * d[u] + d[v] * d[v]) - t.major_radius;
    return ring * ring + d[a] * d[a] < t.minor_radius * t.minor_radius;
}

inline bool inside(const Box& b, const Vec3& p) {
    return p.x > b.min.x && p.x < b.max.x && p.y > b.min.y && p.y < b.max.y && p.z > b.min.z &&
           p.z < b.max.z;
}

inline bool inside(const Union& u, const Vec3& p) {
    for (const auto& s : u.shapes)
        if (inside(s, p)) return true;
    return false;
}

inline bool inside(const AnalyticShape& shape, const Vec3& p) {
    return std::visit([&](const auto& s) { return inside(s, p); }, shape.node);
}

// Occupancy oracle: 1 iff p is strictly inside.
inline double occupancy(const AnalyticShape& shape, const Vec3& p) {
    return inside(shape, p) ? 1.0 : 0.0;
}

inline void validate(const AnalyticShape& shape) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                if (s.radius <= 0.0) throw std::invalid_argument("sphere radius must be > 0");
            } else if constexpr (std::is_same_v<T, Torus>) {
                if (s.minor_radius <= 0.0 || s.major_radius <= 0.0)
                    throw std::invalid_argument("torus radii must be > 0");
                if (s.minor_radius >= s.major_radius)
                    throw std::invalid_argument("torus minor radius must be < major radius");
                if (s.axis < 0 || s.axis > 2) throw std::invalid_argument("torus axis must be 0..2");
            } else if constexpr (std::is_same_v<T, Box>) {
                if (!(s.min.x < s.max.x && s.min.y < s.max.y && s.min.z < s.max.z))
                    throw std::invalid_argument("box min must be < max componentwise");
            } else if constexpr (std::is_same_v<T, Union>) {
                for (const auto& c : s.shapes) validate(c);
            }
        },
        shape.node);
}

}  // namespace probefield
