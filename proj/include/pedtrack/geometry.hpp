#pragma once

#include <algorithm>

#include <Eigen/Core>

namespace pedtrack {

using Vec2 = Eigen::Vector2d;

// Axis-aligned box in MOTChallenge convention (top-left corner + extent), pixels.
struct Box {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;

    Vec2 center() const { return {left + 0.5 * width, top + 0.5 * height}; }

    static Box from_center(const Vec2& c, double w, double h) {
        return {c.x() - 0.5 * w, c.y() - 0.5 * h, w, h};
    }

    friend bool operator==(const Box&, const Box&) = default;
};

// Intersection over union; 0 when either box has no area.
inline double iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.left + a.width, b.left + b.width) - std::max(a.left, b.left));
    const double iy = std::max(0.0, std::min(a.top + a.height, b.top + b.height) - std::max(a.top, b.top));
    const double inter = ix * iy;
    const double uni = a.width * a.height + b.width * b.height - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace pedtrack
