#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace detkit {

// Axis-aligned box in absolute pixel coordinates, corner form.
struct BBox {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double cx() const { return 0.5 * (x1 + x2); }
    double cy() const { return 0.5 * (y1 + y2); }

    bool operator==(const BBox& o) const {
        return x1 == o.x1 && y1 == o.y1 && x2 == o.x2 && y2 == o.y2;
    }
};

inline double intersection_area(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    return iw > 0.0 && ih > 0.0 ? iw * ih : 0.0;
}

inline BBox enclosing_box(const BBox& a, const BBox& b) {
    return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

// Intersection over union in [0,1]. Zero-area against zero-area is 0 even
// when identical; the union denominator is guarded, never inflated.
inline double iou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 1e-9) return 0.0;
    return inter / uni;
}

}  // namespace detkit
