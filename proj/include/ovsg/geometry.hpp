#pragma once
// Box overlap and regression losses. Boxes touching only at an edge have
// intersection 0 (open-interval convention).

#include <algorithm>

#include "ovsg/core.hpp"

namespace ovsg {

namespace detail {
inline void require_valid(const BBox& a, const char* op) {
    require(a.valid(), std::string(op) + ": degenerate box");
}
}  // namespace detail

inline double intersection_area(const BBox& a, const BBox& b) {
    double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (w <= 0 || h <= 0) return 0.0;
    return w * h;
}

inline double iou(const BBox& a, const BBox& b) {
    detail::require_valid(a, "iou");
    detail::require_valid(b, "iou");
    double inter = intersection_area(a, b);
    double uni = a.area() + b.area() - inter;
    return inter / uni;
}

// IoU minus the fraction of the enclosing hull not covered by the union.
// Equals IoU when the hull coincides with the union; range (-1, 1].
inline double giou(const BBox& a, const BBox& b) {
    detail::require_valid(a, "giou");
    detail::require_valid(b, "giou");
    double inter = intersection_area(a, b);
    double uni = a.area() + b.area() - inter;
    BBox hull{std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
              std::max(a.y2, b.y2)};
    double hull_area = hull.area();
    return inter / uni - (hull_area - uni) / hull_area;
}

// L1 distance between the two boxes in image-normalized cxcywh form.
inline double box_l1(const BBox& a, const BBox& b, double image_w, double image_h) {
    detail::require_valid(a, "box_l1");
    detail::require_valid(b, "box_l1");
    require(image_w > 0 && image_h > 0, "box_l1: zero-size image");
    double d = 0;
    d += std::abs(a.cx() - b.cx()) / image_w;
    d += std::abs(a.cy() - b.cy()) / image_h;
    d += std::abs(a.width() - b.width()) / image_w;
    d += std::abs(a.height() - b.height()) / image_h;
    return d;
}

}  // namespace ovsg
