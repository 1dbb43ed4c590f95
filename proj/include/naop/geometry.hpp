#pragma once

namespace naop {

/// Axis-aligned box in pixel coordinates, top-left (x1, y1) to bottom-right (x2, y2).
struct PixelBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool valid() const;

    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Box divided by the frame dimensions and shifted so the frame center is (0, 0).
/// Every coordinate lies in [-0.5, 0.5].
struct NormBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double xc() const { return 0.5 * (x1 + x2); }
    double yc() const { return 0.5 * (y1 + y2); }
    double area() const { return (x2 - x1) * (y2 - y1); }

    friend bool operator==(const NormBox&, const NormBox&) = default;
};

NormBox normalize_box(const PixelBox& box, double frame_width, double frame_height);
PixelBox denormalize_box(const NormBox& box, double frame_width, double frame_height);

/// Intersection over union; 0 for disjoint boxes.
double iou(const PixelBox& a, const PixelBox& b);

}  // namespace naop
