//! Filled primitives used to paint synthetic scenes.

/// A filled region in continuous pixel coordinates; pixel `(x, y)` is
/// inside when its centre `(x, y)` satisfies the shape's inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        theta: f64,
    },
    /// Thick line segment (capsule) of the given half width.
    Bar {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        half_width: f64,
    },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Ellipse { cx, cy, a, b, theta } => {
                let (s, c) = theta.sin_cos();
                let (dx, dy) = (x - cx, y - cy);
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
            Shape::Bar {
                x0,
                y0,
                x1,
                y1,
                half_width,
            } => {
                let (vx, vy) = (x1 - x0, y1 - y0);
                let len2 = vx * vx + vy * vy;
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (((x - x0) * vx + (y - y0) * vy) / len2).clamp(0.0, 1.0)
                };
                let (px, py) = (x0 + t * vx, y0 + t * vy);
                (x - px).powi(2) + (y - py).powi(2) <= half_width * half_width
            }
        }
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` before clipping to an image.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Disk { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
            Shape::Ellipse { cx, cy, a, b, .. } => {
                let m = a.max(b);
                (cx - m, cy - m, cx + m, cy + m)
            }
            Shape::Bar {
                x0,
                y0,
                x1,
                y1,
                half_width: h,
            } => (x0.min(x1) - h, y0.min(y1) - h, x0.max(x1) + h, y0.max(y1) + h),
        }
    }

    /// Pixels of a `width x height` grid inside the shape, in raster order.
    pub fn pixels(&self, width: u32, height: u32) -> Vec<(u32, u32)> {
        let (x0, y0, x1, y1) = self.bounds();
        let clampi = |v: f64, hi: u32| -> Option<u32> {
            if v < 0.0 {
                Some(0)
            } else if v >= hi as f64 {
                None
            } else {
                Some(v as u32)
            }
        };
        let (Some(xa), Some(ya)) = (clampi(x0.floor(), width), clampi(y0.floor(), height)) else {
            return Vec::new();
        };
        if x1 < 0.0 || y1 < 0.0 {
            return Vec::new();
        }
        let xb = (x1.ceil() as u32).min(width - 1);
        let yb = (y1.ceil() as u32).min(height - 1);
        let mut out = Vec::new();
        for y in ya..=yb {
            for x in xa..=xb {
                if self.contains(x as f64, y as f64) {
                    out.push((x, y));
                }
            }
        }
        out
    }
}
