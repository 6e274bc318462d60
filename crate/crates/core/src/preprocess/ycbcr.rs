//! Full-range BT.601 YCbCr (the JPEG convention), rounded half-up and clamped.

use crate::error::{Error, Result};
use crate::image::RgbImage;

/// Planar YCbCr image; each plane holds `width * height` samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YCbCrImage {
    width: u32,
    height: u32,
    pub y: Vec<u8>,
    pub cb: Vec<u8>,
    pub cr: Vec<u8>,
}

impl YCbCrImage {
    pub fn new(width: u32, height: u32, y: Vec<u8>, cb: Vec<u8>, cr: Vec<u8>) -> Result<Self> {
        let n = width as usize * height as usize;
        if n == 0 || y.len() != n || cb.len() != n || cr.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "YCbCr planes must each hold {n} samples for {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            y,
            cb,
            cr,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    // The float-to-int cast saturates at 0 and 255 and truncates, which is
    // floor on the non-negative range.
    (v + 0.5) as u8
}

#[inline]
pub fn rgb_to_ycbcr_pixel([r, g, b]: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (r as f64, g as f64, b as f64);
    [
        quantize(0.299 * r + 0.587 * g + 0.114 * b),
        quantize(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b),
        quantize(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b),
    ]
}

#[inline]
pub fn ycbcr_to_rgb_pixel([y, cb, cr]: [u8; 3]) -> [u8; 3] {
    let (y, cb, cr) = (y as f64, cb as f64 - 128.0, cr as f64 - 128.0);
    [
        quantize(y + 1.402 * cr),
        quantize(y - 0.344136 * cb - 0.714136 * cr),
        quantize(y + 1.772 * cb),
    ]
}

/// Per-level products of the conversion coefficients. Sums of table
/// entries are evaluated in the same order as the per-pixel formulas, so
/// results are bit-identical.
const TIE: i16 = i16::MIN;

pub(crate) struct Tables {
    yr: [f64; 256],
    yg: [f64; 256],
    yb: [f64; 256],
    cbr: [f64; 256],
    cbg: [f64; 256],
    cbb: [f64; 256],
    crr: [f64; 256],
    crg: [f64; 256],
    crb: [f64; 256],
    r_cr: [f64; 256],
    g_cb: [f64; 256],
    g_cr: [f64; 256],
    b_cb: [f64; 256],
    /// Integer forms of the inverse transform: output channel =
    /// `clamp(y + offset)`. Offsets whose fractional part sits on a rounding
    /// tie hold [`TIE`] and fall back to the float formula.
    r_off: [i16; 256],
    g_off: Vec<i16>,
    b_off: [i16; 256],
}

impl Tables {
    pub(crate) fn get() -> &'static Tables {
        static TABLES: std::sync::OnceLock<Tables> = std::sync::OnceLock::new();
        TABLES.get_or_init(|| {
            let t = |k: f64, off: f64| std::array::from_fn(|i| k * (i as f64 - off));
            let r_cr: [f64; 256] = t(1.402, 128.0);
            let g_cb: [f64; 256] = t(0.344136, 128.0);
            let g_cr: [f64; 256] = t(0.714136, 128.0);
            let b_cb: [f64; 256] = t(1.772, 128.0);
            let off = |v: f64| {
                let f = v + 0.5;
                if (f - f.round()).abs() < 1e-9 {
                    TIE
                } else {
                    f.floor() as i16
                }
            };
            Tables {
                r_off: std::array::from_fn(|cr| off(r_cr[cr])),
                g_off: (0..256 * 256).map(|i| off(-g_cb[i >> 8] - g_cr[i & 255])).collect(),
                b_off: std::array::from_fn(|cb| off(b_cb[cb])),
                yr: t(0.299, 0.0),
                yg: t(0.587, 0.0),
                yb: t(0.114, 0.0),
                cbr: t(0.168736, 0.0),
                cbg: t(0.331264, 0.0),
                cbb: t(0.5, 0.0),
                crr: t(0.5, 0.0),
                crg: t(0.418688, 0.0),
                crb: t(0.081312, 0.0),
                r_cr,
                g_cb,
                g_cr,
                b_cb,
            }
        })
    }

    /// Same as the Y of [`rgb_to_ycbcr_pixel`]. The coefficients are exact
    /// decimals, so away from a rounding tie the integer quotient agrees with
    /// the float formula; ties take the float path.
    #[inline]
    pub(crate) fn luma(&self, [r, g, b]: [u8; 3]) -> u8 {
        let n = 299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500;
        let q = n / 1000;
        if q * 1000 == n {
            return quantize(self.yr[r as usize] + self.yg[g as usize] + self.yb[b as usize]);
        }
        q as u8
    }

    /// Same as the Cb and Cr of [`rgb_to_ycbcr_pixel`].
    #[inline]
    pub(crate) fn chroma(&self, [r, g, b]: [u8; 3]) -> (u8, u8) {
        // Both numerators lie in [1e6, 2.57e8] over the whole RGB cube.
        let (ri, gi, bi) = (r as i32, g as i32, b as i32);
        let ncb = (128_500_000 - 168_736 * ri - 331_264 * gi + 500_000 * bi) as u32;
        let ncr = (128_500_000 + 500_000 * ri - 418_688 * gi - 81_312 * bi) as u32;
        let (qcb, qcr) = (ncb / 1_000_000, ncr / 1_000_000);
        if qcb * 1_000_000 == ncb || qcr * 1_000_000 == ncr {
            let (r, g, b) = (r as usize, g as usize, b as usize);
            return (
                quantize(128.0 - self.cbr[r] - self.cbg[g] + self.cbb[b]),
                quantize(128.0 + self.crr[r] - self.crg[g] - self.crb[b]),
            );
        }
        (qcb.min(255) as u8, qcr.min(255) as u8)
    }

    /// Same as [`ycbcr_to_rgb_pixel`].
    #[inline]
    pub(crate) fn to_rgb(&self, y: u8, cb: u8, cr: u8) -> [u8; 3] {
        let (cb, cr) = (cb as usize, cr as usize);
        let (ro, go, bo) = (self.r_off[cr], self.g_off[cb << 8 | cr], self.b_off[cb]);
        if ro == TIE || go == TIE || bo == TIE {
            let yf = y as f64;
            return [
                quantize(yf + self.r_cr[cr]),
                quantize(yf - self.g_cb[cb] - self.g_cr[cr]),
                quantize(yf + self.b_cb[cb]),
            ];
        }
        let y = y as i16;
        let c = |v: i16| v.clamp(0, 255) as u8;
        [c(y + ro), c(y + go), c(y + bo)]
    }
}

pub fn rgb_to_ycbcr(img: &RgbImage) -> YCbCrImage {
    let n = img.area();
    let (mut y, mut cb, mut cr) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for p in img.pixels() {
        let [a, b, c] = rgb_to_ycbcr_pixel(p);
        y.push(a);
        cb.push(b);
        cr.push(c);
    }
    YCbCrImage {
        width: img.width(),
        height: img.height(),
        y,
        cb,
        cr,
    }
}

pub fn ycbcr_to_rgb(img: &YCbCrImage) -> RgbImage {
    let mut pixels = Vec::with_capacity(img.y.len() * 3);
    for i in 0..img.y.len() {
        pixels.extend_from_slice(&ycbcr_to_rgb_pixel([img.y[i], img.cb[i], img.cr[i]]));
    }
    RgbImage::from_raw(img.width, img.height, pixels).expect("planes sized at construction")
}
