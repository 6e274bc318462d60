//! Lighting-condition classification from channel saturation counts.
//!
//! An image is overexposed when at least a quarter of its pixels are
//! saturated in red, green and blue at once, and glare when it is overexposed
//! and at least half of its pixels have a saturated blue channel.

use serde::{Deserialize, Serialize};

use crate::image::RgbImage;

/// Channel level at or above which a channel counts as saturated.
pub const DEFAULT_SAT_THRESHOLD: u8 = 255;
/// Minimum tri-channel saturated share for an overexposed image.
pub const OVEREXPOSED_RATIO: f64 = 0.25;
/// Minimum blue saturated share for a glare image.
pub const GLARE_BLUE_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LightingClass {
    Typical,
    Overexposed,
    Glare,
}

impl LightingClass {
    pub const ALL: [LightingClass; 3] = [LightingClass::Typical, LightingClass::Overexposed, LightingClass::Glare];

    pub fn name(self) -> &'static str {
        match self {
            LightingClass::Typical => "typical",
            LightingClass::Overexposed => "overexposed",
            LightingClass::Glare => "glare",
        }
    }
}

impl std::fmt::Display for LightingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LightingClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "typical" => Ok(LightingClass::Typical),
            "overexposed" => Ok(LightingClass::Overexposed),
            "glare" => Ok(LightingClass::Glare),
            other => Err(format!("unknown lighting class '{other}'")),
        }
    }
}

/// How the "R, G and B saturated" numerator of the overexposure test is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaturationRule {
    /// Pixels saturated in all three channels simultaneously.
    #[default]
    Intersection,
    /// Each channel's own saturated share clears the bar separately.
    PerChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationStats {
    pub r_sat: u64,
    pub g_sat: u64,
    pub b_sat: u64,
    pub tri_sat: u64,
    pub total: u64,
}

impl SaturationStats {
    fn ratio(&self, n: u64) -> f64 {
        n as f64 / self.total as f64
    }

    pub fn r_ratio(&self) -> f64 {
        self.ratio(self.r_sat)
    }

    pub fn g_ratio(&self) -> f64 {
        self.ratio(self.g_sat)
    }

    pub fn b_ratio(&self) -> f64 {
        self.ratio(self.b_sat)
    }

    pub fn tri_ratio(&self) -> f64 {
        self.ratio(self.tri_sat)
    }
}

pub fn saturation_stats(img: &RgbImage, sat_threshold: u8) -> SaturationStats {
    let t = sat_threshold.max(1);
    let mut s = SaturationStats {
        r_sat: 0,
        g_sat: 0,
        b_sat: 0,
        tri_sat: 0,
        total: img.area() as u64,
    };
    for [r, g, b] in img.pixels() {
        let (rs, gs, bs) = (r >= t, g >= t, b >= t);
        s.r_sat += rs as u64;
        s.g_sat += gs as u64;
        s.b_sat += bs as u64;
        s.tri_sat += (rs && gs && bs) as u64;
    }
    s
}

pub fn is_overexposed(stats: &SaturationStats, rule: SaturationRule) -> bool {
    match rule {
        SaturationRule::Intersection => stats.tri_ratio() >= OVEREXPOSED_RATIO,
        SaturationRule::PerChannel => [stats.r_ratio(), stats.g_ratio(), stats.b_ratio()]
            .iter()
            .all(|&r| r >= OVEREXPOSED_RATIO),
    }
}

pub fn classify_lighting(stats: &SaturationStats) -> LightingClass {
    classify_lighting_with(stats, SaturationRule::Intersection)
}

pub fn classify_lighting_with(stats: &SaturationStats, rule: SaturationRule) -> LightingClass {
    if !is_overexposed(stats, rule) {
        LightingClass::Typical
    } else if stats.b_ratio() >= GLARE_BLUE_RATIO {
        LightingClass::Glare
    } else {
        LightingClass::Overexposed
    }
}

/// Saturation statistics and class of an image in one call.
pub fn classify_image(img: &RgbImage, sat_threshold: u8, rule: SaturationRule) -> (SaturationStats, LightingClass) {
    let stats = saturation_stats(img, sat_threshold);
    (stats, classify_lighting_with(&stats, rule))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(tri: u64, b: u64, total: u64) -> SaturationStats {
        SaturationStats {
            r_sat: tri,
            g_sat: tri,
            b_sat: b.max(tri),
            tri_sat: tri,
            total,
        }
    }

    #[test]
    fn black_and_white_images() {
        let black = RgbImage::filled(10, 10, [0, 0, 0]).unwrap();
        let s = saturation_stats(&black, 255);
        assert_eq!((s.r_sat, s.g_sat, s.b_sat, s.tri_sat, s.total), (0, 0, 0, 0, 100));
        let white = RgbImage::filled(10, 10, [255, 255, 255]).unwrap();
        let s = saturation_stats(&white, 255);
        assert_eq!(
            (s.r_sat, s.g_sat, s.b_sat, s.tri_sat, s.total),
            (100, 100, 100, 100, 100)
        );
    }

    #[test]
    fn hand_counted_row() {
        let img = RgbImage::from_raw(4, 1, vec![255, 255, 255, 255, 0, 0, 0, 255, 255, 0, 0, 0]).unwrap();
        let s = saturation_stats(&img, 255);
        assert_eq!((s.r_sat, s.g_sat, s.b_sat, s.tri_sat, s.total), (2, 2, 2, 1, 4));
    }

    #[test]
    fn threshold_lowers_saturation_level() {
        let img = RgbImage::filled(3, 3, [250, 240, 251]).unwrap();
        assert_eq!(saturation_stats(&img, 255).tri_sat, 0);
        assert_eq!(saturation_stats(&img, 240).tri_sat, 9);
        assert_eq!(saturation_stats(&img, 250).b_sat, 9);
        assert_eq!(saturation_stats(&img, 250).g_sat, 0);
    }

    #[test]
    fn inclusive_boundaries() {
        assert_eq!(classify_lighting(&stats(0, 0, 100)), LightingClass::Typical);
        assert_eq!(classify_lighting(&stats(24, 90, 100)), LightingClass::Typical);
        assert_eq!(classify_lighting(&stats(25, 49, 100)), LightingClass::Overexposed);
        assert_eq!(classify_lighting(&stats(25, 50, 100)), LightingClass::Glare);
    }

    #[test]
    fn per_channel_reading() {
        let s = SaturationStats {
            r_sat: 30,
            g_sat: 30,
            b_sat: 60,
            tri_sat: 10,
            total: 100,
        };
        assert_eq!(classify_lighting(&s), LightingClass::Typical);
        assert_eq!(
            classify_lighting_with(&s, SaturationRule::PerChannel),
            LightingClass::Glare
        );
    }
}
