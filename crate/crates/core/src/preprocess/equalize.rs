//! Cumulative-histogram equalization of an 8-bit plane.

/// 256-entry monotone level mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualizationLut([u8; 256]);

impl EqualizationLut {
    pub fn identity() -> Self {
        let mut m = [0u8; 256];
        for (i, v) in m.iter_mut().enumerate() {
            *v = i as u8;
        }
        Self(m)
    }

    /// Builds the equalizing map for `plane`:
    /// `lut[v] = round(255 * (cdf(v) - cdf_min) / (N - cdf_min))`, where
    /// `cdf_min` is the cumulative count at the lowest occupied level.
    /// Levels below the lowest occupied one map to 0; a constant plane maps
    /// to itself.
    pub fn for_plane(plane: &[u8]) -> Self {
        let mut hist = [0u64; 256];
        for &v in plane {
            hist[v as usize] += 1;
        }
        Self::from_histogram(&hist)
    }

    pub fn from_histogram(hist: &[u64; 256]) -> Self {
        let n: u64 = hist.iter().sum();
        let Some(lowest) = hist.iter().position(|&c| c > 0) else {
            return Self::identity();
        };
        let cdf_min = hist[lowest];
        if n == cdf_min {
            return Self::identity();
        }
        let span = (n - cdf_min) as f64;
        let mut m = [0u8; 256];
        let mut cdf = 0u64;
        for (v, out) in m.iter_mut().enumerate() {
            cdf += hist[v];
            if v >= lowest {
                let scaled = 255.0 * (cdf - cdf_min) as f64 / span;
                *out = (scaled + 0.5).floor().min(255.0) as u8;
            }
        }
        Self(m)
    }

    pub fn map(&self, v: u8) -> u8 {
        self.0[v as usize]
    }

    pub fn as_array(&self) -> &[u8; 256] {
        &self.0
    }

    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Equalizes `plane`, returning the remapped plane and the mapping used.
pub fn equalize_histogram(plane: &[u8]) -> (Vec<u8>, EqualizationLut) {
    let lut = EqualizationLut::for_plane(plane);
    let out = plane.iter().map(|&v| lut.map(v)).collect();
    (out, lut)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_plane_unchanged() {
        let plane = vec![77u8; 100];
        let (out, lut) = equalize_histogram(&plane);
        assert_eq!(out, plane);
        assert_eq!(lut, EqualizationLut::identity());
    }

    #[test]
    fn two_extreme_levels_unchanged() {
        let plane: Vec<u8> = (0..200).map(|i| if i % 2 == 0 { 0 } else { 255 }).collect();
        assert_eq!(equalize_histogram(&plane).0, plane);
    }

    #[test]
    fn uniform_levels_give_identity() {
        let plane: Vec<u8> = (0..=255u8).collect();
        let (_, lut) = equalize_histogram(&plane);
        for v in 0..=255u8 {
            assert!((lut.map(v) as i32 - v as i32).abs() <= 1);
        }
    }

    #[test]
    fn top_occupied_level_maps_to_255() {
        let plane: Vec<u8> = (0..1000).map(|i| (i % 50) as u8 + 3).collect();
        let (out, lut) = equalize_histogram(&plane);
        assert_eq!(*out.iter().max().unwrap(), 255);
        assert_eq!(lut.map(3), 0);
        assert!(lut.is_monotone());
    }
}
