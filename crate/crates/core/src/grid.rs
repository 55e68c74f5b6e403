use crate::error::{Error, Result};

/// Uniformly spaced, strictly increasing abscissae.
///
/// Samples are placed symmetrically about `center`, so for `center == 0`
/// the grid is exactly mirror-symmetric: `x(i) == -x(len - 1 - i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    center: f64,
    step: f64,
    len: usize,
}

impl Grid {
    pub fn centered(center: f64, half_extent: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::validation("samples", "need at least 2 samples"));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) || !center.is_finite() {
            return Err(Error::validation(
                "half_extent",
                format!("must be positive and finite, got {half_extent}"),
            ));
        }
        Ok(Self {
            center,
            step: 2.0 * half_extent / (len - 1) as f64,
            len,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn half_extent(&self) -> f64 {
        0.5 * self.step * (self.len - 1) as f64
    }

    /// Offset of sample `i` from the center, in steps. Exact for all `i`.
    fn offset(&self, i: usize) -> f64 {
        i as f64 - 0.5 * (self.len - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.center + self.offset(i) * self.step
    }

    pub fn xs(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.x(i))
    }

    pub fn first(&self) -> f64 {
        self.x(0)
    }

    pub fn last(&self) -> f64 {
        self.x(self.len - 1)
    }

    /// Fractional sample index of `x` (may lie outside `[0, len-1]`).
    pub fn index_of(&self, x: f64) -> f64 {
        (x - self.center) / self.step + 0.5 * (self.len - 1) as f64
    }
}
