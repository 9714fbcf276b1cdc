use thiserror::Error;

use crate::domain::LayeredDomain;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("time series is empty")]
    Empty,
    #[error("time is not strictly increasing at row {row}")]
    NonMonotoneTime { row: usize },
    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },
}

/// Piecewise-linear series of `(t, σ¹, σ²)` samples.
///
/// Outside the sampled interval the end values are held constant.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<[f64; 2]>,
}

impl TimeSeries {
    pub fn new(rows: Vec<(f64, [f64; 2])>) -> Result<Self, SeriesError> {
        if rows.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (row, (t, v)) in rows.iter().enumerate() {
            if !t.is_finite() || !v.iter().all(|x| x.is_finite()) {
                return Err(SeriesError::NonFinite { row });
            }
            if row > 0 && !(*t > rows[row - 1].0) {
                return Err(SeriesError::NonMonotoneTime { row });
            }
        }
        let (times, values) = rows.into_iter().unzip();
        Ok(Self { times, values })
    }

    pub fn constant(v: [f64; 2]) -> Self {
        Self {
            times: vec![0.0],
            values: vec![v],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, [f64; 2])> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn at(&self, t: f64) -> [f64; 2] {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (self.values[k], self.values[k + 1]);
        [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
    }
}

/// Newton boundary data `g^j = α^j (u^j − σ^j(x, t))` per exterior segment.
pub trait BoundaryForcing: Sync {
    fn alpha(&self, segment: usize) -> [f64; 2];
    fn sigma(&self, segment: usize, x: [f64; 2], t: f64) -> [f64; 2];
}

/// Per-segment constants and climate series.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentDrive {
    pub alpha: [f64; 2],
    pub sigma: TimeSeries,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDrive {
    pub segments: Vec<SegmentDrive>,
}

impl BoundaryDrive {
    /// Same data on every exterior segment of `domain`.
    pub fn uniform(domain: &LayeredDomain, alpha: [f64; 2], sigma: TimeSeries) -> Self {
        Self {
            segments: vec![SegmentDrive { alpha, sigma }; domain.exterior.len()],
        }
    }

    /// Insulated and impermeable: α ≡ 0.
    pub fn insulated(domain: &LayeredDomain) -> Self {
        Self::uniform(domain, [0.0, 0.0], TimeSeries::constant([0.0, 0.0]))
    }
}

impl BoundaryForcing for BoundaryDrive {
    fn alpha(&self, segment: usize) -> [f64; 2] {
        self.segments[segment].alpha
    }

    fn sigma(&self, segment: usize, _x: [f64; 2], t: f64) -> [f64; 2] {
        self.segments[segment].sigma.at(t)
    }
}

/// Volumetric source density per layer, point and time.
pub trait VolumeSource: Sync {
    fn value(&self, layer: usize, x: [f64; 2], t: f64) -> [f64; 2];
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoSource;

impl VolumeSource for NoSource {
    fn value(&self, _layer: usize, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// Constant source per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSource(pub Vec<[f64; 2]>);

impl VolumeSource for LayerSource {
    fn value(&self, layer: usize, _x: [f64; 2], _t: f64) -> [f64; 2] {
        self.0[layer]
    }
}
