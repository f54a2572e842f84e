//! The weighted RACE sketch.
//!
//! Row `l` of the `L x R` counter array holds, in column `h_l(x)`, the sum of the
//! weights of every inserted point that hashed there. For a query `q`, the cell
//! `S[l, h_l(q)]` is an unbiased estimate of `sum_j alpha_j K(q, x_j)` with
//! variance at most `(sum_j |alpha_j| sqrt(K(q, x_j)))^2`; averaging rows, or
//! taking the median of group means, concentrates it.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::lsh::{LshEnsemble, LshEnsembleSpec};
use crate::projection::Projection;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    pub x: Vec<f64>,
    /// Signed weight.
    pub alpha: f64,
}

impl WeightedPoint {
    pub fn new(x: Vec<f64>, alpha: f64) -> Self {
        Self { x, alpha }
    }

    fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::input(alloc::format!("non-finite weight {}", self.alpha)));
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("point has non-finite coordinates"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Mean,
    /// Median of `g` group means over contiguous blocks of rows; `g` must divide `L`.
    MedianOfMeans(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub value: f64,
    /// The `L` looked-up cells, when requested.
    pub per_row: Option<Vec<f64>>,
    pub estimator: Estimator,
}

/// Number of groups `8 * ceil(ln(1/0.05)) = 24`, capped at `rows` and rounded
/// down to a divisor of `rows` so every group has the same size.
pub fn default_groups(rows: usize) -> usize {
    let target = (8.0 * libm::ceil(libm::log(1.0 / 0.05))) as usize;
    let mut g = target.min(rows).max(1);
    while rows % g != 0 {
        g -= 1;
    }
    g
}

/// Median of `g` group means. Value `l` belongs to group `floor(l * g / L)`, so groups
/// are contiguous and their sizes differ by at most one when `g` does not divide
/// `L`. For even `g` the two central means are averaged.
pub fn median_of_means(values: &[f64], groups: usize) -> Result<f64> {
    let n = values.len();
    if groups == 0 || groups > n {
        return Err(Error::input(alloc::format!(
            "number of groups must be in [1, {n}], got {groups}"
        )));
    }
    let mut sums = alloc::vec![0.0; groups];
    let mut sizes = alloc::vec![0usize; groups];
    for (l, &v) in values.iter().enumerate() {
        let g = l * groups / n;
        sums[g] += v;
        sizes[g] += 1;
    }
    let mut means: Vec<f64> = sums.iter().zip(&sizes).map(|(s, &m)| s / m as f64).collect();
    means.sort_by(f64::total_cmp);
    let mid = groups / 2;
    Ok(if groups % 2 == 1 {
        means[mid]
    } else {
        0.5 * (means[mid - 1] + means[mid])
    })
}

#[derive(Debug, Clone)]
pub struct RepresenterSketch {
    ensemble: LshEnsemble,
    projection: Option<Projection>,
    /// Row-major `L x R`.
    counters: Vec<f64>,
    total_weight: f64,
    count: u64,
}

impl RepresenterSketch {
    /// An all-zero sketch whose points live directly in the hashed space.
    pub fn new(spec: LshEnsembleSpec) -> Result<Self> {
        Self::with_projection(spec, None)
    }

    /// An all-zero sketch. With a projection, stored points live in the projected
    /// space and queries are projected by `A^T` before hashing.
    pub fn with_projection(spec: LshEnsembleSpec, projection: Option<Projection>) -> Result<Self> {
        let ensemble = LshEnsemble::new(spec)?;
        if let Some(p) = &projection {
            check_dim(spec.family.input_dim, p.projected_dim())?;
        }
        Ok(Self {
            ensemble,
            projection,
            counters: alloc::vec![0.0; spec.rows * spec.range],
            total_weight: 0.0,
            count: 0,
        })
    }

    pub fn build(points: &[WeightedPoint], spec: LshEnsembleSpec) -> Result<Self> {
        let mut sketch = Self::new(spec)?;
        sketch.extend(points)?;
        Ok(sketch)
    }

    pub(crate) fn from_parts(
        spec: LshEnsembleSpec,
        projection: Option<Projection>,
        counters: Vec<f64>,
        total_weight: f64,
        count: u64,
    ) -> Result<Self> {
        let mut sketch = Self::with_projection(spec, projection)?;
        check_dim(sketch.counters.len(), counters.len())?;
        sketch.counters = counters;
        sketch.total_weight = total_weight;
        sketch.count = count;
        Ok(sketch)
    }

    /// Adds `point.alpha` to `S[l, h_l(point.x)]` for every row. Nothing is modified on error.
    pub fn add(&mut self, point: &WeightedPoint) -> Result<()> {
        check_dim(self.point_dim(), point.x.len())?;
        point.validate()?;
        let range = self.range();
        for l in 0..self.rows() {
            let col = self.ensemble.index_unchecked(&point.x, l);
            self.counters[l * range + col] += point.alpha;
        }
        self.total_weight += point.alpha;
        self.count += 1;
        Ok(())
    }

    /// Inserts points in order. Every point is validated before any is inserted.
    pub fn extend(&mut self, points: &[WeightedPoint]) -> Result<()> {
        let dim = self.point_dim();
        for p in points {
            check_dim(dim, p.x.len())?;
            p.validate()?;
        }
        for p in points {
            self.add(p)?;
        }
        Ok(())
    }

    pub fn is_compatible(&self, other: &Self) -> bool {
        self.spec() == other.spec() && self.projection == other.projection
    }

    /// Cell-wise sum of two sketches built with the same ensemble.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    pub fn merge_from(&mut self, other: &Self) -> Result<()> {
        if self.spec() != other.spec() {
            return Err(Error::Incompatible("ensemble specs differ"));
        }
        if self.projection != other.projection {
            return Err(Error::Incompatible("projections differ"));
        }
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            *a += b;
        }
        self.total_weight += other.total_weight;
        self.count += other.count;
        Ok(())
    }

    /// Maps a query into the hashed space.
    pub fn prepare_query(&self, q: &[f64]) -> Result<Vec<f64>> {
        match &self.projection {
            Some(p) => p.apply(q),
            None => {
                check_dim(self.point_dim(), q.len())?;
                Ok(q.to_vec())
            }
        }
    }

    /// `S[l, h_l(q)]` for every row.
    pub fn row_values(&self, q: &[f64]) -> Result<Vec<f64>> {
        let hashed = self.prepare_query(q)?;
        let range = self.range();
        Ok((0..self.rows())
            .map(|l| self.counters[l * range + self.ensemble.index_unchecked(&hashed, l)])
            .collect())
    }

    pub fn query_mean(&self, q: &[f64]) -> Result<EstimateResult> {
        self.query(q, Estimator::Mean, false)
    }

    pub fn query_mom(&self, q: &[f64], groups: usize) -> Result<EstimateResult> {
        self.query(q, Estimator::MedianOfMeans(groups), false)
    }

    pub fn query(&self, q: &[f64], estimator: Estimator, keep_rows: bool) -> Result<EstimateResult> {
        if let Estimator::MedianOfMeans(g) = estimator {
            if g == 0 || self.rows() % g != 0 {
                return Err(Error::input(alloc::format!(
                    "number of groups must divide the {} rows, got {g}",
                    self.rows()
                )));
            }
        }
        let rows = self.row_values(q)?;
        let value = match estimator {
            Estimator::Mean => rows.iter().sum::<f64>() / rows.len() as f64,
            Estimator::MedianOfMeans(g) => median_of_means(&rows, g)?,
        };
        Ok(EstimateResult {
            value,
            per_row: keep_rows.then_some(rows),
            estimator,
        })
    }

    pub fn spec(&self) -> &LshEnsembleSpec {
        self.ensemble.spec()
    }

    pub fn ensemble(&self) -> &LshEnsemble {
        &self.ensemble
    }

    pub fn projection(&self) -> Option<&Projection> {
        self.projection.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.spec().rows
    }

    pub fn range(&self) -> usize {
        self.spec().range
    }

    /// Dimension of stored points (the hashed space).
    pub fn point_dim(&self) -> usize {
        self.spec().family.input_dim
    }

    /// Dimension of queries: the data dimension when a projection is present.
    pub fn query_dim(&self) -> usize {
        self.projection
            .as_ref()
            .map_or(self.point_dim(), Projection::data_dim)
    }

    pub fn counters(&self) -> &[f64] {
        &self.counters
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.counters[l * self.range()..(l + 1) * self.range()]
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Number of stored parameters: counters plus projection entries.
    pub fn params(&self) -> usize {
        self.counters.len() + self.projection.as_ref().map_or(0, |p| p.matrix().len())
    }
}
