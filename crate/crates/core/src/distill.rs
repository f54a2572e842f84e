//! Learning a weighted LSH-kernel representation `f(q) = sum_j alpha_j K(A^T q, x_j)`
//! of a teacher model from `(input, score)` pairs.
//!
//! The kernel is the sketch's row kernel (base collision probability to the
//! power `K`), so a sketch built from the learned points is an unbiased
//! estimator of exactly the trained function. Anchor points `x_j`, weights
//! `alpha_j` and the optional projection `A` are all trained by mini-batch
//! gradient descent on mean squared error.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::lsh::{dot, powi, KernelConfig, LshEnsembleSpec};
use crate::projection::Projection;
use crate::sketch::{RepresenterSketch, WeightedPoint};
use crate::Task;

/// Guard for the `0/0` in `d|u - x| / dx` at coincident points.
const MIN_SEPARATION: f64 = 1e-12;
const ANGLE_CUSP: f64 = 1e-9;

/// Learned weighted kernel representation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    /// `M x w` row-major anchor points in the hashed space.
    points: Vec<f64>,
    alphas: Vec<f64>,
    projection: Option<Projection>,
    kernel: KernelConfig,
}

impl KernelModel {
    /// `kernel.family.input_dim` is the width `w` of the anchor points.
    pub fn new(
        points: Vec<f64>,
        alphas: Vec<f64>,
        projection: Option<Projection>,
        kernel: KernelConfig,
    ) -> Result<Self> {
        kernel.validate()?;
        let m = alphas.len();
        if m == 0 {
            return Err(Error::input("a kernel model needs at least one point"));
        }
        let width = kernel.family.input_dim;
        check_dim(m * width, points.len())?;
        if let Some(p) = &projection {
            check_dim(width, p.projected_dim())?;
            if p.projected_dim() > p.data_dim() {
                return Err(Error::input(alloc::format!(
                    "projected dimension {} exceeds data dimension {}",
                    p.projected_dim(),
                    p.data_dim()
                )));
            }
        }
        if points.iter().chain(&alphas).any(|v| !v.is_finite()) {
            return Err(Error::input("model parameters must be finite"));
        }
        Ok(Self {
            points,
            alphas,
            projection,
            kernel,
        })
    }

    /// Re-imports exported points.
    pub fn from_points(
        points: &[WeightedPoint],
        projection: Option<Projection>,
        kernel: KernelConfig,
    ) -> Result<Self> {
        let flat = points.iter().flat_map(|p| p.x.iter().copied()).collect();
        let alphas = points.iter().map(|p| p.alpha).collect();
        Self::new(flat, alphas, projection, kernel)
    }

    pub fn num_points(&self) -> usize {
        self.alphas.len()
    }

    /// Width of the anchor points (the hashed dimension).
    pub fn hashed_dim(&self) -> usize {
        self.kernel.family.input_dim
    }

    /// Dimension of raw inputs.
    pub fn data_dim(&self) -> usize {
        self.projection
            .as_ref()
            .map_or(self.hashed_dim(), Projection::data_dim)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, j: usize) -> &[f64] {
        let w = self.hashed_dim();
        &self.points[j * w..(j + 1) * w]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn projection(&self) -> Option<&Projection> {
        self.projection.as_ref()
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    pub fn transform(&self, q: &[f64]) -> Result<Vec<f64>> {
        match &self.projection {
            Some(p) => p.apply(q),
            None => {
                check_dim(self.hashed_dim(), q.len())?;
                Ok(q.to_vec())
            }
        }
    }

    pub fn predict(&self, q: &[f64]) -> Result<f64> {
        let u = self.transform(q)?;
        Ok(self.predict_hashed(&u))
    }

    fn predict_hashed(&self, u: &[f64]) -> f64 {
        (0..self.num_points())
            .map(|j| self.alphas[j] * self.kernel.evaluate(self.point(j), u))
            .sum()
    }

    pub fn export_points(&self) -> Vec<WeightedPoint> {
        (0..self.num_points())
            .map(|j| WeightedPoint::new(self.point(j).to_vec(), self.alphas[j]))
            .collect()
    }

    /// Builds an `L x R` sketch of this model, carrying the projection so the
    /// sketch accepts raw inputs.
    pub fn to_sketch(&self, rows: usize, range: usize, master_seed: u64) -> Result<RepresenterSketch> {
        let spec = LshEnsembleSpec {
            family: self.kernel.family,
            rows,
            concat: self.kernel.concat,
            range,
            master_seed,
        };
        let mut sketch = RepresenterSketch::with_projection(spec, self.projection.clone())?;
        sketch.extend(&self.export_points())?;
        Ok(sketch)
    }

    /// Mean squared error over a data set.
    pub fn mse(&self, inputs: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
        check_dim(inputs.len(), targets.len())?;
        if inputs.is_empty() {
            return Err(Error::input("empty evaluation set"));
        }
        let mut acc = 0.0;
        for (q, &y) in inputs.iter().zip(targets) {
            let e = self.predict(q)? - y;
            acc += e * e;
        }
        Ok(acc / inputs.len() as f64)
    }
}

/// Gradients of the squared error `(f(q) - y)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub alphas: Vec<f64>,
    pub points: Vec<f64>,
    pub projection: Option<Vec<f64>>,
    pub prediction: f64,
    pub loss: f64,
}

impl Gradients {
    fn zeros(model: &KernelModel) -> Self {
        Self {
            alphas: alloc::vec![0.0; model.alphas.len()],
            points: alloc::vec![0.0; model.points.len()],
            projection: model.projection.as_ref().map(|p| alloc::vec![0.0; p.matrix().len()]),
            prediction: 0.0,
            loss: 0.0,
        }
    }

    fn reset(&mut self) {
        self.alphas.iter_mut().for_each(|g| *g = 0.0);
        self.points.iter_mut().for_each(|g| *g = 0.0);
        if let Some(p) = &mut self.projection {
            p.iter_mut().for_each(|g| *g = 0.0);
        }
        self.prediction = 0.0;
        self.loss = 0.0;
    }
}

/// Analytic gradients of `(f(q) - y)^2` with respect to the weights, the anchor
/// points and the projection.
pub fn kernel_gradients(model: &KernelModel, q: &[f64], y: f64) -> Result<Gradients> {
    check_dim(model.data_dim(), q.len())?;
    if !y.is_finite() || q.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite query or target"));
    }
    let mut grads = Gradients::zeros(model);
    let mut scratch = Scratch::new(model);
    accumulate(model, q, y, 1.0, &mut grads, &mut scratch);
    Ok(grads)
}

struct Scratch {
    u: Vec<f64>,
    grad_u: Vec<f64>,
    kernel_values: Vec<f64>,
    /// `d kernel / du` per point, `M x w`; `d kernel / dx` is stored alongside.
    kernel_du: Vec<f64>,
    kernel_dx: Vec<f64>,
}

impl Scratch {
    fn new(model: &KernelModel) -> Self {
        let (m, w) = (model.num_points(), model.hashed_dim());
        Self {
            u: alloc::vec![0.0; w],
            grad_u: alloc::vec![0.0; w],
            kernel_values: alloc::vec![0.0; m],
            kernel_du: alloc::vec![0.0; m * w],
            kernel_dx: alloc::vec![0.0; m * w],
        }
    }
}

/// Row kernel between `u` and `x` and its gradients with respect to both.
fn kernel_with_gradients(kernel: &KernelConfig, u: &[f64], x: &[f64], du: &mut [f64], dx: &mut [f64]) -> f64 {
    let c = kernel.separation(x, u);
    let base = kernel.base_kernel(c);
    let k = kernel.concat;
    let value = powi(base, k);
    let dvalue_dc = k as f64 * powi(base, k - 1) * kernel.base_kernel_slope(c);

    if kernel.family.family.is_distance_based() {
        let scale = dvalue_dc / c.max(MIN_SEPARATION);
        for i in 0..u.len() {
            let g = scale * (u[i] - x[i]);
            du[i] = g;
            dx[i] = -g;
        }
    } else {
        let nu = libm::sqrt(dot(u, u));
        let nx = libm::sqrt(dot(x, x));
        if nu == 0.0 || nx == 0.0 {
            du.iter_mut().chain(dx.iter_mut()).for_each(|g| *g = 0.0);
            return value;
        }
        let cos = (dot(u, x) / (nu * nx)).clamp(-1.0, 1.0);
        // sin(theta) as the norm of the component of x/|x| orthogonal to u, which
        // stays accurate near 0 and pi where sqrt(1 - cos^2) does not.
        let sin = libm::sqrt(u.iter().zip(x).map(|(a, b)| powi(b / nx - cos * a / nu, 2)).sum::<f64>());
        if sin < ANGLE_CUSP {
            // The angle has a cusp here; take the zero subgradient.
            du.iter_mut().chain(dx.iter_mut()).for_each(|g| *g = 0.0);
            return value;
        }
        // d theta / d cos = -1 / sin
        let scale = -dvalue_dc / sin;
        for i in 0..u.len() {
            du[i] = scale * (x[i] / nx - cos * u[i] / nu) / nu;
            dx[i] = scale * (u[i] / nu - cos * x[i] / nx) / nx;
        }
    }
    value
}

/// Adds `weight * d(f(q) - y)^2` into `grads` and returns the squared error.
fn accumulate(model: &KernelModel, q: &[f64], y: f64, weight: f64, grads: &mut Gradients, s: &mut Scratch) -> f64 {
    let (m, w) = (model.num_points(), model.hashed_dim());
    match &model.projection {
        Some(p) => p.apply_into(q, &mut s.u),
        None => s.u.copy_from_slice(q),
    }
    let mut f = 0.0;
    for j in 0..m {
        let kv = kernel_with_gradients(
            &model.kernel,
            &s.u,
            model.point(j),
            &mut s.kernel_du[j * w..(j + 1) * w],
            &mut s.kernel_dx[j * w..(j + 1) * w],
        );
        s.kernel_values[j] = kv;
        f += model.alphas[j] * kv;
    }
    let residual = f - y;
    let e = 2.0 * residual * weight;
    s.grad_u.iter_mut().for_each(|g| *g = 0.0);
    for j in 0..m {
        grads.alphas[j] += e * s.kernel_values[j];
        let a = e * model.alphas[j];
        for i in 0..w {
            grads.points[j * w + i] += a * s.kernel_dx[j * w + i];
            s.grad_u[i] += a * s.kernel_du[j * w + i];
        }
    }
    if let Some(gp) = &mut grads.projection {
        for (row, &qi) in q.iter().enumerate() {
            for (g, &gu) in gp[row * w..(row + 1) * w].iter_mut().zip(&s.grad_u) {
                *g += qi * gu;
            }
        }
    }
    grads.prediction = f;
    let loss = residual * residual;
    grads.loss += weight * loss;
    loss
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Anchors start at projected training inputs.
    DataSubsample,
    /// Anchors start at standard normal draws.
    GaussianRandom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// Gradient descent with heavy-ball momentum (0 disables it).
    Sgd { momentum: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistillConfig {
    pub num_points: usize,
    /// Learn a projection into this many dimensions; `None` hashes raw inputs.
    pub projected_dim: Option<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub init: InitScheme,
    pub optimizer: Optimizer,
    /// Initial weights are drawn from `U[-s, s]`.
    pub alpha_init_scale: f64,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self {
            num_points: 100,
            projected_dim: None,
            learning_rate: 0.05,
            epochs: 50,
            batch_size: 64,
            seed: 0,
            init: InitScheme::DataSubsample,
            optimizer: Optimizer::Sgd { momentum: 0.9 },
            alpha_init_scale: 0.01,
        }
    }
}

impl DistillConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_points == 0 {
            return Err(Error::Config("number of points M must be positive".into()));
        }
        if self.projected_dim == Some(0) {
            return Err(Error::Config("projected dimension must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        if !(self.alpha_init_scale >= 0.0) {
            return Err(Error::Config("alpha init scale must be nonnegative".into()));
        }
        match self.optimizer {
            Optimizer::Sgd { momentum } if !(0.0..1.0).contains(&momentum) => {
                Err(Error::Config("momentum must be in [0, 1)".into()))
            }
            Optimizer::Adam { beta1, beta2, epsilon }
                if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && epsilon > 0.0) =>
            {
                Err(Error::Config("invalid Adam parameters".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: KernelModel,
    /// Full-training-set MSE before training (index 0) and after each epoch.
    pub losses: Vec<f64>,
}

/// Seeded Gaussian projection scaled by `1/sqrt(d)`.
pub fn initial_projection(data_dim: usize, projected_dim: usize, seed: u64) -> Result<Projection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5052_4F4A);
    let scale = 1.0 / libm::sqrt(data_dim as f64);
    let m = (0..data_dim * projected_dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Projection::new(data_dim, projected_dim, m)
}

fn check_training_set(inputs: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if inputs.is_empty() {
        return Err(Error::input("empty teacher set"));
    }
    check_dim(inputs.len(), targets.len())?;
    let d = inputs[0].len();
    if d == 0 {
        return Err(Error::input("inputs have zero dimension"));
    }
    for (q, y) in inputs.iter().zip(targets) {
        check_dim(d, q.len())?;
        if !y.is_finite() || q.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("teacher set contains non-finite values"));
        }
    }
    Ok(d)
}

fn initial_model(inputs: &[Vec<f64>], cfg: &DistillConfig, kernel: KernelConfig) -> Result<KernelModel> {
    let d = inputs[0].len();
    let projection = match cfg.projected_dim {
        Some(p) if p > d => {
            return Err(Error::Config(alloc::format!(
                "projected dimension {p} exceeds data dimension {d}"
            )))
        }
        Some(p) => Some(initial_projection(d, p, cfg.seed)?),
        None => None,
    };
    let width = cfg.projected_dim.unwrap_or(d);
    let kernel = KernelConfig {
        family: crate::lsh::LshFamilyConfig {
            input_dim: width,
            ..kernel.family
        },
        ..kernel
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.num_points;
    let mut points = Vec::with_capacity(m * width);
    match cfg.init {
        InitScheme::DataSubsample => {
            let picks: Vec<usize> = if m <= inputs.len() {
                rand::seq::index::sample(&mut rng, inputs.len(), m).into_vec()
            } else {
                (0..m).map(|_| rng.random_range(0..inputs.len())).collect()
            };
            for i in picks {
                match &projection {
                    Some(p) => points.extend(p.apply(&inputs[i])?),
                    None => points.extend_from_slice(&inputs[i]),
                }
            }
        }
        InitScheme::GaussianRandom => {
            points.extend((0..m * width).map(|_| rng.sample::<f64, _>(StandardNormal)));
        }
    }
    let s = cfg.alpha_init_scale;
    let alphas = (0..m)
        .map(|_| if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 })
        .collect();
    KernelModel::new(points, alphas, projection, kernel)
}

struct OptimizerState {
    first: Vec<f64>,
    second: Vec<f64>,
    steps: i32,
}

impl OptimizerState {
    fn new(n: usize) -> Self {
        Self {
            first: alloc::vec![0.0; n],
            second: alloc::vec![0.0; n],
            steps: 0,
        }
    }

    fn step(&mut self, opt: Optimizer, lr: f64, params: [&mut [f64]; 3], grads: [&[f64]; 3]) {
        self.steps += 1;
        let mut offset = 0;
        for (p, g) in params.into_iter().zip(grads) {
            let first = &mut self.first[offset..offset + p.len()];
            let second = &mut self.second[offset..offset + p.len()];
            offset += p.len();
            match opt {
                Optimizer::Sgd { momentum } => {
                    for i in 0..p.len() {
                        first[i] = momentum * first[i] + g[i];
                        p[i] -= lr * first[i];
                    }
                }
                Optimizer::Adam { beta1, beta2, epsilon } => {
                    let c1 = 1.0 - libm::pow(beta1, self.steps as f64);
                    let c2 = 1.0 - libm::pow(beta2, self.steps as f64);
                    for i in 0..p.len() {
                        first[i] = beta1 * first[i] + (1.0 - beta1) * g[i];
                        second[i] = beta2 * second[i] + (1.0 - beta2) * g[i] * g[i];
                        p[i] -= lr * (first[i] / c1) / (libm::sqrt(second[i] / c2) + epsilon);
                    }
                }
            }
        }
    }
}

fn training_loss(model: &KernelModel, inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
    let mut u = alloc::vec![0.0; model.hashed_dim()];
    let mut acc = 0.0;
    for (q, &y) in inputs.iter().zip(targets) {
        match &model.projection {
            Some(p) => p.apply_into(q, &mut u),
            None => u.copy_from_slice(q),
        }
        let e = model.predict_hashed(&u) - y;
        acc += e * e;
    }
    acc / inputs.len() as f64
}

/// Fits a kernel model to teacher scores by mini-batch gradient descent on MSE.
///
/// `kernel.family.input_dim` is overwritten with the hashed dimension
/// (`cfg.projected_dim`, or the input dimension without a projection).
pub fn fit(inputs: &[Vec<f64>], targets: &[f64], cfg: &DistillConfig, kernel: KernelConfig) -> Result<FitOutcome> {
    cfg.validate()?;
    check_training_set(inputs, targets)?;
    let mut model = initial_model(inputs, cfg, kernel)?;
    let n = inputs.len();
    let n_params = model.alphas.len() + model.points.len() + model.projection.as_ref().map_or(0, |p| p.matrix().len());
    let mut state = OptimizerState::new(n_params);
    let mut grads = Gradients::zeros(&model);
    let mut scratch = Scratch::new(&model);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));

    let mut losses = Vec::with_capacity(cfg.epochs + 1);
    let initial = training_loss(&model, inputs, targets);
    if !initial.is_finite() {
        return Err(Error::Diverged { epoch: 0 });
    }
    losses.push(initial);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grads.reset();
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                accumulate(&model, &inputs[i], targets[i], weight, &mut grads, &mut scratch);
            }
            let empty: &mut [f64] = &mut [];
            let proj_params = match &mut model.projection {
                Some(p) => p.matrix_mut(),
                None => empty,
            };
            let proj_grads = grads.projection.as_deref().unwrap_or(&[]);
            state.step(
                cfg.optimizer,
                cfg.learning_rate,
                [&mut model.alphas, &mut model.points, proj_params],
                [&grads.alphas, &grads.points, proj_grads],
            );
        }
        let loss = training_loss(&model, inputs, targets);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        losses.push(loss);
    }
    Ok(FitOutcome { model, losses })
}

/// Median Euclidean distance between pairs of (at most `sample`) inputs,
/// optionally mapped through a projection first.
pub fn median_pairwise_distance(
    inputs: &[Vec<f64>],
    projection: Option<&Projection>,
    sample: usize,
    seed: u64,
) -> Result<f64> {
    if inputs.len() < 2 {
        return Err(Error::input("need at least two inputs"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = sample.min(inputs.len()).max(2);
    let picks = rand::seq::index::sample(&mut rng, inputs.len(), k).into_vec();
    let mut mapped = Vec::with_capacity(k);
    for i in picks {
        mapped.push(match projection {
            Some(p) => p.apply(&inputs[i])?,
            None => inputs[i].clone(),
        });
    }
    let mut dists = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            dists.push(crate::lsh::euclidean(&mapped[a], &mapped[b]));
        }
    }
    dists.sort_by(f64::total_cmp);
    Ok(dists[dists.len() / 2])
}

pub const BANDWIDTH_MULTIPLIERS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone)]
pub struct BandwidthSearch {
    pub median_distance: f64,
    /// `(bandwidth, validation MSE)` per candidate; divergent candidates are skipped.
    pub candidates: Vec<(f64, f64)>,
    pub best: f64,
}

/// Picks the bandwidth from `{0.5, 1, 2, 4, 8} x median pairwise distance` with
/// the lowest MSE on the held-out tail (`validation` inputs/targets).
pub fn select_bandwidth(
    train: (&[Vec<f64>], &[f64]),
    validation: (&[Vec<f64>], &[f64]),
    cfg: &DistillConfig,
    kernel: KernelConfig,
) -> Result<BandwidthSearch> {
    let d = check_training_set(train.0, train.1)?;
    check_training_set(validation.0, validation.1)?;
    let projection = match cfg.projected_dim {
        Some(p) => Some(initial_projection(d, p.min(d), cfg.seed)?),
        None => None,
    };
    let median = median_pairwise_distance(train.0, projection.as_ref(), 1000, cfg.seed)?;
    if !(median > 0.0) {
        return Err(Error::input("all sampled inputs coincide; cannot scale bandwidth"));
    }
    let mut candidates = Vec::new();
    for m in BANDWIDTH_MULTIPLIERS {
        let mut k = kernel;
        k.family.bandwidth = m * median;
        match fit(train.0, train.1, cfg, k) {
            Ok(out) => candidates.push((k.family.bandwidth, out.model.mse(validation.0, validation.1)?)),
            Err(Error::Diverged { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let best = candidates
        .iter()
        .filter(|c| c.1.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|c| c.0)
        .ok_or_else(|| Error::Config("training diverged for every bandwidth candidate".into()))?;
    Ok(BandwidthSearch {
        median_distance: median,
        candidates,
        best,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Scores are probabilities; positive iff `score >= 0.5`.
    Probability,
    /// Scores are logits or `+-1` targets; positive iff `score >= 0`.
    Sign,
}

impl core::str::FromStr for ThresholdMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probability" | "prob" => Ok(ThresholdMode::Probability),
            "sign" | "logit" => Ok(ThresholdMode::Sign),
            other => Err(Error::Config(alloc::format!("unknown threshold mode {other:?}"))),
        }
    }
}

/// Turns a score into a prediction: `0.0`/`1.0` for classification, the score itself for regression.
pub fn decide(score: f64, task: Task, mode: ThresholdMode) -> Result<f64> {
    if !score.is_finite() {
        return Err(Error::input(alloc::format!("non-finite score {score}")));
    }
    Ok(match task {
        Task::Regression => score,
        Task::BinaryClassification => {
            let threshold = match mode {
                ThresholdMode::Probability => 0.5,
                ThresholdMode::Sign => 0.0,
            };
            if score >= threshold {
                1.0
            } else {
                0.0
            }
        }
    })
}
