//! LSH families, the `L x K` hash ensemble behind a sketch, and the closed-form
//! collision-probability kernels those families induce.
//!
//! Three families are supported:
//!
//! * [`LshFamily::L2PStable`]: `floor((a.v + b) / r)` with `a ~ N(0, I)` and
//!   `b ~ U[0, r)`. Its collision probability at distance `c` is the kernel
//!   computed by [`collision_probability`].
//! * [`LshFamily::SparseSign`]: the same quantizer, but `a` has entries in
//!   `{-1, 0, +1}` with probabilities `{1/6, 2/3, 1/6}`, so the projection is a
//!   sum of additions and subtractions. Each entry has variance `1/3`, so the
//!   projected difference is approximately `N(0, c^2 / 3)` and the kernel is the
//!   L2 kernel evaluated at `c / sqrt(3)`.
//! * [`LshFamily::SignProjection`]: `sign(a.v)`, collision probability
//!   `1 - theta / pi` where `theta` is the angle between the inputs.
//!
//! Every hash function of an ensemble is sampled from its own generator seeded
//! by `(master_seed, row, slot)`, so growing `L` or `K` never changes the
//! functions that already exist.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use core::ops::{Add, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

/// `sqrt(2 / pi)`.
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const SQRT_3: f64 = 1.732_050_807_568_877_2;
/// Mersenne prime `2^61 - 1`, modulus of the tuple hash.
const MERSENNE_61: u64 = (1 << 61) - 1;
/// Slot tag reserved for the per-row tuple-hash key.
const ROW_KEY_SLOT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LshFamily {
    L2PStable,
    SignProjection,
    SparseSign,
}

impl LshFamily {
    /// Wire code used by the sketch and model file formats.
    pub fn code(self) -> u8 {
        match self {
            LshFamily::L2PStable => 0,
            LshFamily::SignProjection => 1,
            LshFamily::SparseSign => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LshFamily::L2PStable),
            1 => Some(LshFamily::SignProjection),
            2 => Some(LshFamily::SparseSign),
            _ => None,
        }
    }

    /// Families whose kernel depends on Euclidean distance (as opposed to angle).
    pub fn is_distance_based(self) -> bool {
        !matches!(self, LshFamily::SignProjection)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshFamilyConfig {
    pub family: LshFamily,
    /// Quantization width `r`; ignored by the sign family.
    pub bandwidth: f64,
    pub input_dim: usize,
}

impl LshFamilyConfig {
    pub fn l2(input_dim: usize, bandwidth: f64) -> Self {
        Self {
            family: LshFamily::L2PStable,
            bandwidth,
            input_dim,
        }
    }

    pub fn sparse(input_dim: usize, bandwidth: f64) -> Self {
        Self {
            family: LshFamily::SparseSign,
            bandwidth,
            input_dim,
        }
    }

    pub fn sign(input_dim: usize) -> Self {
        Self {
            family: LshFamily::SignProjection,
            bandwidth: 0.0,
            input_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::input("hash input dimension must be at least 1"));
        }
        if self.family.is_distance_based() && !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::input(alloc::format!(
                "bandwidth r must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }
}

/// The kernel a sketch estimates: the collision probability of one concatenated
/// row hash, i.e. the base family's collision probability to the power `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub family: LshFamilyConfig,
    pub concat: usize,
}

impl KernelConfig {
    pub fn new(family: LshFamilyConfig, concat: usize) -> Self {
        Self { family, concat }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.concat == 0 {
            return Err(Error::input("concatenation depth K must be at least 1"));
        }
        Ok(())
    }

    /// Distance (or angle, for the sign family) between two vectors as seen by the kernel.
    pub fn separation(&self, x: &[f64], q: &[f64]) -> f64 {
        match self.family.family {
            LshFamily::SignProjection => angle(x, q),
            _ => euclidean(x, q),
        }
    }

    /// Collision probability of a single (unconcatenated) hash at separation `c`.
    pub fn base_kernel(&self, c: f64) -> f64 {
        let r = self.family.bandwidth;
        match self.family.family {
            LshFamily::L2PStable => l2_kernel(c, r),
            LshFamily::SparseSign => l2_kernel(c / SQRT_3, r),
            LshFamily::SignProjection => (1.0 - c / PI).clamp(0.0, 1.0),
        }
    }

    /// `d base_kernel / dc`.
    pub(crate) fn base_kernel_slope(&self, c: f64) -> f64 {
        let r = self.family.bandwidth;
        match self.family.family {
            LshFamily::L2PStable => l2_kernel_slope(c, r),
            LshFamily::SparseSign => l2_kernel_slope(c / SQRT_3, r) / SQRT_3,
            LshFamily::SignProjection => -1.0 / PI,
        }
    }

    /// Row kernel `base_kernel(c)^K`.
    pub fn row_kernel(&self, c: f64) -> f64 {
        powi(self.base_kernel(c), self.concat)
    }

    /// Row kernel between two vectors.
    pub fn evaluate(&self, x: &[f64], q: &[f64]) -> f64 {
        self.row_kernel(self.separation(x, q))
    }
}

pub(crate) fn powi(x: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Angle in `[0, pi]`; a zero vector is treated as orthogonal to everything,
/// which matches the sign hash sending it to a fixed bit.
pub(crate) fn angle(a: &[f64], b: &[f64]) -> f64 {
    let na = libm::sqrt(dot(a, a));
    let nb = libm::sqrt(dot(b, b));
    if na == 0.0 || nb == 0.0 {
        return PI / 2.0;
    }
    libm::acos((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Collision probability of the p-stable L2 hash with width `r` for two points
/// at Euclidean distance `c`:
///
/// `p(c) = 1 - 2 Phi(-r/c) - 2c / (sqrt(2 pi) r) * (1 - exp(-r^2 / (2 c^2)))`, `p(0) = 1`.
pub fn collision_probability(c: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::input(alloc::format!("bandwidth r must be positive, got {r}")));
    }
    if !(c >= 0.0) {
        return Err(Error::input(alloc::format!("distance must be nonnegative, got {c}")));
    }
    Ok(l2_kernel(c, r))
}

/// Unchecked closed form. Written as `erf(s / sqrt 2) - sqrt(2/pi) (1 - e^{-s^2/2}) / s`
/// with `s = r / c`, which stays accurate for both small and large `s`.
pub(crate) fn l2_kernel(c: f64, r: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    if c.is_infinite() {
        return 0.0;
    }
    let s = r / c;
    let value = libm::erf(s * FRAC_1_SQRT_2) + SQRT_2_OVER_PI * libm::expm1(-0.5 * s * s) / s;
    value.clamp(0.0, 1.0)
}

/// `dp/dc = -(2 / (sqrt(2 pi) r)) (1 - exp(-r^2 / (2 c^2)))`. At `c = 0` the kernel
/// has a cusp; the slope is taken as 0 there (radial maximum).
pub(crate) fn l2_kernel_slope(c: f64, r: f64) -> f64 {
    if c == 0.0 || c.is_infinite() {
        return 0.0;
    }
    let s = r / c;
    SQRT_2_OVER_PI / r * libm::expm1(-0.5 * s * s)
}

/// Kernel of one sketch row: `collision_probability(c, r)^K` for the L2 family and
/// the family-appropriate base kernel otherwise.
pub fn effective_row_kernel(c: f64, kernel: &KernelConfig) -> Result<f64> {
    kernel.validate()?;
    if !(c >= 0.0) {
        return Err(Error::input(alloc::format!("distance must be nonnegative, got {c}")));
    }
    Ok(kernel.row_kernel(c))
}

/// `floor((a.v + b) / r)`.
pub fn hash_l2(v: &[f64], a: &[f64], b: f64, r: f64) -> Result<i64> {
    check_dim(a.len(), v.len())?;
    if !(r > 0.0) {
        return Err(Error::input("bandwidth r must be positive"));
    }
    Ok(quantize(dot(a, v), b, r))
}

#[inline]
fn quantize(projection: f64, offset: f64, r: f64) -> i64 {
    libm::floor((projection + offset) / r) as i64
}

/// `sign(a.v)` as a bit: 1 when `a.v >= 0`, 0 otherwise.
pub fn hash_sign(v: &[f64], a: &[f64]) -> Result<u8> {
    check_dim(a.len(), v.len())?;
    Ok(sign_bit(dot(a, v)))
}

#[inline]
fn sign_bit(projection: f64) -> u8 {
    u8::from(projection >= 0.0)
}

/// A projection row over `{-1, 0, +1}` stored as the index lists of its nonzeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRow {
    dim: usize,
    plus: Vec<u32>,
    minus: Vec<u32>,
}

impl SparseRow {
    pub fn from_entries(entries: &[i8]) -> Result<Self> {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (i, &e) in entries.iter().enumerate() {
            match e {
                1 => plus.push(i as u32),
                -1 => minus.push(i as u32),
                0 => {}
                other => {
                    return Err(Error::input(alloc::format!(
                        "sparse projection entry {i} is {other}, expected -1, 0 or +1"
                    )))
                }
            }
        }
        Ok(Self {
            dim: entries.len(),
            plus,
            minus,
        })
    }

    /// Entries drawn i.i.d. from `{+1: 1/6, 0: 2/3, -1: 1/6}`.
    pub fn sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for i in 0..dim {
            match sample_sparse_entry(rng) {
                1 => plus.push(i as u32),
                -1 => minus.push(i as u32),
                _ => {}
            }
        }
        Self { dim, plus, minus }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nonzeros(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn entries(&self) -> Vec<i8> {
        let mut out = alloc::vec![0i8; self.dim];
        for &i in &self.plus {
            out[i as usize] = 1;
        }
        for &i in &self.minus {
            out[i as usize] = -1;
        }
        out
    }

    /// Inner product with `v` using only additions and subtractions. The bound on
    /// `T` has no `Mul`, so no data entry can be multiplied here.
    pub fn dot<T>(&self, v: &[T], zero: T) -> T
    where
        T: Copy + Add<Output = T> + Sub<Output = T>,
    {
        let mut acc = zero;
        for &i in &self.plus {
            acc = acc + v[i as usize];
        }
        for &i in &self.minus {
            acc = acc - v[i as usize];
        }
        acc
    }
}

pub fn sample_sparse_entry<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    match rng.random_range(0u8..6) {
        0 => 1,
        1 => -1,
        _ => 0,
    }
}

/// `floor((s.v + b) / r)` where `s.v` is computed by additions/subtractions only.
pub fn hash_sparse(v: &[f64], row: &SparseRow, b: f64, r: f64) -> Result<i64> {
    check_dim(row.dim, v.len())?;
    if !(r > 0.0) {
        return Err(Error::input("bandwidth r must be positive"));
    }
    Ok(quantize(row.dot(v, 0.0), b, r))
}

/// Full description of an `L x K` ensemble. Everything random is derived from
/// `master_seed`, so the spec alone reproduces the hash functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshEnsembleSpec {
    pub family: LshFamilyConfig,
    pub rows: usize,
    pub concat: usize,
    pub range: usize,
    pub master_seed: u64,
}

impl LshEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.rows == 0 {
            return Err(Error::input("rows L must be at least 1"));
        }
        if self.concat == 0 {
            return Err(Error::input("concatenation depth K must be at least 1"));
        }
        if self.range < 2 {
            return Err(Error::input(alloc::format!(
                "range R must be at least 2, got {}",
                self.range
            )));
        }
        Ok(())
    }

    pub fn kernel(&self) -> KernelConfig {
        KernelConfig::new(self.family, self.concat)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed of hash function `(row, slot)`. Pure function of its arguments.
pub fn derive_seed(master_seed: u64, row: u64, slot: u64) -> u64 {
    splitmix64(splitmix64(master_seed ^ splitmix64(row)).wrapping_add(slot))
}

#[derive(Debug, Clone)]
enum HashFunction {
    L2 { direction: Vec<f64>, offset: f64 },
    Sign { direction: Vec<f64> },
    Sparse { row: SparseRow, offset: f64 },
}

impl HashFunction {
    fn sample<R: Rng + ?Sized>(cfg: &LshFamilyConfig, rng: &mut R) -> Self {
        let dim = cfg.input_dim;
        match cfg.family {
            LshFamily::L2PStable => {
                let direction = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let offset = rng.random::<f64>() * cfg.bandwidth;
                HashFunction::L2 { direction, offset }
            }
            LshFamily::SignProjection => HashFunction::Sign {
                direction: (0..dim).map(|_| rng.sample(StandardNormal)).collect(),
            },
            LshFamily::SparseSign => {
                let row = SparseRow::sample(dim, rng);
                let offset = rng.random::<f64>() * cfg.bandwidth;
                HashFunction::Sparse { row, offset }
            }
        }
    }

    #[inline]
    fn eval(&self, v: &[f64], r: f64) -> i64 {
        match self {
            HashFunction::L2 { direction, offset } => quantize(dot(direction, v), *offset, r),
            HashFunction::Sign { direction } => i64::from(sign_bit(dot(direction, v))),
            HashFunction::Sparse { row, offset } => quantize(row.dot(v, 0.0), *offset, r),
        }
    }
}

/// Draws a single hash function of `cfg` from `rng` and returns it as a closure-like
/// evaluator. Used by calibration experiments that need many independent draws
/// without building whole ensembles.
#[derive(Debug, Clone)]
pub struct SampledHash {
    func: HashFunction,
    bandwidth: f64,
    dim: usize,
}

impl SampledHash {
    pub fn sample<R: Rng + ?Sized>(cfg: &LshFamilyConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            func: HashFunction::sample(cfg, rng),
            bandwidth: cfg.bandwidth,
            dim: cfg.input_dim,
        })
    }

    pub fn hash(&self, v: &[f64]) -> Result<i64> {
        check_dim(self.dim, v.len())?;
        Ok(self.func.eval(v, self.bandwidth))
    }
}

/// Materialized hash functions of an [`LshEnsembleSpec`].
#[derive(Debug, Clone)]
pub struct LshEnsemble {
    spec: LshEnsembleSpec,
    /// Row-major `L x K`.
    functions: Vec<HashFunction>,
    /// Per row: `K` multipliers in `[1, P)` followed by the additive term in `[0, P)`.
    row_keys: Vec<u64>,
}

impl LshEnsemble {
    pub fn new(spec: LshEnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let (rows, k) = (spec.rows, spec.concat);
        let mut functions = Vec::with_capacity(rows * k);
        let mut row_keys = Vec::with_capacity(rows * (k + 1));
        for l in 0..rows {
            for slot in 0..k {
                let seed = derive_seed(spec.master_seed, l as u64, slot as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                functions.push(HashFunction::sample(&spec.family, &mut rng));
            }
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(spec.master_seed, l as u64, ROW_KEY_SLOT));
            let additive = rng.random_range(0..MERSENNE_61);
            for _ in 0..k {
                row_keys.push(rng.random_range(1..MERSENNE_61));
            }
            row_keys.push(additive);
        }
        Ok(Self {
            spec,
            functions,
            row_keys,
        })
    }

    pub fn spec(&self) -> &LshEnsembleSpec {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.spec.rows
    }

    pub fn input_dim(&self) -> usize {
        self.spec.family.input_dim
    }

    /// Raw (pre-reduction) value of hash `slot` in row `row`.
    pub fn raw_hash(&self, v: &[f64], row: usize, slot: usize) -> Result<i64> {
        check_dim(self.input_dim(), v.len())?;
        if row >= self.spec.rows || slot >= self.spec.concat {
            return Err(Error::input(alloc::format!(
                "hash ({row}, {slot}) out of range for an {}x{} ensemble",
                self.spec.rows,
                self.spec.concat
            )));
        }
        Ok(self.functions[row * self.spec.concat + slot].eval(v, self.spec.family.bandwidth))
    }

    /// Column of `v` in `row`: the `K` raw hashes reduced into `[0, R)` by a seeded
    /// universal hash over `Z_P`, `P = 2^61 - 1`.
    pub fn index(&self, v: &[f64], row: usize) -> Result<usize> {
        check_dim(self.input_dim(), v.len())?;
        if row >= self.spec.rows {
            return Err(Error::input(alloc::format!(
                "row {row} out of range, ensemble has {} rows",
                self.spec.rows
            )));
        }
        Ok(self.index_unchecked(v, row))
    }

    /// Columns of `v` in every row.
    pub fn indices(&self, v: &[f64]) -> Result<Vec<usize>> {
        check_dim(self.input_dim(), v.len())?;
        Ok((0..self.spec.rows).map(|l| self.index_unchecked(v, l)).collect())
    }

    pub(crate) fn index_unchecked(&self, v: &[f64], row: usize) -> usize {
        let k = self.spec.concat;
        let r = self.spec.family.bandwidth;
        let funcs = &self.functions[row * k..(row + 1) * k];
        let keys = &self.row_keys[row * (k + 1)..(row + 1) * (k + 1)];
        let raw = funcs.iter().map(|f| f.eval(v, r));
        (tuple_hash(raw, keys) % self.spec.range as u64) as usize
    }
}

fn mod_mersenne(x: u128) -> u64 {
    let p = MERSENNE_61 as u128;
    let folded = (x & p) + (x >> 61);
    let folded = (folded & p) + (folded >> 61);
    let mut out = folded as u64;
    if out >= MERSENNE_61 {
        out -= MERSENNE_61;
    }
    out
}

/// `(c + sum_k a_k * h_k) mod P`. `keys` holds the `a_k` followed by `c`.
fn tuple_hash(raw: impl Iterator<Item = i64>, keys: &[u64]) -> u64 {
    let (additive, mults) = keys.split_last().expect("row key has K + 1 entries");
    let mut acc = *additive;
    for (h, &a) in raw.zip(mults) {
        let h = mod_mersenne(h as u64 as u128);
        acc = mod_mersenne(acc as u128 + a as u128 * h as u128);
    }
    acc
}
