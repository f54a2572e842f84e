//! Little-endian binary formats for sketches (`RSKH`) and kernel models (`RKMD`).
//!
//! Sketch layout (64-byte header):
//!
//! ```text
//! 0   magic "RSKH"          4
//! 4   format_version u32    = 1
//! 8   rows_L u32
//! 12  range_R u32
//! 16  concat_K u32
//! 20  family u8             0 = L2PStable, 1 = SignProjection, 2 = SparseSign
//! 21  pad [0; 3]
//! 24  master_seed u64
//! 32  bandwidth_r f64
//! 40  data_dim_d u32
//! 44  projected_dim_p u32   0 = no projection
//! 48  total_weight f64
//! 56  count u64
//! 64  projection d x p f64 row-major, only when p > 0
//! ..  counters L x R f64 row-major
//! ```
//!
//! Model layout (36-byte header): magic "RKMD", version u32, M u32, d u32, d' u32,
//! concat_K u32, family u8, pad [0; 3], bandwidth_r f64, then alpha (M f64),
//! points (M x w f64 with w = d' when d' > 0 and d otherwise) and, when d' > 0,
//! the d x d' projection.
//!
//! Both decoders reject trailing bytes and non-canonical padding, so decoding
//! followed by encoding reproduces the input exactly.

use alloc::string::String;
use alloc::vec::Vec;

use crate::distill::KernelModel;
use crate::error::{Error, Result};
use crate::lsh::{KernelConfig, LshEnsembleSpec, LshFamily, LshFamilyConfig};
use crate::projection::Projection;
use crate::sketch::RepresenterSketch;

pub const SKETCH_MAGIC: [u8; 4] = *b"RSKH";
pub const MODEL_MAGIC: [u8; 4] = *b"RKMD";
pub const FORMAT_VERSION: u32 = 1;
pub const SKETCH_HEADER_LEN: usize = 64;
pub const MODEL_HEADER_LEN: usize = 36;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::format(
                self.pos,
                alloc::format!(
                    "truncated: {field} needs {n} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            )),
        }
    }

    fn u8(&mut self, field: &str) -> Result<u8> {
        Ok(self.take(1, field)?[0])
    }
    fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }
    fn u64(&mut self, field: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }
    fn f64(&mut self, field: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize, field: &str) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| Error::format(self.pos, alloc::format!("{field} size overflows")))?;
        let raw = self.take(len, field)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != expected {
            return Err(Error::format(
                0,
                alloc::format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(&expected)
                ),
            ));
        }
        Ok(())
    }

    fn version(&mut self) -> Result<()> {
        let at = self.pos;
        let v = self.u32("format_version")?;
        if v != FORMAT_VERSION {
            return Err(Error::format(at, alloc::format!("unsupported format version {v}")));
        }
        Ok(())
    }

    fn family(&mut self) -> Result<LshFamily> {
        let at = self.pos;
        let code = self.u8("family")?;
        LshFamily::from_code(code)
            .ok_or_else(|| Error::format(at, alloc::format!("unknown LSH family code {code}")))
    }

    fn padding(&mut self) -> Result<()> {
        let at = self.pos;
        if self.take(3, "padding")?.iter().any(|&b| b != 0) {
            return Err(Error::format(at, "nonzero padding bytes"));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(
                self.pos,
                alloc::format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

/// Wraps a semantic validation failure as a format error at `offset`.
fn at_offset<T>(offset: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::format(offset, alloc::format!("{e}")))
}

pub fn sketch_to_bytes(sketch: &RepresenterSketch) -> Vec<u8> {
    let spec = sketch.spec();
    let mut w = Writer(Vec::with_capacity(
        SKETCH_HEADER_LEN + 8 * (sketch.counters().len() + sketch.projection().map_or(0, |p| p.matrix().len())),
    ));
    w.0.extend_from_slice(&SKETCH_MAGIC);
    w.u32(FORMAT_VERSION as usize);
    w.u32(spec.rows);
    w.u32(spec.range);
    w.u32(spec.concat);
    w.u8(spec.family.family.code());
    w.0.extend_from_slice(&[0; 3]);
    w.u64(spec.master_seed);
    w.f64(spec.family.bandwidth);
    w.u32(sketch.query_dim());
    w.u32(sketch.projection().map_or(0, Projection::projected_dim));
    w.f64(sketch.total_weight());
    w.u64(sketch.count());
    if let Some(p) = sketch.projection() {
        w.f64s(p.matrix());
    }
    w.f64s(sketch.counters());
    w.0
}

pub fn sketch_from_bytes(bytes: &[u8]) -> Result<RepresenterSketch> {
    let mut r = Reader::new(bytes);
    r.magic(SKETCH_MAGIC)?;
    r.version()?;
    let rows = r.u32("rows_L")? as usize;
    let range = r.u32("range_R")? as usize;
    let concat = r.u32("concat_K")? as usize;
    let family = r.family()?;
    r.padding()?;
    let master_seed = r.u64("master_seed")?;
    let bandwidth = r.f64("bandwidth_r")?;
    let data_dim = r.u32("data_dim_d")? as usize;
    let projected_dim = r.u32("projected_dim_p")? as usize;
    let total_weight = r.f64("total_weight")?;
    let count = r.u64("count")?;

    let spec = LshEnsembleSpec {
        family: LshFamilyConfig {
            family,
            bandwidth,
            input_dim: if projected_dim > 0 { projected_dim } else { data_dim },
        },
        rows,
        concat,
        range,
        master_seed,
    };
    at_offset(8, spec.validate())?;

    let projection = if projected_dim > 0 {
        let at = r.pos;
        let m = r.f64s(data_dim * projected_dim, "projection matrix")?;
        Some(at_offset(at, Projection::new(data_dim, projected_dim, m))?)
    } else {
        None
    };
    let counters = r.f64s(rows * range, "counters")?;
    r.finish()?;
    RepresenterSketch::from_parts(spec, projection, counters, total_weight, count)
}

pub fn model_to_bytes(model: &KernelModel) -> Vec<u8> {
    let kernel = model.kernel();
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(&MODEL_MAGIC);
    w.u32(FORMAT_VERSION as usize);
    w.u32(model.num_points());
    w.u32(model.data_dim());
    w.u32(model.projection().map_or(0, Projection::projected_dim));
    w.u32(kernel.concat);
    w.u8(kernel.family.family.code());
    w.0.extend_from_slice(&[0; 3]);
    w.f64(kernel.family.bandwidth);
    w.f64s(model.alphas());
    w.f64s(model.points());
    if let Some(p) = model.projection() {
        w.f64s(p.matrix());
    }
    w.0
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<KernelModel> {
    let mut r = Reader::new(bytes);
    r.magic(MODEL_MAGIC)?;
    r.version()?;
    let m = r.u32("M")? as usize;
    let data_dim = r.u32("d")? as usize;
    let projected_dim = r.u32("d'")? as usize;
    let concat = r.u32("concat_K")? as usize;
    let family = r.family()?;
    r.padding()?;
    let bandwidth = r.f64("bandwidth_r")?;
    let width = if projected_dim > 0 { projected_dim } else { data_dim };
    let kernel = KernelConfig::new(
        LshFamilyConfig {
            family,
            bandwidth,
            input_dim: width,
        },
        concat,
    );
    at_offset(8, kernel.validate())?;
    if m == 0 {
        return Err(Error::format(8, "model has no points"));
    }
    let alphas = r.f64s(m, "alphas")?;
    let points = r.f64s(m * width, "points")?;
    let projection = if projected_dim > 0 {
        let at = r.pos;
        let a = r.f64s(data_dim * projected_dim, "projection matrix")?;
        Some(at_offset(at, Projection::new(data_dim, projected_dim, a))?)
    } else {
        None
    };
    r.finish()?;
    at_offset(MODEL_HEADER_LEN, KernelModel::new(points, alphas, projection, kernel))
}
