//! Binary model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes   "RGCUTGNN"
//! version    u32
//! loss       u8        0 = relaxation, 1 = policy gradient
//! flags      u8        bit 0: degree term, bit 1: normalization
//! reserved   u16       zero
//! K          u32       layers
//! J          u32       hops
//! widths     u32 count (= K + 1), then that many u32
//! params     u32 count, then per matrix: rows u32, cols u32, rows·cols f64
//! ```
//!
//! Matrices appear in [`GnnModel::params`] order, each row-major.

use alloc::format;
use alloc::vec::Vec;

use super::model::{GnnModel, LossKind, ModelConfig};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"RGCUTGNN";
pub const VERSION: u32 = 1;

const DEGREE_FLAG: u8 = 1;
const NORMALIZE_FLAG: u8 = 2;

pub fn encode(model: &GnnModel) -> Vec<u8> {
    let cfg = &model.config;
    let mut out = Vec::with_capacity(64 + 8 * model.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(cfg.loss.code());
    out.push((u8::from(cfg.degree_term) * DEGREE_FLAG) | (u8::from(cfg.normalize) * NORMALIZE_FLAG));
    out.extend_from_slice(&0u16.to_le_bytes());
    let put = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    put(&mut out, cfg.layers);
    put(&mut out, cfg.hops);
    let widths = cfg.widths();
    put(&mut out, widths.len());
    widths.iter().for_each(|&w| put(&mut out, w));
    put(&mut out, model.params().count());
    for m in model.params() {
        put(&mut out, m.rows);
        put(&mut out, m.cols);
        m.data.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    }
    out
}

/// Parses and shape-checks a checkpoint. For single-layer models the
/// interior width is not recorded and comes back as the default.
pub fn decode(bytes: &[u8]) -> Result<GnnModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(bad("missing RGCUTGNN magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let loss = LossKind::from_code(r.take(1)?[0]).ok_or_else(|| bad("unknown loss kind"))?;
    let flags = r.take(1)?[0];
    if flags & !(DEGREE_FLAG | NORMALIZE_FLAG) != 0 || r.take(2)? != [0, 0] {
        return Err(bad("unknown flag bits"));
    }
    let layers = r.u32()? as usize;
    let hops = r.u32()? as usize;
    let count = r.u32()? as usize;
    if count != layers.wrapping_add(1) {
        return Err(bad(format!("{count} widths for {layers} layers")));
    }
    let widths = (0..count).map(|_| r.u32().map(|w| w as usize)).collect::<Result<Vec<_>>>()?;
    let width = if layers > 1 { widths[1] } else { ModelConfig::default().width };
    let config = ModelConfig {
        layers,
        hops,
        width,
        loss,
        degree_term: flags & DEGREE_FLAG != 0,
        normalize: flags & NORMALIZE_FLAG != 0,
    };
    let mut model = GnnModel::zeros(config).map_err(|e| bad(format!("{e}")))?;
    if model.config.widths() != widths {
        return Err(bad("widths are not of the form [1, b, …, b, 2]"));
    }
    let stored = r.u32()? as usize;
    if stored != model.params().count() {
        return Err(bad(format!("{stored} parameter matrices, expected {}", model.params().count())));
    }
    for (i, m) in model.params_mut().enumerate() {
        let (rows, cols) = (r.u32()? as usize, r.u32()? as usize);
        if (rows, cols) != m.shape() {
            return Err(bad(format!("matrix {i} is {rows}×{cols}, expected {}×{}", m.rows, m.cols)));
        }
        for x in m.data.iter_mut() {
            *x = f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        }
    }
    if r.pos != bytes.len() {
        return Err(bad(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(model)
}

fn bad(msg: impl Into<alloc::string::String>) -> Error {
    Error::Checkpoint(msg.into())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len()).ok_or_else(|| bad("truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GnnModel {
        let cfg = ModelConfig { layers: 3, hops: 2, width: 4, loss: LossKind::PolicyGradient, degree_term: true, normalize: false };
        GnnModel::new(cfg, 9).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let bytes = encode(&m);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(decode(&bytes).unwrap(), m);
        let default = GnnModel::new(ModelConfig::default(), 1).unwrap();
        assert_eq!(decode(&encode(&default)).unwrap(), default);
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = encode(&sample());
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::Checkpoint(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(decode(&magic).is_err());
        let mut version = bytes.clone();
        version[8] = 2;
        assert!(decode(&version).is_err());
        let mut loss = bytes;
        loss[12] = 7;
        assert!(decode(&loss).is_err());
        assert!(decode(&[]).is_err());
    }
}
