//! Bit-level message for a partition result.
//!
//! Layout (all multi-byte fields little-endian):
//!
//! ```text
//! magic "LICD" | version u8 | n u8 | m u16 | dt f64 | T_local f64
//! | state_bits u8 | coeff_bits u8 | basis u8 | coeff_bound f64
//! | n x (lower f64, upper f64) state bounds | m x k_j u8 | payload_bits u32
//! | payload
//! ```
//!
//! The payload is LSB-first packed: the `m * n` restart-state codes, then
//! for every partition its `n * |basis(k_j)|` coefficient codes (row per
//! output component). Basis exponents are not sent; the decoder regenerates
//! the graded-lex basis from `(n, k_j)` and the basis byte (0 = terms,
//! 1 = degree).

use alloc::vec::Vec;

use thiserror::Error;

use crate::integrate::{rk4_steps, IntegrateError, Trajectory};
use crate::localmodel::{Complexity, LocalModel, MonomialBasis};
use crate::math;
use crate::partition::{LicdsResult, Window};

pub const MAGIC: [u8; 4] = *b"LICD";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("quantization spec: {0}")]
    InvalidSpec(&'static str),
    #[error("result has dimension {result}, spec has {spec} state bounds")]
    DimensionMismatch { result: usize, spec: usize },
    #[error("{0} does not fit the header field")]
    HeaderOverflow(&'static str),
    #[error("truncated message: expected {expected} bits, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("malformed header: {0}")]
    Malformed(&'static str),
    #[error("rollout failed while decoding: {0}")]
    Rollout(#[from] IntegrateError),
}

/// Alphabet sizes and ranges for restart states and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationSpec {
    pub state_bits: u8,
    pub coeff_bits: u8,
    pub state_bounds: Vec<(f64, f64)>,
    pub coeff_bound: f64,
}

impl QuantizationSpec {
    /// 16-bit states and coefficients, coefficients clamped to `[-64, 64]`.
    pub fn with_bounds(state_bounds: Vec<(f64, f64)>) -> Self {
        QuantizationSpec {
            state_bits: 16,
            coeff_bits: 16,
            state_bounds,
            coeff_bound: 64.0,
        }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if !(4..=32).contains(&self.state_bits) || !(4..=32).contains(&self.coeff_bits) {
            return Err(CodecError::InvalidSpec("bit widths must lie in [4, 32]"));
        }
        if !(self.coeff_bound > 0.0) || !self.coeff_bound.is_finite() {
            return Err(CodecError::InvalidSpec("coefficient bound must be positive"));
        }
        if self
            .state_bounds
            .iter()
            .any(|(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(CodecError::InvalidSpec("state bounds must be finite with upper > lower"));
        }
        Ok(())
    }
}

/// Uniform mid-rise quantizer with `2^bits` levels over `[lo, hi]`; `v` is
/// clamped into the interval first.
pub fn quantize(v: f64, bits: u8, interval: (f64, f64)) -> u32 {
    let (lo, hi) = interval;
    let levels = 1u64 << bits;
    let step = (hi - lo) / levels as f64;
    let v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
    let code = math::floor((v - lo) / step);
    (code.max(0.0) as u64).min(levels - 1) as u32
}

/// Centre of the cell `code`.
pub fn dequantize(code: u32, bits: u8, interval: (f64, f64)) -> f64 {
    let (lo, hi) = interval;
    let step = (hi - lo) / (1u64 << bits) as f64;
    lo + (code as f64 + 0.5) * step
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub dim: u8,
    pub dt: f64,
    pub t_local: f64,
    pub spec: QuantizationSpec,
    pub complexity: Complexity,
    pub complexities: Vec<u8>,
}

impl Header {
    pub fn partitions(&self) -> usize {
        self.complexities.len()
    }

    /// Coefficients per output component for complexity `k`.
    pub fn terms(&self, k: u8) -> usize {
        self.complexity.basis_len(self.dim as usize, k as usize)
    }

    pub fn partition_bits(&self, k: u8) -> u64 {
        let n = self.dim as u64;
        n * self.spec.state_bits as u64 + n * self.terms(k) as u64 * self.spec.coeff_bits as u64
    }

    pub fn payload_bits(&self) -> u64 {
        self.complexities.iter().map(|&k| self.partition_bits(k)).sum()
    }

    pub fn encoded_len(&self) -> usize {
        4 + 1 + 1 + 2 + 8 + 8 + 1 + 1 + 1 + 8 + 16 * self.dim as usize + self.partitions() + 4
    }

    /// Grid steps of the whole horizon.
    pub fn steps(&self) -> usize {
        math::round(self.partitions() as f64 * self.t_local / self.dt) as usize
    }
}

/// Encoded message: header plus packed payload.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMessage {
    pub header: Header,
    pub payload: Vec<u8>,
    /// Coefficients that had to be clamped into `[-B, B]`.
    pub clamped_coeffs: usize,
}

/// Bit accounting for one message.
#[derive(Debug, Clone, PartialEq)]
pub struct BitAccount {
    /// `n * state_bits + n * |basis(k_j)| * coeff_bits` per partition.
    pub per_partition: Vec<u64>,
    /// Sum of `per_partition`.
    pub payload_bits: u64,
    pub header_bits: u64,
    pub total_bits: u64,
    /// Same formula charging `k_max` coefficients in every partition.
    pub kmax_variant_bits: u64,
    /// Plain quantized trajectory: every sample, `n * state_bits` each.
    pub raw_bits: u64,
}

impl BitAccount {
    pub fn compression_ratio(&self) -> f64 {
        self.raw_bits as f64 / self.payload_bits as f64
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    fn push(&mut self, value: u32, width: u8) {
        for b in 0..width {
            let bit = (value >> b) & 1;
            let byte = (self.bits / 8) as usize;
            if byte == self.bytes.len() {
                self.bytes.push(0);
            }
            self.bytes[byte] |= (bit as u8) << (self.bits % 8);
            self.bits += 1;
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl BitReader<'_> {
    fn read(&mut self, width: u8) -> u32 {
        let mut v = 0u32;
        for b in 0..width {
            let byte = self.bytes[(self.pos / 8) as usize];
            let bit = (byte >> (self.pos % 8)) & 1;
            v |= (bit as u32) << b;
            self.pos += 1;
        }
        v
    }
}

fn coeff_interval(spec: &QuantizationSpec) -> (f64, f64) {
    (-spec.coeff_bound, spec.coeff_bound)
}

/// Quantizes the selected partitions of `result` into a message.
pub fn encode(result: &LicdsResult, spec: &QuantizationSpec) -> Result<EncodedMessage, CodecError> {
    let parts: Vec<(&[f64], &LocalModel)> = result
        .partitions
        .iter()
        .map(|p| (p.restart_state.as_slice(), &p.model))
        .collect();
    let m = parts.len();
    let t_local = result.params.t_global / m as f64;
    encode_parts(&parts, result.params.dt, t_local, result.params.complexity, spec)
}

/// Encodes restart states and local models directly.
pub fn encode_parts(
    parts: &[(&[f64], &LocalModel)],
    dt: f64,
    t_local: f64,
    complexity: Complexity,
    spec: &QuantizationSpec,
) -> Result<EncodedMessage, CodecError> {
    spec.validate()?;
    let dim = parts.first().map(|p| p.0.len()).ok_or(CodecError::Malformed("no partitions"))?;
    if dim != spec.state_bounds.len() {
        return Err(CodecError::DimensionMismatch {
            result: dim,
            spec: spec.state_bounds.len(),
        });
    }
    let dim_u8 = u8::try_from(dim).map_err(|_| CodecError::HeaderOverflow("dimension"))?;
    if parts.len() > u16::MAX as usize {
        return Err(CodecError::HeaderOverflow("partition count"));
    }
    let complexities = parts
        .iter()
        .map(|(_, model)| {
            (1..=u8::MAX)
                .find(|&k| complexity.basis_len(dim, k as usize) == model.k())
                .filter(|&k| complexity == Complexity::Terms || model.basis().max_degree() < k as u32)
                .ok_or(CodecError::HeaderOverflow("complexity"))
        })
        .collect::<Result<Vec<u8>, _>>()?;

    let mut w = BitWriter::default();
    for (restart, _) in parts {
        for (v, &bounds) in restart.iter().zip(&spec.state_bounds) {
            w.push(quantize(*v, spec.state_bits, bounds), spec.state_bits);
        }
    }
    let interval = coeff_interval(spec);
    let mut clamped_coeffs = 0;
    for (_, model) in parts {
        for &c in model.coeffs() {
            if c.abs() > spec.coeff_bound {
                clamped_coeffs += 1;
            }
            w.push(quantize(c, spec.coeff_bits, interval), spec.coeff_bits);
        }
    }
    let header = Header {
        dim: dim_u8,
        dt,
        t_local,
        spec: spec.clone(),
        complexity,
        complexities,
    };
    debug_assert_eq!(w.bits, header.payload_bits());
    Ok(EncodedMessage {
        header,
        payload: w.bytes,
        clamped_coeffs,
    })
}

impl EncodedMessage {
    pub fn payload_bits(&self) -> u64 {
        self.header.payload_bits()
    }

    /// Bit accounting; `k_max` feeds the variant charging every partition
    /// the maximum complexity.
    pub fn account(&self, k_max: usize) -> BitAccount {
        let h = &self.header;
        let n = h.dim as u64;
        let per_partition: Vec<u64> = h.complexities.iter().map(|&k| h.partition_bits(k)).collect();
        let payload_bits: u64 = per_partition.iter().sum();
        let header_bits = 8 * h.encoded_len() as u64;
        let m = h.partitions() as u64;
        let kmax_terms = h.complexity.basis_len(h.dim as usize, k_max) as u64;
        BitAccount {
            kmax_variant_bits: m * (n * h.spec.state_bits as u64 + n * kmax_terms * h.spec.coeff_bits as u64),
            raw_bits: (h.steps() as u64 + 1) * n * h.spec.state_bits as u64,
            per_partition,
            payload_bits,
            header_bits,
            total_bits: header_bits + payload_bits,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(h.encoded_len() + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(h.dim);
        out.extend_from_slice(&(h.partitions() as u16).to_le_bytes());
        out.extend_from_slice(&h.dt.to_le_bytes());
        out.extend_from_slice(&h.t_local.to_le_bytes());
        out.push(h.spec.state_bits);
        out.push(h.spec.coeff_bits);
        out.push(match h.complexity {
            Complexity::Terms => 0,
            Complexity::Degree => 1,
        });
        out.extend_from_slice(&h.spec.coeff_bound.to_le_bytes());
        for (lo, hi) in &h.spec.state_bounds {
            out.extend_from_slice(&lo.to_le_bytes());
            out.extend_from_slice(&hi.to_le_bytes());
        }
        out.extend_from_slice(&h.complexities);
        out.extend_from_slice(&(h.payload_bits() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = cur.u8()?;
        if version != VERSION {
            return Err(CodecError::BadVersion(version));
        }
        let dim = cur.u8()?;
        let m = cur.u16()? as usize;
        let dt = cur.f64()?;
        let t_local = cur.f64()?;
        let state_bits = cur.u8()?;
        let coeff_bits = cur.u8()?;
        let complexity = match cur.u8()? {
            0 => Complexity::Terms,
            1 => Complexity::Degree,
            _ => return Err(CodecError::Malformed("unknown basis kind")),
        };
        let coeff_bound = cur.f64()?;
        let mut state_bounds = Vec::with_capacity(dim as usize);
        for _ in 0..dim {
            state_bounds.push((cur.f64()?, cur.f64()?));
        }
        let complexities = cur.take(m)?.to_vec();
        let declared = cur.u32()? as u64;
        let header = Header {
            dim,
            dt,
            t_local,
            spec: QuantizationSpec {
                state_bits,
                coeff_bits,
                state_bounds,
                coeff_bound,
            },
            complexity,
            complexities,
        };
        header.spec.validate()?;
        if dim == 0 || m == 0 || header.complexities.contains(&0) {
            return Err(CodecError::Malformed("empty dimension, partition or basis"));
        }
        if !(dt > 0.0) || !(t_local >= dt) {
            return Err(CodecError::Malformed("time step"));
        }
        let expected = header.payload_bits();
        if declared != expected {
            return Err(CodecError::Malformed("declared payload length disagrees with header"));
        }
        let payload = &bytes[cur.pos..];
        let actual = 8 * payload.len() as u64;
        if actual < expected {
            return Err(CodecError::Truncated { expected, actual });
        }
        Ok(EncodedMessage {
            header,
            payload: payload[..expected.div_ceil(8) as usize].to_vec(),
            clamped_coeffs: 0,
        })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.pos + n > self.bytes.len() {
            return Err(CodecError::Truncated {
                expected: 8 * (self.pos + n) as u64,
                actual: 8 * self.bytes.len() as u64,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Dequantized restart states and local models.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedMessage {
    pub dt: f64,
    pub t_local: f64,
    pub complexity: Complexity,
    pub restart_states: Vec<Vec<f64>>,
    pub models: Vec<LocalModel>,
}

impl DecodedMessage {
    /// Re-encodes with the given quantization.
    pub fn encode(&self, spec: &QuantizationSpec) -> Result<EncodedMessage, CodecError> {
        let parts: Vec<(&[f64], &LocalModel)> = self
            .restart_states
            .iter()
            .map(|s| s.as_slice())
            .zip(&self.models)
            .collect();
        encode_parts(&parts, self.dt, self.t_local, self.complexity, spec)
    }
}

/// Reads back the quantized restart states and coefficients.
pub fn unpack(msg: &EncodedMessage) -> Result<DecodedMessage, CodecError> {
    let h = &msg.header;
    let expected = h.payload_bits();
    let actual = 8 * msg.payload.len() as u64;
    if actual < expected {
        return Err(CodecError::Truncated { expected, actual });
    }
    let n = h.dim as usize;
    let mut r = BitReader {
        bytes: &msg.payload,
        pos: 0,
    };
    let mut restart_states = Vec::with_capacity(h.partitions());
    for _ in 0..h.partitions() {
        let s: Vec<f64> = h
            .spec
            .state_bounds
            .iter()
            .map(|&b| dequantize(r.read(h.spec.state_bits), h.spec.state_bits, b))
            .collect();
        restart_states.push(s);
    }
    let interval = coeff_interval(&h.spec);
    let mut models = Vec::with_capacity(h.partitions());
    for (j, &k) in h.complexities.iter().enumerate() {
        let k = h.terms(k);
        let coeffs: Vec<f64> = (0..n * k)
            .map(|_| dequantize(r.read(h.spec.coeff_bits), h.spec.coeff_bits, interval))
            .collect();
        models.push(LocalModel::new(
            restart_states[j].clone(),
            MonomialBasis::new(n, k),
            coeffs,
        ));
    }
    Ok(DecodedMessage {
        dt: h.dt,
        t_local: h.t_local,
        complexity: h.complexity,
        restart_states,
        models,
    })
}

/// Reconstructs the trajectory: every partition's model is rolled out with
/// RK4 from its restart state over its window, and the windows are joined.
pub fn decode(msg: &EncodedMessage) -> Result<Trajectory, CodecError> {
    let decoded = unpack(msg)?;
    let h = &msg.header;
    let steps = h.steps();
    let m = h.partitions();
    let windows = Window::split(steps, m);
    let mut out = Trajectory::new(h.dim as usize, h.dt, 0.0);
    for (j, (window, model)) in windows.iter().zip(&decoded.models).enumerate() {
        let x0 = &decoded.restart_states[j];
        let rollout = rk4_steps(model, x0, window.start as f64 * h.dt, h.dt, window.steps())?;
        let last = if j + 1 == m {
            window.steps()
        } else {
            window.steps() - 1
        };
        for i in 0..=last {
            out.push(rollout.state(i));
        }
    }
    Ok(out)
}
