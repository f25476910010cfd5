//! PSK and square QAM constellations.
//!
//! PSK points sit at `exp(j(2i-1)π/S)`, `i = 1..S`; QAM points form the full
//! odd-integer grid `{±1, ±3, …, ±(√S-1)}²`. Both carry Gray labels: adjacent
//! PSK phases, and adjacent levels along either QAM axis, differ in exactly
//! one bit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstellationError {
    #[error("invalid {kind} order {order}")]
    InvalidOrder { kind: Kind, order: usize },
    #[error("{len} bits do not split into {bits_per_symbol}-bit symbols")]
    LengthMismatch { len: usize, bits_per_symbol: usize },
    #[error("bit values must be 0 or 1")]
    InvalidBit,
    #[error("unknown modulation `{0}`")]
    UnknownModulation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Psk,
    Qam,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Psk => f.write_str("PSK"),
            Kind::Qam => f.write_str("QAM"),
        }
    }
}

/// Modulation family and order, e.g. `qpsk`, `8psk`, `16qam`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulation {
    pub kind: Kind,
    pub order: usize,
}

impl Modulation {
    pub const QPSK: Modulation = Modulation { kind: Kind::Psk, order: 4 };
    pub const PSK8: Modulation = Modulation { kind: Kind::Psk, order: 8 };
    pub const PSK16: Modulation = Modulation { kind: Kind::Psk, order: 16 };
    pub const QAM16: Modulation = Modulation { kind: Kind::Qam, order: 16 };
    pub const QAM64: Modulation = Modulation { kind: Kind::Qam, order: 64 };

    pub fn constellation(self) -> Result<Constellation, ConstellationError> {
        match self.kind {
            Kind::Psk => Constellation::psk(self.order),
            Kind::Qam => Constellation::qam(self.order),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.order) {
            (Kind::Psk, 2) => f.write_str("BPSK"),
            (Kind::Psk, 4) => f.write_str("QPSK"),
            (kind, order) => write!(f, "{order}{kind}"),
        }
    }
}

impl FromStr for Modulation {
    type Err = ConstellationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let unknown = || ConstellationError::UnknownModulation(s.to_string());
        let m = match lower.as_str() {
            "bpsk" => Modulation { kind: Kind::Psk, order: 2 },
            "qpsk" => Modulation::QPSK,
            _ => {
                let (digits, kind) = if let Some(d) = lower.strip_suffix("psk") {
                    (d, Kind::Psk)
                } else if let Some(d) = lower.strip_suffix("qam") {
                    (d, Kind::Qam)
                } else {
                    return Err(unknown());
                };
                let order = digits.parse().map_err(|_| unknown())?;
                Modulation { kind, order }
            }
        };
        m.constellation()?;
        Ok(m)
    }
}

/// QAM symbol region data for one symbol: the unscaled shift `o` towards the
/// symbol's inner corner and whether each axis is unbounded outwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolRegion {
    /// `(Re s - sign Re s) + j(Im s - sign Im s)`; multiply by α before use.
    pub offset: Complex64,
    /// `sign(Re s) + j sign(Im s)`.
    pub direction: Complex64,
    /// Outward extent of the real axis in units of α: `2` or `∞`.
    pub xi_re: f64,
    /// Outward extent of the imaginary axis in units of α: `2` or `∞`.
    pub xi_im: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    kind: Kind,
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    by_label: Vec<usize>,
}

fn gray(k: usize) -> u32 {
    (k ^ (k >> 1)) as u32
}

impl Constellation {
    pub fn psk(order: usize) -> Result<Self, ConstellationError> {
        if order < 2 || !order.is_power_of_two() {
            return Err(ConstellationError::InvalidOrder { kind: Kind::Psk, order });
        }
        let points = (0..order)
            .map(|i| Complex64::from_polar(1.0, (2 * i + 1) as f64 * PI / order as f64))
            .collect();
        let labels = (0..order).map(gray).collect();
        Ok(Self::assemble(Kind::Psk, order, points, labels))
    }

    pub fn qam(order: usize) -> Result<Self, ConstellationError> {
        let side = (order as f64).sqrt().round() as usize;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            return Err(ConstellationError::InvalidOrder { kind: Kind::Qam, order });
        }
        let axis_bits = side.trailing_zeros();
        let level = |k: usize| (2 * k) as f64 - (side - 1) as f64;
        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for re in 0..side {
            for im in 0..side {
                points.push(Complex64::new(level(re), level(im)));
                labels.push((gray(re) << axis_bits) | gray(im));
            }
        }
        Ok(Self::assemble(Kind::Qam, order, points, labels))
    }

    fn assemble(kind: Kind, order: usize, points: Vec<Complex64>, labels: Vec<u32>) -> Self {
        let mut by_label = vec![0; order];
        for (i, &l) in labels.iter().enumerate() {
            by_label[l as usize] = i;
        }
        Constellation {
            kind,
            order,
            bits_per_symbol: order.trailing_zeros() as usize,
            points,
            labels,
            by_label,
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn modulation(&self) -> Modulation {
        Modulation { kind: self.kind, order: self.order }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Half the angular width of a PSK decision sector, `π/S`.
    pub fn theta(&self) -> Option<f64> {
        (self.kind == Kind::Psk).then(|| PI / self.order as f64)
    }

    /// Largest per-axis coordinate of a QAM point, `√S - 1`.
    pub fn max_coord(&self) -> Option<f64> {
        (self.kind == Kind::Qam).then(|| self.side() as f64 - 1.0)
    }

    fn side(&self) -> usize {
        (self.order as f64).sqrt().round() as usize
    }

    /// `E[|s|²]` over equiprobable symbols.
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// `E[|Re s| + |Im s|]` over equiprobable symbols, the reference level of
    /// blind receive scaling.
    pub fn mean_abs_re_im(&self) -> f64 {
        self.points.iter().map(|p| p.re.abs() + p.im.abs()).sum::<f64>() / self.order as f64
    }

    /// Index of the decision region containing `u`.
    ///
    /// PSK decides by phase sector alone; QAM slices each axis at the even
    /// integers and clips to the outer levels. Points exactly on a threshold
    /// go to the lower sector index or the lower coordinate.
    pub fn detect(&self, u: Complex64) -> usize {
        match self.kind {
            Kind::Psk => {
                let step = 2.0 * PI / self.order as f64;
                let mut arg = u.arg();
                if arg < 0.0 {
                    arg += 2.0 * PI;
                }
                let k = ((arg / step).floor() as usize).min(self.order - 1);
                if k > 0 && arg == k as f64 * step {
                    k - 1
                } else {
                    k
                }
            }
            Kind::Qam => {
                let side = self.side();
                let slice = |v: f64| -> usize {
                    let max = (side - 1) as f64;
                    let level = (2.0 * (v / 2.0).ceil() - 1.0).clamp(-max, max);
                    ((level + max) / 2.0).round() as usize
                };
                slice(u.re) * side + slice(u.im)
            }
        }
    }

    /// Maps bits (MSB first within each symbol) to symbol indices.
    pub fn bits_to_symbols(&self, bits: &[u8]) -> Result<Vec<usize>, ConstellationError> {
        let k = self.bits_per_symbol;
        if bits.len() % k != 0 {
            return Err(ConstellationError::LengthMismatch {
                len: bits.len(),
                bits_per_symbol: k,
            });
        }
        bits.chunks(k)
            .map(|chunk| {
                let mut label = 0usize;
                for &b in chunk {
                    if b > 1 {
                        return Err(ConstellationError::InvalidBit);
                    }
                    label = (label << 1) | b as usize;
                }
                Ok(self.by_label[label])
            })
            .collect()
    }

    pub fn symbols_to_bits(&self, indices: &[usize]) -> Vec<u8> {
        let k = self.bits_per_symbol;
        let mut bits = Vec::with_capacity(indices.len() * k);
        for &i in indices {
            let label = self.labels[i];
            bits.extend((0..k).rev().map(|b| ((label >> b) & 1) as u8));
        }
        bits
    }

    /// Number of differing label bits between two symbols.
    pub fn bit_errors(&self, sent: usize, detected: usize) -> u32 {
        (self.labels[sent] ^ self.labels[detected]).count_ones()
    }

    /// Region data for a QAM symbol `s` (nominal coordinates).
    pub fn region(&self, s: Complex64) -> Option<SymbolRegion> {
        let max = self.max_coord()?;
        let sign = |v: f64| if v >= 0.0 { 1.0 } else { -1.0 };
        let (sr, si) = (sign(s.re), sign(s.im));
        let outer = |v: f64| if (v.abs() - max).abs() < 1e-9 { f64::INFINITY } else { 2.0 };
        Some(SymbolRegion {
            offset: Complex64::new(s.re - sr, s.im - si),
            direction: Complex64::new(sr, si),
            xi_re: outer(s.re),
            xi_im: outer(s.im),
        })
    }

    /// Signed distance from `y` to the boundary of the decision region of
    /// `s`: positive inside the region, negative outside.
    ///
    /// For QAM the region is that of the constellation scaled by `alpha`;
    /// PSK ignores `alpha`. Inside the region this is the Euclidean distance
    /// to the nearest decision threshold, i.e. the largest δ for which `y`
    /// lies in the symbol region of `s` with margin δ.
    pub fn safety_margin(&self, y: Complex64, s: Complex64, alpha: f64) -> f64 {
        match self.kind {
            Kind::Psk => {
                let theta = PI / self.order as f64;
                let z = y * s.conj() / s.norm();
                let inner = z.re * theta.sin() - z.im.abs() * theta.cos();
                if inner >= 0.0 || z.im.abs().atan2(z.re) < theta + PI / 2.0 {
                    inner
                } else {
                    -z.norm()
                }
            }
            Kind::Qam => {
                let max = self.side() as f64 - 1.0;
                let axis = |v: f64, level: f64| -> f64 {
                    let mut d = f64::INFINITY;
                    if level > -max + 0.5 {
                        d = d.min(v - alpha * (level - 1.0));
                    }
                    if level < max - 0.5 {
                        d = d.min(alpha * (level + 1.0) - v);
                    }
                    d
                };
                let level = |v: f64| v.round();
                let dr = axis(y.re, level(s.re));
                let di = axis(y.im, level(s.im));
                if dr >= 0.0 && di >= 0.0 {
                    dr.min(di)
                } else {
                    -(dr.min(0.0).powi(2) + di.min(0.0).powi(2)).sqrt()
                }
            }
        }
    }
}
