//! Index sets and geometry of the discrete torus `T^n_L` and the flat torus `[0,1)^n`.

use crate::error::{Error, Result};

/// Dimension `n` and odd lattice side `L` of a discrete torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TorusSpec {
    n: usize,
    l: usize,
}

impl TorusSpec {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if l < 3 || l % 2 == 0 {
            return Err(Error::EvenOrSmallSide(l));
        }
        l.checked_pow(n as u32)
            .ok_or(Error::SizeOverflow { side: l, dim: n })?;
        Ok(Self { n, l })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.l
    }

    /// `N = L^n`.
    #[inline]
    pub fn size(&self) -> usize {
        self.l.pow(self.n as u32)
    }

    /// `(L - 1) / 2`, the largest admissible `|z_k|`.
    #[inline]
    pub fn half(&self) -> usize {
        (self.l - 1) / 2
    }

    pub fn contains(&self, z: &FreqVector) -> bool {
        z.dim() == self.n && z.sup_norm() <= self.half() as i64
    }

    pub fn check_band(&self, z: &FreqVector) -> Result<()> {
        if z.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.dim() });
        }
        if !self.contains(z) {
            return Err(Error::OutOfBand { z: z.0.clone(), half: self.half() });
        }
        Ok(())
    }
}

/// An integer frequency vector `z ∈ Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct FreqVector(pub Vec<i64>);

impl FreqVector {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Self(coords.into())
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&c| (c as f64) * (c as f64)).sum()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// `z · x` for a point `x` of the flat torus.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&c, &xi)| c as f64 * xi).sum()
    }

    /// Representative of `z mod L` with coordinates in `[-(L-1)/2, (L-1)/2]`.
    pub fn fold(&self, l: usize) -> Self {
        let l = l as i64;
        let half = (l - 1) / 2;
        Self(
            self.0
                .iter()
                .map(|&c| {
                    let r = c.rem_euclid(l);
                    if r > half {
                        r - l
                    } else {
                        r
                    }
                })
                .collect(),
        )
    }
}

impl From<Vec<i64>> for FreqVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

/// Which half of the real eigenbasis a frequency belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

/// Splits `Z^n \ {0}` into `Ẑ^n` (first nonzero coordinate positive) and its negative.
pub fn canonical_sign(z: &FreqVector) -> Sign {
    match z.0.iter().find(|&&c| c != 0) {
        None => Sign::Zero,
        Some(&c) if c > 0 => Sign::Plus,
        Some(_) => Sign::Minus,
    }
}

/// All `z ∈ Z^n_L`, row-major with the last coordinate fastest.
pub fn frequency_set(spec: &TorusSpec) -> Vec<FreqVector> {
    box_frequencies(spec.dim(), spec.half() as i64)
}

/// All `z` with `‖z‖_∞ <= radius`, row-major.
pub(crate) fn box_frequencies(n: usize, radius: i64) -> Vec<FreqVector> {
    let side = (2 * radius + 1) as usize;
    let total = side.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![-radius; n];
    for _ in 0..total {
        out.push(FreqVector(cur.clone()));
        for k in (0..n).rev() {
            if cur[k] < radius {
                cur[k] += 1;
                break;
            }
            cur[k] = -radius;
        }
    }
    out
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Flat torus distance. Inputs outside `[0,1)` are reduced mod 1.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = (wrap_unit(a) - wrap_unit(b)).abs();
            let d = d.min(1.0 - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// A point of `T^n_L`, stored as integer numerators `k_i` of `k_i / L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub numerators: Vec<usize>,
    pub side: usize,
}

impl LatticePoint {
    pub fn coords(&self) -> Vec<f64> {
        self.numerators.iter().map(|&k| k as f64 / self.side as f64).collect()
    }

    pub fn linear_index(&self) -> usize {
        self.numerators.iter().fold(0, |acc, &k| acc * self.side + k)
    }
}

/// The unique lattice point `v` with `x ∈ v + [-1/(2L), 1/(2L))^n`.
pub fn cube_index(x: &[f64], spec: &TorusSpec) -> LatticePoint {
    let l = spec.side();
    let numerators = x
        .iter()
        .map(|&xi| {
            let k = (l as f64 * wrap_unit(xi) + 0.5).floor() as i64;
            k.rem_euclid(l as i64) as usize
        })
        .collect();
    LatticePoint { numerators, side: l }
}

/// Shape of an `M^n` row-major grid over `[0,1)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct GridShape {
    pub n: usize,
    pub m: usize,
}

impl GridShape {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if m == 0 || m % 2 == 0 {
            return Err(Error::InvalidGrid(format!("grid side must be odd, got {m}")));
        }
        m.checked_pow(n as u32)
            .ok_or(Error::SizeOverflow { side: m, dim: n })?;
        Ok(Self { n, m })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for k in (0..self.n).rev() {
            out[k] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .into_iter()
            .map(|k| k as f64 / self.m as f64)
            .collect()
    }

    /// Linear index of the grid slot holding frequency `z mod M`.
    pub fn freq_slot(&self, z: &[i64]) -> usize {
        let m = self.m as i64;
        z.iter().fold(0usize, |acc, &c| acc * self.m + c.rem_euclid(m) as usize)
    }

    /// Frequency in `[-(M-1)/2, (M-1)/2]^n` stored at a grid slot.
    pub fn slot_freq(&self, idx: usize) -> FreqVector {
        let half = (self.m as i64 - 1) / 2;
        FreqVector(
            self.multi_index(idx)
                .into_iter()
                .map(|k| {
                    let k = k as i64;
                    if k > half {
                        k - self.m as i64
                    } else {
                        k
                    }
                })
                .collect(),
        )
    }

    /// Index of `-u` for the grid offset at `idx`.
    pub fn negate(&self, idx: usize) -> usize {
        self.multi_index(idx)
            .into_iter()
            .fold(0, |acc, k| acc * self.m + (self.m - k) % self.m)
    }
}

impl From<TorusSpec> for GridShape {
    fn from(spec: TorusSpec) -> Self {
        Self { n: spec.dim(), m: spec.side() }
    }
}
