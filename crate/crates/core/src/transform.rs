//! Conversions between real-basis spectral coefficients and lattice values.
//!
//! A real function `Σ α_z φ_z` is packed into complex Fourier coefficients
//! `c_z` (coefficient of `exp(2πi z·x)`) as follows, with `z ∈ Ẑ^n`:
//!
//! ```text
//! c_0  = α_0
//! c_z  = (α_z + i α_{-z}) / √2
//! c_-z = conj(c_z)
//! ```
//!
//! Synthesis on an `M^n` grid is then an unnormalized inverse DFT of the
//! array holding `c_z` at slot `z mod M`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::spectrum::{eigenfunction, theta_extended};
use crate::torus::{canonical_sign, cube_index, FreqVector, GridShape, Sign, TorusSpec};

/// Finitely supported real coefficients `α_z` in the eigenbasis `φ_z`.
///
/// Serialized as `{"n": 2, "terms": [{"z": [1, 0], "alpha": 1.0}, ...]}`.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(into = "SpectralRepr", try_from = "SpectralRepr")]
pub struct SpectralFunction {
    n: usize,
    coeffs: BTreeMap<FreqVector, f64>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct SpectralTerm {
    z: Vec<i64>,
    alpha: f64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct SpectralRepr {
    n: usize,
    terms: Vec<SpectralTerm>,
}

impl From<SpectralFunction> for SpectralRepr {
    fn from(f: SpectralFunction) -> Self {
        let terms = f.coeffs.into_iter().map(|(z, alpha)| SpectralTerm { z: z.0, alpha }).collect();
        Self { n: f.n, terms }
    }
}

impl TryFrom<SpectralRepr> for SpectralFunction {
    type Error = Error;

    fn try_from(r: SpectralRepr) -> Result<Self> {
        if r.n == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(t) = r.terms.iter().find(|t| !t.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient at {:?}", t.z)));
        }
        Self::from_pairs(r.n, r.terms.into_iter().map(|t| (FreqVector(t.z), t.alpha)))
    }
}

impl SpectralFunction {
    pub fn new(n: usize) -> Self {
        Self { n, coeffs: BTreeMap::new() }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (FreqVector, f64)>) -> Result<Self> {
        let mut f = Self::new(n);
        for (z, a) in pairs {
            f.add(z, a)?;
        }
        Ok(f)
    }

    /// A single eigenmode `φ_z`.
    pub fn mode(z: FreqVector) -> Self {
        let n = z.dim();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(z, 1.0);
        Self { n, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn insert(&mut self, z: FreqVector, alpha: f64) -> Result<()> {
        self.check_dim(&z)?;
        self.coeffs.insert(z, alpha);
        Ok(())
    }

    pub fn add(&mut self, z: FreqVector, alpha: f64) -> Result<()> {
        self.check_dim(&z)?;
        *self.coeffs.entry(z).or_insert(0.0) += alpha;
        Ok(())
    }

    fn check_dim(&self, z: &FreqVector) -> Result<()> {
        if z.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.dim() });
        }
        Ok(())
    }

    pub fn get(&self, z: &FreqVector) -> f64 {
        self.coeffs.get(z).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FreqVector, f64)> {
        self.coeffs.iter().map(|(z, &a)| (z, a))
    }

    /// Largest `‖z‖_∞` carrying a nonzero coefficient.
    pub fn support_radius(&self) -> i64 {
        self.iter().filter(|(_, a)| *a != 0.0).map(|(z, _)| z.sup_norm()).max().unwrap_or(0)
    }

    /// No `z = 0` component.
    pub fn is_grounded(&self) -> bool {
        self.get(&FreqVector::zero(self.n)) == 0.0
    }

    pub fn check_in_band(&self, l: usize) -> Result<()> {
        let half = (l as i64 - 1) / 2;
        match self.iter().find(|(z, a)| *a != 0.0 && z.sup_norm() > half) {
            Some((z, _)) => Err(Error::OutOfBand { z: z.0.clone(), half: half as usize }),
            None => Ok(()),
        }
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&FreqVector, f64) -> f64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(z, &a)| (z.clone(), f(z, a))).collect(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|a| a * a).sum()
    }

    /// Pointwise evaluation `Σ α_z φ_z(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.iter().map(|(z, a)| a * eigenfunction(z, x)).sum()
    }

    /// Equivalent complex coefficients of `exp(2πi z·x)`.
    pub fn complex_terms(&self) -> Vec<(FreqVector, Complex64)> {
        let mut out = Vec::with_capacity(2 * self.coeffs.len());
        for (z, &a) in &self.coeffs {
            let h = a * FRAC_1_SQRT_2;
            match canonical_sign(z) {
                Sign::Zero => out.push((z.clone(), Complex64::new(a, 0.0))),
                Sign::Plus => {
                    out.push((z.neg(), Complex64::new(h, 0.0)));
                    out.push((z.clone(), Complex64::new(h, 0.0)));
                }
                Sign::Minus => {
                    out.push((z.neg(), Complex64::new(0.0, h)));
                    out.push((z.clone(), Complex64::new(0.0, -h)));
                }
            }
        }
        out
    }
}

/// Real values on an `M^n` grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    shape: GridShape,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::SizeMismatch { expected: shape.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i}")));
        }
        Ok(Self { shape, values })
    }

    pub fn constant(shape: GridShape, c: f64) -> Self {
        Self { shape, values: vec![c; shape.len()] }
    }

    pub(crate) fn from_raw(shape: GridShape, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), shape.len());
        Self { shape, values }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.n
    }

    pub fn side(&self) -> usize {
        self.shape.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_same(&self, other: &GridFunction) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::SizeMismatch { expected: self.values.len(), got: other.values.len() });
        }
        Ok(())
    }

    /// Values at the points `k/L` of a coarser lattice with `L | M`.
    pub fn restrict(&self, l: usize) -> Result<GridFunction> {
        let shape = GridShape::new(self.shape.n, l)?;
        if self.shape.m % l != 0 {
            return Err(Error::InvalidGrid(format!("{l} does not divide {}", self.shape.m)));
        }
        let step = self.shape.m / l;
        let values = (0..shape.len())
            .map(|idx| {
                let fine = shape.multi_index(idx).into_iter().fold(0, |acc, k| acc * self.shape.m + k * step);
                self.values[fine]
            })
            .collect();
        Ok(GridFunction::from_raw(shape, values))
    }
}

/// In-place n-dimensional DFT over a row-major `M^n` array (unnormalized).
pub(crate) fn fft_nd(data: &mut [Complex64], shape: GridShape, direction: FftDirection) {
    let m = shape.m;
    let n = shape.n;
    let total = data.len();
    debug_assert_eq!(total, shape.len());
    if m == 1 {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(m, direction);
    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let outer = total / (m * stride);
        // gather every line along `axis` contiguously
        let mut line = 0;
        for o in 0..outer {
            for s in 0..stride {
                let base = o * m * stride + s;
                for k in 0..m {
                    lines[line * m + k] = data[base + k * stride];
                }
                line += 1;
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut line = 0;
        for o in 0..outer {
            for s in 0..stride {
                let base = o * m * stride + s;
                for k in 0..m {
                    data[base + k * stride] = lines[line * m + k];
                }
                line += 1;
            }
        }
    }
}

fn pack(f: &SpectralFunction, shape: GridShape) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); shape.len()];
    for (z, c) in f.complex_terms() {
        buf[shape.freq_slot(z.coords())] += c;
    }
    buf
}

fn eval_on_grid(f: &SpectralFunction, shape: GridShape) -> GridFunction {
    let mut buf = pack(f, shape);
    fft_nd(&mut buf, shape, FftDirection::Inverse);
    GridFunction::from_raw(shape, buf.into_iter().map(|c| c.re).collect())
}

fn check_dims(f: &SpectralFunction, n: usize) -> Result<()> {
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.dim() });
    }
    Ok(())
}

/// Lattice values `v ↦ Σ α_z φ_z(v)` via FFT. Support must lie in `Z^n_L`.
pub fn synthesize(f: &SpectralFunction, spec: &TorusSpec) -> Result<GridFunction> {
    check_dims(f, spec.dim())?;
    f.check_in_band(spec.side())?;
    Ok(eval_on_grid(f, GridShape::from(*spec)))
}

/// Reference synthesis by direct summation, `O(N · |support|)`.
pub fn synthesize_direct(f: &SpectralFunction, spec: &TorusSpec) -> Result<GridFunction> {
    check_dims(f, spec.dim())?;
    f.check_in_band(spec.side())?;
    let shape = GridShape::from(*spec);
    let values = (0..shape.len()).map(|idx| f.eval(&shape.point(idx))).collect();
    Ok(GridFunction::from_raw(shape, values))
}

/// Real-basis coefficients from complex ones stored at slots `z mod M`,
/// keeping every `z` with `‖z‖_∞ <= radius`.
fn unpack(buf: &[Complex64], shape: GridShape, radius: i64) -> SpectralFunction {
    let mut out = SpectralFunction::new(shape.n);
    for idx in 0..shape.len() {
        let z = shape.slot_freq(idx);
        if z.sup_norm() > radius {
            continue;
        }
        let c = buf[idx];
        match canonical_sign(&z) {
            Sign::Zero => {
                out.coeffs.insert(z, c.re);
            }
            Sign::Plus => {
                let neg = z.neg();
                out.coeffs.insert(z, SQRT_2 * c.re);
                out.coeffs.insert(neg, SQRT_2 * c.im);
            }
            Sign::Minus => {}
        }
    }
    out
}

/// Lattice inner products `⟨g, φ_z⟩_{T^n_L}` for all `z ∈ Z^n_L`.
pub fn analyze(g: &GridFunction) -> SpectralFunction {
    let shape = g.shape();
    let mut buf: Vec<Complex64> = g.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, shape, FftDirection::Forward);
    let scale = 1.0 / shape.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    unpack(&buf, shape, (shape.m as i64 - 1) / 2)
}

/// Like [`analyze`], checking that the grid is the lattice of `spec`.
pub fn analyze_on(g: &GridFunction, spec: &TorusSpec) -> Result<SpectralFunction> {
    if g.shape() != GridShape::from(*spec) {
        return Err(Error::SizeMismatch { expected: spec.size(), got: g.values().len() });
    }
    Ok(analyze(g))
}

/// Values of the trigonometric polynomial `f ∈ D_L` on the finer `M^n` grid.
pub fn upsample_eval(f: &SpectralFunction, l: usize, m: usize) -> Result<GridFunction> {
    if m % 2 == 0 || m < l {
        return Err(Error::InvalidGrid(format!("upsampling grid must be odd and >= {l}, got {m}")));
    }
    f.check_in_band(l)?;
    Ok(eval_on_grid(f, GridShape::new(f.dim(), m)?))
}

/// The cube-average operator `q_L` on in-band spectral input: `α_z ↦ ϑ_{L,z} α_z`.
pub fn pwc_project(f: &SpectralFunction, l: usize) -> Result<SpectralFunction> {
    f.check_in_band(l)?;
    Ok(f.map_coeffs(|z, a| theta_extended(l, z) * a))
}

/// Cube averages of a fine grid over the cells `v + Q_L` (midpoint rule in each cell).
pub fn pwc_project_grid(g: &GridFunction, l: usize) -> Result<GridFunction> {
    let m = g.side();
    if l % 2 == 0 || m % l != 0 {
        return Err(Error::InvalidGrid(format!("coarse side {l} must be odd and divide {m}")));
    }
    let spec = TorusSpec::new(g.dim(), l)?;
    let coarse = GridShape::from(spec);
    let mut sums = vec![0.0; coarse.len()];
    for (idx, &v) in g.values().iter().enumerate() {
        sums[cube_index(&g.shape().point(idx), &spec).linear_index()] += v;
    }
    let per_cell = (m / l).pow(g.dim() as u32) as f64;
    Ok(GridFunction::from_raw(coarse, sums.into_iter().map(|s| s / per_cell).collect()))
}

/// Piecewise-constant extension of lattice values onto a fine grid with `L | M`.
pub fn pwc_extend(g: &GridFunction, m: usize) -> Result<GridFunction> {
    let l = g.side();
    if m % 2 == 0 || m % l != 0 {
        return Err(Error::InvalidGrid(format!("fine side {m} must be odd and a multiple of {l}")));
    }
    let spec = TorusSpec::new(g.dim(), l)?;
    let fine = GridShape::new(g.dim(), m)?;
    let values = (0..fine.len())
        .map(|idx| g.values()[cube_index(&fine.point(idx), &spec).linear_index()])
        .collect();
    Ok(GridFunction::from_raw(fine, values))
}

/// `L^{-n} Σ_v f(v) g(v)`.
pub fn pairing_discrete(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.check_same(g)?;
    Ok(f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<f64>() / f.values().len() as f64)
}

/// The in-band spectral function whose lattice values agree with `f` on `T^n_L`.
pub fn alias_fold(f: &SpectralFunction, l: usize) -> SpectralFunction {
    let mut folded: BTreeMap<FreqVector, Complex64> = BTreeMap::new();
    for (z, c) in f.complex_terms() {
        *folded.entry(z.fold(l)).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
    let mut out = SpectralFunction::new(f.dim());
    for (w, c) in &folded {
        match canonical_sign(w) {
            Sign::Zero => {
                out.coeffs.insert(w.clone(), c.re);
            }
            Sign::Plus => {
                out.coeffs.insert(w.clone(), SQRT_2 * c.re);
                out.coeffs.insert(w.neg(), SQRT_2 * c.im);
            }
            Sign::Minus => {
                // plus partner carries the pair; it always exists since folding commutes with negation
                debug_assert!(folded.contains_key(&w.neg()));
            }
        }
    }
    out
}
