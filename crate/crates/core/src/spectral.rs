//! Grids, transforms and the singular operators.
//!
//! Everything here is built on one transform convention, which the
//! diagnostics inherit:
//!
//! * forward transform `c(k) = (1/N) Σ_j f(x_j) e^{-ik x_j}`,
//! * Plancherel constant `C_dom = circumference`, so that
//!   `∫ f g dx = C_dom · Σ_k c_f(k) conj(c_g(k))`,
//! * Hilbert transform as the multiplier `-i·sign(k)` (the cotangent-kernel
//!   transform on the torus), fractional Laplacian as `|k|^σ` with σ the
//!   symbol exponent (σ = 1 gives `(-Δ)^{1/2} = ∂ₓH = H∂ₓ`),
//! * derivative `ik` with the Nyquist mode zeroed, so antisymmetric
//!   multipliers keep real fields real.
//!
//! The truncated real line is a torus of circumference `2L`; line fields are
//! admissible when they decay below `tol_tail` at the window boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{DysonError, Result};

/// Spatial domain: the circle or a symmetric window `[-L, L)` of the line,
/// discretized on `n` uniform points.
#[derive(Clone)]
pub struct Domain {
    inner: Arc<DomainInner>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Torus,
    TruncatedLine,
}

type PlanTable = Vec<(usize, Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>;

struct DomainInner {
    kind: DomainKind,
    circumference: f64,
    n: usize,
    x0: f64,
    /// Forward/inverse plans for n, 3n/2, 2n and 3n (dealiased products and
    /// exact cubic/quartic quadratures).
    plans: PlanTable,
}

impl std::fmt::Debug for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Domain")
            .field("kind", &self.inner.kind)
            .field("circumference", &self.inner.circumference)
            .field("n", &self.inner.n)
            .finish()
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.inner.kind == other.inner.kind
            && self.inner.circumference == other.inner.circumference
            && self.inner.n == other.inner.n
    }
}

fn build_plans(n: usize) -> PlanTable {
    let mut planner = FftPlanner::new();
    [n, 3 * n / 2, 2 * n, 3 * n]
        .into_iter()
        .map(|m| (m, planner.plan_fft_forward(m), planner.plan_fft_inverse(m)))
        .collect()
}

impl Domain {
    fn new(kind: DomainKind, circumference: f64, n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(DysonError::InvalidParameter(format!(
                "n_points must be a power of two >= 8, got {n}"
            )));
        }
        if !(circumference > 0.0) {
            return Err(DysonError::InvalidParameter(
                "circumference must be positive".into(),
            ));
        }
        let x0 = match kind {
            DomainKind::Torus => 0.0,
            DomainKind::TruncatedLine => -circumference / 2.0,
        };
        Ok(Self {
            inner: Arc::new(DomainInner {
                kind,
                circumference,
                n,
                x0,
                plans: build_plans(n),
            }),
        })
    }

    /// The circle `ℝ/2πℤ`.
    pub fn torus(n: usize) -> Result<Self> {
        Self::new(DomainKind::Torus, 2.0 * PI, n)
    }

    /// The window `[-L, L)` of the real line, periodized.
    pub fn truncated_line(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(DysonError::InvalidParameter(
                "half_width must be positive".into(),
            ));
        }
        Self::new(DomainKind::TruncatedLine, 2.0 * half_width, n)
    }

    pub fn kind(&self) -> DomainKind {
        self.inner.kind
    }

    pub fn n_points(&self) -> usize {
        self.inner.n
    }

    pub fn circumference(&self) -> f64 {
        self.inner.circumference
    }

    pub fn dx(&self) -> f64 {
        self.inner.circumference / self.inner.n as f64
    }

    /// Grid nodes (`2πj/N` on the torus, `-L + jΔx` on the line).
    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.inner.n)
            .map(|j| self.inner.x0 + j as f64 * dx)
            .collect()
    }

    /// Signed integer lattice index for FFT slot `idx` on an `m`-point grid:
    /// `{-m/2+1, …, m/2}`.
    fn lattice_index(idx: usize, m: usize) -> i64 {
        if idx <= m / 2 {
            idx as i64
        } else {
            idx as i64 - m as i64
        }
    }

    /// Wavenumber of FFT slot `idx`: `2π·m_idx / circumference` (integers on
    /// the torus, `πn/L` on the line).
    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * Self::lattice_index(idx, self.inner.n) as f64 / self.inner.circumference
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.inner.n).map(|i| self.wavenumber(i)).collect()
    }

    fn plan(&self, m: usize) -> (&Arc<dyn Fft<f64>>, &Arc<dyn Fft<f64>>) {
        for (size, fwd, inv) in &self.inner.plans {
            if *size == m {
                return (fwd, inv);
            }
        }
        unreachable!("no FFT plan for size {m}");
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.inner.n {
            return Err(DysonError::LengthMismatch {
                expected: self.inner.n,
                actual: f.len(),
            });
        }
        Ok(())
    }

    /// Raw normalized DFT coefficients in FFT slot order (no grid-offset
    /// phase): `r_m = (1/N) Σ_j f_j e^{-2πi m j / N}`.
    fn raw_forward(&self, f: &[f64]) -> Vec<Complex64> {
        let n = self.inner.n;
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let (fwd, _) = self.plan(n);
        fwd.process(&mut buf);
        let scale = 1.0 / n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    fn raw_inverse_real(&self, mut c: Vec<Complex64>) -> Vec<f64> {
        let m = c.len();
        let (_, inv) = self.plan(m);
        inv.process(&mut c);
        c.into_iter().map(|v| v.re).collect()
    }

    /// Forward transform with the physical-grid convention
    /// `c(k) = (1/N) Σ_j f(x_j) e^{-ik x_j}`.
    pub fn to_spectral(&self, f: &[f64]) -> Result<SpectralCoeffs> {
        self.check_len(f)?;
        let mut raw = self.raw_forward(f);
        if self.inner.x0 != 0.0 {
            for (idx, c) in raw.iter_mut().enumerate() {
                let phase = -self.wavenumber(idx) * self.inner.x0;
                *c *= Complex64::from_polar(1.0, phase);
            }
        }
        Ok(SpectralCoeffs {
            domain: self.clone(),
            coeffs: raw,
        })
    }

    /// Inverse of [`Domain::to_spectral`]; reconstructs the real samples.
    pub fn to_physical(&self, c: &SpectralCoeffs) -> Result<Vec<f64>> {
        if c.domain != *self {
            return Err(DysonError::DomainMismatch);
        }
        let mut raw = c.coeffs.clone();
        if self.inner.x0 != 0.0 {
            for (idx, v) in raw.iter_mut().enumerate() {
                let phase = self.wavenumber(idx) * self.inner.x0;
                *v *= Complex64::from_polar(1.0, phase);
            }
        }
        Ok(self.raw_inverse_real(raw))
    }

    /// Applies a diagonal Fourier multiplier and returns the real field.
    fn apply_multiplier(&self, f: &[f64], mult: impl Fn(f64, bool) -> Complex64) -> Vec<f64> {
        let n = self.inner.n;
        let mut raw = self.raw_forward(f);
        for (idx, c) in raw.iter_mut().enumerate() {
            let nyquist = idx == n / 2;
            *c *= mult(self.wavenumber(idx), nyquist);
        }
        self.raw_inverse_real(raw)
    }

    /// Hilbert transform: multiplier `-i·sign(k)`, zero mode and Nyquist
    /// mapped to 0. On the torus this is the cotangent-kernel transform; on
    /// the truncated line it approximates the real-line transform for fields
    /// decaying inside the window.
    pub fn hilbert(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        Ok(self.apply_multiplier(f, |k, nyquist| {
            if k == 0.0 || nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -k.signum())
            }
        }))
    }

    /// Fractional Laplacian with symbol `|k|^sigma`; `sigma` is the symbol
    /// exponent itself (`sigma = 1` is `(-Δ)^{1/2}`, `sigma = 2` is `-∂ₓₓ`).
    pub fn frac_lap(&self, f: &[f64], sigma: f64) -> Result<Vec<f64>> {
        self.check_len(f)?;
        if sigma < 0.0 {
            return Err(DysonError::InvalidParameter(format!(
                "symbol exponent must be nonnegative, got {sigma}"
            )));
        }
        Ok(self.apply_multiplier(f, |k, _| {
            let w = if k == 0.0 {
                if sigma == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                k.abs().powf(sigma)
            };
            Complex64::new(w, 0.0)
        }))
    }

    /// Heat semigroup factor: multiplier `e^{-a k²}`. Negative `a` is
    /// admitted for the interior stages of integrating-factor steppers,
    /// which keep `|a| k²` small.
    pub fn heat_semigroup(&self, f: &[f64], a: f64) -> Result<Vec<f64>> {
        self.check_len(f)?;
        if a == 0.0 {
            return Ok(f.to_vec());
        }
        Ok(self.apply_multiplier(f, |k, _| Complex64::new((-a * k * k).exp(), 0.0)))
    }

    /// Spectral derivative: multiplier `ik`, Nyquist zeroed.
    pub fn derivative(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        Ok(self.apply_multiplier(f, |k, nyquist| {
            if nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        }))
    }

    /// Squared homogeneous Sobolev seminorm
    /// `‖f‖²_{Ḣ^s} = C_dom · Σ_k |k|^{2s} |c(k)|²`, equal to
    /// `∫ f · (-Δ)^s f` with the symbol convention of `frac_lap(·, 2s)`.
    pub fn sobolev_seminorm_sq(&self, f: &[f64], s: f64) -> Result<f64> {
        self.check_len(f)?;
        let raw = self.raw_forward(f);
        let mut sum = 0.0;
        for (idx, c) in raw.iter().enumerate() {
            let k = self.wavenumber(idx);
            let w = if k == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                k.abs().powf(2.0 * s)
            };
            sum += w * c.norm_sqr();
        }
        Ok(self.inner.circumference * sum)
    }

    /// Uniform-grid rectangle-rule quadrature `Δx Σ_j f_j` (exact for the
    /// band-limited interpolant).
    pub fn quadrature(&self, f: &[f64]) -> f64 {
        self.dx() * f.iter().sum::<f64>()
    }

    /// Copies raw coefficients from the `n`-lattice onto an `m`-lattice
    /// (`m > n`), splitting the Nyquist coefficient across `±n/2` so real
    /// fields stay real.
    fn pad_raw(&self, raw: &[Complex64], m: usize) -> Vec<Complex64> {
        let n = self.inner.n;
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (idx, &c) in raw.iter().enumerate() {
            let lat = Self::lattice_index(idx, n);
            if lat == (n / 2) as i64 {
                let half = c * 0.5;
                out[n / 2] += half;
                out[m - n / 2] += half;
            } else if lat >= 0 {
                out[lat as usize] += c;
            } else {
                out[(m as i64 + lat) as usize] += c;
            }
        }
        out
    }

    /// Restriction of a padded spectrum back to the `n`-lattice. Modes
    /// `|m| < n/2` are copied; the Nyquist slot is zeroed, matching the
    /// antisymmetric-multiplier convention (`hilbert`, `derivative`) so that
    /// operator identities like Cotlar's hold exactly on the retained band.
    fn truncate_raw(&self, raw_m: &[Complex64]) -> Vec<Complex64> {
        let n = self.inner.n;
        let m = raw_m.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (idx, slot) in out.iter_mut().enumerate() {
            let lat = Self::lattice_index(idx, n);
            if lat == (n / 2) as i64 {
                *slot = Complex64::new(0.0, 0.0);
            } else if lat >= 0 {
                *slot = raw_m[lat as usize];
            } else {
                *slot = raw_m[(m as i64 + lat) as usize];
            }
        }
        out
    }

    /// Samples of the band-limited interpolant on the `factor·n` grid.
    pub fn refine(&self, f: &[f64], factor: usize) -> Result<Vec<f64>> {
        self.check_len(f)?;
        assert!(matches!(factor, 2 | 3), "refine supports 2x and 3x grids");
        let m = factor * self.inner.n;
        let raw = self.raw_forward(f);
        Ok(self.raw_inverse_real(self.pad_raw(&raw, m)))
    }

    /// Pointwise product evaluated on the 3/2 zero-padded grid and truncated
    /// back to `|k| < N/2`: alias-free, and exact (equal to the truncated
    /// product of the interpolants) for inputs band-limited to `|k| ≤ N/3`.
    pub fn dealiased_product(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        self.check_len(g)?;
        let n = self.inner.n;
        let m = 3 * n / 2;
        let fu = self.raw_inverse_real(self.pad_raw(&self.raw_forward(f), m));
        let gu = self.raw_inverse_real(self.pad_raw(&self.raw_forward(g), m));
        let mut prod: Vec<Complex64> = fu
            .iter()
            .zip(&gu)
            .map(|(&a, &b)| Complex64::new(a * b, 0.0))
            .collect();
        let (fwd, _) = self.plan(m);
        fwd.process(&mut prod);
        let scale = 1.0 / m as f64;
        for c in &mut prod {
            *c *= scale;
        }
        let trunc = self.truncate_raw(&prod);
        Ok(self.raw_inverse_real(trunc))
    }

    /// Exact `∫ a·b·c dx` for band-limited factors: the product has modes
    /// `|k| ≤ 3N/2 < 2N`, so the rectangle rule on the doubled grid is exact.
    pub fn integral_triple(&self, a: &[f64], b: &[f64], c: &[f64]) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(b)?;
        self.check_len(c)?;
        let au = self.refine(a, 2)?;
        let bu = self.refine(b, 2)?;
        let cu = self.refine(c, 2)?;
        let m = au.len();
        let sum: f64 = (0..m).map(|i| au[i] * bu[i] * cu[i]).sum();
        Ok(self.inner.circumference * sum / m as f64)
    }

    /// Exact `∫ a·b·c·d dx` for band-limited factors (modes ≤ 2N < 3N grid).
    pub fn integral_quad(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(b)?;
        self.check_len(c)?;
        self.check_len(d)?;
        let au = self.refine(a, 3)?;
        let bu = self.refine(b, 3)?;
        let cu = self.refine(c, 3)?;
        let du = self.refine(d, 3)?;
        let m = au.len();
        let sum: f64 = (0..m).map(|i| au[i] * bu[i] * cu[i] * du[i]).sum();
        Ok(self.inner.circumference * sum / m as f64)
    }

    /// Zeroes all modes with `|k|` lattice index above `kmax` (test fields,
    /// refinement-tail diagnostics).
    pub fn band_limit(&self, f: &[f64], kmax: usize) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let n = self.inner.n;
        let mut raw = self.raw_forward(f);
        for (idx, c) in raw.iter_mut().enumerate() {
            if Self::lattice_index(idx, n).unsigned_abs() as usize > kmax {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(self.raw_inverse_real(raw))
    }

    /// `max |f|` over the outermost cells relative to `max |f|`, the
    /// truncated-line admissibility measure (≈0 for fields supported well
    /// inside the window; meaningless on the torus).
    pub fn boundary_tail_ratio(&self, f: &[f64]) -> f64 {
        let n = self.inner.n;
        let max = f.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if max == 0.0 {
            return 0.0;
        }
        // the window boundary is x = ±L: first cell and (wrapped) last cell
        let edge = f[0].abs().max(f[n - 1].abs());
        edge / max
    }

    /// Spectral-tail mass: `C_dom^{1/2} · (Σ_{|k| > N/3} |c(k)|²)^{1/2}`, an
    /// L² bound on what the top third of the spectrum still carries; used by
    /// the refinement-convergence checks as the self-reported resolution
    /// error.
    pub fn spectral_tail(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        let n = self.inner.n;
        let raw = self.raw_forward(f);
        let mut sum = 0.0;
        for (idx, c) in raw.iter().enumerate() {
            if Self::lattice_index(idx, n).unsigned_abs() as usize > n / 3 {
                sum += c.norm_sqr();
            }
        }
        Ok((self.inner.circumference * sum).sqrt())
    }
}

/// Nonnegative grid samples of a probability density (units 1/length) with
/// the time they belong to.
#[derive(Clone, Debug)]
pub struct DensityField {
    pub domain: Domain,
    pub values: Vec<f64>,
    pub time: f64,
}

impl DensityField {
    pub fn new(domain: Domain, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != domain.n_points() {
            return Err(DysonError::LengthMismatch {
                expected: domain.n_points(),
                actual: values.len(),
            });
        }
        if !(time >= 0.0) {
            return Err(DysonError::InvalidParameter(
                "field time must be nonnegative".into(),
            ));
        }
        Ok(Self {
            domain,
            values,
            time,
        })
    }

    pub fn mass(&self) -> f64 {
        self.domain.quadrature(&self.values)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks the density invariants: undershoot within `tol_neg`,
    /// quadrature mass within `tol_mass` of one, finite values.
    pub fn validate(&self, tol_neg: f64, tol_mass: f64) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(DysonError::BlowUp { time: self.time });
        }
        let min = self.min_value();
        if min < -tol_neg {
            return Err(DysonError::ResolutionFailure {
                time: self.time,
                min_value: min,
            });
        }
        let mass = self.mass();
        if (mass - 1.0).abs() > tol_mass {
            return Err(DysonError::InvalidParameter(format!(
                "density mass {mass} outside [1-{tol_mass}, 1+{tol_mass}]"
            )));
        }
        Ok(())
    }
}

/// Complex Fourier coefficients paired with the wavenumber lattice, stored in
/// FFT slot order (`k = 0, 1, …, N/2, -N/2+1, …, -1` times `2π/C`).
#[derive(Clone, Debug)]
pub struct SpectralCoeffs {
    domain: Domain,
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient for signed lattice index `m ∈ {-N/2+1, …, N/2}`.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.domain.n_points() as i64;
        assert!(m > -n / 2 && m <= n / 2, "lattice index out of range");
        let idx = if m >= 0 { m } else { n + m } as usize;
        self.coeffs[idx]
    }
}
