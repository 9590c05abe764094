//! Ground-truth references: the self-similar semicircle family, a general
//! real-line solver via characteristics of the complex Burgers equation
//! satisfied by the Stieltjes transform, and a direct principal-value
//! quadrature for the Hilbert transform.
//!
//! Normalization: `G(z) = (1/π) ∫ u(y)/(z - y) dy` for `Im z > 0`, so the
//! boundary value is `G(x + i0) = H[u](x) - i·u(x)` and the transform solves
//! `∂ₜG + G ∂ₓG = 0` along the evolution with no extra constant. Solving
//! `z + t·G₀(z) = x + iδ` and reading off `-Im G₀(z)` yields the density
//! smoothed by a Poisson kernel of width `δ`; Richardson extrapolation
//! between `δ` and `δ/2` removes the leading smoothing error.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DysonError, Result};
use crate::spectral::Domain;

/// Self-similar solution: density `(1/(2t))·√(4t/π - x²)₊`, support
/// `|x| ≤ 2√(t/π)`, peak `1/√(πt)`.
pub fn semicircle_density(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(DysonError::InvalidParameter(format!(
            "semicircle time parameter must be positive, got {t}"
        )));
    }
    let s = 4.0 * t / PI - x * x;
    Ok(if s > 0.0 { s.sqrt() / (2.0 * t) } else { 0.0 })
}

/// Support half-width of the semicircle at time `t`.
pub fn semicircle_radius(t: f64) -> f64 {
    2.0 * (t / PI).sqrt()
}

/// A component of a symbolic initial measure with closed-form Stieltjes
/// transform.
#[derive(Debug, Clone)]
pub enum MeasureComponent {
    Atom {
        location: f64,
        weight: f64,
    },
    UniformPiece {
        a: f64,
        b: f64,
        weight: f64,
    },
    /// Semicircle at self-similar time `time_parameter`, shifted to `center`.
    Semicircle {
        center: f64,
        time_parameter: f64,
        weight: f64,
    },
    /// Uniformly gridded density samples (weight-normalized internally).
    GridDensity {
        x: Vec<f64>,
        values: Vec<f64>,
        weight: f64,
    },
}

impl MeasureComponent {
    fn weight(&self) -> f64 {
        match self {
            MeasureComponent::Atom { weight, .. }
            | MeasureComponent::UniformPiece { weight, .. }
            | MeasureComponent::Semicircle { weight, .. }
            | MeasureComponent::GridDensity { weight, .. } => *weight,
        }
    }

    fn support_bounds(&self) -> (f64, f64) {
        match self {
            MeasureComponent::Atom { location, .. } => (*location, *location),
            MeasureComponent::UniformPiece { a, b, .. } => (*a, *b),
            MeasureComponent::Semicircle {
                center,
                time_parameter,
                ..
            } => {
                let r = semicircle_radius(*time_parameter);
                (center - r, center + r)
            }
            MeasureComponent::GridDensity { x, .. } => (x[0], *x.last().unwrap()),
        }
    }
}

/// Probability measure given as a finite mixture with closed-form Stieltjes
/// transform; weights must be positive and sum to one.
#[derive(Debug, Clone)]
pub struct InitialMeasure {
    components: Vec<MeasureComponent>,
}

impl InitialMeasure {
    pub fn new(components: Vec<MeasureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(DysonError::InvalidParameter(
                "measure needs at least one component".into(),
            ));
        }
        let mut total = 0.0;
        for c in &components {
            let w = c.weight();
            if !(w > 0.0) {
                return Err(DysonError::InvalidParameter(
                    "component weights must be positive".into(),
                ));
            }
            total += w;
            match c {
                MeasureComponent::UniformPiece { a, b, .. } if a >= b => {
                    return Err(DysonError::InvalidParameter(
                        "uniform piece needs a < b".into(),
                    ));
                }
                MeasureComponent::Semicircle { time_parameter, .. } if *time_parameter <= 0.0 => {
                    return Err(DysonError::InvalidParameter(
                        "semicircle time parameter must be positive".into(),
                    ));
                }
                MeasureComponent::GridDensity { x, values, .. }
                    if x.len() != values.len() || x.len() < 2 =>
                {
                    return Err(DysonError::InvalidParameter(
                        "grid density needs matching x/value samples".into(),
                    ));
                }
                _ => {}
            }
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(DysonError::InvalidParameter(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        Ok(Self { components })
    }

    pub fn atom(location: f64) -> Self {
        Self {
            components: vec![MeasureComponent::Atom {
                location,
                weight: 1.0,
            }],
        }
    }

    pub fn components(&self) -> &[MeasureComponent] {
        &self.components
    }

    /// Diameter of the support (0 for a single atom).
    pub fn support_diameter(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in &self.components {
            let (a, b) = c.support_bounds();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        hi - lo
    }
}

/// Closed-form Stieltjes transform `G(z)` of an [`InitialMeasure`], with an
/// optional Poisson mollifier folded in exactly: smoothing `u₀` by `P_w`
/// shifts the evaluation point, `G_{P_w ∗ μ}(z) = G_μ(z + iw)`.
#[derive(Debug, Clone)]
pub struct StieltjesEvaluator {
    measure: InitialMeasure,
    mollifier_width: f64,
}

impl StieltjesEvaluator {
    pub fn new(measure: InitialMeasure, mollifier_width: f64) -> Result<Self> {
        if mollifier_width < 0.0 {
            return Err(DysonError::InvalidParameter(
                "mollifier width must be nonnegative".into(),
            ));
        }
        Ok(Self {
            measure,
            mollifier_width,
        })
    }

    pub fn measure(&self) -> &InitialMeasure {
        &self.measure
    }

    /// `G(z)` for `Im z > 0`.
    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(DysonError::InvalidParameter(
                "Stieltjes transform requires Im z > 0".into(),
            ));
        }
        Ok(self.g_unchecked(z))
    }

    fn shifted(&self, z: Complex64) -> Complex64 {
        z + Complex64::new(0.0, self.mollifier_width)
    }

    fn g_unchecked(&self, z: Complex64) -> Complex64 {
        let z = self.shifted(z);
        let mut g = Complex64::new(0.0, 0.0);
        for c in &self.measure.components {
            g += component_g(c, z);
        }
        g
    }

    fn dg_unchecked(&self, z: Complex64) -> Complex64 {
        let z = self.shifted(z);
        let mut dg = Complex64::new(0.0, 0.0);
        for c in &self.measure.components {
            dg += component_dg(c, z);
        }
        dg
    }

    /// Density of the evolved measure at time `t` on `x_grid`, via the
    /// characteristic equation `z + t·G₀(z) = x + iδ` (damped Newton with a
    /// vertical-continuation fallback) and Richardson extrapolation between
    /// `δ` and `δ/2`.
    pub fn evolve(&self, t: f64, x_grid: &[f64], delta: f64) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(DysonError::InvalidParameter(
                "evolution time must be positive".into(),
            ));
        }
        if !(delta > 0.0) {
            return Err(DysonError::InvalidParameter(
                "smoothing height delta must be positive".into(),
            ));
        }
        let coarse = self.evolve_at_height(t, x_grid, delta)?;
        let fine = self.evolve_at_height(t, x_grid, delta / 2.0)?;
        Ok(coarse
            .iter()
            .zip(&fine)
            .map(|(&c, &f)| 2.0 * f - c)
            .collect())
    }

    /// Poisson-smoothed density `-Im G(t, x + iδ)` without extrapolation.
    pub fn evolve_at_height(&self, t: f64, x_grid: &[f64], delta: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(x_grid.len());
        let mut failed = 0usize;
        let mut prev: Option<Complex64> = None;
        for &x in x_grid {
            let w = Complex64::new(x, delta);
            match self.solve_characteristic(w, t, prev) {
                Some(z) => {
                    let g = self.g_unchecked(z);
                    prev = Some(z);
                    out.push(-g.im);
                }
                None => {
                    failed += 1;
                    prev = None;
                    out.push(f64::NAN);
                }
            }
        }
        if failed > 0 {
            return Err(DysonError::CharacteristicsFailure {
                failed_points: failed,
            });
        }
        Ok(out)
    }

    /// Solves `z + t G₀(z) = w` for `z` in the upper half-plane.
    fn solve_characteristic(
        &self,
        w: Complex64,
        t: f64,
        seed: Option<Complex64>,
    ) -> Option<Complex64> {
        if let Some(s) = seed {
            if let Some(z) = self.newton(w, t, s) {
                return Some(z);
            }
        }
        if let Some(z) = self.newton(w, t, w) {
            return Some(z);
        }
        // continuation down a vertical line: at large height the map is a
        // small perturbation of the identity, then walk the height down
        let top = (self.measure.support_diameter() + t + 1.0).max(4.0 * w.im);
        let mut heights = Vec::new();
        let mut h = top;
        while h > w.im {
            heights.push(h);
            h *= 0.5;
        }
        let mut z = Complex64::new(w.re, top);
        for &hk in &heights {
            z = self.newton(Complex64::new(w.re, hk), t, z)?;
        }
        self.newton(w, t, z)
    }

    fn newton(&self, w: Complex64, t: f64, seed: Complex64) -> Option<Complex64> {
        let mut z = if seed.im > 0.0 {
            seed
        } else {
            Complex64::new(seed.re, 1e-6)
        };
        let mut f = z + t * self.g_unchecked(z) - w;
        for _ in 0..50 {
            if f.norm() < 1e-13 {
                return Some(z);
            }
            let df = Complex64::new(1.0, 0.0) + t * self.dg_unchecked(z);
            if df.norm() < 1e-14 {
                return None;
            }
            let full = f / df;
            // damped update: halve until the residual decreases and the
            // iterate stays in the upper half-plane
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let zn = z - lambda * full;
                if zn.im > 0.0 {
                    let fn_ = zn + t * self.g_unchecked(zn) - w;
                    if fn_.norm() < f.norm() {
                        if (zn - z).norm() < 1e-12 && fn_.norm() < 1e-10 {
                            return Some(zn);
                        }
                        z = zn;
                        f = fn_;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        if f.norm() < 1e-10 {
            Some(z)
        } else {
            None
        }
    }
}

fn component_g(c: &MeasureComponent, z: Complex64) -> Complex64 {
    match c {
        MeasureComponent::Atom { location, weight } => *weight / (PI * (z - *location)),
        MeasureComponent::UniformPiece { a, b, weight } => {
            let ln = ((z - *a) / (z - *b)).ln();
            *weight / (PI * (*b - *a)) * ln
        }
        MeasureComponent::Semicircle {
            center,
            time_parameter: s,
            weight,
        } => {
            let zeta = z - *center;
            let r = branch_sqrt(zeta * zeta - 4.0 * s / PI, zeta);
            *weight * (zeta - r) / (2.0 * s)
        }
        MeasureComponent::GridDensity { x, values, weight } => {
            let dx = x[1] - x[0];
            let mass: f64 = values.iter().sum::<f64>() * dx;
            let scale = *weight / (PI * mass);
            let mut g = Complex64::new(0.0, 0.0);
            for (&xj, &uj) in x.iter().zip(values) {
                g += uj / (z - xj);
            }
            g * scale * dx
        }
    }
}

fn component_dg(c: &MeasureComponent, z: Complex64) -> Complex64 {
    match c {
        MeasureComponent::Atom { location, weight } => {
            -*weight / (PI * (z - *location) * (z - *location))
        }
        MeasureComponent::UniformPiece { a, b, weight } => {
            *weight / (PI * (*b - *a)) * (1.0 / (z - *a) - 1.0 / (z - *b))
        }
        MeasureComponent::Semicircle {
            center,
            time_parameter: s,
            weight,
        } => {
            let zeta = z - *center;
            let r = branch_sqrt(zeta * zeta - 4.0 * s / PI, zeta);
            *weight * (Complex64::new(1.0, 0.0) - zeta / r) / (2.0 * s)
        }
        MeasureComponent::GridDensity { x, values, weight } => {
            let dx = x[1] - x[0];
            let mass: f64 = values.iter().sum::<f64>() * dx;
            let scale = *weight / (PI * mass);
            let mut g = Complex64::new(0.0, 0.0);
            for (&xj, &uj) in x.iter().zip(values) {
                let d = z - xj;
                g -= uj / (d * d);
            }
            g * scale * dx
        }
    }
}

/// Square root of `w` on the branch asymptotic to `ref_z` (Laurent branch at
/// infinity), so that the Stieltjes transform stays Herglotz.
fn branch_sqrt(w: Complex64, ref_z: Complex64) -> Complex64 {
    let r = w.sqrt();
    if (r - ref_z).norm() <= (-r - ref_z).norm() {
        r
    } else {
        -r
    }
}

/// Direct O(N²) principal-value quadrature of the periodic Hilbert transform
/// (cotangent kernel scaled to the domain circumference):
/// `H[f](x_i) = (1/C) Σ_j (f_j − f_i)·cot(π(x_i−x_j)/C)·Δx`, with the
/// removable singularity at `j = i` contributing its limit `-f'(x_i)Δx/π`
/// (slope from a 6th-order centered difference, keeping the route FFT-free).
/// Used as the cross-check oracle for the spectral multiplier transform; on
/// the truncated line both approximate the real-line transform for fields
/// decaying inside the window.
pub fn hilbert_pv_quadrature(domain: &Domain, f: &[f64]) -> Result<Vec<f64>> {
    let n = domain.n_points();
    if f.len() != n {
        return Err(DysonError::LengthMismatch {
            expected: n,
            actual: f.len(),
        });
    }
    let dx = domain.dx();
    // cot(π m / N) for offsets m = 1..N-1; cot is π-periodic so the wrapped
    // offset (i - j) mod N indexes it directly
    let mut cot = vec![0.0f64; n];
    for (m, c) in cot.iter_mut().enumerate().skip(1) {
        *c = 1.0 / (PI * m as f64 / n as f64).tan();
    }
    let idx = |i: isize| -> usize { i.rem_euclid(n as isize) as usize };
    let mut out = vec![0.0f64; n];
    for i in 0..n {
        let fi = f[i];
        let mut sum = 0.0;
        for (j, &fj) in f.iter().enumerate() {
            if j != i {
                let m = (i + n - j) % n;
                sum += (fj - fi) * cot[m];
            }
        }
        let i_s = i as isize;
        let slope = (45.0 * (f[idx(i_s + 1)] - f[idx(i_s - 1)])
            - 9.0 * (f[idx(i_s + 2)] - f[idx(i_s - 2)])
            + (f[idx(i_s + 3)] - f[idx(i_s - 3)]))
            / (60.0 * dx);
        out[i] = sum / n as f64 - slope * dx / PI;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use approx::assert_abs_diff_eq;

    #[test]
    fn semicircle_closed_form_values() {
        assert_abs_diff_eq!(
            semicircle_density(1.0, 0.0).unwrap(),
            1.0 / PI.sqrt(),
            epsilon = 1e-15
        );
        // support edge at 2√(t/π) = 2 for t = π
        assert_eq!(semicircle_density(PI, 2.0).unwrap(), 0.0);
        assert_eq!(semicircle_density(PI, -2.0).unwrap(), 0.0);
        assert!(semicircle_density(PI, 1.999).unwrap() > 0.0);
        assert!(semicircle_density(0.0, 0.0).is_err());
    }

    #[test]
    fn semicircle_mass_is_one() {
        // substitute x = ρ sinθ: the integrand becomes a full period of
        // cos², which the trapezoid rule integrates exactly
        let t = 0.7;
        let rho = semicircle_radius(t);
        let m = 4096;
        let mut mass = 0.0;
        for j in 0..m {
            let theta = -PI / 2.0 + PI * (j as f64 + 0.5) / m as f64;
            let x = rho * theta.sin();
            mass += semicircle_density(t, x).unwrap() * rho * theta.cos() * PI / m as f64;
        }
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn semicircle_satisfies_the_evolution_equation() {
        // ∂ₜu + ∂ₓ(u·x/(2t)) = 0 inside the support: finite differences of
        // the closed form against the transport term computed exactly
        let t = 0.9;
        let dt = 1e-6;
        for &x in &[0.0, 0.3, 0.6, 0.9] {
            let dudt = (semicircle_density(t + dt, x).unwrap()
                - semicircle_density(t - dt, x).unwrap())
                / (2.0 * dt);
            let h = 1e-6;
            let flux = |y: f64| semicircle_density(t, y).unwrap() * y / (2.0 * t);
            let dflux = (flux(x + h) - flux(x - h)) / (2.0 * h);
            assert!((dudt + dflux).abs() < 1e-5, "residual at x={x}");
        }
    }

    #[test]
    fn stieltjes_of_atom_at_i() {
        let m = InitialMeasure::atom(0.0);
        let ev = StieltjesEvaluator::new(m, 0.0).unwrap();
        let g = ev.g(Complex64::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(g.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.im, -1.0 / PI, epsilon = 1e-15);
        assert!(ev.g(Complex64::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn herglotz_property_random_points() {
        let m = InitialMeasure::new(vec![
            MeasureComponent::Atom {
                location: -1.0,
                weight: 0.3,
            },
            MeasureComponent::UniformPiece {
                a: 0.0,
                b: 1.0,
                weight: 0.3,
            },
            MeasureComponent::Semicircle {
                center: 2.0,
                time_parameter: 0.5,
                weight: 0.4,
            },
        ])
        .unwrap();
        let ev = StieltjesEvaluator::new(m, 0.0).unwrap();
        let mut rng = SplitMix64::new(2024);
        for _ in 0..1000 {
            let z = Complex64::new(8.0 * rng.next_symmetric(), 4.0 * rng.next_f64() + 1e-3);
            let g = ev.g(z).unwrap();
            assert!(g.im < 0.0, "Im G(z) must be negative, got {g} at {z}");
            let bound = 1.0 / (PI * z.im);
            assert!(
                g.norm() <= bound * (1.0 + 1e-9),
                "|G| bound violated at {z}"
            );
        }
    }

    #[test]
    fn grid_density_matches_semicircle_component() {
        let s = 0.8;
        let rho = semicircle_radius(s);
        let n = 1 << 18;
        let (lo, hi) = (-rho, rho);
        let dx = (hi - lo) / n as f64;
        let x: Vec<f64> = (0..n).map(|j| lo + (j as f64 + 0.5) * dx).collect();
        let values: Vec<f64> = x
            .iter()
            .map(|&xi| semicircle_density(s, xi).unwrap())
            .collect();
        let grid = InitialMeasure::new(vec![MeasureComponent::GridDensity {
            x,
            values,
            weight: 1.0,
        }])
        .unwrap();
        let exact = InitialMeasure::new(vec![MeasureComponent::Semicircle {
            center: 0.0,
            time_parameter: s,
            weight: 1.0,
        }])
        .unwrap();
        let ev_g = StieltjesEvaluator::new(grid, 0.0).unwrap();
        let ev_e = StieltjesEvaluator::new(exact, 0.0).unwrap();
        for &z in &[
            Complex64::new(0.0, 1.0),
            Complex64::new(0.7, 0.5),
            Complex64::new(-1.3, 2.0),
        ] {
            let d = (ev_g.g(z).unwrap() - ev_e.g(z).unwrap()).norm();
            assert!(d < 5e-8, "quadrature mismatch {d} at {z}");
        }
    }

    #[test]
    fn atom_evolves_to_semicircle() {
        let ev = StieltjesEvaluator::new(InitialMeasure::atom(0.0), 0.0).unwrap();
        let xs: Vec<f64> = (0..2001).map(|j| -2.0 + 4.0 * j as f64 / 2000.0).collect();
        let u = ev.evolve(1.0, &xs, 1e-3).unwrap();
        let mut sup = 0.0f64;
        for (uj, &x) in u.iter().zip(&xs) {
            sup = sup.max((uj - semicircle_density(1.0, x).unwrap()).abs());
        }
        assert!(
            sup <= 5e-3,
            "sup error {sup} (edge-dominated Poisson smoothing)"
        );
        // away from the support edge the extrapolated error is far smaller
        let rho = semicircle_radius(1.0);
        let mut interior = 0.0f64;
        for (uj, &x) in u.iter().zip(&xs) {
            if (x.abs() - rho).abs() > 0.05 {
                interior = interior.max((uj - semicircle_density(1.0, x).unwrap()).abs());
            }
        }
        assert!(interior <= 1e-4, "interior error {interior}");
    }

    #[test]
    fn semicircle_family_is_a_semigroup() {
        // free convolution adds the self-similar time parameters
        let s = 0.4;
        let t = 0.6;
        let m = InitialMeasure::new(vec![MeasureComponent::Semicircle {
            center: 0.0,
            time_parameter: s,
            weight: 1.0,
        }])
        .unwrap();
        let ev = StieltjesEvaluator::new(m, 0.0).unwrap();
        let xs: Vec<f64> = (0..1001).map(|j| -2.0 + 4.0 * j as f64 / 1000.0).collect();
        let u = ev.evolve(t, &xs, 1e-3).unwrap();
        let mut sup = 0.0f64;
        for (uj, &x) in u.iter().zip(&xs) {
            sup = sup.max((uj - semicircle_density(s + t, x).unwrap()).abs());
        }
        assert!(sup <= 5e-3, "semigroup sup error {sup}");
    }

    #[test]
    fn two_stage_evolution_composes() {
        // evolve(evolve(δ₀, s), t) against evolve(δ₀, s + t): the first leg
        // re-enters as a grid density, so this exercises the quadrature
        // route end to end; allow twice the single-leg tolerance
        let (s, t) = (0.5, 0.5);
        let ev = StieltjesEvaluator::new(InitialMeasure::atom(0.0), 0.0).unwrap();
        let n = 2048;
        let dx = 6.0 / n as f64;
        let xs: Vec<f64> = (0..n).map(|j| -3.0 + (j as f64 + 0.5) * dx).collect();
        let first = ev.evolve(s, &xs, 1e-3).unwrap();
        let grid = InitialMeasure::new(vec![MeasureComponent::GridDensity {
            x: xs.clone(),
            values: first.iter().map(|v| v.max(0.0)).collect(),
            weight: 1.0,
        }])
        .unwrap();
        let ev2 = StieltjesEvaluator::new(grid, 0.0).unwrap();
        let second = ev2.evolve(t, &xs, 1e-3).unwrap();
        let mut sup = 0.0f64;
        for (v, &x) in second.iter().zip(&xs) {
            sup = sup.max((v - semicircle_density(s + t, x).unwrap()).abs());
        }
        assert!(sup <= 1e-2, "two-stage composition sup error {sup}");
    }

    #[test]
    fn evolve_small_time_returns_poisson_smoothed_input() {
        let n = 1024;
        let (lo, hi) = (-1.0, 1.0);
        let dx = (hi - lo) / n as f64;
        let x: Vec<f64> = (0..n).map(|j| lo + (j as f64 + 0.5) * dx).collect();
        let values: Vec<f64> = x
            .iter()
            .map(|&xi| 0.5 * (1.0 - xi * xi).max(0.0) * 1.5)
            .collect();
        let m = InitialMeasure::new(vec![MeasureComponent::GridDensity {
            x: x.clone(),
            values: values.clone(),
            weight: 1.0,
        }])
        .unwrap();
        let ev = StieltjesEvaluator::new(m, 0.0).unwrap();
        let delta = 1e-2;
        let targets: Vec<f64> = (0..41).map(|j| -1.5 + 3.0 * j as f64 / 40.0).collect();
        let u = ev.evolve_at_height(1e-12, &targets, delta).unwrap();
        // direct Poisson convolution of the same samples
        let mass: f64 = values.iter().sum::<f64>() * dx;
        for (uj, &xt) in u.iter().zip(&targets) {
            let mut conv = 0.0;
            for (&xj, &vj) in x.iter().zip(&values) {
                conv += vj / mass * delta / (PI * ((xt - xj).powi(2) + delta * delta)) * dx;
            }
            assert!((uj - conv).abs() < 1e-9, "at x={xt}: {uj} vs {conv}");
        }
    }

    #[test]
    fn oracle_mass_stays_in_bounds() {
        let ev = StieltjesEvaluator::new(InitialMeasure::atom(0.0), 0.0).unwrap();
        let n = 4000;
        let dx = 8.0 / n as f64;
        let xs: Vec<f64> = (0..n).map(|j| -4.0 + (j as f64 + 0.5) * dx).collect();
        let u = ev.evolve(1.0, &xs, 1e-3).unwrap();
        let mass: f64 = u.iter().sum::<f64>() * dx;
        assert!(mass <= 1.0 + 1e-6, "mass {mass}");
        assert!(mass >= 1.0 - 5e-3, "mass {mass}");
    }

    #[test]
    fn herglotz_preserved_along_characteristics() {
        let m = InitialMeasure::new(vec![
            MeasureComponent::Atom {
                location: -1.0,
                weight: 0.5,
            },
            MeasureComponent::Atom {
                location: 1.0,
                weight: 0.5,
            },
        ])
        .unwrap();
        let ev = StieltjesEvaluator::new(m, 0.02).unwrap();
        let xs: Vec<f64> = (0..801).map(|j| -3.0 + 6.0 * j as f64 / 800.0).collect();
        let u = ev.evolve_at_height(0.5, &xs, 1e-3).unwrap();
        for (uj, &x) in u.iter().zip(&xs) {
            assert!(*uj >= -1e-14, "density -Im G must be nonnegative at {x}");
        }
    }

    #[test]
    fn pv_quadrature_constant_is_zero() {
        let d = Domain::torus(64).unwrap();
        let h = hilbert_pv_quadrature(&d, &vec![2.5; 64]).unwrap();
        assert!(h.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn pv_quadrature_matches_multiplier_on_smooth_fields() {
        // the quadrature is exact on the resolved band; what remains is the
        // finite-difference slope in the diagonal term, which dies fast
        // under refinement
        let sup_at = |n: usize| {
            let d = Domain::torus(n).unwrap();
            let f: Vec<f64> = d
                .grid()
                .iter()
                .map(|&x| (x.cos() + 0.3 * (3.0 * x).sin()).exp())
                .collect();
            let a = hilbert_pv_quadrature(&d, &f).unwrap();
            let b = d.hilbert(&f).unwrap();
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        };
        let coarse = sup_at(128);
        let fine = sup_at(256);
        assert!(coarse < 1e-6, "PV vs multiplier sup {coarse}");
        assert!(
            fine < coarse / 10.0,
            "no refinement gain: {coarse} -> {fine}"
        );
    }

    #[test]
    fn pv_quadrature_poisson_kernel() {
        // the acceptance-scale configuration: a = 0.5, L = 16, N = 2048
        let (a, l, n) = (0.5, 16.0, 2048);
        let d = Domain::truncated_line(l, n).unwrap();
        let p: Vec<f64> = d
            .grid()
            .iter()
            .map(|&x| a / (PI * (a * a + x * x)))
            .collect();
        let pv = hilbert_pv_quadrature(&d, &p).unwrap();
        let sp = d.hilbert(&p).unwrap();
        let mut sup = 0.0f64;
        for i in 0..n {
            sup = sup.max((pv[i] - sp[i]).abs());
        }
        assert!(sup <= 1e-6, "PV vs spectral on Poisson kernel: {sup}");
        // and both reproduce the line conjugate Q_a in the bulk up to the
        // periodization images
        let mut vs_q = 0.0f64;
        for (v, &x) in pv
            .iter()
            .zip(d.grid().iter())
            .filter(|(_, &x)| x.abs() <= 2.0)
        {
            vs_q = vs_q.max((v - x / (PI * (a * a + x * x))).abs());
        }
        assert!(vs_q < 3e-3, "PV vs Q_a windowed: {vs_q}");
    }

    #[test]
    fn evolve_rejects_bad_parameters() {
        let ev = StieltjesEvaluator::new(InitialMeasure::atom(0.0), 0.0).unwrap();
        assert!(ev.evolve(0.0, &[0.0], 1e-3).is_err());
        assert!(ev.evolve(-1.0, &[0.0], 1e-3).is_err());
        assert!(ev.evolve(1.0, &[0.0], 0.0).is_err());
        assert!(StieltjesEvaluator::new(InitialMeasure::atom(0.0), -0.1).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(InitialMeasure::new(vec![]).is_err());
        assert!(InitialMeasure::new(vec![MeasureComponent::Atom {
            location: 0.0,
            weight: 0.7,
        }])
        .is_err());
        assert!(InitialMeasure::new(vec![MeasureComponent::UniformPiece {
            a: 1.0,
            b: 0.0,
            weight: 1.0,
        }])
        .is_err());
    }
}
