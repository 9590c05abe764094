//! The acceptance-check registry: every criterion maps to exactly one named
//! check here, with its tolerances pinned in code. `verify` runs a selected
//! subset, prints one pass/fail line per criterion and writes a
//! machine-readable verdict file.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{DysonError, Result};
use crate::evolution::DriftSpec;
use crate::harness::scenario::{
    run_scenario, CheckSpec, CheckVerdict, ComponentSpec, DomainSpec, DriftSpecToml, InitialSpec,
    OutputSpec, RunRecord, Scenario, SolverSpec,
};
use crate::oracle::hilbert_pv_quadrature;
use crate::rng::SplitMix64;
use crate::spectral::Domain;

#[derive(Clone, Debug, Serialize)]
pub struct CheckDetail {
    pub label: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub criterion: usize,
    pub name: String,
    pub passed: bool,
    pub elapsed_secs: f64,
    pub details: Vec<CheckDetail>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            out.push_str(&format!(
                "{} criterion {:>2} {:<22} [{:.1}s]\n",
                if o.passed { "PASS" } else { "FAIL" },
                o.criterion,
                o.name,
                o.elapsed_secs,
            ));
            for d in &o.details {
                out.push_str(&format!(
                    "     {} {:<40} measured {:>12.4e}  threshold {:>12.4e}\n",
                    if d.passed { "ok  " } else { "FAIL" },
                    d.label,
                    d.measured,
                    d.threshold,
                ));
            }
        }
        out
    }
}

pub struct CriterionDef {
    pub id: usize,
    pub name: &'static str,
    pub group: &'static str,
}

pub const CRITERIA: [CriterionDef; 12] = [
    CriterionDef {
        id: 1,
        name: "operator-suite",
        group: "operators",
    },
    CriterionDef {
        id: 2,
        name: "pv-cross-check",
        group: "operators",
    },
    CriterionDef {
        id: 3,
        name: "semicircle-selfsim",
        group: "line",
    },
    CriterionDef {
        id: 4,
        name: "linf-regularization",
        group: "line",
    },
    CriterionDef {
        id: 5,
        name: "entropy-balance",
        group: "balance",
    },
    CriterionDef {
        id: 6,
        name: "hhalf-balance",
        group: "balance",
    },
    CriterionDef {
        id: 7,
        name: "monotonicity",
        group: "balance",
    },
    CriterionDef {
        id: 8,
        name: "second-moment",
        group: "balance",
    },
    CriterionDef {
        id: 9,
        name: "oracle-equivalence",
        group: "oracle",
    },
    CriterionDef {
        id: 10,
        name: "holder-control",
        group: "oracle",
    },
    CriterionDef {
        id: 11,
        name: "periodic-long-time",
        group: "torus",
    },
    CriterionDef {
        id: 12,
        name: "drift-suite",
        group: "drift",
    },
];

fn detail(label: impl Into<String>, measured: f64, threshold: f64) -> CheckDetail {
    CheckDetail {
        label: label.into(),
        measured,
        threshold,
        passed: measured <= threshold && measured.is_finite(),
    }
}

fn detail_from_verdict(v: &CheckVerdict) -> CheckDetail {
    CheckDetail {
        label: v.detail.clone(),
        measured: v.measured,
        threshold: v.tolerance,
        passed: v.passed,
    }
}

fn find_verdict<'a>(run: &'a RunRecord, name: &str) -> Result<&'a CheckVerdict> {
    run.verdicts
        .iter()
        .find(|v| v.name == name)
        .ok_or_else(|| DysonError::Config(format!("run lacks verdict '{name}'")))
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

fn check(name: &str) -> CheckSpec {
    CheckSpec {
        name: name.into(),
        tolerance: None,
        at_time: None,
    }
}

fn check_tol(name: &str, tol: f64) -> CheckSpec {
    CheckSpec {
        name: name.into(),
        tolerance: Some(tol),
        at_time: None,
    }
}

pub fn scenario_uniform_torus() -> Scenario {
    Scenario {
        name: "uniform-torus".into(),
        domain: DomainSpec::torus(256),
        initial: InitialSpec::Uniform,
        mollifier_width: 0.0,
        solver: SolverSpec {
            epsilon: 1e-5,
            t_end: 0.5,
            cfl_number: 0.4,
            dt_max: 5e-3,
            dealias: true,
            enforce_cfl: true,
            tol_neg: 1e-6,
            tol_mass: 1e-10,
            drift: DriftSpecToml::None,
        },
        output: OutputSpec {
            record_start: 0.0,
            record_interval: 0.1,
            store_fields: false,
        },
        checks: vec![
            check("mass-conservation"),
            check("uniform-stationary"),
            check("monotonic-hhalf"),
        ],
    }
}

/// Self-similar profile from absolute time 0.25; solver time is offset by
/// that amount.
fn scenario_semicircle(
    name: &str,
    epsilon: f64,
    record_start: f64,
    record_interval: f64,
    checks: Vec<CheckSpec>,
) -> Scenario {
    Scenario {
        name: name.into(),
        domain: DomainSpec::line(8.0, 2048),
        initial: InitialSpec::Semicircle {
            time_parameter: 0.25,
        },
        mollifier_width: 0.0,
        solver: SolverSpec {
            epsilon,
            t_end: 0.75,
            cfl_number: 0.4,
            dt_max: 5e-3,
            dealias: true,
            enforce_cfl: true,
            // sampling the sqrt edges leaves a few 1e-3 of Gibbs undershoot
            // until the viscous edge layer forms (and at ε = 1e-4 the moving
            // edge stays ~2 cells wide, so some of it persists)
            tol_neg: 1e-2,
            tol_mass: 1e-10,
            drift: DriftSpecToml::None,
        },
        output: OutputSpec {
            record_start,
            record_interval,
            store_fields: false,
        },
        checks,
    }
}

pub fn scenario_semicircle_selfsim() -> Scenario {
    scenario_semicircle(
        "semicircle-selfsim",
        1e-4,
        0.0,
        5e-3,
        vec![
            check("mass-conservation"),
            check_tol("semicircle-l1", 2e-2),
            check("monotonic-hhalf"),
        ],
    )
}

pub fn scenario_semicircle_balance() -> Scenario {
    scenario_semicircle(
        "semicircle-balance",
        1e-3,
        0.075,
        2.5e-3,
        vec![
            check("mass-conservation"),
            check_tol("entropy-balance", 1e-2),
            check_tol("hhalf-balance", 1e-2),
            check_tol("second-moment", 1e-2),
            check("monotonic-hhalf"),
        ],
    )
}

fn scenario_atom(
    name: &str,
    epsilon: f64,
    record_interval: f64,
    checks: Vec<CheckSpec>,
) -> Scenario {
    Scenario {
        name: name.into(),
        domain: DomainSpec::line(8.0, 2048),
        initial: InitialSpec::Measure {
            components: vec![ComponentSpec::Atom {
                location: 0.0,
                weight: 1.0,
            }],
        },
        mollifier_width: 0.02,
        solver: SolverSpec {
            epsilon,
            t_end: 1.0,
            cfl_number: 0.4,
            dt_max: 5e-3,
            dealias: true,
            enforce_cfl: true,
            // the width-0.02 peak sits ~2e-4 above the grid's resolving
            // power at N=2048 until it spreads, with matching undershoot
            tol_neg: 1e-3,
            tol_mass: 1e-10,
            drift: DriftSpecToml::None,
        },
        output: OutputSpec {
            record_start: 0.5,
            record_interval,
            store_fields: false,
        },
        checks,
    }
}

pub fn scenario_atom_linfty() -> Scenario {
    scenario_atom(
        "atom-linfty",
        1e-4,
        5e-3,
        vec![
            check("mass-conservation"),
            check_tol("linf-window", 0.05),
            check("monotonic-hhalf"),
        ],
    )
}

pub fn scenario_atom_balance() -> Scenario {
    scenario_atom(
        "atom-balance",
        1e-3,
        2.5e-3,
        vec![
            check("mass-conservation"),
            check_tol("entropy-balance", 1e-2),
            check_tol("hhalf-balance", 1e-2),
            check("monotonic-hhalf"),
        ],
    )
}

pub fn scenario_two_atom(n_points: usize) -> Scenario {
    let mut checks = vec![
        check("mass-conservation"),
        check("monotonic-hhalf"),
        check("holder-lemma"),
    ];
    if n_points == 4096 {
        checks.push(CheckSpec {
            name: "oracle-l1".into(),
            tolerance: Some(3e-2),
            at_time: Some(0.5),
        });
    }
    Scenario {
        name: format!("two-atom-{n_points}"),
        domain: DomainSpec::line(8.0, n_points),
        initial: InitialSpec::Measure {
            components: vec![
                ComponentSpec::Atom {
                    location: -1.0,
                    weight: 0.5,
                },
                ComponentSpec::Atom {
                    location: 1.0,
                    weight: 0.5,
                },
            ],
        },
        mollifier_width: 0.02,
        solver: SolverSpec {
            epsilon: 1e-4,
            t_end: 1.0,
            cfl_number: 0.4,
            dt_max: 5e-3,
            dealias: true,
            enforce_cfl: true,
            // width-0.02 peaks undershoot by ~1e-4 on the coarser grid
            // until they spread
            tol_neg: 1e-3,
            tol_mass: 1e-10,
            drift: DriftSpecToml::None,
        },
        output: OutputSpec {
            record_start: 0.1,
            record_interval: 5e-3,
            store_fields: false,
        },
        checks,
    }
}

pub fn scenario_periodic_longtime() -> Scenario {
    Scenario {
        name: "cos-perturbed-torus".into(),
        domain: DomainSpec::torus(512),
        initial: InitialSpec::CosinePerturbed { amplitude: 0.9 },
        mollifier_width: 0.0,
        solver: SolverSpec {
            epsilon: 1e-5,
            t_end: 40.0,
            cfl_number: 0.4,
            dt_max: 5e-3,
            dealias: true,
            enforce_cfl: true,
            tol_neg: 1e-6,
            tol_mass: 1e-10,
            drift: DriftSpecToml::None,
        },
        output: OutputSpec {
            record_start: 0.0,
            record_interval: 5e-2,
            store_fields: false,
        },
        checks: vec![
            check("mass-conservation"),
            check("monotonic-hhalf"),
            check_tol("final-uniform", 1e-3),
            check("level-set"),
        ],
    }
}

pub fn scenario_drift_sine() -> Scenario {
    Scenario {
        name: "drift-sine-torus".into(),
        domain: DomainSpec::torus(512),
        initial: InitialSpec::CosinePerturbed { amplitude: 0.5 },
        mollifier_width: 0.0,
        solver: SolverSpec {
            epsilon: 1e-4,
            t_end: 2.0,
            cfl_number: 0.4,
            dt_max: 5e-3,
            dealias: true,
            enforce_cfl: true,
            tol_neg: 1e-6,
            tol_mass: 1e-10,
            drift: DriftSpecToml::Sine { amplitude: 1.0 },
        },
        output: OutputSpec {
            record_start: 0.0,
            record_interval: 5e-3,
            store_fields: false,
        },
        checks: vec![
            check("mass-conservation"),
            check("gronwall"),
            check_tol("hhalf-balance", 1e-2),
        ],
    }
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![
        scenario_uniform_torus(),
        scenario_semicircle_selfsim(),
        scenario_semicircle_balance(),
        scenario_atom_linfty(),
        scenario_atom_balance(),
        scenario_two_atom(4096),
        scenario_two_atom(2048),
        scenario_periodic_longtime(),
        scenario_drift_sine(),
    ]
}

// ---------------------------------------------------------------------------
// Shared run cache
// ---------------------------------------------------------------------------

#[derive(Default)]
struct Cache {
    semicircle_selfsim: Option<RunRecord>,
    semicircle_balance: Option<RunRecord>,
    atom_linfty: Option<RunRecord>,
    atom_balance: Option<RunRecord>,
    two_atom_fine: Option<RunRecord>,
    two_atom_coarse: Option<RunRecord>,
    periodic: Option<RunRecord>,
    drift: Option<RunRecord>,
}

macro_rules! cached {
    ($fn_name:ident, $slot:ident, $builder:expr) => {
        fn $fn_name(&mut self) -> Result<&RunRecord> {
            if self.$slot.is_none() {
                self.$slot = Some(run_scenario(&$builder)?);
            }
            Ok(self.$slot.as_ref().unwrap())
        }
    };
}

impl Cache {
    cached!(
        get_semicircle_selfsim,
        semicircle_selfsim,
        scenario_semicircle_selfsim()
    );
    cached!(
        get_semicircle_balance,
        semicircle_balance,
        scenario_semicircle_balance()
    );
    cached!(get_atom_linfty, atom_linfty, scenario_atom_linfty());
    cached!(get_atom_balance, atom_balance, scenario_atom_balance());
    cached!(get_two_atom_fine, two_atom_fine, scenario_two_atom(4096));
    cached!(
        get_two_atom_coarse,
        two_atom_coarse,
        scenario_two_atom(2048)
    );
    cached!(get_periodic, periodic, scenario_periodic_longtime());
    cached!(get_drift, drift, scenario_drift_sine());
}

// ---------------------------------------------------------------------------
// Helpers for the operator trials
// ---------------------------------------------------------------------------

fn random_band_limited(domain: &Domain, kmax: usize, decay: f64, rng: &mut SplitMix64) -> Vec<f64> {
    let grid = domain.grid();
    let scale = 2.0 * PI / domain.circumference();
    let mut f = vec![0.0; domain.n_points()];
    for m in 1..=kmax {
        let w = (m as f64).powf(-decay);
        let a = w * rng.next_symmetric();
        let b = w * rng.next_symmetric();
        for (j, &x) in grid.iter().enumerate() {
            let arg = scale * m as f64 * x;
            f[j] += a * arg.cos() + b * arg.sin();
        }
    }
    f
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn rel_sup(a: &[f64], b: &[f64], scale: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max)
        / scale
}

// ---------------------------------------------------------------------------
// The criteria
// ---------------------------------------------------------------------------

fn c1_operator_suite() -> Result<Vec<CheckDetail>> {
    let domain = Domain::torus(256)?;
    let kmax = domain.n_points() / 3;
    let mut rng = SplitMix64::new(0xd75a_0001);
    let mut worst_hh = 0.0f64;
    let mut worst_anti = 0.0f64;
    let mut worst_iso = 0.0f64;
    let mut worst_fact = 0.0f64;
    let mut worst_cotlar = 0.0f64;
    for _ in 0..100 {
        let f = random_band_limited(&domain, kmax, 1.0, &mut rng);
        let g = random_band_limited(&domain, kmax, 1.0, &mut rng);
        let hf = domain.hilbert(&f)?;
        let hg = domain.hilbert(&g)?;

        let hhf = domain.hilbert(&hf)?;
        let neg_f: Vec<f64> = f.iter().map(|x| -x).collect();
        worst_hh = worst_hh.max(rel_sup(&hhf, &neg_f, max_abs(&f)));

        let lhs = domain.quadrature(&g.iter().zip(&hf).map(|(a, b)| a * b).collect::<Vec<_>>());
        let rhs = domain.quadrature(&f.iter().zip(&hg).map(|(a, b)| a * b).collect::<Vec<_>>());
        worst_anti = worst_anti.max((lhs + rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300));

        let nf = domain.sobolev_seminorm_sq(&f, 0.0)?;
        let nhf = domain.sobolev_seminorm_sq(&hf, 0.0)?;
        worst_iso = worst_iso.max((nf - nhf).abs() / nf);

        let a = domain.frac_lap(&f, 1.0)?;
        let b = domain.derivative(&hf)?;
        let c = domain.hilbert(&domain.derivative(&f)?)?;
        let scale = max_abs(&a).max(1e-300);
        worst_fact = worst_fact.max(rel_sup(&a, &b, scale).max(rel_sup(&a, &c, scale)));

        let hf2 = domain.dealiased_product(&hf, &hf)?;
        let f2 = domain.dealiased_product(&f, &f)?;
        let fhf = domain.dealiased_product(&f, &hf)?;
        let h_fhf = domain.hilbert(&fhf)?;
        let linf = max_abs(&f);
        let mut res = 0.0f64;
        for i in 0..domain.n_points() {
            res = res.max((hf2[i] - f2[i] - 2.0 * h_fhf[i]).abs());
        }
        worst_cotlar = worst_cotlar.max(res / (linf * linf));
    }
    Ok(vec![
        detail("H∘H = -Id relative sup (100 trials)", worst_hh, 1e-12),
        detail("antisymmetry <g,Hf> = -<f,Hg>", worst_anti, 1e-12),
        detail("isometry ‖Hf‖_L2 = ‖f‖_L2 (zero mean)", worst_iso, 1e-12),
        detail("(-Δ)^{1/2} = ∂ₓH = H∂ₓ", worst_fact, 1e-12),
        detail("Cotlar residual / ‖f‖²_∞", worst_cotlar, 1e-10),
    ])
}

fn c2_pv_cross_check() -> Result<Vec<CheckDetail>> {
    let a = 0.5;
    let domain = Domain::truncated_line(16.0, 2048)?;
    let p: Vec<f64> = domain
        .grid()
        .iter()
        .map(|&x| a / (PI * (a * a + x * x)))
        .collect();
    let spectral = domain.hilbert(&p)?;
    let pv = hilbert_pv_quadrature(&domain, &p)?;
    let sup = spectral
        .iter()
        .zip(&pv)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    Ok(vec![detail(
        "sup |H_spectral - H_pv| on Poisson kernel (a=0.5, L=16, N=2048)",
        sup,
        1e-6,
    )])
}

fn c3_semicircle_selfsim(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let run = cache.get_semicircle_selfsim()?;
    let mut details = vec![detail_from_verdict(find_verdict(run, "semicircle-l1")?)];
    let last = run
        .records
        .last()
        .ok_or_else(|| DysonError::Config("empty run".into()))?;
    // absolute time 1.0: ‖u‖_∞ within 2% of 1/√π
    let measured = (last.linf * PI.sqrt() - 1.0).abs();
    details.push(detail("|√π·‖u(1)‖_∞ - 1|", measured, 0.02));
    Ok(details)
}

fn c4_linf_regularization(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let run = cache.get_atom_linfty()?;
    Ok(vec![detail_from_verdict(find_verdict(run, "linf-window")?)])
}

fn c5_entropy_balance(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let mut details = Vec::new();
    let run = cache.get_semicircle_balance()?;
    let v = find_verdict(run, "entropy-balance")?;
    details.push(CheckDetail {
        label: format!("semicircle (ε=1e-3): {}", v.detail),
        ..detail_from_verdict(v)
    });
    let run = cache.get_atom_balance()?;
    let v = find_verdict(run, "entropy-balance")?;
    details.push(CheckDetail {
        label: format!("mollified atom (ε=1e-3): {}", v.detail),
        ..detail_from_verdict(v)
    });
    Ok(details)
}

fn dissipation_term_floor(records: &[DiagnosticsRecord], epsilon: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for r in records {
        worst = worst.min(2.0 / 9.0 * r.h1_power_sq);
        worst = worst.min(0.5 * r.triple_term);
        worst = worst.min(epsilon * r.h32_sq);
    }
    worst
}

fn c6_hhalf_balance(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let mut details = Vec::new();
    let semicircle = cache.get_semicircle_balance()?.clone();
    let atom = cache.get_atom_balance()?.clone();
    for (label, run, eps) in [
        ("semicircle", &semicircle, 1e-3),
        ("mollified atom", &atom, 1e-3),
    ] {
        let v = find_verdict(run, "hhalf-balance")?;
        details.push(CheckDetail {
            label: format!("{label} (ε=1e-3): {}", v.detail),
            ..detail_from_verdict(v)
        });
        let floor = dissipation_term_floor(&run.records, eps);
        details.push(detail(
            format!("{label}: most negative dissipation term (≥ -1e-10)"),
            -floor.min(0.0),
            1e-10,
        ));
    }
    Ok(details)
}

fn c7_monotonicity(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let mut details = Vec::new();
    let names = [
        "semicircle-selfsim",
        "semicircle-balance",
        "atom-linfty",
        "atom-balance",
        "two-atom-4096",
        "cos-perturbed-torus",
    ];
    let runs = [
        cache.get_semicircle_selfsim()?.clone(),
        cache.get_semicircle_balance()?.clone(),
        cache.get_atom_linfty()?.clone(),
        cache.get_atom_balance()?.clone(),
        cache.get_two_atom_fine()?.clone(),
        cache.get_periodic()?.clone(),
    ];
    for (name, run) in names.iter().zip(&runs) {
        let v = find_verdict(run, "monotonic-hhalf")?;
        details.push(CheckDetail {
            label: format!("{name}: {}", v.detail),
            ..detail_from_verdict(v)
        });
    }
    Ok(details)
}

fn c8_second_moment(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let run = cache.get_semicircle_balance()?;
    Ok(vec![detail_from_verdict(find_verdict(
        run,
        "second-moment",
    )?)])
}

fn c9_oracle_equivalence(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let run = cache.get_two_atom_fine()?;
    Ok(vec![detail_from_verdict(find_verdict(run, "oracle-l1")?)])
}

fn holder_cubed_integral(records: &[DiagnosticsRecord], t0: f64, t1: f64) -> f64 {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.time >= t0 - 1e-12 && r.time <= t1 + 1e-12)
        .map(|r| (r.time, r.holder_13.powi(3)))
        .collect();
    let mut integral = 0.0;
    for w in pts.windows(2) {
        integral += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
    }
    integral
}

fn c10_holder_control(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let fine = cache.get_two_atom_fine()?.clone();
    let coarse = cache.get_two_atom_coarse()?.clone();
    let i_fine = holder_cubed_integral(&fine.records, 0.1, 1.0);
    let i_coarse = holder_cubed_integral(&coarse.records, 0.1, 1.0);
    let mut details = Vec::new();
    details.push(detail(
        format!("∫ holder_13³ dt finite (N=4096: {i_fine:.5}, N=2048: {i_coarse:.5})"),
        if i_fine.is_finite() && i_coarse.is_finite() {
            0.0
        } else {
            1.0
        },
        0.5,
    ));
    details.push(detail(
        "refinement stability |I(4096) - I(2048)| / I(4096)",
        (i_fine - i_coarse).abs() / i_fine,
        0.10,
    ));
    let v = find_verdict(&fine, "holder-lemma")?;
    details.push(CheckDetail {
        label: format!(
            "Hölder interpolation with C = 1 on every field: {}",
            v.detail
        ),
        ..detail_from_verdict(v)
    });
    Ok(details)
}

fn c11_periodic_long_time(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let run = cache.get_periodic()?;
    let uniform = 1.0 / (2.0 * PI);
    let last = run
        .records
        .last()
        .ok_or_else(|| DysonError::Config("empty periodic run".into()))?;
    let mut details = Vec::new();
    details.push(detail(
        format!("|M(T) - 1/2π| at T = {}", last.time),
        (last.linf - uniform).abs(),
        1e-3,
    ));
    // first record index from which min u stays positive
    let mut t1_idx = run.records.len();
    for (i, r) in run.records.iter().enumerate().rev() {
        if r.min_u > 0.0 {
            t1_idx = i;
        } else {
            break;
        }
    }
    let t1_found = t1_idx < run.records.len();
    details.push(detail(
        if t1_found {
            format!("min u > 0 for all t ≥ t₁ = {}", run.records[t1_idx].time)
        } else {
            "no finite t₁ with min u > 0 afterwards".into()
        },
        if t1_found { 0.0 } else { 1.0 },
        0.5,
    ));
    let v = find_verdict(run, "final-uniform")?;
    details.push(detail_from_verdict(v));
    let v = find_verdict(run, "level-set")?;
    details.push(CheckDetail {
        label: format!("level-set bound at ε' ∈ {{0.01,0.05,0.1}}/2π: {}", v.detail),
        ..detail_from_verdict(v)
    });
    Ok(details)
}

fn kato_ponce_max_ratio(n: usize, trials: usize) -> Result<f64> {
    let domain = Domain::torus(n)?;
    let kmax = n / 3;
    let mut rng = SplitMix64::new(0xd75a_0012);
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let u = random_band_limited(&domain, kmax, 1.0, &mut rng);
        let b = random_band_limited(&domain, kmax, 2.0, &mut rng);
        let db = domain.derivative(&b)?;
        let drift = DriftSpec::sampled(b, db)?;
        let ratio = diagnostics::kato_ponce_ratio(&domain, &u, &drift)?;
        if !ratio.is_finite() {
            return Ok(f64::INFINITY);
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(max_ratio)
}

fn c12_drift_suite(cache: &mut Cache) -> Result<Vec<CheckDetail>> {
    let run = cache.get_drift()?;
    let mut details = Vec::new();
    let v = find_verdict(run, "gronwall")?;
    details.push(CheckDetail {
        label: format!("Grönwall envelope (B = 1): {}", v.detail),
        ..detail_from_verdict(v)
    });
    let v = find_verdict(run, "hhalf-balance")?;
    details.push(CheckDetail {
        label: format!("drift-corrected Ḣ^{{1/2}} balance: {}", v.detail),
        ..detail_from_verdict(v)
    });
    let coarse = kato_ponce_max_ratio(256, 100)?;
    let fine = kato_ponce_max_ratio(512, 100)?;
    details.push(detail(
        format!("Kato-Ponce max ratio finite (N=256: {coarse:.4}, N=512: {fine:.4})"),
        if coarse.is_finite() && fine.is_finite() {
            0.0
        } else {
            1.0
        },
        0.5,
    ));
    details.push(detail(
        "Kato-Ponce max ratio stability |r256 - r512| / r512",
        (coarse - fine).abs() / fine,
        0.10,
    ));
    Ok(details)
}

fn run_criterion(id: usize, cache: &mut Cache) -> Result<CheckOutcome> {
    let def = CRITERIA
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| DysonError::Config(format!("no criterion {id}")))?;
    let start = Instant::now();
    let mut details = match id {
        1 => c1_operator_suite()?,
        2 => c2_pv_cross_check()?,
        3 => c3_semicircle_selfsim(cache)?,
        4 => c4_linf_regularization(cache)?,
        5 => c5_entropy_balance(cache)?,
        6 => c6_hhalf_balance(cache)?,
        7 => c7_monotonicity(cache)?,
        8 => c8_second_moment(cache)?,
        9 => c9_oracle_equivalence(cache)?,
        10 => c10_holder_control(cache)?,
        11 => c11_periodic_long_time(cache)?,
        12 => c12_drift_suite(cache)?,
        _ => unreachable!(),
    };
    let elapsed = start.elapsed().as_secs_f64();
    // pinned runtime budgets (include shared-run construction on first touch)
    match id {
        1 => details.push(detail("runtime < 5 s", elapsed, 5.0)),
        3 => details.push(detail("runtime < 60 s", elapsed, 60.0)),
        9 => details.push(detail("runtime < 300 s", elapsed, 300.0)),
        _ => {}
    }
    Ok(CheckOutcome {
        criterion: id,
        name: def.name.to_string(),
        passed: details.iter().all(|d| d.passed),
        elapsed_secs: elapsed,
        details,
    })
}

/// Runs the selected criteria (`None` or empty = the full suite; a group
/// name or criterion name narrows it down).
pub fn verify(selector: Option<&str>) -> Result<VerifyReport> {
    let chosen: Vec<usize> = match selector {
        None | Some("") | Some("all") => CRITERIA.iter().map(|c| c.id).collect(),
        Some(s) => {
            let ids: Vec<usize> = CRITERIA
                .iter()
                .filter(|c| c.group == s || c.name == s)
                .map(|c| c.id)
                .collect();
            if ids.is_empty() {
                return Err(DysonError::Config(format!(
                    "selector '{s}' matches no criterion; groups: operators, line, balance, oracle, torus, drift"
                )));
            }
            ids
        }
    };
    let mut cache = Cache::default();
    let mut outcomes = Vec::new();
    for id in chosen {
        outcomes.push(run_criterion(id, &mut cache)?);
    }
    Ok(VerifyReport { outcomes })
}
