//! Sample-based audit of the structural hypotheses on the constitutive laws.
//!
//! Every hypothesis quantifies over a continuum, so the audit can only
//! sample: deformations from the compact set
//! `𝖥_R = {F : |F| ≤ R, |F⁻¹| ≤ R, det F ≥ 1/R}`, concentrations
//! log-uniformly from `[c_lo, c_hi]`. Each check records the worst sample and
//! the empirical constants it measured; failures are reported, never thrown.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exponents::{Clause, ExponentProfile};
use super::free_energy::FreeEnergy;
use super::structural::{cauchy_green_rate, Hyperstress, Mobility, ViscousPotential};
use crate::numdiff::{central_difference, default_step};
use crate::tensor::{det, frobenius, identity, inverse, rotation, Mat, Tensor3};

/// Tolerance for invariance checks, relative to `1 + |value|`.
pub const INVARIANCE_TOL: f64 = 1e-12;
/// Tolerance for derivative consistency against finite differences.
pub const DERIVATIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub dim: usize,
    /// Radius `R` of the compact deformation set `𝖥_R`.
    pub radius: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub samples: usize,
    pub rotations: usize,
    pub seed: u64,
    pub boundary: Option<BoundaryData>,
    pub initial: Option<InitialData>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            dim: 2,
            radius: 4.0,
            c_lo: 1e-3,
            c_hi: 1e2,
            samples: 200,
            rotations: 50,
            seed: 0x5eed,
            boundary: None,
            initial: None,
        }
    }
}

/// Permeability values and their boundary measures (points in 1-D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub kappa: Vec<f64>,
    pub measure: Vec<f64>,
    /// Whether species exchange through the boundary is switched on.
    pub exchange_enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub min_det: f64,
    pub min_concentration: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseRecord {
    pub clause: Clause,
    pub check: String,
    pub passed: bool,
    /// Worst sample found, if the check is sample based.
    pub worst_case: Option<WorstCase>,
    pub measured: BTreeMap<String, f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    /// Deformation gradient, row major.
    pub f: Vec<f64>,
    pub c: Option<f64>,
    pub value: f64,
}

impl WorstCase {
    fn new(f: &Mat, c: Option<f64>, value: f64) -> Self {
        WorstCase {
            f: f.transpose().iter().copied().collect(),
            c,
            value,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub records: Vec<ClauseRecord>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClauseRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn get(&self, check: &str) -> Option<&ClauseRecord> {
        self.records.iter().find(|r| r.check == check)
    }

    fn push(&mut self, record: ClauseRecord) {
        self.records.push(record);
    }
}

/// Bundle of the four constitutive laws of a model.
#[derive(Debug, Clone, Copy)]
pub struct LawSet<'a> {
    pub material: &'a dyn FreeEnergy,
    pub hyper: &'a dyn Hyperstress,
    pub visc: &'a dyn ViscousPotential,
    pub mobility: &'a dyn Mobility,
}

/// Random element of `𝖥_R`: `F = R₁ diag(λ) R₂`, rejected until it lies in
/// the set.
pub fn sample_admissible_deformation<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Mat {
    let lr = radius.ln();
    loop {
        let r1 = rotation(d, rng);
        let r2 = rotation(d, rng);
        let lam = Mat::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| rng.gen_range(-lr..lr).exp()));
        let f = r1 * lam * r2;
        if in_compact_set(&f, radius) {
            return f;
        }
    }
}

pub fn in_compact_set(f: &Mat, radius: f64) -> bool {
    let j = det(f);
    j >= 1.0 / radius && frobenius(f) <= radius && inverse(f).is_some_and(|fi| frobenius(&fi) <= radius)
}

fn sample_concentration<R: Rng + ?Sized>(plan: &SamplingPlan, rng: &mut R) -> f64 {
    rng.gen_range(plan.c_lo.ln()..plan.c_hi.ln()).exp()
}

fn sample_tensor3<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Tensor3 {
    Tensor3::from_vec(d, (0..d * d * d).map(|_| scale * rng.gen_range(-1.0..1.0)).collect())
}

fn sample_matrix<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Mat {
    Mat::from_fn(d, d, |_, _| scale * rng.gen_range(-1.0..1.0))
}

/// Tracks the extreme of a sampled quantity along with where it occurred.
struct Extreme {
    value: f64,
    at: Option<WorstCase>,
    maximize: bool,
}

impl Extreme {
    fn max() -> Self {
        Extreme {
            value: f64::NEG_INFINITY,
            at: None,
            maximize: true,
        }
    }
    fn min() -> Self {
        Extreme {
            value: f64::INFINITY,
            at: None,
            maximize: false,
        }
    }
    fn offer(&mut self, v: f64, f: &Mat, c: Option<f64>) {
        let better = if v.is_nan() {
            true
        } else if self.maximize {
            v > self.value
        } else {
            v < self.value
        };
        if better && !self.value.is_nan() {
            self.value = v;
            self.at = Some(WorstCase::new(f, c, v));
        }
    }
}

fn record(
    clause: Clause,
    check: &str,
    passed: bool,
    worst: Option<WorstCase>,
    measured: &[(&str, f64)],
    detail: impl Into<String>,
) -> ClauseRecord {
    ClauseRecord {
        clause,
        check: check.to_owned(),
        passed,
        worst_case: worst,
        measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        detail: detail.into(),
    }
}

pub fn validate_assumptions(laws: LawSet<'_>, plan: &SamplingPlan) -> AssumptionReport {
    let mut report = AssumptionReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    audit_hyperstress(laws.hyper, plan, &mut rng, &mut report);
    audit_mobility(laws.mobility, plan, &mut rng, &mut report);
    audit_free_energy(laws.material, plan, &mut rng, &mut report);
    audit_viscosity(laws.visc, plan, &mut rng, &mut report);

    let profile = ExponentProfile::assemble(
        laws.material.exponents(),
        laws.hyper.exponent(),
        laws.mobility.exponent(),
    );
    let violations = profile.violations(plan.dim);
    report.push(record(
        Clause::ConvexityWindow,
        "exponents/admissible-windows",
        violations.is_empty(),
        None,
        &[
            ("p", profile.p),
            ("m", profile.m),
            ("r", profile.r),
            ("alpha", profile.alpha),
        ],
        violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
    ));

    if let Some(b) = &plan.boundary {
        let nonneg = b.kappa.iter().all(|k| *k >= 0.0 && k.is_finite());
        let total: f64 = b.kappa.iter().zip(&b.measure).map(|(k, s)| k * s).sum();
        let passed = nonneg && (!b.exchange_enabled || total > 0.0);
        report.push(record(
            Clause::Permeability,
            "permeability/positive-part",
            passed,
            None,
            &[("kappa_total", total)],
            if passed {
                String::new()
            } else if !nonneg {
                "permeability must be nonnegative".into()
            } else {
                "exchange enabled but the permeability integrates to zero".into()
            },
        ));
    }
    if let Some(init) = &plan.initial {
        let passed = init.min_det > 0.0 && init.min_concentration >= 0.0 && init.energy.is_finite();
        report.push(record(
            Clause::InitialData,
            "initial/admissible",
            passed,
            None,
            &[
                ("min_det", init.min_det),
                ("min_concentration", init.min_concentration),
                ("energy", init.energy),
            ],
            "",
        ));
    }
    report
}

fn audit_hyperstress(h: &dyn Hyperstress, plan: &SamplingPlan, rng: &mut ChaCha8Rng, report: &mut AssumptionReport) {
    let d = plan.dim;
    let p = h.exponent();
    let id = identity(d);

    // Midpoint convexity along random segments.
    let mut worst = Extreme::max();
    for _ in 0..plan.samples {
        let a = sample_tensor3(d, 2.0, rng);
        let b = sample_tensor3(d, 2.0, rng);
        let mid = a.axpy(1.0, &b).scale(0.5);
        let gap = h.h_pot(&mid) - 0.5 * (h.h_pot(&a) + h.h_pot(&b));
        let scale = 1.0 + h.h_pot(&a).abs() + h.h_pot(&b).abs();
        worst.offer(gap / scale, &id, None);
    }
    report.push(record(
        Clause::Hyperstress,
        "hyperstress/convexity",
        worst.value <= INVARIANCE_TOL,
        worst.at,
        &[("max_midpoint_gap", worst.value)],
        "",
    ));

    let mut worst = Extreme::max();
    for _ in 0..plan.rotations {
        let g = sample_tensor3(d, 1.5, rng);
        let r = rotation(d, rng);
        let (a, b) = (h.h_pot(&g), h.h_pot(&g.rotate(&r)));
        worst.offer((a - b).abs() / (1.0 + a.abs()), &r, None);
    }
    report.push(record(
        Clause::Hyperstress,
        "hyperstress/frame-indifference",
        worst.value <= INVARIANCE_TOL,
        worst.at,
        &[("max_relative_change", worst.value)],
        "",
    ));

    let (mut c1, mut c2, mut c3) = (Extreme::min(), Extreme::max(), Extreme::max());
    for _ in 0..plan.samples {
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        let g = sample_tensor3(d, scale, rng);
        let n = g.norm();
        if n == 0.0 {
            continue;
        }
        let pot = h.h_pot(&g);
        c1.offer(pot / n.powf(p), &id, None);
        c2.offer(pot / (1.0 + n.powf(p)), &id, None);
        c3.offer(h.h_stress(&g).norm() / n.powf(p - 1.0), &id, None);
    }
    let passed = c1.value > 0.0 && c2.value.is_finite() && c3.value.is_finite();
    report.push(record(
        Clause::Hyperstress,
        "hyperstress/p-growth",
        passed,
        c1.at,
        &[("C_H1", c1.value), ("C_H2", c2.value), ("C_H3", c3.value), ("p", p)],
        "",
    ));

    let mut worst = Extreme::max();
    for _ in 0..plan.samples.min(50) {
        let g = sample_tensor3(d, 1.0, rng);
        let stress = h.h_stress(&g);
        let mut err: f64 = 0.0;
        for idx in 0..g.as_slice().len() {
            let x = g.as_slice()[idx];
            let fd = central_difference(
                |t| {
                    let mut v = g.as_slice().to_vec();
                    v[idx] = t;
                    h.h_pot(&Tensor3::from_vec(d, v))
                },
                x,
                default_step(x),
            );
            err = err.max((fd - stress.as_slice()[idx]).abs());
        }
        worst.offer(err / stress.norm().max(1.0), &id, None);
    }
    report.push(record(
        Clause::DerivativeConsistency,
        "hyperstress/derivative",
        worst.value <= DERIVATIVE_TOL,
        worst.at,
        &[("max_relative_error", worst.value)],
        "",
    ));
}

fn audit_mobility(mob: &dyn Mobility, plan: &SamplingPlan, rng: &mut ChaCha8Rng, report: &mut AssumptionReport) {
    let d = plan.dim;
    let m = mob.exponent();
    let mut asym = Extreme::max();
    let mut finite = true;
    let (mut c0, mut c1) = (Extreme::min(), Extreme::max());
    for _ in 0..plan.samples {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        let c = sample_concentration(plan, rng);
        let mm = match mob.lagrangian(&f, c) {
            Ok(mm) => mm,
            Err(_) => {
                finite = false;
                continue;
            }
        };
        if mm.iter().any(|v| !v.is_finite()) {
            finite = false;
        }
        let norm = frobenius(&mm);
        asym.offer(
            frobenius(&(&mm - mm.transpose())) / norm.max(f64::MIN_POSITIVE),
            &f,
            Some(c),
        );
        let xi = nalgebra::DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let quad = (xi.transpose() * &mm * &xi)[(0, 0)];
        c0.offer(quad / (c.powf(m) * xi.norm_squared()), &f, Some(c));
        c1.offer(norm / c.powf(m), &f, Some(c));
    }
    report.push(record(
        Clause::Mobility,
        "mobility/symmetry",
        finite && asym.value <= INVARIANCE_TOL,
        asym.at,
        &[("max_relative_asymmetry", asym.value)],
        if finite {
            ""
        } else {
            "non-finite mobility on admissible inputs"
        },
    ));
    report.push(record(
        Clause::Mobility,
        "mobility/degeneracy-bounds",
        finite && c0.value > 0.0 && c1.value.is_finite(),
        c0.at,
        &[("C_M0", c0.value), ("C_M1", c1.value), ("m", m)],
        "",
    ));

    let mut worst = Extreme::max();
    for _ in 0..plan.samples.min(50) {
        let c = sample_concentration(plan, rng);
        let id = identity(d);
        let diff = match mob.lagrangian(&id, c) {
            Ok(l) => frobenius(&(l - mob.eulerian(&id, c))) / (1.0 + frobenius(&mob.eulerian(&id, c))),
            Err(_) => f64::INFINITY,
        };
        worst.offer(diff, &id, Some(c));
    }
    report.push(record(
        Clause::Mobility,
        "mobility/pullback-identity",
        worst.value <= INVARIANCE_TOL,
        worst.at,
        &[("max_relative_difference", worst.value)],
        "",
    ));
}

fn audit_free_energy(mat: &dyn FreeEnergy, plan: &SamplingPlan, rng: &mut ChaCha8Rng, report: &mut AssumptionReport) {
    let d = plan.dim;
    let ex = mat.exponents();

    let mut worst = Extreme::max();
    for _ in 0..plan.rotations {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        let c = sample_concentration(plan, rng);
        let r = rotation(d, rng);
        let (a, b) = (mat.phi(&f, c), mat.phi(&(&r * &f), c));
        worst.offer((a - b).abs() / (1.0 + a.abs()), &f, Some(c));
    }
    report.push(record(
        Clause::FrameIndifference,
        "free-energy/frame-indifference",
        worst.value <= INVARIANCE_TOL,
        worst.at,
        &[("max_relative_change", worst.value)],
        "",
    ));

    // Coercivity holds on all of GL⁺(d), so sample well outside 𝖥_R too.
    let (k0, k1) = mat.lower_bound_constants(d);
    let mut worst = Extreme::min();
    for _ in 0..plan.samples {
        let f = sample_admissible_deformation(d, 4.0 * plan.radius, rng);
        let c = if rng.gen_bool(0.1) {
            0.0
        } else {
            sample_concentration(plan, rng)
        };
        let bound = k0 * frobenius(&f) + k0 * det(&f).powf(-ex.q) - k1;
        let phi = mat.phi(&f, c);
        worst.offer((phi - bound) / (1.0 + phi.abs()), &f, Some(c));
    }
    report.push(record(
        Clause::Coercivity,
        "free-energy/coercivity",
        worst.value >= -INVARIANCE_TOL,
        worst.at,
        &[("C_phi0", k0), ("C_phi1", k1), ("min_relative_margin", worst.value)],
        "",
    ));

    let (mut lower, mut upper) = (Extreme::min(), Extreme::max());
    for _ in 0..plan.samples {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        let c = sample_concentration(plan, rng);
        let h = mat.d2phi_dcc(&f, c);
        lower.offer(c * (h - ex.gamma1 * c.powf(ex.r)), &f, Some(c));
        upper.offer(c * (h - ex.gamma2 * c.powf(ex.r)), &f, Some(c));
    }
    report.push(record(
        Clause::ConvexityWindow,
        "free-energy/convexity-window",
        lower.value > 0.0 && upper.value.is_finite(),
        lower.at,
        &[
            ("C_phi1", lower.value),
            ("C_phi3", upper.value),
            ("gamma1", ex.gamma1),
            ("gamma2", ex.gamma2),
            ("r", ex.r),
        ],
        "",
    ));

    let mut worst = Extreme::max();
    for _ in 0..plan.samples {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        let c = sample_concentration(plan, rng);
        worst.offer(frobenius(&mat.d2phi_dfc(&f, c)) / c.powf(ex.alpha), &f, Some(c));
    }
    report.push(record(
        Clause::CrossDerivative,
        "free-energy/cross-derivative-bound",
        worst.value.is_finite(),
        worst.at,
        &[("C_phi5", worst.value), ("alpha", ex.alpha)],
        "",
    ));

    let c_ref = mat.reference_concentration();
    let mut finite = true;
    for _ in 0..plan.samples.min(50) {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        finite &= mat.phi(&f, c_ref).is_finite() && mat.dphi_dc(&f, c_ref).is_finite();
    }
    report.push(record(
        Clause::FiniteReferenceState,
        "free-energy/finite-reference-state",
        finite,
        None,
        &[("c_ref", c_ref)],
        "",
    ));

    let mut worst = Extreme::max();
    for _ in 0..plan.samples {
        let f = sample_admissible_deformation(d, plan.radius.min(2.0), rng);
        let c = rng.gen_range(0.05f64.ln()..5f64.ln()).exp();
        let err = free_energy_derivative_error(mat, &f, c);
        worst.offer(err, &f, Some(c));
    }
    report.push(record(
        Clause::DerivativeConsistency,
        "free-energy/derivatives",
        worst.value <= DERIVATIVE_TOL,
        worst.at,
        &[("max_relative_error", worst.value)],
        "",
    ));
}

/// Largest relative discrepancy between the analytic derivatives of `Φ` and
/// central differences: first derivatives from `Φ`, second derivatives from
/// the analytic first derivatives.
pub fn free_energy_derivative_error(mat: &dyn FreeEnergy, f: &Mat, c: f64) -> f64 {
    let d = f.nrows();
    let hc = default_step(c).min(0.2 * c);
    let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale.max(1.0);

    let stress = mat.dphi_df(f, c);
    let cross = mat.d2phi_dfc(f, c);
    let mut err: f64 = 0.0;
    let stress_scale = frobenius(&stress);
    for i in 0..d {
        for j in 0..d {
            let x = f[(i, j)];
            let fd = central_difference(
                |t| {
                    let mut g = f.clone();
                    g[(i, j)] = t;
                    mat.phi(&g, c)
                },
                x,
                default_step(x),
            );
            err = err.max(rel(stress[(i, j)], fd, stress_scale));
        }
    }
    let cross_fd = {
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = central_difference(|t| mat.dphi_df(f, t)[(i, j)], c, hc);
            }
        }
        m
    };
    err = err.max(frobenius(&(&cross - cross_fd)) / frobenius(&cross).max(1.0));

    let mu = mat.dphi_dc(f, c);
    let mu_fd = central_difference(|t| mat.phi(f, t), c, hc);
    err = err.max(rel(mu, mu_fd, mu.abs()));

    let h = mat.d2phi_dcc(f, c);
    let h_fd = central_difference(|t| mat.dphi_dc(f, t), c, hc);
    err.max(rel(h, h_fd, h.abs()))
}

fn audit_viscosity(
    visc: &dyn ViscousPotential,
    plan: &SamplingPlan,
    rng: &mut ChaCha8Rng,
    report: &mut AssumptionReport,
) {
    let d = plan.dim;
    let (mut lo, mut hi) = (Extreme::min(), Extreme::max());
    let mut nonneg = true;
    for _ in 0..plan.samples {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        let fdot = sample_matrix(d, 1.0, rng);
        let c = sample_concentration(plan, rng);
        let z = visc.zeta(&f, &fdot, c);
        nonneg &= z >= 0.0;
        let cdot = frobenius(&cauchy_green_rate(&f, &fdot));
        if cdot > 1e-8 {
            lo.offer(z / (cdot * cdot), &f, Some(c));
            hi.offer(z / (cdot * cdot), &f, Some(c));
        }
    }
    report.push(record(
        Clause::Viscosity,
        "viscosity/quadratic-bounds",
        nonneg && lo.value > 0.0 && hi.value.is_finite(),
        lo.at,
        &[("C_zeta1", lo.value), ("C_zeta2", hi.value)],
        "",
    ));

    // ζ(RF, ṘF + RḞ, c) = ζ(F, Ḟ, c) for rotation paths R(t) with Ṙ = W R.
    let mut worst = Extreme::max();
    for _ in 0..plan.rotations {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        let fdot = sample_matrix(d, 1.0, rng);
        let c = sample_concentration(plan, rng);
        let r = rotation(d, rng);
        let w = {
            let a = sample_matrix(d, 2.0, rng);
            (&a - a.transpose()) * 0.5
        };
        let rdot = &w * &r;
        let z0 = visc.zeta(&f, &fdot, c);
        let z1 = visc.zeta(&(&r * &f), &(&rdot * &f + &r * &fdot), c);
        worst.offer((z0 - z1).abs() / (1.0 + z0.abs()), &f, Some(c));
    }
    report.push(record(
        Clause::Viscosity,
        "viscosity/dynamic-frame-indifference",
        worst.value <= INVARIANCE_TOL,
        worst.at,
        &[("max_relative_change", worst.value)],
        "",
    ));

    let mut worst = Extreme::max();
    for _ in 0..plan.samples.min(50) {
        let f = sample_admissible_deformation(d, plan.radius, rng);
        let c = sample_concentration(plan, rng);
        let (a, b) = (sample_matrix(d, 1.0, rng), sample_matrix(d, 1.0, rng));
        let (s, t) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lhs = visc.dzeta_dfdot(&f, &(&a * s + &b * t), c);
        let rhs = visc.dzeta_dfdot(&f, &a, c) * s + visc.dzeta_dfdot(&f, &b, c) * t;
        worst.offer(frobenius(&(&lhs - &rhs)) / (1.0 + frobenius(&lhs)), &f, Some(c));

        let fdot = sample_matrix(d, 1.0, rng);
        let stress = visc.dzeta_dfdot(&f, &fdot, c);
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let x = fdot[(i, j)];
                let fd = central_difference(
                    |t| {
                        let mut g = fdot.clone();
                        g[(i, j)] = t;
                        visc.zeta(&f, &g, c)
                    },
                    x,
                    default_step(x),
                );
                err = err.max((fd - stress[(i, j)]).abs() / frobenius(&stress).max(1.0));
            }
        }
        if err > DERIVATIVE_TOL {
            worst.offer(f64::INFINITY, &f, Some(c));
        }
    }
    report.push(record(
        Clause::Viscosity,
        "viscosity/linear-stress",
        worst.value <= 1e-10,
        worst.at,
        &[("max_relative_nonlinearity", worst.value)],
        "",
    ));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::free_energy::{biot_material, BiotParams, NeoHookeanEntropy, NeoHookeanEntropyParams};
    use crate::laws::structural::{IsotropicViscosity, PowerHyperstress, PowerMobility};

    fn defaults() -> (
        crate::laws::BiotMaterial,
        PowerHyperstress,
        IsotropicViscosity,
        PowerMobility,
    ) {
        (
            biot_material(BiotParams::default()).unwrap(),
            PowerHyperstress::default(),
            IsotropicViscosity::default(),
            PowerMobility::default(),
        )
    }

    #[test]
    fn biot_defaults_pass_every_check() {
        let (m, h, v, mo) = defaults();
        for dim in [1, 2] {
            let plan = SamplingPlan {
                dim,
                ..Default::default()
            };
            let report = validate_assumptions(
                LawSet {
                    material: &m,
                    hyper: &h,
                    visc: &v,
                    mobility: &mo,
                },
                &plan,
            );
            let failed: Vec<_> = report.failures().map(|r| (&r.check, &r.measured, &r.detail)).collect();
            assert!(failed.is_empty(), "d = {dim}: {failed:#?}");
            let cz = report.get("viscosity/quadratic-bounds").unwrap().measured["C_zeta1"];
            assert!((cz - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn neo_hookean_entropy_passes_with_steeper_hyperstress() {
        let m = NeoHookeanEntropy::new(NeoHookeanEntropyParams::default()).unwrap();
        let h = PowerHyperstress::new(1e-3, 6.0).unwrap();
        let (v, mo) = (IsotropicViscosity::default(), PowerMobility::default());
        let plan = SamplingPlan {
            dim: 1,
            ..Default::default()
        };
        let report = validate_assumptions(
            LawSet {
                material: &m,
                hyper: &h,
                visc: &v,
                mobility: &mo,
            },
            &plan,
        );
        let failed: Vec<_> = report.failures().map(|r| (&r.check, &r.detail)).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }

    #[derive(Debug)]
    struct Skewed;
    impl Mobility for Skewed {
        fn eulerian(&self, f: &Mat, c: f64) -> Mat {
            let d = f.nrows();
            let mut m = identity(d) * c;
            if d > 1 {
                m[(0, 1)] = 0.5 * c;
            }
            m
        }
        fn exponent(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn nonsymmetric_mobility_fails_symmetry() {
        let (m, h, v, _) = defaults();
        let report = validate_assumptions(
            LawSet {
                material: &m,
                hyper: &h,
                visc: &v,
                mobility: &Skewed,
            },
            &SamplingPlan::default(),
        );
        assert!(!report.get("mobility/symmetry").unwrap().passed);
        assert!(report.get("viscosity/dynamic-frame-indifference").unwrap().passed);
    }

    #[derive(Debug)]
    struct RateSquared;
    impl ViscousPotential for RateSquared {
        fn zeta(&self, _f: &Mat, fdot: &Mat, _c: f64) -> f64 {
            crate::tensor::ddot(fdot, fdot)
        }
        fn dzeta_dfdot(&self, _f: &Mat, fdot: &Mat, _c: f64) -> Mat {
            fdot * 2.0
        }
    }

    #[test]
    fn rate_squared_viscosity_is_not_objective() {
        let (m, h, _, mo) = defaults();
        let report = validate_assumptions(
            LawSet {
                material: &m,
                hyper: &h,
                visc: &RateSquared,
                mobility: &mo,
            },
            &SamplingPlan::default(),
        );
        let rec = report.get("viscosity/dynamic-frame-indifference").unwrap();
        assert!(!rec.passed);
        assert!(rec.worst_case.is_some());
        assert!(report.get("mobility/symmetry").unwrap().passed);
    }

    #[test]
    fn sampled_deformations_lie_in_compact_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..=3 {
            for _ in 0..100 {
                let f = sample_admissible_deformation(d, 4.0, &mut rng);
                assert!(in_compact_set(&f, 4.0));
            }
        }
    }

    #[test]
    fn report_serializes_one_record_per_check() {
        let (m, h, v, mo) = defaults();
        let report = validate_assumptions(
            LawSet {
                material: &m,
                hyper: &h,
                visc: &v,
                mobility: &mo,
            },
            &SamplingPlan {
                samples: 20,
                rotations: 5,
                ..Default::default()
            },
        );
        let json = serde_json::to_value(&report).unwrap();
        let records = json["records"].as_array().unwrap();
        assert_eq!(records.len(), report.records.len());
        assert!(records
            .iter()
            .all(|r| r["clause"].is_string() && r["passed"].is_boolean()));
    }
}
