//! Energy audit of a time series of velocity snapshots.
//!
//! Tests the smoothed weak formulation with `S_ε v` and integrates in time
//! with the trapezoid rule:
//!
//! ```text
//! ∫∫ (dv/dt)_ε · S_ε v  +  ν ∫∫ ∇v_ε : ∇S_ε v  −  ∫∫ (v⊗v)_ε : ∇S_ε v  =  residual
//! ```
//!
//! For an exact solution the residual is discretization error only. The
//! time-derivative term is split into the kinetic part
//! `I¹ = ∫∫ (dv/dt)_ε · v_ε` and the mismatch `I² = ∫∫ (dv/dt)_ε · (S_ε v − v_ε)`,
//! and the global energy equality is checked on the unsmoothed series.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exponents::{est_eps_margin, r_of_q, s_of_q};
use crate::field::{
    dirichlet_energy, holder_seminorm, l2_inner, lp_norm, tensor_inner, HalfSpaceGrid, HolderMode, ScalarField,
    TensorField, VectorField3,
};
use crate::lemma_lab::fit_rate;
use crate::mollifier::{conv_translate_with, grad_conv_translate_with, grad_mollify_with, mollify_with, MollifierKernel, Scale};
use crate::sum::trapezoid;
use crate::synth::sine_profile;

/// Snapshots `v(t₀ + jΔt)`, `j = 0..=M`, on a shared grid.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    grid: HalfSpaceGrid,
    t0: f64,
    dt: f64,
    snapshots: Vec<VectorField3>,
    derivatives: Option<Vec<VectorField3>>,
}

impl TimeSeries {
    pub fn new(
        t0: f64,
        dt: f64,
        snapshots: Vec<VectorField3>,
        derivatives: Option<Vec<VectorField3>>,
    ) -> Result<Self> {
        let first = snapshots.first().ok_or_else(|| invalid("empty time series"))?;
        let grid = *first.grid();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step {dt} is not positive")));
        }
        for s in snapshots.iter().chain(derivatives.iter().flatten()) {
            grid.ensure_same(s.grid())?;
        }
        match &derivatives {
            Some(d) if d.len() != snapshots.len() => {
                return Err(invalid("derivative snapshots do not match the field snapshots"));
            }
            None if snapshots.len() < 3 => {
                return Err(invalid("a series without derivatives needs at least three snapshots"));
            }
            _ => {}
        }
        Ok(Self { grid, t0, dt, snapshots, derivatives })
    }

    /// The same series sampled from `f(t)`, with optional analytic `∂_t f`.
    pub fn from_fn(
        t0: f64,
        dt: f64,
        steps: usize,
        f: impl Fn(f64) -> Result<VectorField3> + Sync,
        df: Option<&(dyn Fn(f64) -> Result<VectorField3> + Sync)>,
    ) -> Result<Self> {
        let times: Vec<f64> = (0..=steps).map(|j| t0 + j as f64 * dt).collect();
        let snapshots = times.par_iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        let derivatives = match df {
            Some(df) => Some(times.par_iter().map(|&t| df(t)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Self::new(t0, dt, snapshots, derivatives)
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn snapshot(&self, j: usize) -> &VectorField3 {
        &self.snapshots[j]
    }

    pub fn snapshots(&self) -> &[VectorField3] {
        &self.snapshots
    }

    pub fn has_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    /// Drops the analytic derivatives, so [`dt_field`] falls back to
    /// differences.
    pub fn without_derivatives(mut self) -> Result<Self> {
        self.derivatives = None;
        Self::new(self.t0, self.dt, self.snapshots, None)
    }

    /// `e^{−rate·(t − t₀)} v(t)`, with derivatives adjusted when present.
    pub fn damped(&self, rate: f64) -> Self {
        let factor = |j: usize| (-rate * (self.time(j) - self.t0)).exp();
        let snapshots: Vec<VectorField3> = self.snapshots.iter().enumerate().map(|(j, s)| s.scale(factor(j))).collect();
        let derivatives = self.derivatives.as_ref().map(|d| {
            d.iter()
                .enumerate()
                .map(|(j, dv)| dv.scale(factor(j)).sub(&self.snapshots[j].scale(rate * factor(j))).expect("same grid"))
                .collect()
        });
        Self { grid: self.grid, t0: self.t0, dt: self.dt, snapshots, derivatives }
    }

    /// Smallest support margin over all snapshots (and derivatives).
    pub fn support_margin(&self) -> usize {
        self.snapshots.iter().chain(self.derivatives.iter().flatten()).map(VectorField3::support_margin).min().unwrap_or(0)
    }

    fn check_index(&self, t_index: usize) -> Result<()> {
        if t_index == 0 || t_index >= self.len() {
            Err(invalid(format!("time index {t_index} outside 1..{}", self.len())))
        } else {
            Ok(())
        }
    }
}

/// `v(x, t) = (A e^{−νk²t} sin(k x3), 0, 0)` on the slab `[0, L3 − pad·h]`,
/// `k = mπ / (L3 − pad·h)`, zero above, with analytic `∂_t v = −νk² v`.
///
/// An exact Navier–Stokes solution with constant pressure: the convective
/// term vanishes for shears. The `pad` layers above the slab give smoothing
/// operators the support margin they need.
pub fn exact_stokes_shear(
    amplitude: f64,
    m: u32,
    nu: f64,
    grid: HalfSpaceGrid,
    times: (f64, f64, usize),
    pad: usize,
) -> Result<TimeSeries> {
    if m == 0 {
        return Err(invalid("wavenumber index m must be positive"));
    }
    if !(nu >= 0.0) {
        return Err(invalid("viscosity must be nonnegative"));
    }
    let (t0, dt, steps) = times;
    let profile = sine_profile(&grid, 1.0, m, pad)?;
    let shape = ScalarField::from_fn(grid, |x| profile(x[2]));
    let k = m as f64 * std::f64::consts::PI / (grid.height() - pad as f64 * grid.h());
    let decay = nu * k * k;
    let at = |c: f64| {
        VectorField3::new(shape.scale(c), ScalarField::zeros(grid), ScalarField::zeros(grid)).expect("same grid")
    };
    TimeSeries::from_fn(
        t0,
        dt,
        steps,
        |t| Ok(at(amplitude * (-decay * t).exp())),
        Some(&|t| Ok(at(-decay * amplitude * (-decay * t).exp()))),
    )
}

/// `dv/dt` at snapshot `j`: analytic if stored, otherwise the centered
/// difference, and the second-order one-sided difference at the ends.
pub fn dt_field(series: &TimeSeries, j: usize) -> Result<VectorField3> {
    if j >= series.len() {
        return Err(invalid(format!("snapshot {j} out of range")));
    }
    if let Some(d) = &series.derivatives {
        return Ok(d[j].clone());
    }
    let s = &series.snapshots;
    let m = s.len() - 1;
    let inv = 1.0 / (2.0 * series.dt);
    let combo = |terms: [(f64, &VectorField3); 3]| {
        let [(a, x), (b, y), (c, z)] = terms;
        x.scale(a * inv).add(&y.scale(b * inv))?.add(&z.scale(c * inv))
    };
    match j {
        0 => combo([(-3.0, &s[0]), (4.0, &s[1]), (-1.0, &s[2])]),
        j if j == m => combo([(3.0, &s[m]), (-4.0, &s[m - 1]), (1.0, &s[m - 2])]),
        j => combo([(1.0, &s[j + 1]), (-1.0, &s[j - 1]), (0.0, &s[j])]),
    }
}

/// Spatial integrands of one snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct SnapshotTerms {
    /// `(dv/dt)_ε · S_ε v`.
    dt: f64,
    /// `(dv/dt)_ε · v_ε`.
    dt_kinetic: f64,
    /// `∇v_ε : ∇S_ε v`.
    visc: f64,
    /// `(v⊗v)_ε : ∇S_ε v`.
    conv: f64,
    /// `‖v_ε‖²`.
    smoothed_energy: f64,
}

fn snapshot_terms(series: &TimeSeries, j: usize, scale: &Scale) -> Result<SnapshotTerms> {
    let v = series.snapshot(j);
    let dv = mollify_with(&dt_field(series, j)?, scale)?;
    let v_eps = mollify_with(v, scale)?;
    let s = conv_translate_with(v, scale)?;
    let grad_s = grad_conv_translate_with(v, scale)?;
    let grad_v_eps = grad_mollify_with(v, scale)?;
    let vv = mollify_with(&TensorField::outer(v, v)?, scale)?;
    Ok(SnapshotTerms {
        dt: l2_inner(&dv, &s)?,
        dt_kinetic: l2_inner(&dv, &v_eps)?,
        visc: tensor_inner(&grad_v_eps, &grad_s)?,
        conv: tensor_inner(&vv, &grad_s)?,
        smoothed_energy: l2_inner(&v_eps, &v_eps)?,
    })
}

fn all_terms(series: &TimeSeries, t_index: usize, scale: &Scale) -> Result<Vec<SnapshotTerms>> {
    (0..=t_index).into_par_iter().map(|j| snapshot_terms(series, j, scale)).collect()
}

/// One `ε` of the audit, integrated over `[t₀, t]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BalanceRow {
    pub epsilon: f64,
    pub term_dt: f64,
    /// `ν ∫∫ ∇v_ε : ∇S_ε v`.
    pub term_visc: f64,
    pub term_conv: f64,
    /// `term_dt + term_visc − term_conv`.
    pub residual: f64,
    /// `∫∫ (dv/dt)_ε · v_ε`; with `i2` it adds up to `term_dt`.
    pub i1: f64,
    /// `∫∫ (dv/dt)_ε · (S_ε v − v_ε)`.
    pub i2: f64,
    /// `½‖v_ε(t)‖² − ½‖v_ε(t₀)‖²`, the limit `i1` approximates.
    pub kinetic_jump: f64,
    /// Mismatch bound on `|i2|`, when exponents were supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i2_bound: Option<f64>,
}

fn row_from(epsilon: f64, nu: f64, dt: f64, terms: &[SnapshotTerms]) -> BalanceRow {
    let integrate = |f: fn(&SnapshotTerms) -> f64| trapezoid(&terms.iter().map(f).collect::<Vec<_>>(), dt);
    let term_dt = integrate(|t| t.dt);
    let term_visc = nu * integrate(|t| t.visc);
    let term_conv = integrate(|t| t.conv);
    let i1 = integrate(|t| t.dt_kinetic);
    let last = terms.last().expect("at least two snapshots");
    BalanceRow {
        epsilon,
        term_dt,
        term_visc,
        term_conv,
        residual: term_dt + term_visc - term_conv,
        i1,
        i2: term_dt - i1,
        kinetic_jump: 0.5 * (last.smoothed_energy - terms[0].smoothed_energy),
        i2_bound: None,
    }
}

/// The smoothed balance over `[t₀, t_{t_index}]`.
pub fn smoothed_balance(series: &TimeSeries, epsilon: f64, nu: f64, t_index: usize) -> Result<BalanceRow> {
    series.check_index(t_index)?;
    let scale = Scale::new(series.grid(), epsilon)?;
    Ok(row_from(epsilon, nu, series.dt, &all_terms(series, t_index, &scale)?))
}

/// `(I¹, I²)` over `[t₀, t_{t_index}]`; only the mollified time derivative,
/// `v_ε` and `S_ε v` are formed.
pub fn i_split(series: &TimeSeries, epsilon: f64, t_index: usize) -> Result<(f64, f64)> {
    series.check_index(t_index)?;
    let scale = Scale::new(series.grid(), epsilon)?;
    let pairs = (0..=t_index)
        .into_par_iter()
        .map(|j| {
            let v = series.snapshot(j);
            let dv = mollify_with(&dt_field(series, j)?, &scale)?;
            let v_eps = mollify_with(v, &scale)?;
            let mismatch = conv_translate_with(v, &scale)?.sub(&v_eps)?;
            Ok((l2_inner(&dv, &v_eps)?, l2_inner(&dv, &mismatch)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let i1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let i2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok((trapezoid(&i1, series.dt), trapezoid(&i2, series.dt)))
}

/// Exponent choice for the mismatch bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimedExponents {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
}

/// Parts of the mismatch bound `c ε^{margin} ‖dv/dt‖_{L^s L^r} ‖[v]‖_{L^β}^{2/q−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimedBound {
    pub epsilon: f64,
    pub margin: f64,
    pub r: f64,
    pub s: f64,
    pub constant: f64,
    pub dt_norm: f64,
    pub seminorm_norm: f64,
    pub value: f64,
}

/// Series norms entering the bound; they do not depend on `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimedNorms {
    /// `‖dv/dt‖_{L^s(L^r)}`.
    pub dt_norm: f64,
    /// `‖[v]_{0,α}‖_{L^β}`.
    pub seminorm_norm: f64,
    /// `sup_t ‖v(t)‖_{L²}`, standing in for `‖v₀‖` of the energy inequality.
    pub energy: f64,
}

pub fn timed_norms(series: &TimeSeries, t_index: usize, exps: &TimedExponents, mode: HolderMode) -> Result<TimedNorms> {
    series.check_index(t_index)?;
    let (s, _) = s_of_q(exps.q, exps.beta)?;
    let r = r_of_q(exps.q, exps.beta)?;
    let per = (0..=t_index)
        .into_par_iter()
        .map(|j| {
            let v = series.snapshot(j);
            Ok((
                lp_norm(&dt_field(series, j)?, r)?.powf(s),
                holder_seminorm(v, exps.alpha, mode)?.powf(exps.beta),
                lp_norm(v, 2.0)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64, f64)>>>()?;
    let col = |f: fn(&(f64, f64, f64)) -> f64| per.iter().map(f).collect::<Vec<_>>();
    Ok(TimedNorms {
        dt_norm: trapezoid(&col(|p| p.0), series.dt).powf(1.0 / s),
        seminorm_norm: trapezoid(&col(|p| p.1), series.dt).powf(1.0 / exps.beta),
        energy: col(|p| p.2).into_iter().fold(0.0, f64::max),
    })
}

/// The bound evaluated from precomputed norms. The constant collects
/// `‖ρ‖_{L^p}` with `p = 4/(2+β)` from Young's inequality, `(3^α+1)^{2/q−1}`
/// from the pointwise estimates and `(2‖v₀‖)^{2−2/q}` from the `L²` factor.
pub fn timed_bound_from(norms: &TimedNorms, epsilon: f64, exps: &TimedExponents) -> Result<TimedBound> {
    let TimedExponents { alpha, beta, q } = *exps;
    let margin = est_eps_margin(alpha, q, beta)?;
    let (s, _) = s_of_q(q, beta)?;
    let r = r_of_q(q, beta)?;
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let p = 4.0 / (2.0 + beta);
    let constant = MollifierKernel::standard().lp_norm(p)
        * (3f64.powf(alpha) + 1.0).powf(2.0 / q - 1.0)
        * (2.0 * norms.energy).powf(2.0 - 2.0 / q);
    let value = constant * epsilon.powf(margin) * norms.dt_norm * norms.seminorm_norm.powf(2.0 / q - 1.0);
    Ok(TimedBound {
        epsilon,
        margin,
        r,
        s,
        constant,
        dt_norm: norms.dt_norm,
        seminorm_norm: norms.seminorm_norm,
        value,
    })
}

pub fn timed_term_bound(series: &TimeSeries, epsilon: f64, exps: &TimedExponents) -> Result<TimedBound> {
    let norms = timed_norms(series, series.len() - 1, exps, HolderMode::Lines)?;
    timed_bound_from(&norms, epsilon, exps)
}

/// `½‖v(t)‖² + ν ∫₀ᵗ ‖∇v‖² − ½‖v(0)‖²`. Negative values are a dissipation
/// defect.
pub fn energy_equality_residual(series: &TimeSeries, nu: f64, t_index: usize) -> Result<f64> {
    Ok(energy_limit(series, nu, t_index)?.equality_residual)
}

/// Both sides of the global energy equality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    /// `½‖v(t)‖² + ν ∫ ‖∇v‖²`.
    pub energy_lhs: f64,
    /// `½‖v(t₀)‖²`.
    pub energy_rhs: f64,
    pub equality_residual: f64,
    /// `ν ∫ ‖∇v‖²`, the limit of `term_visc`.
    pub dissipation: f64,
    /// `½‖v(t)‖² − ½‖v(t₀)‖²`, the limit of `i1`.
    pub kinetic_jump: f64,
}

fn energy_limit(series: &TimeSeries, nu: f64, t_index: usize) -> Result<LimitRow> {
    series.check_index(t_index)?;
    let grads: Vec<f64> = (0..=t_index).into_par_iter().map(|j| dirichlet_energy(series.snapshot(j))).collect();
    let dissipation = nu * trapezoid(&grads, series.dt);
    let e = |j: usize| -> Result<f64> { Ok(0.5 * lp_norm(series.snapshot(j), 2.0)?.powi(2)) };
    let (end, start) = (e(t_index)?, e(0)?);
    Ok(LimitRow {
        energy_lhs: end + dissipation,
        energy_rhs: start,
        equality_residual: end + dissipation - start,
        dissipation,
        kinetic_jump: end - start,
    })
}

/// Full audit over a ladder of `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub nu: f64,
    pub t_end: f64,
    /// Sorted by decreasing `ε`.
    pub rows: Vec<BalanceRow>,
    pub limit: LimitRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<TimedExponents>,
    /// Fitted `ε`-slope of `|i2|`, when defined.
    pub i2_slope: Option<f64>,
    /// Fitted `ε`-slope of `|term_conv|`, when defined.
    pub conv_slope: Option<f64>,
    /// `|term_visc − ν∫‖∇v‖²|` decreases along the ladder (5% slack).
    pub viscous_limit_monotone: bool,
    /// `|i2| ≤ bound·(1 + tol)` on every row (vacuously true without exponents).
    pub i2_bounded: bool,
    /// `|i1 + i2 − term_dt| ≤ 1e−10` relative on every row.
    pub rearrangement_ok: bool,
}

impl EnergyReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per `ε`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,term_dt,term_visc,term_conv,residual,i1,i2,kinetic_jump,i2_bound\n");
        for r in &self.rows {
            let bound = r.i2_bound.map(|b| format!("{b:e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                r.epsilon, r.term_dt, r.term_visc, r.term_conv, r.residual, r.i1, r.i2, r.kinetic_jump, bound
            );
        }
        out
    }
}

fn slope(rows: &[BalanceRow], value: fn(&BalanceRow) -> f64) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon, value(r).abs())).collect();
    fit_rate(&pairs).ok().map(|r| r.slope)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Runs the balance for every `ε` up to the last snapshot and compares it
/// with the unsmoothed energy equality.
pub fn convergence_study(
    series: &TimeSeries,
    nu: f64,
    eps_list: &[f64],
    exponents: Option<TimedExponents>,
    tol: f64,
) -> Result<EnergyReport> {
    if eps_list.is_empty() {
        return Err(invalid("empty epsilon list"));
    }
    let t_index = series.len() - 1;
    let mut eps = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let norms = match &exponents {
        Some(x) => Some(timed_norms(series, t_index, x, HolderMode::Lines)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(eps.len());
    for &e in &eps {
        let mut row = smoothed_balance(series, e, nu, t_index)?;
        if let (Some(x), Some(n)) = (&exponents, &norms) {
            row.i2_bound = Some(timed_bound_from(n, e, x)?.value);
        }
        rows.push(row);
    }
    let limit = energy_limit(series, nu, t_index)?;
    let visc_err: Vec<f64> = rows.iter().map(|r| (r.term_visc - limit.dissipation).abs()).collect();
    let i2_bounded = rows.iter().all(|r| r.i2_bound.is_none_or(|b| r.i2.abs() <= b * (1.0 + tol)));
    let rearrangement_ok = rows.iter().all(|r| rel_close(r.i1 + r.i2, r.term_dt, 1e-10));
    Ok(EnergyReport {
        nu,
        t_end: series.time(t_index),
        i2_slope: slope(&rows, |r| r.i2),
        conv_slope: slope(&rows, |r| r.term_conv),
        viscous_limit_monotone: visc_err.windows(2).all(|w| w[1] <= 1.05 * w[0]),
        i2_bounded,
        rearrangement_ok,
        rows,
        limit,
        exponents,
    })
}
