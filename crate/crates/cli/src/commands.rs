use std::fmt::Write as _;

use anyhow::bail;
use mollify_lab::commutator::{commutator_report, BoundInputs, CommutatorReport};
use mollify_lab::energy::{convergence_study, exact_stokes_shear, EnergyReport, TimeSeries, TimedExponents};
use mollify_lab::exponents::ExponentBundle;
use mollify_lab::field::{lp_norm, HolderMode};
use mollify_lab::lemma_lab::{
    check_admissibility, check_basic_properties, check_conv1p, check_conv20, check_conv2p, check_conv30,
    check_conv3p, BasicOptions, LabConfig, LemmaVerdict,
};
use mollify_lab::synth::{GeneratorSpec, PowerCutoff};
use mollify_lab::{HalfSpaceGrid, VectorField3};
use serde_json::json;

use crate::config::{default_curl, Common, CommutatorArgs, EnergyArgs, ExponentsArgs, LemmasArgs, RunConfig, SeriesKind};
use crate::report::{emit, emit_csv, Header, Report};

/// Probe offsets for the translated Hölder check.
const PROBES: [[isize; 3]; 4] = [[0, 0, 1], [1, 0, 0], [0, 1, 1], [1, 1, 1]];

fn config(
    command: &'static str,
    common: &Common,
    grid: &HalfSpaceGrid,
    steps: &[f64],
    field: Option<crate::config::FieldSource>,
    params: serde_json::Value,
) -> RunConfig {
    RunConfig {
        command,
        grid: [grid.n1(), grid.n2(), grid.n3()],
        h: grid.h(),
        eps_steps: steps.to_vec(),
        eps: steps.iter().map(|m| m * grid.h()).collect(),
        seed: common.seed,
        tol: common.tol,
        field,
        params,
    }
}

pub fn lemmas(args: &LemmasArgs) -> anyhow::Result<bool> {
    let c = &args.common;
    let default = GeneratorSpec::Power { alpha: args.alpha.unwrap_or(0.5), amplitude: 1.0, cutoff: PowerCutoff::default() };
    let (u, source) = c.load_field(default)?;
    let alpha = match (args.alpha, &source) {
        (Some(a), _) => a,
        (None, crate::config::FieldSource::Generated { spec }) => spec.alpha().unwrap_or(0.5),
        (None, _) => 0.5,
    };
    let grid = *u.grid();
    let steps = c.eps_steps(&[8.0, 4.0, 2.0])?;
    let eps: Vec<f64> = steps.iter().map(|m| m * grid.h()).collect();
    let smallest = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let cfg = LabConfig { tol: c.tol, holder_mode: HolderMode::Lines };

    let mut verdicts = vec![
        check_conv20(&u, alpha, &eps, &cfg)?,
        check_conv30(&u, alpha, &eps, &cfg)?,
        check_conv1p(&u, alpha, smallest, &PROBES, &cfg)?,
        check_conv2p(&u, alpha, &eps, &cfg)?,
        check_conv3p(&u, alpha, &eps, &cfg)?,
    ];
    verdicts.extend(check_basic_properties(&u, &eps, &BasicOptions { r_list: vec![2.0, 4.0], smooth: false })?);
    verdicts.push(check_admissibility(&u, smallest)?);
    let passed = verdicts.iter().all(|v| v.passed);
    emit_csv(&lemma_csv(&verdicts), c.emit_csv.as_deref())?;
    let header = Header::new(config("lemmas", c, &grid, &steps, Some(source), json!({ "alpha": alpha })));
    emit(&Report { header, passed, results: verdicts }, c.out.as_deref())?;
    Ok(passed)
}

fn lemma_csv(verdicts: &[LemmaVerdict]) -> String {
    let mut out = String::from("lemma,constant_measured,constant_theoretical,slope,outcome\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for v in verdicts {
        let outcome = if v.passed { "pass" } else { "fail" };
        let _ = writeln!(
            out,
            "{},{:e},{},{},{outcome}",
            v.lemma,
            v.constant_measured,
            opt(v.constant_theoretical),
            opt(v.slope)
        );
    }
    out
}

pub fn commutator(args: &CommutatorArgs) -> anyhow::Result<bool> {
    let c = &args.common;
    let (v, source) = c.load_field(default_curl(c.seed))?;
    let grid = *v.grid();
    let steps = c.eps_steps(&[4.0, 2.0])?;
    let eps: Vec<f64> = steps.iter().map(|m| m * grid.h()).collect();
    let v0 = lp_norm(&v, 2.0)?;
    let inputs = BoundInputs::measure(&v, args.alpha, v0, HolderMode::Lines)?;
    let rows = commutator_report(&v, &eps, &inputs, c.tol)?;
    let passed = rows.iter().all(|r| r.passed);
    emit_csv(&commutator_csv(&rows), c.emit_csv.as_deref())?;
    let header =
        Header::new(config("commutator", c, &grid, &steps, Some(source), json!({ "alpha": args.alpha, "v0_l2": v0 })));
    emit(&Report { header, passed, results: json!({ "inputs": inputs, "rows": rows }) }, c.out.as_deref())?;
    Ok(passed)
}

fn commutator_csv(rows: &[CommutatorReport]) -> String {
    let mut out = String::from("epsilon,j1,j2,j3,sum,direct,residual,b1,b2,b3,passed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            r.epsilon, r.j1, r.j2, r.j3, r.sum, r.direct, r.residual, r.bounds.b1, r.bounds.b2, r.bounds.b3, r.passed
        );
    }
    out
}

pub fn energy(args: &EnergyArgs) -> anyhow::Result<bool> {
    let c = &args.common;
    if c.field.is_some() {
        bail!("energy works on a generated time series; --field is not accepted");
    }
    if !(args.nu >= 0.0) {
        bail!("--nu must be nonnegative");
    }
    if args.steps < 2 || !(args.t_end > 0.0) {
        bail!("need --steps ≥ 2 and --t-end > 0");
    }
    let grid = c.grid()?;
    // Coarser scales than a sixth of the box are pre-asymptotic for the shear.
    let ladder: Vec<f64> =
        [8.0, 4.0, 2.0].into_iter().filter(|m| m * grid.h() <= grid.height() / 6.0).collect();
    let steps = c.eps_steps(&ladder)?;
    let eps: Vec<f64> = steps.iter().map(|m| m * grid.h()).collect();
    let pad = steps.iter().copied().fold(1.0, f64::max).ceil() as usize;
    let dt = args.t_end / args.steps as f64;
    let series = match args.series {
        SeriesKind::Shear => exact_stokes_shear(1.0, 1, args.nu, grid, (0.0, dt, args.steps), pad)?,
        SeriesKind::Zero => {
            let zero = |_: f64| Ok(VectorField3::zeros(grid));
            TimeSeries::from_fn(0.0, dt, args.steps, zero, Some(&zero))?
        }
    };
    let exponents = match (args.alpha, args.beta) {
        (Some(alpha), Some(beta)) => {
            let bundle = ExponentBundle::new(alpha, beta, args.q)?;
            Some(TimedExponents { alpha, beta, q: bundle.q })
        }
        (None, None) if args.q.is_none() => None,
        _ => bail!("--alpha and --beta must be given together (with optional --q)"),
    };
    let report = convergence_study(&series, args.nu, &eps, exponents, c.tol)?;
    let passed = energy_passed(&report);
    emit_csv(&report.to_csv(), c.emit_csv.as_deref())?;
    let params = json!({
        "nu": args.nu, "series": args.series, "steps": args.steps, "t_end": args.t_end,
        "pad": pad, "exponents": exponents,
    });
    let header = Header::new(config("energy", c, &grid, &steps, None, params));
    emit(&Report { header, passed, results: report }, c.out.as_deref())?;
    Ok(passed)
}

/// The structural checks, plus a residual that does not grow as `ε` shrinks.
fn energy_passed(r: &EnergyReport) -> bool {
    let residual_shrinks = r.rows.windows(2).all(|w| w[1].residual.abs() <= w[0].residual.abs() * 1.05 + 1e-14);
    r.rearrangement_ok && r.i2_bounded && r.viscous_limit_monotone && residual_shrinks
}

pub fn exponents(args: &ExponentsArgs) -> anyhow::Result<bool> {
    let bundle = ExponentBundle::new(args.alpha, args.beta, args.q)?;
    let text = serde_json::to_string_pretty(&json!({
        "tool": "mollify-lab",
        "version": mollify_lab::VERSION,
        "exponents": bundle,
    }))?;
    crate::report::write_text(&text, args.out.as_deref())?;
    Ok(true)
}
