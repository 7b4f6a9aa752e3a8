//! Executable versions of the mollifier estimates: each check measures the
//! constant in an inequality on a concrete field and compares it with the
//! sharp constant (plus a quadrature slack `tol`).

mod rate;

pub use rate::{fit_rate, fit_rate_asymptotic, RateReport};

use serde::Serialize;

use crate::conv::Offset;
use crate::error::{invalid, Result};
use crate::field::{
    divergence, holder_seminorm, jacobian, lp_norm, max_abs, maximal_function, HolderMode, ScalarField,
    TensorField, VectorField3,
};
use crate::mollifier::{
    conv_translate_with, double_smooth, grad_conv_translate_with, grad_mollify_with, mollify_with, translate,
    MollifierKernel, Scale,
};

/// Tolerances and seminorm strategy shared by all checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LabConfig {
    /// Relative slack on theoretical constants.
    pub tol: f64,
    pub holder_mode: HolderMode,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self { tol: 0.1, holder_mode: HolderMode::Lines }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// The inequality holds trivially (zero field or zero seminorm).
    Vacuous,
}

/// Result of one executable estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaVerdict {
    pub lemma: String,
    pub constant_measured: f64,
    pub constant_theoretical: Option<f64>,
    /// `theoretical·(1 + tol) − measured`, when a theoretical value exists.
    pub margin: Option<f64>,
    pub slope: Option<f64>,
    pub eps_list: Vec<f64>,
    /// The measured ratio at each `ε` (or probe).
    pub per_eps: Vec<f64>,
    pub outcome: Outcome,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LemmaVerdict {
    fn vacuous(lemma: &str, eps_list: &[f64], note: &str) -> Self {
        Self {
            lemma: lemma.into(),
            constant_measured: 0.0,
            constant_theoretical: None,
            margin: None,
            slope: None,
            eps_list: eps_list.to_vec(),
            per_eps: vec![],
            outcome: Outcome::Vacuous,
            passed: true,
            note: Some(note.into()),
        }
    }

    fn bounded(lemma: &str, eps_list: &[f64], per_eps: Vec<f64>, theoretical: f64, tol: f64) -> Self {
        let measured = per_eps.iter().copied().fold(0.0, f64::max);
        let passed = measured <= theoretical * (1.0 + tol);
        Self {
            lemma: lemma.into(),
            constant_measured: measured,
            constant_theoretical: Some(theoretical),
            margin: Some(theoretical * (1.0 + tol) - measured),
            slope: None,
            eps_list: eps_list.to_vec(),
            per_eps,
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            passed,
            note: None,
        }
    }

    /// A constant without a theoretical value, judged by `passed`.
    fn judged(lemma: &str, eps_list: &[f64], per_eps: Vec<f64>, measured: f64, passed: bool) -> Self {
        Self {
            lemma: lemma.into(),
            constant_measured: measured,
            constant_theoretical: None,
            margin: None,
            slope: None,
            eps_list: eps_list.to_vec(),
            per_eps,
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            passed,
            note: None,
        }
    }

    fn fail_unless(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.passed = false;
            self.outcome = Outcome::Fail;
            self.note = Some(why.into());
        }
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Verdicts as a JSON array.
pub fn report_json(verdicts: &[LemmaVerdict]) -> Result<String> {
    Ok(serde_json::to_string_pretty(verdicts)?)
}

fn sorted_scales(u: &VectorField3, eps_list: &[f64]) -> Result<(Vec<f64>, Vec<Scale>)> {
    if eps_list.is_empty() {
        return Err(invalid("empty epsilon list"));
    }
    let mut eps = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let scales = eps.iter().map(|&e| Scale::new(u.grid(), e)).collect::<Result<Vec<_>>>()?;
    Ok((eps, scales))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha = {alpha} outside (0, 1]")))
    }
}

fn require_zero_trace(u: &VectorField3) -> Result<()> {
    let g = u.grid();
    let layer = g.layer_len();
    if u.comps().iter().all(|c| c.values()[..layer].iter().all(|&v| v == 0.0)) {
        Ok(())
    } else {
        Err(invalid("field does not vanish on the boundary plane"))
    }
}

fn is_zero(u: &VectorField3) -> bool {
    u.comps().iter().all(ScalarField::is_zero)
}

/// Seminorm, or `None` when it vanishes.
fn seminorm(u: &VectorField3, alpha: f64, cfg: &LabConfig) -> Result<Option<f64>> {
    let s = holder_seminorm(u, alpha, cfg.holder_mode)?;
    Ok((s > 0.0).then_some(s))
}

fn slope_of(eps: &[f64], values: &[f64]) -> Option<RateReport> {
    let pairs: Vec<(f64, f64)> = eps.iter().copied().zip(values.iter().copied()).collect();
    fit_rate_asymptotic(&pairs).ok()
}

/// `‖u_ε − u‖_∞ ≤ [u] ε^α`.
pub fn check_conv20(u: &VectorField3, alpha: f64, eps_list: &[f64], cfg: &LabConfig) -> Result<LemmaVerdict> {
    check_alpha(alpha)?;
    require_zero_trace(u)?;
    let (eps, scales) = sorted_scales(u, eps_list)?;
    let Some(s) = seminorm(u, alpha, cfg)? else {
        return Ok(LemmaVerdict::vacuous("conv20", &eps, "zero seminorm"));
    };
    let mut errors = Vec::with_capacity(eps.len());
    for scale in &scales {
        errors.push(max_abs(&mollify_with(u, scale)?.sub(u)?));
    }
    let ratios = eps.iter().zip(&errors).map(|(e, err)| err / (s * e.powf(alpha))).collect();
    let mut v = LemmaVerdict::bounded("conv20", &eps, ratios, 1.0, cfg.tol);
    v.slope = slope_of(&eps, &errors).map(|r| r.slope);
    Ok(v)
}

/// `‖∇u_ε‖_∞ ≤ c_ρ [u] ε^{α−1}`.
pub fn check_conv30(u: &VectorField3, alpha: f64, eps_list: &[f64], cfg: &LabConfig) -> Result<LemmaVerdict> {
    check_alpha(alpha)?;
    require_zero_trace(u)?;
    let (eps, scales) = sorted_scales(u, eps_list)?;
    let Some(s) = seminorm(u, alpha, cfg)? else {
        return Ok(LemmaVerdict::vacuous("conv30", &eps, "zero seminorm"));
    };
    let mut sups = Vec::with_capacity(eps.len());
    for scale in &scales {
        sups.push(max_abs(&grad_mollify_with(u, scale)?));
    }
    let ratios = eps.iter().zip(&sups).map(|(e, g)| g * e.powf(1.0 - alpha) / s).collect();
    let mut v = LemmaVerdict::bounded("conv30", &eps, ratios, MollifierKernel::standard().c_rho, cfg.tol);
    v.slope = slope_of(&eps, &sups).map(|r| r.slope);
    Ok(v)
}

/// `sup_x |τ_{2ε}ū(x + y) − τ_{2ε}ū(x)| ≤ |y|^α [u]` for node offsets `y`.
pub fn check_conv1p(
    u: &VectorField3,
    alpha: f64,
    epsilon: f64,
    y_list: &[Offset],
    cfg: &LabConfig,
) -> Result<LemmaVerdict> {
    check_alpha(alpha)?;
    require_zero_trace(u)?;
    if y_list.is_empty() {
        return Err(invalid("empty probe list"));
    }
    let t = translate(u, epsilon)?;
    let g = *u.grid();
    let s = seminorm(u, alpha, cfg)?;
    let mut ratios = Vec::with_capacity(y_list.len());
    for y in y_list {
        let dist = ((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) as f64).sqrt() * g.h();
        let sup = (0..g.len())
            .map(|n| {
                let [i, j, k] = g.unravel(n);
                let (i, j, k) = (i as isize, j as isize, k as isize);
                let d2: f64 = t
                    .comps()
                    .iter()
                    .map(|c| {
                        let d = c.sample(i + y[0], j + y[1], k + y[2]) - c.sample(i, j, k);
                        d * d
                    })
                    .sum();
                d2.sqrt()
            })
            .fold(0.0, f64::max);
        ratios.push(match (dist > 0.0, s) {
            (false, _) => 0.0,
            (true, Some(s)) => sup / (dist.powf(alpha) * s),
            (true, None) => {
                if sup == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        });
    }
    if s.is_none() && ratios.iter().all(|&r| r == 0.0) {
        return Ok(LemmaVerdict::vacuous("conv1p", &[epsilon], "zero seminorm"));
    }
    Ok(LemmaVerdict::bounded("conv1p", &[epsilon], ratios, 1.0, cfg.tol))
}

/// `‖S_ε u − u‖_∞ ≤ 3^α [u] ε^α`, and the error decays at least like
/// `ε^{α − 0.1}`.
pub fn check_conv2p(u: &VectorField3, alpha: f64, eps_list: &[f64], cfg: &LabConfig) -> Result<LemmaVerdict> {
    check_alpha(alpha)?;
    require_zero_trace(u)?;
    let (eps, scales) = sorted_scales(u, eps_list)?;
    let Some(s) = seminorm(u, alpha, cfg)? else {
        return Ok(LemmaVerdict::vacuous("conv2p", &eps, "zero seminorm"));
    };
    let mut errors = Vec::with_capacity(eps.len());
    for scale in &scales {
        errors.push(max_abs(&conv_translate_with(u, scale)?.sub(u)?));
    }
    let ratios = eps.iter().zip(&errors).map(|(e, err)| err / (s * e.powf(alpha))).collect();
    let v = LemmaVerdict::bounded("conv2p", &eps, ratios, 3f64.powf(alpha), cfg.tol);
    Ok(match slope_of(&eps, &errors) {
        Some(rate) => {
            let mut v = v.fail_unless(rate.slope >= alpha - 0.1, "error decays slower than eps^(alpha - 0.1)");
            v.slope = Some(rate.slope);
            v
        }
        None => v,
    })
}

/// `‖∇S_ε u‖_∞ ≤ c_ρ [u] ε^{α−1}`.
pub fn check_conv3p(u: &VectorField3, alpha: f64, eps_list: &[f64], cfg: &LabConfig) -> Result<LemmaVerdict> {
    check_alpha(alpha)?;
    require_zero_trace(u)?;
    let (eps, scales) = sorted_scales(u, eps_list)?;
    let Some(s) = seminorm(u, alpha, cfg)? else {
        return Ok(LemmaVerdict::vacuous("conv3p", &eps, "zero seminorm"));
    };
    let mut sups = Vec::with_capacity(eps.len());
    for scale in &scales {
        sups.push(max_abs(&grad_conv_translate_with(u, scale)?));
    }
    let ratios = eps.iter().zip(&sups).map(|(e, g)| g * e.powf(1.0 - alpha) / s).collect();
    let mut v = LemmaVerdict::bounded("conv3p", &eps, ratios, MollifierKernel::standard().c_rho, cfg.tol);
    v.slope = slope_of(&eps, &sups).map(|r| r.slope);
    Ok(v)
}

/// Largest ratio between the constants measured at the two finest `ε` that
/// still counts as `ε`-independent.
pub const STABILITY_WINDOW: f64 = 2.0;

/// Sup of the measured constants, and whether they have settled: the two
/// finest scales agree within [`STABILITY_WINDOW`]. Coarse scales, where the
/// averaging balls see most of the box, may sit well below the limit value
/// without contradicting an upper bound.
fn stability(eps: &[f64], values: &[f64]) -> (f64, bool) {
    let mut finite: Vec<(f64, f64)> =
        eps.iter().copied().zip(values.iter().copied()).filter(|(_, v)| v.is_finite() && *v > 0.0).collect();
    if finite.is_empty() {
        return (0.0, true);
    }
    finite.sort_by(|a, b| a.0.total_cmp(&b.0));
    let hi = finite.iter().map(|p| p.1).fold(0.0, f64::max);
    let ok = match finite.as_slice() {
        [a, b, ..] => a.1.max(b.1) / a.1.min(b.1) <= STABILITY_WINDOW,
        _ => true,
    };
    (hi, ok)
}

/// `max |a| / b` over nodes with `b > 0`; `∞` if `a ≠ 0` where `b = 0`.
fn pointwise_ratio(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| if y > 0.0 { x.abs() / y } else if x == 0.0 { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

/// Largest nodal `|d|` over layers `0..layers`.
fn max_below(f: &ScalarField, layers: usize) -> f64 {
    let n = layers.min(f.grid().n3()) * f.grid().layer_len();
    f.values()[..n].iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Options for [`check_basic_properties`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasicOptions {
    pub r_list: Vec<f64>,
    /// Assert a first-order `W^{1,r}` rate (only meaningful for smooth,
    /// compactly supported inputs).
    pub smooth: bool,
}

/// Support, trace, divergence commutation, maximal-function domination,
/// `L^r` stability and `W^{1,r}` convergence of `S_ε`.
pub fn check_basic_properties(
    u: &VectorField3,
    eps_list: &[f64],
    opts: &BasicOptions,
) -> Result<Vec<LemmaVerdict>> {
    let (eps, scales) = sorted_scales(u, eps_list)?;
    let names_r = |stem: &'static str| opts.r_list.iter().map(move |r| format!("{stem}_r{r}"));
    if is_zero(u) {
        let mut names: Vec<String> = [
            "support",
            "boundary_trace",
            "divergence_commutation",
            "maximal_domination",
            "gradient_maximal_domination",
            "first_order_error",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        names.extend(names_r("lr_stability"));
        names.extend(names_r("gradient_lr_stability"));
        names.extend(names_r("w1r_convergence"));
        return Ok(names.iter().map(|n| LemmaVerdict::vacuous(n, &eps, "zero field")).collect());
    }
    let grid = *u.grid();
    let h = grid.h();
    let n3 = grid.n3();
    let abs_u = u.magnitude();
    let grad_u = jacobian(u);
    let abs_grad = grad_u.magnitude();
    let div_u = divergence(u);

    let mut support = Vec::new();
    let mut trace = Vec::new();
    let mut trace_skipped = Vec::new();
    let mut commutation = Vec::new();
    let mut dom = Vec::new();
    let mut grad_dom = Vec::new();
    let mut first = Vec::new();
    let mut lr: Vec<Vec<f64>> = vec![Vec::new(); opts.r_list.len()];
    let mut grad_lr: Vec<Vec<f64>> = vec![Vec::new(); opts.r_list.len()];
    let mut w1r: Vec<Vec<f64>> = vec![Vec::new(); opts.r_list.len()];

    for (&e, scale) in eps.iter().zip(&scales) {
        let s = conv_translate_with(u, scale)?;
        let gs = grad_conv_translate_with(u, scale)?;

        // nodes with x3 <= ε − h
        let below = ((e - h) / h + 1e-9).floor() as i64 + 1;
        support.push(s.comps().iter().map(|c| max_below(c, below.max(0) as usize)).fold(0.0, f64::max));

        if u.support_margin() >= 2 * scale.radius {
            let d = double_smooth(u, e)?;
            trace.push(d.comps().iter().map(|c| max_below(c, 1)).fold(0.0, f64::max));
        } else {
            trace_skipped.push(e);
        }

        let lhs = divergence(&s);
        let rhs = conv_translate_with(&div_u, scale)?;
        let top = if u.support_margin() > 3 * scale.radius { n3 } else { n3 - 1 };
        let diff = lhs.zip_with(&rhs, |a, b| a - b)?;
        commutation.push(max_below(&diff, top));

        let r_ball = (3.0 * e / h).ceil() * h;
        let m_u = maximal_function(&abs_u, r_ball)?;
        let m_grad = maximal_function(&abs_grad, r_ball)?;
        dom.push(pointwise_ratio(&s.magnitude(), &m_u));
        grad_dom.push(pointwise_ratio(&gs.magnitude(), &m_grad));
        let err = s.sub(u)?.magnitude();
        let denom = m_u.zip_with(&m_grad, |a, b| e * (a + b))?;
        first.push(pointwise_ratio(&err, &denom));

        let grad_err = gs.zip_with(&grad_u, |a, b| a - b)?;
        let diff_s = s.sub(u)?;
        for (i, &r) in opts.r_list.iter().enumerate() {
            let nu = lp_norm(u, r)?;
            let ng = lp_norm(&grad_u, r)?;
            lr[i].push(if nu > 0.0 { lp_norm(&s, r)? / nu } else { 0.0 });
            grad_lr[i].push(if ng > 0.0 { lp_norm(&gs, r)? / ng } else { 0.0 });
            w1r[i].push(lp_norm(&diff_s, r)? + lp_norm::<TensorField>(&grad_err, r)?);
        }
    }

    let mut out = Vec::new();
    let sup_support = support.iter().copied().fold(0.0, f64::max);
    out.push(LemmaVerdict::judged("support", &eps, support, sup_support, sup_support == 0.0));

    let sup_trace = trace.iter().copied().fold(0.0, f64::max);
    let mut v = LemmaVerdict::judged("boundary_trace", &eps, trace, sup_trace, sup_trace == 0.0);
    if !trace_skipped.is_empty() {
        v = v.with_note(format!("support margin too small for double smoothing at eps {trace_skipped:?}"));
    }
    out.push(v);

    let sup_comm = commutation.iter().copied().fold(0.0, f64::max);
    out.push(LemmaVerdict::judged("divergence_commutation", &eps, commutation, sup_comm, sup_comm <= 1e-12));

    for (name, vals) in [("maximal_domination", dom), ("gradient_maximal_domination", grad_dom), ("first_order_error", first)]
    {
        let (hi, ok) = stability(&eps, &vals);
        out.push(LemmaVerdict::judged(name, &eps, vals, hi, ok));
    }
    for (i, r) in opts.r_list.iter().enumerate() {
        let (hi, ok) = stability(&eps, &lr[i]);
        out.push(LemmaVerdict::judged(&format!("lr_stability_r{r}"), &eps, lr[i].clone(), hi, ok));
        let (hi, ok) = stability(&eps, &grad_lr[i]);
        out.push(LemmaVerdict::judged(&format!("gradient_lr_stability_r{r}"), &eps, grad_lr[i].clone(), hi, ok));

        let errs = &w1r[i];
        let monotone = errs.windows(2).all(|w| w[1] <= 1.05 * w[0]);
        let rate = slope_of(&eps, errs);
        let rate_ok = !opts.smooth || rate.as_ref().is_some_and(|r| r.slope >= 0.9);
        let mut v = LemmaVerdict::judged(&format!("w1r_convergence_r{r}"), &eps, errs.clone(), errs[0], monotone)
            .fail_unless(rate_ok, "W^{1,r} error decays slower than eps^0.9");
        if !monotone {
            v = v.with_note("W^{1,r} error grew along eps halving");
        }
        v.slope = rate.map(|r| r.slope);
        out.push(v);
    }
    Ok(out)
}

/// `ρ_ε * S_ε u` vanishes on the wall and, for solenoidal `u`, stays
/// solenoidal.
pub fn check_admissibility(u: &VectorField3, epsilon: f64) -> Result<LemmaVerdict> {
    let d = double_smooth(u, epsilon)?;
    let trace = d.comps().iter().map(|c| max_below(c, 1)).fold(0.0, f64::max);
    let div_in = max_abs(&divergence(u));
    let mut v = LemmaVerdict::judged("admissibility", &[epsilon], vec![trace], trace, trace == 0.0);
    if div_in <= 1e-12 {
        let scale = Scale::new(u.grid(), epsilon)?;
        let n3 = u.grid().n3();
        let top = if u.support_margin() > 4 * scale.radius { n3 } else { n3 - 1 };
        let div_out = max_below(&divergence(&d), top);
        v.per_eps.push(div_out);
        v = v.fail_unless(div_out <= 1e-12, "double smoothing broke the divergence constraint");
    } else {
        v = v.with_note("input is not solenoidal; only the boundary trace is checked");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::HalfSpaceGrid;
    use crate::synth::{curl_field, power_field, shear_field, weierstrass_field, CurlSpec, WeierstrassSpec};

    fn cfg() -> LabConfig {
        LabConfig::default()
    }

    fn grid(n: usize) -> HalfSpaceGrid {
        HalfSpaceGrid::cubic(n, 1.0 / (n - 1) as f64).unwrap()
    }

    fn eps(g: &HalfSpaceGrid, ms: &[usize]) -> Vec<f64> {
        ms.iter().map(|&m| m as f64 * g.h()).collect()
    }

    /// Shears are layer-constant, so a thin column resolves them cheaply.
    fn tall_grid() -> HalfSpaceGrid {
        HalfSpaceGrid::new(4, 4, 200, 1.0 / 199.0).unwrap()
    }

    /// Smooth shear, a `sin⁴` bump on `[0.1, 0.7]·L3`.
    fn smooth_shear(g: HalfSpaceGrid) -> VectorField3 {
        let l = g.height();
        shear_field(g, move |x| {
            let t = (x / l - 0.1) / 0.6;
            if (0.0..=1.0).contains(&t) {
                (std::f64::consts::PI * t).sin().powi(4)
            } else {
                0.0
            }
        })
    }

    #[test]
    fn conv20_on_power_and_zero_fields() {
        let g = grid(32);
        let v = power_field(0.5, g).unwrap();
        let r = check_conv20(&v, 0.5, &eps(&g, &[2, 4, 8]), &cfg()).unwrap();
        assert!(r.passed && r.constant_measured <= 1.0 + 1e-12, "{r:?}");
        let z = check_conv20(&VectorField3::zeros(g), 0.5, &eps(&g, &[2, 4]), &cfg()).unwrap();
        assert_eq!(z.outcome, Outcome::Vacuous);
        assert!(z.passed);
    }

    #[test]
    fn smooth_fields_converge_at_first_order() {
        let g = tall_grid();
        let v = smooth_shear(g);
        let r = check_conv20(&v, 0.5, &eps(&g, &[8, 4, 2]), &cfg()).unwrap();
        assert!(r.slope.unwrap() >= 0.9, "{:?}", r.slope);
        let r = check_conv30(&v, 0.5, &eps(&g, &[8, 4, 2]), &cfg()).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn conv30_on_power_field() {
        let g = grid(32);
        let v = power_field(0.25, g).unwrap();
        let r = check_conv30(&v, 0.25, &eps(&g, &[2, 4, 8]), &cfg()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.constant_theoretical, Some(MollifierKernel::standard().c_rho));
    }

    #[test]
    fn conv1p_probes() {
        let g = grid(24);
        let v = power_field(0.5, g).unwrap();
        let r = check_conv1p(&v, 0.5, 2.0 * g.h(), &[[0, 0, 0]], &cfg()).unwrap();
        assert_eq!(r.constant_measured, 0.0);
        let r = check_conv1p(&v, 0.5, 2.0 * g.h(), &[[0, 0, 1]], &cfg()).unwrap();
        assert!(r.passed && r.constant_measured <= 1.0 + 1e-12);
        let c = curl_field(&CurlSpec::new(5), g).unwrap();
        let probes: Vec<Offset> = (0..10).map(|i| [(i % 3) as isize - 1, (i % 4) as isize, (i % 5) as isize]).collect();
        let exact = LabConfig { holder_mode: HolderMode::Exact, ..cfg() };
        let r = check_conv1p(&c, 0.5, g.h(), &probes, &exact).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn conv2p_and_conv3p_on_power_fields() {
        let g = grid(32);
        for alpha in [0.25, 0.5, 0.75] {
            let v = power_field(alpha, g).unwrap();
            let e = eps(&g, &[8, 4, 2, 1]);
            let r = check_conv2p(&v, alpha, &e, &cfg()).unwrap();
            assert!(r.passed, "{r:?}");
            let r = check_conv3p(&v, alpha, &e, &cfg()).unwrap();
            assert!(r.passed, "{r:?}");
        }
        let z = check_conv2p(&VectorField3::zeros(g), 0.5, &eps(&g, &[2, 4]), &cfg()).unwrap();
        assert_eq!(z.outcome, Outcome::Vacuous);
    }

    #[test]
    fn conv2p_slope_on_a_weierstrass_field() {
        let g = grid(64);
        let v = weierstrass_field(&WeierstrassSpec::new(0.5, 3), g).unwrap();
        let r = check_conv2p(&v, 0.5, &eps(&g, &[16, 8, 4, 2]), &cfg()).unwrap();
        let slope = r.slope.unwrap();
        assert!((0.4..=0.7).contains(&slope), "slope {slope}");
    }

    #[test]
    fn basic_properties_on_power_field() {
        let g = grid(48);
        let v = power_field(0.5, g).unwrap();
        let opts = BasicOptions { r_list: vec![2.0, 4.0], smooth: false };
        let verdicts = check_basic_properties(&v, &eps(&g, &[8, 4, 2, 1]), &opts).unwrap();
        for v in &verdicts {
            assert!(v.passed, "{v:?}");
        }
        let lr2 = verdicts.iter().find(|v| v.lemma == "lr_stability_r2").unwrap();
        let ratio = lr2.per_eps[2] / lr2.per_eps[0];
        assert!((0.5..=2.0).contains(&ratio));
    }

    #[test]
    fn basic_properties_on_smooth_field() {
        let g = tall_grid();
        let v = smooth_shear(g);
        let opts = BasicOptions { r_list: vec![2.0], smooth: true };
        let verdicts = check_basic_properties(&v, &eps(&g, &[8, 4, 2]), &opts).unwrap();
        for v in &verdicts {
            assert!(v.passed, "{v:?}");
        }
    }

    #[test]
    fn basic_properties_on_curl_field() {
        let g = grid(20);
        let v = curl_field(&CurlSpec::new(9), g).unwrap();
        let opts = BasicOptions { r_list: vec![2.0], smooth: false };
        let verdicts = check_basic_properties(&v, &eps(&g, &[1, 2]), &opts).unwrap();
        for name in ["support", "boundary_trace", "divergence_commutation"] {
            assert!(verdicts.iter().find(|v| v.lemma == name).unwrap().passed, "{name}");
        }
    }

    #[test]
    fn basic_properties_of_zero_field_are_vacuous() {
        let g = grid(16);
        let opts = BasicOptions { r_list: vec![2.0], smooth: true };
        let verdicts = check_basic_properties(&VectorField3::zeros(g), &eps(&g, &[1, 2]), &opts).unwrap();
        assert!(verdicts.iter().all(|v| v.passed && v.outcome == Outcome::Vacuous));
    }

    #[test]
    fn admissibility() {
        let g = grid(24);
        let c = curl_field(&CurlSpec::new(1), g).unwrap();
        let v = check_admissibility(&c, 2.0 * g.h()).unwrap();
        assert!(v.passed && v.note.is_none(), "{v:?}");
        let s = power_field(0.5, g).unwrap();
        assert!(check_admissibility(&s, 2.0 * g.h()).unwrap().passed);
        let generic = VectorField3::from_fn(g, |x| {
            let w = if x[2] < 0.6 { x[2] * (0.6 - x[2]) } else { 0.0 };
            [w * x[0], w, 0.0]
        });
        let v = check_admissibility(&generic, 2.0 * g.h()).unwrap();
        assert!(v.passed && v.note.is_some());
    }

    #[test]
    fn zero_tolerance_rejects_discrete_constants() {
        let g = grid(32);
        let v = power_field(0.5, g).unwrap();
        let strict = LabConfig { tol: -0.5, ..cfg() };
        assert!(!check_conv2p(&v, 0.5, &eps(&g, &[2, 4, 8]), &strict).unwrap().passed);
    }

    #[test]
    fn verdict_json_has_the_report_fields() {
        let g = grid(16);
        let v = check_conv20(&power_field(0.5, g).unwrap(), 0.5, &eps(&g, &[1, 2]), &cfg()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&report_json(&[v]).unwrap()).unwrap();
        for key in ["lemma", "constant_measured", "constant_theoretical", "slope", "eps_list", "passed"] {
            assert!(json[0].get(key).is_some(), "{key}");
        }
    }
}
