//! Exponent calculus of the energy-equality criterion.
//!
//! All routines are closed-form double-precision arithmetic. Denominators that
//! vanish or change sign raise [`LabError::InvalidParameter`] instead of
//! producing infinities; open windows are tested with a small margin so that
//! endpoints never count as admissible.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Distance from an endpoint below which a point is treated as on it.
pub const WINDOW_MARGIN: f64 = 1e-9;

/// Open interval `(lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn is_empty(&self) -> bool {
        self.hi - self.lo <= 2.0 * WINDOW_MARGIN
    }

    pub fn contains(&self, x: f64) -> bool {
        self.contains_with(x, WINDOW_MARGIN)
    }

    pub fn contains_with(&self, x: f64, margin: f64) -> bool {
        x > self.lo + margin && x < self.hi - margin
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if (1.0..=2.0).contains(&beta) {
        Ok(())
    } else {
        Err(invalid(format!("beta = {beta} must lie in [1, 2]")))
    }
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if den > 0.0 && den.is_finite() {
        Ok(num / den)
    } else {
        Err(invalid(format!("{what}: denominator {den} is not positive")))
    }
}

/// `β₀ = 6 / (3 + 2α)`.
pub fn beta0(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(6.0 / (3.0 + 2.0 * alpha))
}

/// `(4/(2+β), 4/(4−β))`, the window for `r` (and for `q`'s lower end).
pub fn r_window(beta: f64) -> Result<OpenInterval> {
    check_beta(beta)?;
    Ok(OpenInterval { lo: 4.0 / (2.0 + beta), hi: 4.0 / (4.0 - beta) })
}

/// `(4/(2+β), 2)`, the window for `q`.
pub fn q_window(beta: f64) -> Result<OpenInterval> {
    check_beta(beta)?;
    Ok(OpenInterval { lo: 4.0 / (2.0 + beta), hi: 2.0 })
}

/// `s = 2rβ / (4r + rβ − 4)`.
pub fn shinbrot_s(r: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    ratio(2.0 * r * beta, 4.0 * r + r * beta - 4.0, "shinbrot s")
}

/// `s = qβ / (q + qβ − 2)` and its conjugate `s′ = βq / (2 − q)`.
pub fn s_of_q(q: f64, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let s = ratio(q * beta, q + q * beta - 2.0, "s(q)")?;
    let s_prime = ratio(beta * q, 2.0 - q, "s'(q)")?;
    Ok((s, s_prime))
}

/// `r = 4q / (4 + 2q − qβ)`.
pub fn r_of_q(q: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    ratio(4.0 * q, 4.0 + 2.0 * q - q * beta, "r(q)")
}

/// `r = 4s / (4s + βs − 2β)`.
pub fn r_of_s(s: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    ratio(4.0 * s, 4.0 * s + beta * s - 2.0 * beta, "r(s)")
}

/// `α(2/q − 1) − 3(2 − β)/4`; positive exactly when the mismatch term's
/// bound carries a positive power of `ε`. The closed lower endpoint
/// `q = 4/(2+β)` is accepted.
pub fn est_eps_margin(alpha: f64, q: f64, beta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let w = q_window(beta)?;
    if !(q >= w.lo - WINDOW_MARGIN && q < w.hi) {
        return Err(invalid(format!("q = {q} outside [{}, 2)", w.lo)));
    }
    Ok(alpha * (2.0 / q - 1.0) - 0.75 * (2.0 - beta))
}

/// The margin at the most favourable `q`, i.e. `αβ/2 − 3(2 − β)/4`.
pub fn optimized_margin(alpha: f64, beta: f64) -> Result<f64> {
    est_eps_margin(alpha, 4.0 / (2.0 + beta), beta)
}

/// Zero in `β ∈ [1, 2]` of [`optimized_margin`], by bisection.
pub fn critical_beta(alpha: f64) -> Result<f64> {
    let f = |b: f64| optimized_margin(alpha, b);
    let (mut lo, mut hi) = (1.0, 2.0);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(invalid(format!("no sign change of the margin on [1, 2] for alpha = {alpha}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(4+β)/(2(2+β)) + 1/(2+β) ≤ 1`, evaluated as printed.
pub fn remark37_check(beta: f64) -> bool {
    (4.0 + beta) / (2.0 * (2.0 + beta)) + 1.0 / (2.0 + beta) <= 1.0
}

/// `‖v‖_{L²}^{2/r−1} ‖v‖_{L∞}^{2(1−1/r)} ‖∇v‖_{L²}` with the `L²` factor
/// replaced by the energy bound `max(‖v‖, ‖v₀‖)`.
pub fn shinbrot_pointwise_bound(v_l2: f64, v_linf: f64, grad_l2: f64, v0_l2: f64, r: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&r) {
        return Err(invalid(format!("r = {r} outside [1, 2]")));
    }
    if [v_l2, v_linf, grad_l2, v0_l2].iter().any(|x| !(*x >= 0.0)) {
        return Err(invalid("norms must be nonnegative"));
    }
    let energy = v_l2.max(v0_l2);
    Ok(energy.powf(2.0 / r - 1.0) * v_linf.powf(2.0 * (1.0 - 1.0 / r)) * grad_l2)
}

/// Which constraints a bundle satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Validity {
    pub beta_above_beta0: bool,
    pub beta_in_unit_two: bool,
    pub q_in_window: bool,
    pub r_in_window: bool,
    pub r_between_one_and_q: bool,
    pub s_in_unit_two: bool,
    pub conjugate: bool,
    pub routes_agree: bool,
    pub margin_positive: bool,
}

/// All exponents of the criterion for one `(α, β, q)` choice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentBundle {
    pub alpha: f64,
    pub beta: f64,
    pub beta0: f64,
    pub q: f64,
    /// `r` from `q`.
    pub r: f64,
    /// `r` from `s`.
    pub r_via_s: f64,
    /// `s` from `q`.
    pub s: f64,
    pub s_prime: f64,
    /// `2rβ/(4r + rβ − 4)` at this `r`.
    pub s_shinbrot: f64,
    pub r_window: OpenInterval,
    pub q_window: OpenInterval,
    pub margin: f64,
    pub valid: Validity,
}

impl ExponentBundle {
    /// `q` defaults to the midpoint of its window.
    pub fn new(alpha: f64, beta: f64, q: Option<f64>) -> Result<Self> {
        let b0 = beta0(alpha)?;
        let rw = r_window(beta)?;
        let qw = q_window(beta)?;
        let q = q.unwrap_or_else(|| qw.midpoint());
        let (s, s_prime) = s_of_q(q, beta)?;
        let r = r_of_q(q, beta)?;
        let r_via_s = r_of_s(s, beta)?;
        let s_shinbrot = shinbrot_s(r, beta)?;
        let margin = est_eps_margin(alpha, q, beta)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        let valid = Validity {
            beta_above_beta0: beta > b0,
            beta_in_unit_two: beta > 1.0 && beta < 2.0,
            q_in_window: qw.contains(q),
            r_in_window: rw.contains(r),
            r_between_one_and_q: r > 1.0 && r < q,
            s_in_unit_two: s > 1.0 && s < 2.0,
            conjugate: close(1.0 / s + 1.0 / s_prime, 1.0),
            routes_agree: close(r, r_via_s) && close(s, s_shinbrot),
            margin_positive: margin > 0.0,
        };
        Ok(Self { alpha, beta, beta0: b0, q, r, r_via_s, s, s_prime, s_shinbrot, r_window: rw, q_window: qw, margin, valid })
    }
}
