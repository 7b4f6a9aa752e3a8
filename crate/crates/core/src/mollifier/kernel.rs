use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

/// Reference values from a 30-digit quadrature of the standard bump in 3-D.
pub const REFERENCE_NORMALIZATION: f64 = 2.267_116_739_608_326_5;
pub const REFERENCE_C_RHO: f64 = 4.230_552_223_237_334;

/// The radial bump `ρ(x) = C exp(-1 / (1 - |x|^2))` on the unit ball of R^3,
/// normalized to unit mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MollifierKernel {
    /// Normalization `C` such that `∫ ρ = 1`.
    pub normalization: f64,
    /// `c_ρ = ∫ |∇ρ| dx`.
    pub c_rho: f64,
}

fn bump(r: f64) -> f64 {
    if r < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Composite Simpson rule on `[0, 1]`; the integrands here vanish to all
/// orders at `r = 1`, so the rule converges very fast.
fn simpson_unit(f: impl Fn(f64) -> f64) -> f64 {
    const N: usize = 20_000;
    let dx = 1.0 / N as f64;
    let mut terms = Vec::with_capacity(N + 1);
    for i in 0..=N {
        let c = if i == 0 || i == N {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(c * f(i as f64 * dx));
    }
    crate::sum::pairwise_sum(&terms) * dx / 3.0
}

impl MollifierKernel {
    /// The standard bump with constants from quadrature, computed once.
    pub fn standard() -> &'static MollifierKernel {
        static KERNEL: OnceLock<MollifierKernel> = OnceLock::new();
        KERNEL.get_or_init(|| {
            let mass = 4.0 * PI * simpson_unit(|r| r * r * bump(r));
            let normalization = 1.0 / mass;
            // |∇ρ| = C exp(-1/(1-r^2)) 2r / (1-r^2)^2
            let c_rho = 4.0 * PI
                * normalization
                * simpson_unit(|r| if r < 1.0 { r * r * bump(r) * 2.0 * r / (1.0 - r * r).powi(2) } else { 0.0 });
            MollifierKernel { normalization, c_rho }
        })
    }

    /// `ρ` at radius `r`.
    pub fn profile(&self, r: f64) -> f64 {
        self.normalization * bump(r)
    }

    /// Radial derivative `dρ/dr`.
    pub fn profile_derivative(&self, r: f64) -> f64 {
        if r < 1.0 {
            let s = 1.0 - r * r;
            -self.normalization * bump(r) * 2.0 * r / (s * s)
        } else {
            0.0
        }
    }

    /// `‖ρ‖_{L^p}` for `p >= 1`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let integral = 4.0 * PI * simpson_unit(|r| r * r * self.profile(r).powf(p));
        integral.powf(1.0 / p)
    }

    /// `‖ρ_ε‖_{L^p} = ε^{-3(1 - 1/p)} ‖ρ‖_{L^p}`.
    pub fn scaled_lp_norm(&self, p: f64, epsilon: f64) -> f64 {
        epsilon.powf(-3.0 * (1.0 - 1.0 / p)) * self.lp_norm(p)
    }
}
