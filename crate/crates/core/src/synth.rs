//! Deterministic test-field generators.
//!
//! Every generator is a pure function of its parameters and the grid: random
//! choices come from a ChaCha stream seeded once per field and are drawn
//! before any node is evaluated, so node-parallel evaluation cannot reorder
//! them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{curl, Field, HalfSpaceGrid, ScalarField, VectorField3};

/// `C^∞` step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    fn f(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        f(t) / (f(t) + f(1.0 - t))
    }
}

/// `C^∞` bump on `(lo, hi)` with peak value 1 at the midpoint.
pub fn bump(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo || x >= hi {
        return 0.0;
    }
    let s = (2.0 * x - lo - hi) / (hi - lo);
    (1.0 - 1.0 / (1.0 - s * s)).exp()
}

/// `v = (g(x3), 0, 0)`.
pub fn shear_field(grid: HalfSpaceGrid, g: impl Fn(f64) -> f64) -> VectorField3 {
    let first = ScalarField::from_fn(grid, |x| g(x[2]));
    VectorField3::new(first, ScalarField::zeros(grid), ScalarField::zeros(grid)).expect("same grid")
}

/// Sine shear profile `A sin(mπ x3 / L)` on `[0, L]`, zero above, with
/// `L = L3 - pad·h`.
pub fn sine_profile(grid: &HalfSpaceGrid, amplitude: f64, m: u32, pad: usize) -> Result<impl Fn(f64) -> f64> {
    let slab = slab_height(grid, pad)?;
    let k = m as f64 * PI / slab;
    let top = grid.n3() - 1 - pad;
    let h = grid.h();
    Ok(move |x3: f64| {
        // compare on node indices so the top node of the slab is exactly zero
        let k3 = (x3 / h).round() as usize;
        if k3 >= top {
            0.0
        } else {
            amplitude * (k * x3).sin()
        }
    })
}

pub(crate) fn slab_height(grid: &HalfSpaceGrid, pad: usize) -> Result<f64> {
    if pad + 3 >= grid.n3() {
        return Err(invalid(format!("pad {pad} leaves fewer than four slab layers")));
    }
    Ok((grid.n3() - 1 - pad) as f64 * grid.h())
}

/// Shape of the power profile, as fractions of `L3`: `x3^α` exactly on
/// `[0, plateau]`, zero from `end` on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCutoff {
    pub plateau: f64,
    pub end: f64,
}

impl Default for PowerCutoff {
    fn default() -> Self {
        Self { plateau: 0.3, end: 0.75 }
    }
}

/// `m(x3)^α`, where `m` is a 1-Lipschitz tent that equals `x3` on
/// `[0, plateau]`, `end − x3` near `end`, and is rounded (`C¹`) in between.
///
/// Composing a 1-Lipschitz map with `t ↦ t^α` keeps the Hölder seminorm at
/// exactly 1, so the cutoff adds a second cusp at `end` but no steep ramp:
/// this is `x3^α w(x3)` with `w = (m / x3)^α`.
pub fn power_profile(alpha: f64, grid: &HalfSpaceGrid, cutoff: PowerCutoff) -> Result<impl Fn(f64) -> f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("power exponent {alpha} outside (0, 1]")));
    }
    if !(0.0 < cutoff.plateau && 2.0 * cutoff.plateau < cutoff.end && cutoff.end <= 1.0) {
        return Err(invalid("power cutoff needs 0 < 2·plateau < end <= 1"));
    }
    let b = cutoff.end * grid.height();
    let delta = b - 2.0 * cutoff.plateau * grid.height();
    // |z| rounded on (−δ, δ) by the quadratic with matching value and slope
    let soft_abs = move |z: f64| {
        if z.abs() >= delta {
            z.abs()
        } else {
            0.5 * (z * z / delta + delta)
        }
    };
    Ok(move |x3: f64| {
        if x3 <= 0.0 || x3 >= b {
            0.0
        } else {
            (0.5 * (b - soft_abs(2.0 * x3 - b))).max(0.0).powf(alpha)
        }
    })
}

/// `(x3^α w(x3), 0, 0)` with the default cutoff.
pub fn power_field(alpha: f64, grid: HalfSpaceGrid) -> Result<VectorField3> {
    let p = power_profile(alpha, &grid, PowerCutoff::default())?;
    Ok(shear_field(grid, p))
}

/// Band-limited random vector potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurlSpec {
    pub seed: u64,
    /// Number of Fourier modes per potential component.
    #[serde(default = "CurlSpec::default_modes")]
    pub modes: usize,
    /// Largest tangential and vertical wavenumber.
    #[serde(default = "CurlSpec::default_max_wavenumber")]
    pub max_wavenumber: u32,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Support of the vertical cutoff, as fractions of `L3`.
    #[serde(default = "CurlSpec::default_support")]
    pub support: [f64; 2],
}

fn one() -> f64 {
    1.0
}

impl CurlSpec {
    fn default_modes() -> usize {
        12
    }
    fn default_max_wavenumber() -> u32 {
        3
    }
    fn default_support() -> [f64; 2] {
        [0.05, 0.7]
    }

    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            modes: Self::default_modes(),
            max_wavenumber: Self::default_max_wavenumber(),
            amplitude: 1.0,
            support: Self::default_support(),
        }
    }
}

/// Cutoff interval in absolute units; the lower end is at least `h` so the
/// potential vanishes on the two lowest layers.
fn support_interval(grid: &HalfSpaceGrid, support: [f64; 2]) -> Result<(f64, f64)> {
    let [lo, hi] = support;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(invalid(format!("support fractions {support:?} must satisfy 0 <= lo < hi <= 1")));
    }
    let lo = (lo * grid.height()).max(grid.h());
    let hi = hi * grid.height();
    if hi - lo < 2.0 * grid.h() {
        return Err(invalid("cutoff support is narrower than two grid cells"));
    }
    Ok((lo, hi))
}

struct Mode {
    k: [f64; 3],
    amp: f64,
    phase: f64,
}

/// `v = curl ψ` with the discrete curl of the grid, so `div v` vanishes to
/// rounding and `v = 0` on the wall.
pub fn curl_field(spec: &CurlSpec, grid: HalfSpaceGrid) -> Result<VectorField3> {
    if spec.modes == 0 {
        return Ok(VectorField3::zeros(grid));
    }
    let (lo, hi) = support_interval(&grid, spec.support)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let kmax = spec.max_wavenumber as i64;
    let [p1, p2] = grid.periods();
    let l3 = grid.height();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Mode> {
        (0..spec.modes)
            .map(|_| {
                let k1 = rng.gen_range(-kmax..=kmax) as f64;
                let k2 = rng.gen_range(-kmax..=kmax) as f64;
                let k3 = rng.gen_range(0..=kmax) as f64;
                let amp: f64 = rng.gen_range(-1.0..1.0);
                let phase = rng.gen_range(0.0..2.0 * PI);
                let norm2 = 1.0 + k1 * k1 + k2 * k2 + k3 * k3;
                Mode { k: [2.0 * PI * k1 / p1, 2.0 * PI * k2 / p2, PI * k3 / l3], amp: spec.amplitude * amp / norm2, phase }
            })
            .collect()
    };
    let sets: Vec<Vec<Mode>> = (0..3).map(|_| draw(&mut rng)).collect();
    let comps: Vec<ScalarField> = sets
        .iter()
        .map(|modes| {
            ScalarField::from_fn(grid, |x| {
                let chi = bump(x[2], lo, hi);
                if chi == 0.0 {
                    return 0.0;
                }
                let s: f64 = modes
                    .iter()
                    .map(|m| m.amp * (m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase).sin())
                    .sum();
                chi * s
            })
        })
        .collect();
    let psi = VectorField3::from_components(comps)?;
    Ok(curl(&psi))
}

/// Lacunary series with designed Hölder exponent `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassSpec {
    pub alpha: f64,
    pub seed: u64,
    /// Number of octaves; default `floor(log2(n1 / 4))`.
    #[serde(default)]
    pub levels: Option<u32>,
    /// Frequency ratio between octaves (a positive integer keeps periodicity).
    #[serde(default = "WeierstrassSpec::default_lambda")]
    pub lambda: u32,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "CurlSpec::default_support")]
    pub support: [f64; 2],
}

impl WeierstrassSpec {
    fn default_lambda() -> u32 {
        2
    }

    pub fn new(alpha: f64, seed: u64) -> Self {
        Self {
            alpha,
            seed,
            levels: None,
            lambda: Self::default_lambda(),
            amplitude: 1.0,
            support: CurlSpec::default_support(),
        }
    }

    pub fn resolved_levels(&self, grid: &HalfSpaceGrid) -> u32 {
        self.levels.unwrap_or_else(|| {
            let n = grid.n1().min(grid.n2()).max(4);
            (n / 4).ilog2()
        })
    }
}

/// `v = curl(ψ3 e3)` with `ψ3 = χ(x3) Σ_j λ^{-(1+α)j} sin(2π λ^j d_j·x / P + φ_j) / (2π|d_j|/P)`,
/// so the octave `j` of `v` has amplitude `λ^{-αj}`. The roughness is purely
/// tangential; the vertical profile `χ` is smooth.
pub fn weierstrass_field(spec: &WeierstrassSpec, grid: HalfSpaceGrid) -> Result<VectorField3> {
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(invalid(format!("designed exponent {} outside (0, 1)", spec.alpha)));
    }
    if spec.lambda < 2 {
        return Err(invalid("lambda must be an integer >= 2"));
    }
    let (lo, hi) = support_interval(&grid, spec.support)?;
    let [p1, p2] = grid.periods();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lambda = spec.lambda as f64;
    const DIRECTIONS: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let terms: Vec<Mode> = (0..=spec.resolved_levels(&grid))
        .map(|j| {
            let d = DIRECTIONS[j as usize % 3];
            let scale = lambda.powi(j as i32);
            let k = [2.0 * PI * scale * d[0] / p1, 2.0 * PI * scale * d[1] / p2, 0.0];
            let kn = (k[0] * k[0] + k[1] * k[1]).sqrt();
            let amp = spec.amplitude * lambda.powf(-spec.alpha * j as f64) / kn;
            Mode { k, amp, phase: rng.gen_range(0.0..2.0 * PI) }
        })
        .collect();
    let psi3 = ScalarField::from_fn(grid, |x| {
        let chi = bump(x[2], lo, hi);
        if chi == 0.0 {
            return 0.0;
        }
        chi * terms.iter().map(|m| m.amp * (m.k[0] * x[0] + m.k[1] * x[1] + m.phase).sin()).sum::<f64>()
    });
    let psi = VectorField3::new(ScalarField::zeros(grid), ScalarField::zeros(grid), psi3)?;
    Ok(curl(&psi))
}

/// Serializable description of any generated field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Zero,
    /// `A sin(mπ x3 / L)` shear on a slab of `n3 - pad` layers.
    Shear {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_u32")]
        m: u32,
        #[serde(default)]
        pad: usize,
    },
    Curl(CurlSpec),
    Power {
        alpha: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        cutoff: PowerCutoff,
    },
    Weierstrass(WeierstrassSpec),
}

fn one_u32() -> u32 {
    1
}

impl GeneratorSpec {
    pub fn generate(&self, grid: HalfSpaceGrid) -> Result<VectorField3> {
        match self {
            GeneratorSpec::Zero => Ok(VectorField3::zeros(grid)),
            GeneratorSpec::Shear { amplitude, m, pad } => {
                Ok(shear_field(grid, sine_profile(&grid, *amplitude, *m, *pad)?))
            }
            GeneratorSpec::Curl(spec) => curl_field(spec, grid),
            GeneratorSpec::Power { alpha, amplitude, cutoff } => {
                let p = power_profile(*alpha, &grid, *cutoff)?;
                let a = *amplitude;
                Ok(shear_field(grid, move |x3| a * p(x3)))
            }
            GeneratorSpec::Weierstrass(spec) => weierstrass_field(spec, grid),
        }
    }

    /// Designed Hölder exponent, for the kinds that have one.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            GeneratorSpec::Power { alpha, .. } => Some(*alpha),
            GeneratorSpec::Weierstrass(spec) => Some(spec.alpha),
            _ => None,
        }
    }
}

/// FNV-1a over the little-endian bytes of every value, component-major.
pub fn checksum<F: Field>(f: &F) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for c in f.components() {
        for v in c.values() {
            for b in v.to_le_bytes() {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    hash
}
