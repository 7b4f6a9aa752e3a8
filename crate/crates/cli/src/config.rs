use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mollify_lab::field::{read_field, MAGIC};
use mollify_lab::synth::{CurlSpec, GeneratorSpec};
use mollify_lab::{HalfSpaceGrid, VectorField3};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(name = "mollify-lab", version, about = "Numerical checks for the convolution-translation mollifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constants and rates of the mollifier estimates.
    Lemmas(LemmasArgs),
    /// Commutator decomposition and the three convective integrals.
    Commutator(CommutatorArgs),
    /// Smoothed energy balance and the global energy equality.
    Energy(EnergyArgs),
    /// Exponent calculus for a Hölder/time-integrability pair.
    Exponents(ExponentsArgs),
}

/// Options shared by the field-based commands.
#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Nodes per direction of a cubic grid.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Grid spacing; defaults to 1/(grid − 1).
    #[arg(long)]
    pub h: Option<f64>,
    /// Smoothing scales in units of h, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// MLF1 field file or generator JSON.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Seed for the default random fields.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Relative slack on theoretical constants.
    #[arg(long, default_value_t = 0.1)]
    pub tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a CSV table.
    #[arg(long = "emit-csv")]
    pub emit_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LemmasArgs {
    #[command(flatten)]
    pub common: Common,
    /// Hölder exponent; defaults to the generator's, else 1/2.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CommutatorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Hölder exponent used in the bounds.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Decaying sine shear, an exact Stokes/Navier–Stokes solution.
    Shear,
    /// Identically zero; every term vanishes.
    Zero,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Kinematic viscosity.
    #[arg(long)]
    pub nu: f64,
    #[arg(long, value_enum, default_value_t = SeriesKind::Shear)]
    pub series: SeriesKind,
    /// Number of time steps.
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    /// End of the time window, which starts at 0.
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Hölder exponent for the mismatch bound; needs --beta.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Time-integrability exponent for the mismatch bound; needs --alpha.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Defaults to the midpoint of its admissible window.
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    /// Hölder exponent in (0, 1).
    #[arg(long)]
    pub alpha: f64,
    /// Time-integrability exponent in [1, 2].
    #[arg(long)]
    pub beta: f64,
    /// Defaults to the midpoint of its admissible window.
    #[arg(long)]
    pub q: Option<f64>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where the input field came from.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSource {
    Generated { spec: GeneratorSpec },
    File { path: String, sha256: String },
}

/// Everything that determines a run; hashed into the report header.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub grid: [usize; 3],
    pub h: f64,
    /// In units of `h`.
    pub eps_steps: Vec<f64>,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSource>,
    pub params: serde_json::Value,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(bytes))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Common {
    pub fn grid(&self) -> anyhow::Result<HalfSpaceGrid> {
        if self.grid < 2 {
            bail!("--grid must be at least 2");
        }
        let h = self.h.unwrap_or(1.0 / (self.grid - 1) as f64);
        Ok(HalfSpaceGrid::cubic(self.grid, h)?)
    }

    /// Scales in units of `h`, falling back to `default`.
    pub fn eps_steps(&self, default: &[f64]) -> anyhow::Result<Vec<f64>> {
        let steps = self.eps.clone().unwrap_or_else(|| default.to_vec());
        if steps.is_empty() {
            bail!("--eps needs at least one value");
        }
        if let Some(bad) = steps.iter().find(|m| !(**m >= 1.0 && m.is_finite())) {
            bail!("--eps value {bad} is below one grid step");
        }
        Ok(steps)
    }

    /// Loads `--field`, or generates `default` on the command-line grid.
    pub fn load_field(&self, default: GeneratorSpec) -> anyhow::Result<(VectorField3, FieldSource)> {
        match &self.field {
            None => {
                let v = default.generate(self.grid()?)?;
                Ok((v, FieldSource::Generated { spec: default }))
            }
            Some(path) => load_path(path),
        }
    }
}

fn load_path(path: &Path) -> anyhow::Result<(VectorField3, FieldSource)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(MAGIC) {
        let (_, comps) = read_field(bytes.as_slice()).with_context(|| format!("decoding {}", path.display()))?;
        let [a, b, c]: [_; 3] =
            comps.try_into().map_err(|c: Vec<_>| anyhow!("{} holds {} components, expected 3", path.display(), c.len()))?;
        let source = FieldSource::File { path: path.display().to_string(), sha256: hex(&Sha256::digest(&bytes)) };
        return Ok((VectorField3::new(a, b, c)?, source));
    }
    let doc: GeneratorFile =
        serde_json::from_slice(&bytes).with_context(|| format!("{} is neither MLF1 nor generator JSON", path.display()))?;
    let grid = HalfSpaceGrid::new(doc.grid[0], doc.grid[1], doc.grid[2], doc.h)?;
    let v = doc.spec.generate(grid)?;
    Ok((v, FieldSource::Generated { spec: doc.spec }))
}

/// Generator JSON: `{"grid": [n1, n2, n3], "h": ..., "spec": {"kind": ...}}`.
#[derive(Debug, serde::Deserialize)]
struct GeneratorFile {
    grid: [usize; 3],
    h: f64,
    spec: GeneratorSpec,
}

pub fn default_curl(seed: u64) -> GeneratorSpec {
    GeneratorSpec::Curl(CurlSpec::new(seed))
}
