use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hopflab", version, about = "Numerical checks for LCK metrics on Hopf manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the identity suite and emit one record per identity.
    Verify,
    /// Scan fibers along a base ray and tabulate per-mode minimal eigenvalues.
    StabilityScan,
    /// Full Fourier spectrum of the index form at one fiber.
    Spectrum,
    /// Integrate the collapse curves and assemble the distance bound.
    Collapse,
    /// Quadrature volume against the closed form.
    Volume,
    /// Identity suite for S^(2n-1) x S^1 with n >= 3.
    HigherDim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// Single value, comma list `a,b,c`, or inclusive range `start:stop:count`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon: Option<String>,
    /// Complex dimension of the Hopf manifold.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x1: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x3: f64,
    /// `x1=0`, `x3=0`, or `angle=<radians>`.
    #[arg(long, global = true, default_value = "x1=0")]
    pub ray: String,
    #[arg(long, global = true)]
    pub grid_steps: Option<usize>,
    #[arg(long, global = true, default_value_t = 3.0)]
    pub r_max: f64,
    /// Starting distance from S^3 x S^1 for collapse curves.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub r0: f64,
    #[arg(long, global = true)]
    pub fourier_cap: Option<i32>,
    #[arg(long, global = true, default_value_t = 1e-5)]
    pub fd_step: f64,
    /// Override the tolerance of every upper-bound check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Perturb a metric entry before the determinant check.
    #[arg(long, global = true, hide = true)]
    pub inject_error: bool,
}
