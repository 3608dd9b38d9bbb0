use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "blowup",
    version,
    about = "Self-similar blow-up profiles of u_t = (u^m)_xx + |x|^sigma u^m"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shoot one profile, forward from the axis (--a) or backward from an interface (--xi0).
    Profile(ProfileArgs),
    /// Search for good profiles over a window of interface positions.
    Scan(ScanArgs),
    /// Follow an orbit of the three-dimensional phase system.
    Phase(PhaseArgs),
    /// List the critical points with their eigenvalues.
    Points(PointArgs),
    /// Evaluate the large-sigma non-existence bounds.
    Bounds(PointArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Coordinates for profile input and output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scaling {
    /// `(f^m)'' - f/(m-1) + xi^sigma f^m = 0`.
    Native,
    /// `(1/m)(F^m)'' - F/(m-1) + s^sigma F^m = 0`.
    Samarskii,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct Model {
    #[arg(long)]
    pub m: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Tolerances {
    /// Relative tolerance of profile integrations.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance of profile integrations.
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("start").required(true).args(["a", "xi0"])))]
pub struct ProfileArgs {
    #[command(flatten)]
    pub model: Model,
    /// Height at the axis for a forward shot.
    #[arg(long)]
    pub a: Option<f64>,
    /// Slope at the axis for a forward shot.
    #[arg(long, requires = "a", allow_hyphen_values = true)]
    pub slope: Option<f64>,
    /// Interface position for a backward shot.
    #[arg(long)]
    pub xi0: Option<f64>,
    #[arg(long, value_enum, default_value_t = Scaling::Samarskii)]
    pub scaling: Scaling,
    /// Largest gap between stored samples, in native `xi`.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// A forward shot counts as vanishing once `f^m` drops below this
    /// fraction of its value at the axis.
    #[arg(long)]
    pub vanish_tol: Option<f64>,
    #[command(flatten)]
    pub tol: Tolerances,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub m: f64,
    /// One or more comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma: Vec<f64>,
    /// Upper end of the window.
    #[arg(long)]
    pub xi0_max: f64,
    /// Lower end of the window; defaults to xi0-max / grid.
    #[arg(long)]
    pub xi0_min: Option<f64>,
    #[arg(long, default_value_t = 33)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Scaling::Samarskii)]
    pub scaling: Scaling,
    #[command(flatten)]
    pub tol: Tolerances,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub model: Model,
    /// Starting point X,Y,Z.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        required = true,
        allow_hyphen_values = true
    )]
    pub start: Vec<f64>,
    /// Span of the orbit parameter; the orbit also stops when it escapes.
    #[arg(long, default_value_t = 500.0)]
    pub eta_max: f64,
    /// Largest gap between stored samples in the orbit parameter.
    #[arg(long, default_value_t = 0.01)]
    pub spacing: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub model: Model,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Seed for the randomized sweeps.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tol: Tolerances,
    #[command(flatten)]
    pub output: Output,
}
