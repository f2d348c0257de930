use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "heteroclinic", version, about = "Heteroclinic cycles between saddle-centers of a quartic Hamiltonian family")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory for output files. Falls back to HETEROCLINIC_OUTPUT_DIR; without
    /// either, the main document goes to standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Also write a gnuplot script next to each CSV file.
    #[arg(long, global = true)]
    pub gnuplot: bool,

    #[command(flatten)]
    pub integrator: IntegratorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct IntegratorArgs {
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_step: Option<f64>,
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: f64,
    #[arg(long)]
    pub omega: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Melnikov R-matrix classification and integrability verdict.
    Classify(ClassifyArgs),
    /// Zero curve of G in the (beta1, beta2) plane at fixed omega.
    GCurve(GCurveArgs),
    /// Closed-form and direct Melnikov function over one period.
    Melnikov(MelnikovArgs),
    /// Monodromy pair of the normal variational equation.
    Monodromy(MonodromyArgs),
    /// Manifold traces of the Lyapunov orbits on the section y1 = 0.
    Manifolds(ManifoldArgs),
    /// Cross-checks between analytic and numerical routes.
    Verify,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true, required_unless_present = "beta1_range")]
    pub beta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "beta2_range")]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub omega: f64,
    /// Sweep grid over beta1 as `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub beta1_range: Option<String>,
    /// Sweep grid over beta2 as `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub beta2_range: Option<String>,
}

#[derive(Debug, Args)]
pub struct GCurveArgs {
    #[arg(long)]
    pub omega: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta2_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta2_max: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct MelnikovArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    #[arg(long, default_value_t = 40.0)]
    pub t_limit: f64,
}

#[derive(Debug, Args)]
pub struct MonodromyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct ManifoldArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: f64,
    #[arg(long)]
    pub omega: f64,
    #[arg(long)]
    pub energy: Option<f64>,
    /// Comma-separated beta1 values; reports verdicts and the tangency band.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta1_sweep: Vec<f64>,
    #[arg(long)]
    pub seed_offset: Option<f64>,
    #[arg(long)]
    pub n_seeds: Option<usize>,
    #[arg(long)]
    pub max_seeds: Option<usize>,
    #[arg(long)]
    pub max_return: Option<usize>,
    #[arg(long)]
    pub arc_bound: Option<f64>,
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub angle_tol: Option<f64>,
    #[arg(long)]
    pub gap_tol: Option<f64>,
}
