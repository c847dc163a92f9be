use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyplevel_core::TraceOptions;

#[derive(Debug, Parser)]
#[command(name = "hyplevel", version, about = "Level curves of holomorphic self-maps of the unit disc")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the boundary of Ω and write its samples.
    Trace(ProblemArgs),
    /// Per-sample curvatures with a finite-difference cross-check.
    Curvature(ProblemArgs),
    /// Evaluate every applicable pointwise curvature bound.
    Bounds(ProblemArgs),
    /// Hyperbolic area, perimeter and total curvature of a closed boundary.
    Measures(ProblemArgs),
    /// Radius of convexity of Ω(rf) by bisection on r.
    Radius(RadiusArgs),
    /// Bounds and measures for every problem of a corpus.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Map in the text syntax, e.g. "phi(0.5,0)" or "compose(kalpha(0.6),rot(1))".
    #[arg(long = "f", value_name = "MAP")]
    pub f: String,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Study Ω(rf) instead of Ω_λ(f).
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub trace: TraceArgs,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[arg(long = "f", value_name = "MAP")]
    pub f: String,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub trace: TraceArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `default` for the built-in corpus, otherwise a corpus file.
    #[arg(long, default_value = "default")]
    pub corpus: String,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub trace: TraceArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,json")]
    pub formats: Vec<Format>,
    /// Colour the SVG curve by hyperbolic curvature.
    #[arg(long)]
    pub color_kh: bool,
}

impl OutputArgs {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub angle_budget: Option<f64>,
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long)]
    pub edge_margin: Option<f64>,
    #[arg(long)]
    pub corrector_tol: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Keep the raw predictor-corrector samples of closed curves.
    #[arg(long)]
    pub no_resample: bool,
}

impl TraceArgs {
    pub fn options(&self) -> Result<TraceOptions, String> {
        let d = TraceOptions::default();
        let opts = TraceOptions {
            angle_budget: self.angle_budget.unwrap_or(d.angle_budget),
            h_min: self.h_min.unwrap_or(d.h_min),
            h_max: self.h_max.unwrap_or(d.h_max),
            edge_margin: self.edge_margin.unwrap_or(d.edge_margin),
            corrector_tol: self.corrector_tol.unwrap_or(d.corrector_tol),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            resample: !self.no_resample,
            ..d
        };
        let positive = [opts.angle_budget, opts.h_min, opts.h_max, opts.edge_margin, opts.corrector_tol];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err("trace options must be positive".into());
        }
        if opts.h_min > opts.h_max {
            return Err("--h-min exceeds --h-max".into());
        }
        Ok(opts)
    }
}
