mod commands;
mod workspace;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Piano key weir pipeline: sample designs, mesh them, sample surface point
/// clouds, label discharge coefficients, split, train and evaluate
/// surrogates.
#[derive(Parser, Debug)]
#[command(name = "pkweir", version, about)]
pub struct Cli {
    /// Workspace root holding params/, meshes/, clouds/, labels/, splits/,
    /// models/ and reports/
    #[arg(long, global = true, env = "PKWEIR_WORKSPACE", default_value = "workspace")]
    pub workspace: PathBuf,

    /// Worker threads for per-geometry stages (0 = all cores). Outputs do
    /// not depend on this value.
    #[arg(long, global = true, env = "PKWEIR_JOBS", default_value_t = 0)]
    pub jobs: usize,

    /// Replace artifacts that already exist
    #[arg(long, global = true)]
    pub force: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw feasible designs and write their parametric records
    Sample(SampleArgs),
    /// Build a closed STL solid for every sampled design
    Mesh(MeshArgs),
    /// Sample a surface point cloud from every design
    Cloud(CloudArgs),
    /// Attach discharge-coefficient labels and write the dataset manifest
    Label(LabelArgs),
    /// Partition the labelled dataset into train/val/test
    Split(SplitArgs),
    /// Fit a surrogate on the training partition of a split
    Train(TrainArgs),
    /// Score a trained surrogate on the test partition of its split
    Eval(EvalArgs),
    /// Run the full split matrix (ID, 6 OOD, 6 fractions) for each model
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Number of feasible designs
    #[arg(long)]
    pub n: usize,

    /// Master seed
    #[arg(long)]
    pub seed: u64,

    /// Grid steps: standard (5 mm, 0.05) or screening (coarse)
    #[arg(long, default_value = "standard")]
    pub grid: String,

    /// Override a variable box, NAME=LO:HI[:STEP]. Lengths (B_b, T_s,
    /// W_i_u, W_i_d) in mm, R_B_i unitless. Repeatable.
    #[arg(long = "bound", value_name = "NAME=LO:HI[:STEP]")]
    pub bounds: Vec<String>,
}

#[derive(Args, Debug)]
pub struct MeshArgs {
    /// Streamwise subdivisions of each sloped key floor
    #[arg(long, default_value_t = pkweir::solidmesh::DEFAULT_X_SEGMENTS)]
    pub segments: usize,
}

#[derive(Args, Debug)]
pub struct CloudArgs {
    /// Points per cloud
    #[arg(long, default_value_t = pkweir::pointcloud::DATASET_POINTS)]
    pub points: usize,

    /// Master seed
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct LabelArgs {
    /// Label source: `synthetic`, or `csv=<path>` with columns geometry_id,
    /// Q_lps and one of h_t_m, H_t_m or c_D
    #[arg(long)]
    pub oracle: String,

    /// Master seed (required for the synthetic oracle)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Noise standard deviation of the synthetic oracle
    #[arg(long, default_value_t = 0.005)]
    pub sigma: f64,

    /// Discharges in l/s, comma separated (synthetic oracle only)
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    /// id | ood-geom:<le2|3to5|ge6> | ood-head:<le90|100to160|ge170> |
    /// fraction:<f> (a subset of the ID split's training geometries)
    #[arg(long)]
    pub policy: String,

    /// Master seed
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// forest | gbm | tree | pointnet
    #[arg(long)]
    pub model: String,

    /// Split name as written by `split`, e.g. id or ood-geom-le2
    #[arg(long, default_value = "id")]
    pub split: String,

    /// Master seed
    #[arg(long)]
    pub seed: u64,

    /// Network training epochs (pointnet only)
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// forest | gbm | tree | pointnet
    #[arg(long)]
    pub model: String,

    /// Split name the model was trained on
    #[arg(long, default_value = "id")]
    pub split: String,

    /// Report MSE x1e5, R2 x1e2, MAE x1e3 and MaxAE x1e1 in the plain columns
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// `synthetic` samples and labels a fresh dataset; `csv=<path>` labels
    /// the workspace designs from a file
    #[arg(long, default_value = "synthetic")]
    pub oracle: String,

    /// Number of geometries (synthetic oracle)
    #[arg(long, default_value_t = 500)]
    pub n: usize,

    /// Master seed
    #[arg(long)]
    pub seed: u64,

    /// Noise standard deviation of the synthetic oracle
    #[arg(long, default_value_t = 0.005)]
    pub sigma: f64,

    /// Parametric models to benchmark, comma separated
    #[arg(long, value_delimiter = ',', default_value = "forest,gbm,tree")]
    pub models: Vec<String>,

    /// Report MSE x1e5, R2 x1e2, MAE x1e3 and MaxAE x1e1 in the plain columns
    #[arg(long)]
    pub paper_scale: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("{}", serde_json::json!({"status": "error", "kind": "setup", "message": e.to_string()}));
            return ExitCode::from(1);
        }
    }
    commands::run(cli)
}
