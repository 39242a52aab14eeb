use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "binned-bosons", version)]
#[command(about = "Binned photon-number distributions and sampler validation for boson samplers")]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "BINNED_BOSONS_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

/// Where the Gram matrix comes from: a file, or a uniform pairwise overlap.
#[derive(Args, Clone, Debug)]
pub struct GramArgs {
    /// Gram matrix JSON file.
    #[arg(long, conflicts_with = "x")]
    pub gram: Option<PathBuf>,
    /// Uniform pairwise overlap in [0, 1]; needs --n.
    #[arg(long)]
    pub x: Option<f64>,
    /// Photon number, used with --x.
    #[arg(long)]
    pub n: Option<usize>,
}

/// A directory of unitary files, or a freshly drawn Haar ensemble.
#[derive(Args, Clone, Debug)]
pub struct EnsembleArgs {
    /// Directory of unitary JSON files, read in file-name order.
    #[arg(long, conflicts_with_all = ["m", "count"])]
    pub ensemble: Option<PathBuf>,
    /// Modes of a drawn ensemble.
    #[arg(long)]
    pub m: Option<usize>,
    /// Size of a drawn ensemble.
    #[arg(long)]
    pub count: Option<usize>,
    /// Root seed of a drawn ensemble.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Gurvits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    Bosonic,
    Model,
}

#[derive(Subcommand)]
enum Command {
    /// Draw Haar-random unitaries into a directory.
    HaarGen {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw synthetic click patterns from the exact output distribution.
    Simulate {
        #[arg(long)]
        unitary: PathBuf,
        #[command(flatten)]
        gram: GramArgs,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Binned photon-number distribution of one partition.
    Bin {
        #[arg(long)]
        unitary: PathBuf,
        #[command(flatten)]
        gram: GramArgs,
        /// Bins separated by `|`, modes by `,`; `rest` is every other mode.
        #[arg(long)]
        partition: String,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Target additive error per permanent for the randomized method.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Samples per grid point; overrides --eps.
        #[arg(long)]
        samples_per_point: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generalized bunching probability of a subset of modes.
    Gbp {
        #[arg(long)]
        unitary: PathBuf,
        #[command(flatten)]
        gram: GramArgs,
        #[arg(long)]
        subset: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Binned TVDs of a sample file against theory; exit code 2 above the threshold.
    Validate {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        unitary: PathBuf,
        #[command(flatten)]
        gram: GramArgs,
        /// Partitions separated by `;`, or `all1`, `all2`, `all`.
        #[arg(long, default_value = "all")]
        partitions: String,
        /// Fail when the worst-case binned TVD exceeds this value.
        #[arg(long)]
        fail_above: Option<f64>,
        /// Reference used with --fail-above.
        #[arg(long, value_enum, default_value_t = Reference::Model)]
        against: Reference,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ensemble-mean TVD to indistinguishable photons across uniform overlaps.
    SweepTvd {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Overlap grid, e.g. `0:1:0.01` or `0,0.5,1`.
        #[arg(long, default_value = "0:1:0.05")]
        x_grid: String,
        /// Repeatable.
        #[arg(long, required = true)]
        partition: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ensemble-mean single-bin variance next to the closed forms.
    VarianceScan {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Bin sizes; bin of size k is modes 1..k.
        #[arg(long, default_value = "1,2")]
        bins: String,
        #[arg(long, default_value = "0,0.25,...,1")]
        x: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean amplitude fidelity of the interpolated-noise model.
    NoiseScan {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "0:1:0.02")]
        eps: String,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-photon coincidence dip against relative delay.
    HomCurve {
        #[arg(long, default_value = "-300:300:10", allow_hyphen_values = true)]
        delays: String,
        /// Temporal width of each photon, in the units of --delays.
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bunching-probability differences over an ensemble and random Gram matrices.
    GbpScan {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        subset: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Number of random real Gram matrices.
        #[arg(long, default_value_t = 50)]
        grams: usize,
        #[arg(long, default_value_t = 1)]
        gram_seed: u64,
        /// Noise strength on the partially distinguishable side.
        #[arg(long)]
        noise_eps: Option<f64>,
        #[arg(long, default_value_t = 2)]
        noise_seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Per-Gram-matrix summary CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Ensemble-mean binned distribution next to the uniform sampler.
    AvgDist {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        gram: GramArgs,
        #[arg(long)]
        partition: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Histogram over an ensemble of binned TVDs to indistinguishable photons.
    TvdHist {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        gram: GramArgs,
        #[arg(long, default_value = "all")]
        partitions: String,
        #[arg(long, default_value_t = 20)]
        buckets: usize,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 0.2)]
        hi: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit codes: 0 success, 1 error, 2 validation threshold exceeded.
fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: cannot configure {} threads: {e}", cli.threads);
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(false)` means a validation threshold was exceeded.
fn run(command: Command) -> anyhow::Result<bool> {
    use commands as c;
    match command {
        Command::HaarGen { m, count, seed, out } => c::haar_gen(m, count, seed, &out)?,
        Command::Simulate {
            unitary,
            gram,
            samples,
            seed,
            out,
        } => c::simulate(&unitary, &gram, samples, seed, &out)?,
        Command::Bin {
            unitary,
            gram,
            partition,
            method,
            eps,
            samples_per_point,
            seed,
            out,
        } => c::bin(&unitary, &gram, &partition, method, eps, samples_per_point, seed, &out)?,
        Command::Gbp {
            unitary,
            gram,
            subset,
            out,
        } => c::gbp(&unitary, &gram, &subset, &out)?,
        Command::Validate {
            samples,
            unitary,
            gram,
            partitions,
            fail_above,
            against,
            out,
        } => return c::validate(&samples, &unitary, &gram, &partitions, fail_above, against, &out),
        Command::SweepTvd {
            ensemble,
            n,
            x_grid,
            partition,
            out,
        } => c::sweep_tvd(&ensemble, n, &x_grid, &partition, &out)?,
        Command::VarianceScan {
            ensemble,
            n,
            bins,
            x,
            out,
        } => c::variance_scan(&ensemble, n, &bins, &x, &out)?,
        Command::NoiseScan {
            m,
            eps,
            draws,
            seed,
            out,
        } => c::noise_scan(m, &eps, draws, seed, &out)?,
        Command::HomCurve { delays, sigma, out } => c::hom_curve(&delays, sigma, &out)?,
        Command::GbpScan {
            ensemble,
            subset,
            n,
            grams,
            gram_seed,
            noise_eps,
            noise_seed,
            out,
            summary,
        } => c::gbp_scan(
            &ensemble,
            &subset,
            n,
            grams,
            gram_seed,
            noise_eps.map(|e| (e, noise_seed)),
            &out,
            summary.as_deref(),
        )?,
        Command::AvgDist {
            ensemble,
            gram,
            partition,
            out,
        } => c::avg_dist(&ensemble, &gram, &partition, &out)?,
        Command::TvdHist {
            ensemble,
            gram,
            partitions,
            buckets,
            lo,
            hi,
            out,
        } => c::tvd_hist(&ensemble, &gram, &partitions, buckets, lo, hi, &out)?,
    }
    Ok(true)
}
