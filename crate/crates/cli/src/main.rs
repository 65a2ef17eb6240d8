mod config;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use se2n_core::diffusion::block_signature;
use se2n_core::kernel::{comparison_csv, square_grid, KernelFormula, KernelTable};
use se2n_core::lift::{lift, project_max, project_mean};
use se2n_core::pipeline::inpaint;
use se2n_core::pnm::{read_image, read_mask, write_image, write_mask, PgmEncoding};
use se2n_core::restore::diagnostics_csv;
use se2n_core::stackio::{read_stack, write_stack};
use se2n_core::synth::{corrupt, grid_mask, smooth_field};
use se2n_core::verify::{report_table, run_suites, Suite, VerifyOptions};
use se2n_core::Error;

use config::{parse_pairs, RunConfig};

#[derive(Parser)]
#[command(name = "se2n", version, about = "Hypoelliptic diffusion on SE(2,N) for image inpainting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore the bad pixels of an image and write the reconstruction.
    Inpaint(Common),
    /// Tabulate the heat kernel by both formulas and their difference.
    Kernel(KernelArgs),
    /// Lift an image to an orientation stack (SE2N file).
    Lift(Common),
    /// Project an SE2N stack back to a PGM image.
    Project(ProjectArgs),
    /// Run the numerical self-checks and print a pass/fail table.
    Verify(VerifyArgs),
    /// Write a seeded smooth test image, a grid mask and the corrupted image.
    Synth(SynthArgs),
}

/// Flags shared by every subcommand; each maps to a configuration key.
#[derive(Args, Default)]
struct Common {
    /// key=value configuration file, applied before the flags
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    dump_config: bool,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    mask: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    angles: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    time: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// plain, static or dynamic
    #[arg(long)]
    mode: Option<String>,
    /// exact or cn
    #[arg(long)]
    integrator: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    sigma_smooth: Option<String>,
    #[arg(long)]
    flat_threshold: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Per-interval diagnostics CSV
    #[arg(long)]
    diagnostics: Option<String>,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    common: Common,
    /// Jump rate; defaults to alpha (N/2pi)^2
    #[arg(long)]
    beta: Option<String>,
    /// Points per side of the z grid
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    half_width: Option<String>,
    #[arg(long)]
    lambda_max: Option<String>,
    #[arg(long)]
    n_lambda: Option<String>,
    #[arg(long)]
    n_nu: Option<String>,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    common: Common,
    /// max or mean
    #[arg(long, default_value = "max")]
    projection: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Suites to run (comma separated); all by default
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// Direction counts for the kernel identity suite
    #[arg(long = "N", value_delimiter = ',')]
    n: Vec<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    line_width: Option<String>,
    /// Corrupted fraction in [0, 1)
    #[arg(long)]
    coverage: Option<String>,
    /// Where to write the corrupted image
    #[arg(long)]
    corrupted: Option<PathBuf>,
}

/// Exit classes: IO problems 2, invalid parameters or violated invariants 3, failed checks 1.
enum Failure {
    Io(String),
    Invalid(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Io(_) => 2,
            Failure::Invalid(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Invalid(m) | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        pairs(&[
            ("preset", &self.preset),
            ("input", &self.input),
            ("mask", &self.mask),
            ("output", &self.output),
            ("angles", &self.angles),
            ("alpha", &self.alpha),
            ("time", &self.time),
            ("steps", &self.steps),
            ("epsilon", &self.epsilon),
            ("mode", &self.mode),
            ("integrator", &self.integrator),
            ("tau", &self.tau),
            ("sigma-smooth", &self.sigma_smooth),
            ("flat-threshold", &self.flat_threshold),
            ("threads", &self.threads),
            ("seed", &self.seed),
            ("diagnostics", &self.diagnostics),
        ])
    }

    /// Resolves the configuration; `Ok(None)` means `--dump-config` already printed it.
    fn resolve(&self, extra: Vec<(String, String)>, check_inputs: bool) -> Result<Option<RunConfig>, Failure> {
        let mut layers = Vec::new();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            layers.push(parse_pairs(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?);
        }
        let mut flags = self.overrides();
        flags.extend(extra);
        layers.push(flags);
        let cfg = RunConfig::from_layers(&layers).map_err(Failure::Invalid)?;
        if self.dump_config {
            print!("{}", cfg.dump());
            return Ok(None);
        }
        for p in [&cfg.input, &cfg.mask].into_iter().flatten().filter(|_| check_inputs) {
            if !p.exists() {
                return Err(Failure::Io(format!("{}: no such file", p.display())));
            }
        }
        if let Some(k) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| Failure::Invalid(format!("thread pool: {e}")))?;
        }
        Ok(Some(cfg))
    }
}

fn pairs(items: &[(&str, &Option<String>)]) -> Vec<(String, String)> {
    items.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf, Failure> {
    p.as_ref().ok_or_else(|| Failure::Io(format!("missing --{flag}")))
}

fn load_image(cfg: &RunConfig) -> Result<se2n_core::GreyImage, Failure> {
    let input = required(&cfg.input, "input")?;
    let mask = cfg.mask.as_ref().map(read_mask).transpose()?;
    Ok(read_image(input, mask)?)
}

fn block_reuse_factor(m: usize) -> f64 {
    let distinct: HashSet<_> = (0..m * m).map(|b| block_signature(b % m, b / m, m)).collect();
    (m * m) as f64 / distinct.len() as f64
}

fn cmd_inpaint(common: &Common) -> Outcome {
    let Some(cfg) = common.resolve(Vec::new(), true)? else { return Ok(()) };
    let output = required(&cfg.output, "output")?;
    let img = load_image(&cfg)?;
    let p = cfg.params(img.size());
    let out = inpaint(&img, &p)?;
    write_image(output, &out.image, PgmEncoding::Binary)?;
    if let Some(path) = &cfg.diagnostics {
        fs::write(path, diagnostics_csv(&out.restoration.diagnostics)).map_err(io_err(path))?;
    }
    let d = &out.restoration.diagnostics;
    eprintln!(
        "good set {} -> {}, max mass drift {:.2e}, max imaginary residue {:.2e}, block reuse {:.2}",
        out.restoration.history.first().copied().unwrap_or(0),
        out.restoration.history.last().copied().unwrap_or(0),
        d.iter().map(|r| r.mass_drift).fold(0.0, f64::max),
        d.iter().map(|r| r.imag_residual).fold(0.0, f64::max),
        block_reuse_factor(img.size()),
    );
    Ok(())
}

fn cmd_kernel(args: &KernelArgs) -> Outcome {
    let extra = pairs(&[
        ("beta", &args.beta),
        ("grid", &args.grid),
        ("half-width", &args.half_width),
        ("lambda-max", &args.lambda_max),
        ("n-lambda", &args.n_lambda),
        ("n-nu", &args.n_nu),
    ]);
    let Some(cfg) = args.common.resolve(extra, true)? else { return Ok(()) };
    let points = square_grid(cfg.grid, cfg.half_width);
    let beta = cfg.kernel_beta();
    let gft = KernelTable::compute(KernelFormula::Gft, cfg.time, cfg.angles, beta, &cfg.quadrature, points.clone())?;
    let direct = KernelTable::compute(KernelFormula::Direct, cfg.time, cfg.angles, beta, &cfg.quadrature, points)?;
    let csv = comparison_csv(&gft, &direct);
    match &cfg.output {
        Some(path) => fs::write(path, csv).map_err(io_err(path))?,
        None => print!("{csv}"),
    }
    let gap = gft.values.iter().zip(&direct.values).map(|(a, b)| (a.value - b.value).abs()).fold(0.0, f64::max);
    eprintln!("N={} beta={beta} t={}: max |gft - direct| = {gap:.3e}", cfg.angles, cfg.time);
    Ok(())
}

fn cmd_lift(common: &Common) -> Outcome {
    let Some(cfg) = common.resolve(Vec::new(), true)? else { return Ok(()) };
    let output = required(&cfg.output, "output")?;
    let img = load_image(&cfg)?;
    let stack = lift(&img, &cfg.params(img.size()))?;
    write_stack(output, &stack)?;
    Ok(())
}

fn cmd_project(args: &ProjectArgs) -> Outcome {
    let Some(cfg) = args.common.resolve(Vec::new(), true)? else { return Ok(()) };
    let input = required(&cfg.input, "input")?;
    let output = required(&cfg.output, "output")?;
    let stack = read_stack(input)?;
    let img = match args.projection.as_str() {
        "max" => project_max(&stack, None)?,
        "mean" => project_mean(&stack, None)?,
        other => return Err(Failure::Invalid(format!("unknown projection {other:?}"))),
    };
    write_image(output, &img, PgmEncoding::Binary)?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    if args.common.resolve(Vec::new(), true)?.is_none() {
        return Ok(());
    }
    let suites = if args.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suite.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>, _>>()?
    };
    let mut opts = VerifyOptions::default();
    if !args.n.is_empty() {
        opts.kernel_angles = args.n.clone();
    }
    let reports = run_suites(&suites, &opts)?;
    print!("{}", report_table(&reports));
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite.name()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("failed suites: {}", failed.join(", "))))
    }
}

fn cmd_synth(args: &SynthArgs) -> Outcome {
    let extra = pairs(&[("size", &args.size), ("line-width", &args.line_width), ("coverage", &args.coverage)]);
    let Some(cfg) = args.common.resolve(extra, false)? else { return Ok(()) };
    let original = smooth_field(cfg.size, cfg.seed)?;
    let mask = grid_mask(cfg.size, cfg.line_width, cfg.coverage)?;
    if let Some(path) = &cfg.output {
        write_image(path, &original, PgmEncoding::Binary)?;
    }
    if let Some(path) = &cfg.mask {
        write_mask(path, &mask, PgmEncoding::Binary)?;
    }
    if let Some(path) = &args.corrupted {
        write_image(path, &corrupt(&original, &mask)?, PgmEncoding::Binary)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Inpaint(c) => cmd_inpaint(c),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Lift(c) => cmd_lift(c),
        Command::Project(a) => cmd_project(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("se2n: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
