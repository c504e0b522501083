use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ripforge::dictionaries::{cdf97_dictionary, extract_patches, ksvd_learn, KsvdConfig};
use ripforge::ensembles::{draw_ensemble, EnsembleKind};
use ripforge::factorize::{factorize, Construction};
use ripforge::harness::{
    emit_plot_data, finite_or_label, load_toml, mask_for, parse_phase_csv, phase_svg, read_image,
    run_mri_benchmark, run_phase_transition, write_image, ExperimentRecord, Image, PhaseRow,
    PhaseTransitionConfig,
};
use ripforge::linalg::matfile::{read_cmat, read_mat, write_cmat, write_mat};
use ripforge::mri::{image_metrics, reconstruct, simulate_kspace, zero_fill, AccelMask, Method, MriParams};
use ripforge::{Error, Seed};

#[derive(Parser)]
#[command(name = "rip-forge", version, about = "Sensing matrices for prescribed dictionaries, and MRI recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a dictionary as D = G·A·H against a random ensemble.
    Factorize(FactorizeArgs),
    /// Build or learn a sparsifying dictionary.
    #[command(subcommand)]
    Dict(DictCommand),
    /// Run a phase-transition sweep.
    Phase(PhaseArgs),
    /// Accelerated-MRI reconstruction.
    #[command(subcommand)]
    Mri(MriCommand),
    /// Render a phase-transition CSV or JSON record as SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Gaussian,
    Bernoulli,
}

impl From<EnsembleArg> for EnsembleKind {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Gaussian => EnsembleKind::Gaussian,
            EnsembleArg::Bernoulli => EnsembleKind::Bernoulli,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionArg {
    Spectral,
    Range,
    Tight,
}

impl From<ConstructionArg> for Construction {
    fn from(c: ConstructionArg) -> Self {
        match c {
            ConstructionArg::Spectral => Construction::Spectral,
            ConstructionArg::Range => Construction::Range,
            ConstructionArg::Tight => Construction::TightFrame,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Proposed,
    Tv,
    ZeroFill,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Proposed => Method::Proposed,
            MethodArg::Tv => Method::Tv,
            MethodArg::ZeroFill => Method::ZeroFill,
        }
    }
}

#[derive(Args)]
struct FactorizeArgs {
    /// Dictionary in RFMX format.
    #[arg(long)]
    dict: PathBuf,
    #[arg(long, value_enum, default_value = "gaussian")]
    ensemble: EnsembleArg,
    #[arg(long, value_enum, default_value = "spectral")]
    method: ConstructionArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; writes `<stem>.G.rfmx`, `<stem>.A.rfmx`, `<stem>.H.rfmx`
    /// and `<stem>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum DictCommand {
    /// Shifted CDF 9/7 wavelets completed with Gaussian columns.
    BuildWavelet {
        #[arg(long)]
        len: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// K-SVD dictionary learned from image patches.
    LearnKsvd {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 16)]
        patch: usize,
        #[arg(long, default_value_t = 4)]
        stride: usize,
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = 8)]
        sparsity: usize,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Paper,
}

#[derive(Args)]
struct PhaseArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base configuration when no TOML file is given.
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    #[arg(long, value_enum)]
    method: Option<ConstructionArg>,
    /// Sparsity levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// CS ratios m/n, comma separated.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dictionary in RFMX format, replacing the configured source.
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum MriCommand {
    /// Reconstruct one image from retrospectively undersampled k-space.
    Recover(RecoverArgs),
    /// Run every method at several accelerations over a set of images.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct RecoverArgs {
    /// Fully sampled reference image (PGM or PNG).
    #[arg(long, conflicts_with = "kspace", required_unless_present = "kspace")]
    image: Option<PathBuf>,
    /// Fully sampled complex k-space (RFMX) with unitary DFT scaling.
    #[arg(long)]
    kspace: Option<PathBuf>,
    /// Acceleration: 4 or 8, or 1 for full sampling.
    #[arg(long, default_value_t = 4)]
    accel: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "proposed")]
    method: MethodArg,
    /// MRI parameters as TOML.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Reference images (PGM or PNG); a 128×128 phantom when none given.
    #[arg(long)]
    image: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "4,8")]
    accel: Vec<u32>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "zero-fill,tv,proposed")]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Phase CSV or JSON experiment record.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for configuration and input problems, 3 for numerical failures.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if !err.is_config() => 3,
        Some(_) => 2,
        None if e.downcast_ref::<serde_json::Error>().is_some() => 2,
        None if e.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 3,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Factorize(args) => cmd_factorize(args),
        Command::Dict(cmd) => cmd_dict(cmd),
        Command::Phase(args) => cmd_phase(args),
        Command::Mri(MriCommand::Recover(args)) => cmd_recover(args),
        Command::Mri(MriCommand::Benchmark(args)) => cmd_benchmark(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.with_extension("");
    PathBuf::from(format!("{}{suffix}", stem.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(Error::from)?;
    Ok(())
}

fn cmd_factorize(args: FactorizeArgs) -> anyhow::Result<()> {
    let d = read_mat(&args.dict)?;
    let (l, n) = d.shape();
    let a = draw_ensemble(args.ensemble.into(), l, n, Seed(args.seed));
    let fact = factorize(args.method.into(), &d, &a)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(Error::from)?;
    }
    write_mat(with_suffix(&args.out, ".G.rfmx"), &fact.g)?;
    write_mat(with_suffix(&args.out, ".A.rfmx"), &fact.a)?;
    write_mat(with_suffix(&args.out, ".H.rfmx"), &fact.h)?;
    write_json(
        &with_suffix(&args.out, ".json"),
        &json!({
            "construction": fact.construction,
            "ensemble": EnsembleKind::from(args.ensemble),
            "seed": args.seed,
            "rows": l,
            "cols": n,
            "residual": fact.residual,
            "orth_defect": fact.orth_defect,
            "cond_G": finite_or_label(fact.cond_g),
        }),
    )?;
    println!(
        "residual {:.3e}, orth_defect {:.3e}, cond(G) {:.3e}",
        fact.residual, fact.orth_defect, fact.cond_g
    );
    Ok(())
}

fn cmd_dict(cmd: DictCommand) -> anyhow::Result<()> {
    match cmd {
        DictCommand::BuildWavelet {
            len,
            levels,
            cols,
            seed,
            out,
        } => {
            let dict = cdf97_dictionary(len, levels, cols, Seed(seed))?;
            write_mat(&out, &dict.d)?;
            println!("wrote {}×{} dictionary to {}", len, cols, out.display());
        }
        DictCommand::LearnKsvd {
            image,
            patch,
            stride,
            atoms,
            sparsity,
            iters,
            seed,
            out,
        } => {
            let img = read_image(&image)?;
            let patches = extract_patches(&img.pixels, (patch, patch), (stride, stride))?;
            let cfg = KsvdConfig {
                atoms,
                sparsity,
                iters,
                error_goal: 1e-8,
                seed: Seed(seed),
            };
            let res = ksvd_learn(&patches.patches, &cfg)?;
            write_mat(&out, &res.dictionary)?;
            println!(
                "learned {} atoms from {} patches; final error {:.3e}",
                atoms,
                patches.count(),
                res.errors.last().copied().unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

fn cmd_phase(args: PhaseArgs) -> anyhow::Result<()> {
    let mut cfg: PhaseTransitionConfig = match &args.config {
        Some(p) => load_toml(p)?,
        None => match args.preset {
            Preset::Desk => PhaseTransitionConfig::desk(),
            Preset::Paper => PhaseTransitionConfig::paper(),
        },
    };
    if let Some(e) = args.ensemble {
        cfg.ensemble = e.into();
    }
    if let Some(c) = args.method {
        cfg.construction = c.into();
    }
    if let Some(k) = args.k {
        cfg.sparsity_levels = k;
    }
    if let Some(r) = args.ratios {
        cfg.cs_ratios = r;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = Seed(s);
    }
    if let Some(d) = args.dict {
        cfg.dict_source = ripforge::harness::DictSource::File;
        cfg.dict_file = Some(d);
    }
    let record = run_phase_transition(&cfg)?;
    fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    let (csv, svg) = emit_plot_data(&record)?;
    fs::write(args.out_dir.join("phase.csv"), csv).map_err(Error::from)?;
    fs::write(args.out_dir.join("phase.svg"), svg).map_err(Error::from)?;
    write_json(&args.out_dir.join("record.json"), &serde_json::to_value(&record)?)?;
    for p in &record.points {
        println!(
            "k={:<3} ratio={:<8} m={:<4} {:<9} p={:.3}",
            p.k,
            p.ratio,
            p.m,
            p.arm.name(),
            p.success_prob
        );
    }
    println!("{:.1}s total", record.wall_clock.total_seconds);
    Ok(())
}

fn load_params(path: Option<&Path>) -> anyhow::Result<MriParams> {
    let params = match path {
        Some(p) => load_toml(p)?,
        None => MriParams::default(),
    };
    params.validate()?;
    Ok(params)
}

fn cmd_recover(args: RecoverArgs) -> anyhow::Result<()> {
    let params = load_params(args.params.as_deref())?;
    let seed = Seed(args.seed);
    let (reference, full) = match (&args.image, &args.kspace) {
        (Some(p), None) => {
            let img = read_image(p)?;
            let full = simulate_kspace(&img.pixels, &AccelMask::full(img.pixels.rows()))?;
            (img.pixels, full)
        }
        (None, Some(p)) => {
            let full = read_cmat(p)?;
            (zero_fill(&full), full)
        }
        _ => bail!(Error::Config("exactly one of --image and --kspace is required".into())),
    };
    let mask = mask_for(full.rows(), args.accel, ripforge::harness::mask_seed(seed, args.accel))?;
    let y = full.scale_rows(&mask.weights());
    let method: Method = args.method.into();
    let rec = reconstruct(method, &y, &mask, &params, seed.derive(0x5EED))?;
    let metrics = image_metrics(&reference, &rec.z, 1.0)?;

    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(Error::from)?;
    write_image(&dir.join("recon.png"), &Image::new(rec.z.clone(), 16))?;
    if let Some(x) = &rec.x {
        write_mat(dir.join("coefficients.rfmx"), &x.x)?;
    }
    write_cmat(dir.join("kspace_masked.rfmx"), &y)?;
    fs::write(dir.join("traces.csv"), traces_csv(&rec.traces)).map_err(Error::from)?;
    write_json(
        &dir.join("metrics.json"),
        &json!({
            "psnr": finite_or_label(metrics.psnr),
            "ssim": finite_or_label(metrics.ssim),
            "accel": args.accel,
            "method": method,
            "seed": args.seed,
            "sampled_rows": mask.selected_count(),
            "params": params,
        }),
    )?;
    println!("{}: PSNR {:.2} dB, SSIM {:.4}", method.name(), metrics.psnr, metrics.ssim);
    Ok(())
}

/// Long format `trace,iteration,value`.
fn traces_csv(traces: &[(String, Vec<f64>)]) -> String {
    let mut out = String::from("trace,iteration,value\n");
    for (name, values) in traces {
        for (i, v) in values.iter().enumerate() {
            out.push_str(&format!("{name},{i},{v}\n"));
        }
    }
    out
}

fn cmd_benchmark(args: BenchmarkArgs) -> anyhow::Result<()> {
    let params = load_params(args.params.as_deref())?;
    let images = if args.image.is_empty() {
        vec![("phantom".to_string(), ripforge::harness::piecewise_smooth(128, 128))]
    } else {
        args.image
            .iter()
            .map(|p| -> anyhow::Result<(String, ripforge::Mat)> {
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "image".into());
                Ok((name, read_image(p).with_context(|| p.display().to_string())?.pixels))
            })
            .collect::<anyhow::Result<_>>()?
    };
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    let rows = run_mri_benchmark(&images, &args.accel, &methods, &params, Seed(args.seed), Some(&args.out_dir))?;
    for r in &rows {
        match &r.error {
            None => println!(
                "{} {}x {:<9} PSNR {:.2} SSIM {:.4} ({:.1}s)",
                r.image,
                r.accel,
                r.method.name(),
                r.psnr,
                r.ssim,
                r.seconds
            ),
            Some(e) => println!("{} {}x {:<9} failed: {e}", r.image, r.accel, r.method.name()),
        }
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.input).map_err(Error::from)?;
    let rows: Vec<PhaseRow> = if args.input.extension().is_some_and(|e| e == "json") {
        let record: ExperimentRecord = serde_json::from_str(&text)?;
        record.points.iter().map(PhaseRow::from).collect()
    } else {
        parse_phase_csv(&text)?
    };
    if rows.is_empty() {
        bail!(Error::Input("no points to plot".into()));
    }
    fs::write(&args.out, phase_svg(&rows)).map_err(Error::from)?;
    Ok(())
}
