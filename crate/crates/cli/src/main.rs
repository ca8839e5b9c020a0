//! Command-line front end.
//!
//! Four subcommands cover the toolkit: `simulate` prints one labeled
//! scattering matrix, `sweep` writes response (and optionally noise)
//! curves as CSV, `optimize` searches plaquette parameters for deep
//! isolation, and `compose` reduces a netlist of ideal elements.
//!
//! Every run is a pure function of the config file and flags: numbers
//! are printed at fixed precision, grids and the optimizer are
//! deterministic, and file-writing subcommands leave a manifest with
//! the config hash next to their output. Exit codes: 0 success, 1
//! invalid input, 2 numerical singularity, 3 synthesis did not reach
//! its target.

use std::env;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use modeflux::config;
use modeflux::design::{
    isolation_metrics, optimize_scheme_c, scheme_c_from_system, OptimizeOptions, SearchBounds,
};
use modeflux::dynamics::{scattering, sweep, ResponseCurve};
use modeflux::gauge::is_nonreciprocal;
use modeflux::noise::{noise_spectrum, port_occupancies, NoiseSpectrum};
use modeflux::system::PortKind;
use modeflux::{Error, Result, ValidatedSystem};

#[derive(Parser)]
#[command(
    name = "modeflux",
    version,
    about = "Simulate and synthesize nonreciprocal coupled-mode networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the labeled scattering matrix at one probe detuning.
    Simulate(SimulateArgs),
    /// Sweep a detuning grid and write the response as CSV.
    Sweep(SweepArgs),
    /// Search plaquette parameters for deep isolation.
    Optimize(OptimizeArgs),
    /// Reduce a netlist of ideal elements to its external scattering.
    Compose(ComposeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// System description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Probe detuning from the window center, rad/s.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    /// Comma-separated port labels restricting the table.
    #[arg(long)]
    ports: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// System description (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    delta_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    delta_max: f64,
    /// Grid points, at least 2.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// CSV destination; a manifest lands next to it.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated `out<-in` pairs selecting the response columns.
    #[arg(long)]
    ports: Option<String>,
    /// Append output-noise columns fed by the declared bath occupancies.
    #[arg(long)]
    noise: bool,
    /// Isolation threshold for the bandwidth summary, dB.
    #[arg(long, default_value_t = 20.0)]
    threshold_db: f64,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Plaquette system description (TOML) supplying the fixed rates.
    #[arg(long)]
    config: PathBuf,
    /// Flux search interval, `lo:hi` in radians.
    #[arg(long, value_parser = parse_span)]
    flux: (f64, f64),
    /// Oscillator splitting search interval, `lo:hi` in rad/s.
    #[arg(long, value_parser = parse_span)]
    splitting: (f64, f64),
    /// Cooperativity search interval, `lo:hi`.
    #[arg(long, value_parser = parse_span)]
    cooperativity: (f64, f64),
    #[arg(long, default_value_t = 40.0)]
    target_depth_db: f64,
    #[arg(long, default_value_t = 3.0)]
    max_loss_db: f64,
    /// Seed-grid points per search axis.
    #[arg(long, default_value_t = 7)]
    seed_grid: usize,
    #[arg(long, default_value_t = 400)]
    max_iterations: usize,
    /// Report destination; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    /// Netlist description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Extra `component.port` addresses to terminate into matched loads.
    #[arg(long)]
    terminate: Vec<String>,
}

fn parse_span(raw: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = raw
        .split_once(':')
        .ok_or_else(|| format!("expected `lo:hi`, got `{raw}`"))?;
    let lo: f64 = lo.parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("`{hi}` is not a number"))?;
    Ok((lo, hi))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            process::exit(code);
        }
    };
    if let Err(message) = configure_workers() {
        eprintln!("error: {message}");
        process::exit(1);
    }
    match run(cli) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            process::exit(exit_code(&err));
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Compose(args) => cmd_compose(args),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SingularResponse { .. } | Error::SingularNetwork(_) => 2,
        _ => 1,
    }
}

/// `MODEFLUX_WORKERS` caps the sweep worker pool; unset means one
/// worker per core.
fn configure_workers() -> std::result::Result<(), String> {
    let raw = match env::var("MODEFLUX_WORKERS") {
        Ok(raw) => raw,
        Err(env::VarError::NotPresent) => return Ok(()),
        Err(err) => return Err(format!("MODEFLUX_WORKERS: {err}")),
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MODEFLUX_WORKERS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|err| err.to_string())
}

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|err| Error::Config(format!("cannot read `{}`: {err}", path.display())))
}

fn load_system(path: &Path) -> Result<(String, ValidatedSystem)> {
    let text = read_config(path)?;
    let (spec, _) = config::parse_report(&text)?;
    Ok((text, spec.validate()?))
}

/// Fixed six-decimal rendering with `-0.000000` folded into zero so
/// reruns are byte-identical.
fn num(x: f64) -> String {
    let rendered = format!("{x:.6}");
    if rendered == "-0.000000" { "0.000000".into() } else { rendered }
}

fn print_matrix(m: &DMatrix<Complex64>, labels: &[String], selection: &[usize], delta: Option<f64>) {
    let suffix = match delta {
        Some(delta) => format!(" at delta = {}", num(delta)),
        None => String::new(),
    };
    let label_width = selection.iter().map(|&i| labels[i].len()).max().unwrap_or(1);
    let column = label_width.max(10) + 2;
    for (title, phase) in [("|S|", false), ("arg S (rad)", true)] {
        println!("{title}{suffix}");
        let mut header = " ".repeat(label_width);
        for &k in selection {
            header.push_str(&format!("{:>column$}", labels[k]));
        }
        println!("{header}");
        for &j in selection {
            let mut row = format!("{:<label_width$}", labels[j]);
            for &k in selection {
                let z = m[(j, k)];
                let cell = if phase { num(z.arg()) } else { num(z.norm()) };
                row.push_str(&format!("{cell:>column$}"));
            }
            println!("{row}");
        }
    }
}

fn print_verdict(m: &DMatrix<Complex64>) {
    let verdict = is_nonreciprocal(m, 1e-9);
    match verdict.witness {
        Some((j, k)) => println!(
            "nonreciprocal: yes (ports {j} and {k}, asymmetry {})",
            num(verdict.asymmetry)
        ),
        None => println!("nonreciprocal: no"),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let (_, system) = load_system(&args.config)?;
    let point = scattering(&system, args.delta)?;
    let ports = point.ports();
    let labels: Vec<String> = ports.labels().map(String::from).collect();
    let selection: Vec<usize> = match &args.ports {
        Some(list) => list
            .split(',')
            .map(|label| ports.index(label.trim()))
            .collect::<Result<_>>()?,
        None => (0..ports.len()).collect(),
    };
    print_matrix(point.matrix(), &labels, &selection, Some(args.delta));
    print_verdict(point.matrix());
    Ok(0)
}

fn response_pairs(
    curve: &ResponseCurve,
    requested: Option<&str>,
) -> Result<Vec<(usize, usize)>> {
    let ports = curve.ports();
    match requested {
        Some(list) => list
            .split(',')
            .map(|pair| {
                let (out, input) = pair.trim().split_once("<-").ok_or_else(|| {
                    Error::Config(format!("port pair must look like `out<-in`, got `{pair}`"))
                })?;
                Ok((ports.index(out.trim())?, ports.index(input.trim())?))
            })
            .collect(),
        None => {
            let n = ports.n_external;
            Ok((0..n).flat_map(|out| (0..n).map(move |input| (out, input))).collect())
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let (text, system) = load_system(&args.config)?;
    let curve = sweep(&system, args.delta_min, args.delta_max, args.points)?;
    let pairs = response_pairs(&curve, args.ports.as_deref())?;

    let spectra: Vec<NoiseSpectrum> = if args.noise {
        let occupancies = port_occupancies(&system);
        let ports = curve.ports();
        let sources: Vec<usize> =
            (0..ports.len()).filter(|&p| ports.ports[p].kind == PortKind::Bath).collect();
        let mut outs: Vec<usize> = Vec::new();
        for &(out, _) in &pairs {
            if !outs.contains(&out) {
                outs.push(out);
            }
        }
        outs.iter().map(|&out| noise_spectrum(&curve, &occupancies, out, &sources)).collect()
    } else {
        Vec::new()
    };

    let mut file = fs::File::create(&args.out)
        .map_err(|err| Error::Config(format!("cannot write `{}`: {err}", args.out.display())))?;
    curve
        .write_csv(&pairs, &spectra, &mut file)
        .and_then(|()| file.flush())
        .map_err(|err| Error::Config(format!("cannot write `{}`: {err}", args.out.display())))?;

    let labels: Vec<String> = curve.ports().labels().map(String::from).collect();
    for &(out, input) in &pairs {
        if out == input {
            continue;
        }
        let metrics = isolation_metrics(&curve, out, input, args.threshold_db);
        let bandwidth = match metrics.bandwidth {
            Some(bandwidth) => num(bandwidth),
            None => "n/a".into(),
        };
        println!(
            "isolation[{}<-{}]: {} dB at center, forward loss {} dB, {} dB bandwidth {}",
            labels[out],
            labels[input],
            num(metrics.isolation_db),
            num(metrics.forward_loss_db),
            num(args.threshold_db),
            bandwidth
        );
    }

    let outputs = [args.out.clone()];
    write_manifest("sweep", &args.config, &text, &outputs)?;
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn cmd_optimize(args: OptimizeArgs) -> Result<i32> {
    let (text, system) = load_system(&args.config)?;
    let base = scheme_c_from_system(&system)?;
    let bounds = SearchBounds {
        flux: args.flux,
        splitting: args.splitting,
        cooperativity: args.cooperativity,
    };
    let options = OptimizeOptions {
        target_depth_db: args.target_depth_db,
        max_loss_db: args.max_loss_db,
        seed_grid: args.seed_grid,
        max_iterations: args.max_iterations,
        ..OptimizeOptions::default()
    };
    let result = optimize_scheme_c(&base, &bounds, &options)?;
    let report = config::design_report(&result);
    match &args.out {
        Some(path) => {
            fs::write(path, &report)
                .map_err(|err| Error::Config(format!("cannot write `{}`: {err}", path.display())))?;
            let outputs = [path.clone()];
            write_manifest("optimize", &args.config, &text, &outputs)?;
            println!("wrote {}", path.display());
        }
        None => print!("{report}"),
    }
    println!(
        "isolation {} dB, forward loss {} dB, flux {}, splitting {}, cooperativity {}",
        num(result.isolation_db),
        num(result.loss_db),
        num(result.params.flux),
        num(result.params.splitting),
        num(result.params.cooperativity)
    );
    if result.converged && result.meets_target {
        println!("target met");
        Ok(0)
    } else {
        println!(
            "target missed: converged {}, depth {} dB against a {} dB goal",
            result.converged,
            num(result.isolation_db),
            num(args.target_depth_db)
        );
        Ok(3)
    }
}

fn cmd_compose(args: ComposeArgs) -> Result<i32> {
    let text = read_config(&args.config)?;
    let mut netlist = config::parse_netlist(&text)?;
    for address in &args.terminate {
        netlist.terminate(address)?;
    }
    let reduced = netlist.reduce()?;
    let selection: Vec<usize> = (0..reduced.port_labels.len()).collect();
    print_matrix(reduced.matrix(), &reduced.port_labels, &selection, None);
    print_verdict(reduced.matrix());
    Ok(0)
}

#[derive(Serialize)]
struct RunManifest {
    schema: &'static str,
    version: &'static str,
    command: &'static str,
    config: String,
    config_sha256: String,
    invocation: Vec<String>,
    outputs: Vec<String>,
}

/// Drops a `<out>.manifest.toml` beside the first output recording what
/// produced it. Reruns with the same config bytes and flags rewrite the
/// same bytes.
fn write_manifest(
    command: &'static str,
    config: &Path,
    config_text: &str,
    outputs: &[PathBuf],
) -> Result<()> {
    let digest = Sha256::digest(config_text.as_bytes());
    let mut hash = String::with_capacity(64);
    for byte in digest {
        hash.push_str(&format!("{byte:02x}"));
    }
    let manifest = RunManifest {
        schema: "modeflux/manifest/1",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: config.display().to_string(),
        config_sha256: hash,
        invocation: env::args().skip(1).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let text = toml::to_string(&manifest).expect("manifests always serialize");
    let mut path = outputs[0].as_os_str().to_owned();
    path.push(".manifest.toml");
    let path = PathBuf::from(path);
    fs::write(&path, text)
        .map_err(|err| Error::Config(format!("cannot write `{}`: {err}", path.display())))
}
