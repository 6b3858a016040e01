use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use curlkit_core::error::{Error, Result};
use curlkit_core::experiments::{
    convergence_suite, reference_cfl, run_problem, scheme_from_parts, write_convergence_csv, Problem, ProblemSpec,
};
use curlkit_core::linalg::{eigenvalues, CMatrix};
use curlkit_core::reconstruction::BubbleMode;
use curlkit_core::semidiscrete::{Family, SchemeSpec};
use curlkit_core::timeint::RkMethod;
use curlkit_core::upwind::Velocity;
use curlkit_core::vonneumann::{
    amplification, closed_form_a, assemble_a, cfl_by_angle, dispersion_sweep, max_cfl, stability_map,
    write_dispersion_csv, CflOptions, FourierMode,
};
use num_complex::Complex64;

mod config;

#[derive(Parser, Debug)]
#[command(name = "curlkit", version, about = "Stability analysis and test runs for curl-free advection schemes")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file; keys are long flag names, command-line flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the Fourier operator A, the amplification matrix G and their eigenvalues
    Matrix(MatrixArgs),
    /// Maximal CFL number of a scheme
    Cfl(CflArgs),
    /// Spectral radius of G over a (Cx, Cy) grid, as CSV
    StabilityMap(MapArgs),
    /// Dissipation and phase error against wave direction, as CSV
    Dispersion(DispersionArgs),
    /// Run one test problem
    Run(RunArgs),
    /// Run a test problem at several resolutions and report orders
    Convergence(ConvergenceArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BubbleArg {
    Zero,
    Stencil,
}

#[derive(Args, Debug)]
struct SchemeArgs {
    /// dg, p0pm (weno), p1pm (hweno) or pnpm
    #[arg(long, default_value = "dg")]
    scheme: String,
    /// Evolved degree N (implied by p0pm/p1pm, otherwise 1)
    #[arg(long, alias = "p")]
    n: Option<usize>,
    /// Reconstructed degree M (defaults to N)
    #[arg(long)]
    m: Option<usize>,
    /// rk1, ssprk2, ssprk3 or ssprk54 (defaults to the usual partner of M)
    #[arg(long, value_parser = parse_rk)]
    rk: Option<RkMethod>,
    /// Interior bubble at degree 3
    #[arg(long, value_enum, default_value = "stencil")]
    bubble: BubbleArg,
}

impl SchemeArgs {
    fn spec(&self) -> Result<SchemeSpec> {
        let bubble = match self.bubble {
            BubbleArg::Zero => BubbleMode::Zero,
            BubbleArg::Stencil => BubbleMode::Stencil,
        };
        let n = self.n.unwrap_or(match self.scheme.to_ascii_lowercase().as_str() {
            "p0pm" | "weno" => 0,
            _ => 1,
        });
        Ok(scheme_from_parts(&self.scheme, n, self.m, self.rk)?.with_bubble(bubble))
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sample (kxΔx, kyΔy) on [−π/2, π/2]² instead of [−π, π]²
    #[arg(long, conflicts_with = "full_nyquist")]
    half_range: bool,
    /// Sample (kxΔx, kyΔy) on [−π, π]² (the default)
    #[arg(long)]
    full_nyquist: bool,
    /// Wavenumber grid points per axis
    #[arg(long, default_value_t = 65)]
    k_points: usize,
    /// Velocity directions in [0, π/4]
    #[arg(long, default_value_t = 65)]
    angles: usize,
}

impl SweepArgs {
    fn options(&self) -> Result<CflOptions> {
        if self.k_points < 2 || self.angles < 1 {
            return Err(Error::InvalidArgument("need at least 2 k-points and 1 angle".into()));
        }
        Ok(CflOptions {
            angles: self.angles,
            k_points: self.k_points,
            full_nyquist: !self.half_range,
            ..CflOptions::default()
        })
    }
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Wavenumber kx (the mode phase per zone is kx·dx)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    kx: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ky: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    vx: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    vy: f64,
    #[arg(long, default_value_t = 1.0)]
    dx: f64,
    #[arg(long, default_value_t = 1.0)]
    dy: f64,
    /// Time step for G (omit to print A only)
    #[arg(long)]
    dt: Option<f64>,
    /// Compare eigenvalues with the closed-form second-order DG matrix
    #[arg(long)]
    oracle: bool,
}

#[derive(Args, Debug)]
struct CflArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Also write the per-direction limit as CSV
    #[arg(long, value_name = "FILE")]
    by_angle: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MapArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Grid extent: Cx, Cy ∈ [−c, c]
    #[arg(long, default_value_t = 1.0)]
    c_max: f64,
    /// Grid points per axis
    #[arg(long, default_value_t = 41)]
    points: usize,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DispersionArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Velocity direction in degrees
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    angle: f64,
    /// Wavelengths in zone widths, comma separated
    #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
    wavelength: Vec<f64>,
    /// CFL number (defaults to 0.9 of the tabulated limit)
    #[arg(long)]
    cfl: Option<f64>,
    /// Step of the wave-direction sweep in degrees
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// planewave or vortex
    #[arg(long, default_value = "planewave", value_parser = parse_problem)]
    problem: Problem,
    /// Final time (defaults to the problem's own)
    #[arg(long)]
    tf: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    vx: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    vy: f64,
    /// Maximal CFL number (defaults to the tabulated value)
    #[arg(long)]
    cfl: Option<f64>,
    /// Fraction of the maximal CFL number used for the time step
    #[arg(long, default_value_t = 0.95)]
    fraction: f64,
    /// Curl-monitor samples including both ends (0 disables)
    #[arg(long, default_value_t = 100)]
    snapshots: usize,
}

impl ProblemArgs {
    fn spec(&self, res: usize) -> Result<ProblemSpec> {
        let scheme = self.scheme.spec()?.with_fraction(self.fraction)?;
        let mut ps = ProblemSpec::new(self.problem, res, scheme).with_snapshots(self.snapshots);
        ps.v = Velocity::new(self.vx, self.vy);
        if let Some(tf) = self.tf {
            ps = ps.with_final_time(tf);
        }
        if let Some(c) = self.cfl {
            ps = ps.with_cfl(c);
        }
        Ok(ps)
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Zones per direction
    #[arg(long, default_value_t = 32)]
    res: usize,
    /// Directory for summary.txt and curl.csv
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Resolutions, comma separated
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    res: Vec<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn parse_rk(s: &str) -> std::result::Result<RkMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_problem(s: &str) -> std::result::Result<Problem, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_c(z: Complex64) -> String {
    format!("{:+.12e}{:+.12e}i", z.re, z.im)
}

fn print_matrix(w: &mut dyn Write, name: &str, m: &CMatrix) -> Result<()> {
    writeln!(w, "{name} ({}x{}):", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| fmt_c(m[(i, j)])).collect();
        writeln!(w, "  {}", row.join("  "))?;
    }
    Ok(())
}

/// Eigenvalues sorted by (re, im) so printed lists can be compared by eye.
fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Largest distance after greedily pairing each eigenvalue with its nearest partner.
fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut pool = b.to_vec();
    let mut worst: f64 = 0.0;
    for z in a {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (y - z).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("spectra of equal size");
        worst = worst.max(d);
        pool.remove(k);
    }
    worst
}

fn cmd_matrix(a: &MatrixArgs) -> Result<()> {
    let spec = a.scheme.spec()?;
    if a.dx <= 0.0 || a.dy <= 0.0 {
        return Err(Error::InvalidArgument("zone sizes must be positive".into()));
    }
    if a.oracle && !(spec.family == Family::Dg && spec.n == 1) {
        return Err(Error::InvalidArgument("--oracle needs the second-order DG scheme (--scheme dg --p 1)".into()));
    }
    let mode = FourierMode::new(a.kx * a.dx, a.ky * a.dy);
    let v = Velocity::new(a.vx, a.vy);
    let op = assemble_a(&spec, mode, v, a.dx, a.dy)?;
    let mut w = sink(None)?;
    writeln!(w, "scheme={spec}")?;
    writeln!(w, "dimension={}", op.dim())?;
    writeln!(w, "invariance_residual={:.3e}", op.invariance_residual)?;
    print_matrix(&mut *w, "A", &op.a)?;
    let eig_a = sorted(eigenvalues(&op.a)?);
    writeln!(w, "eigenvalues(A):")?;
    for z in &eig_a {
        writeln!(w, "  {}", fmt_c(*z))?;
    }
    if let Some(dt) = a.dt {
        let amp = amplification(&op, dt, spec.rk)?;
        print_matrix(&mut *w, "G", &amp.g)?;
        writeln!(w, "eigenvalues(G):")?;
        for z in sorted(amp.eigenvalues) {
            writeln!(w, "  {}", fmt_c(z))?;
        }
        writeln!(w, "spectral_radius={:.12}", amp.spectral_radius)?;
    }
    if a.oracle {
        let closed = closed_form_a(mode, v, a.dx, a.dy);
        if !closed.is_finite() {
            // its A31 entry is 0/0 there
            return Err(Error::InvalidArgument("the closed-form matrix is undefined at ky = 0 with kx = 0; pick a nonzero wavenumber".into()));
        }
        let eig_c = sorted(eigenvalues(&closed)?);
        print_matrix(&mut *w, "A_closed_form", &closed)?;
        writeln!(w, "eigenvalues(A_closed_form):")?;
        for z in &eig_c {
            writeln!(w, "  {}", fmt_c(*z))?;
        }
        writeln!(w, "max_eigenvalue_difference={:.3e}", spectrum_distance(&eig_a, &eig_c))?;
    }
    Ok(())
}

fn cmd_cfl(a: &CflArgs) -> Result<()> {
    let spec = a.scheme.spec()?;
    let opts = a.sweep.options()?;
    let nu = if let Some(path) = &a.by_angle {
        let rows = cfl_by_angle(&spec, &opts)?;
        let mut w = sink(Some(path))?;
        writeln!(w, "angle_rad,cfl")?;
        for (theta, c) in &rows {
            writeln!(w, "{theta:.12},{c:.6}")?;
        }
        w.flush()?;
        rows.iter().fold(f64::INFINITY, |m, r| m.min(r.1))
    } else {
        max_cfl(&spec, &opts)?
    };
    let mut w = sink(None)?;
    if nu < 1e-3 {
        writeln!(w, "{spec}: unstable")?;
    } else {
        writeln!(w, "{nu:.4}")?;
    }
    Ok(())
}

fn cmd_map(a: &MapArgs) -> Result<()> {
    let spec = a.scheme.spec()?;
    if a.points < 2 || a.c_max.is_nan() || a.c_max <= 0.0 {
        return Err(Error::InvalidArgument("need --points ≥ 2 and --c-max > 0".into()));
    }
    let grid: Vec<f64> = (0..a.points)
        .map(|i| -a.c_max + 2.0 * a.c_max * i as f64 / (a.points - 1) as f64)
        .collect();
    let map = stability_map(&spec, &grid, &grid, &a.sweep.options()?)?;
    let mut w = sink(a.out.as_deref())?;
    map.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_dispersion(a: &DispersionArgs) -> Result<()> {
    let spec = a.scheme.spec()?;
    let cfl = match a.cfl {
        Some(c) => c,
        None => {
            0.9 * reference_cfl(&spec)
                .ok_or_else(|| Error::InvalidArgument(format!("no tabulated CFL for {spec}; pass --cfl")))?
        }
    };
    let mut w = sink(a.out.as_deref())?;
    let mut rows = Vec::new();
    for &wl in &a.wavelength {
        rows.extend(dispersion_sweep(&spec, a.angle, wl, cfl, a.step)?);
    }
    write_dispersion_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let report = run_problem(&a.problem.spec(a.res)?)?;
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
        report.write_summary(BufWriter::new(File::create(dir.join("summary.txt"))?))?;
        let mut f = BufWriter::new(File::create(dir.join("curl.csv"))?);
        report.write_curl_csv(&mut f)?;
        f.flush()?;
    }
    let mut w = sink(None)?;
    report.write_summary(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_convergence(a: &ConvergenceArgs) -> Result<()> {
    let first = *a.res.first().ok_or_else(|| Error::InvalidArgument("no resolutions".into()))?;
    let rows = convergence_suite(&a.problem.spec(first)?, &a.res)?;
    let mut w = sink(a.out.as_deref())?;
    write_convergence_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("CURLKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CURLKIT_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let result = match &cli.command {
        Command::Matrix(a) => cmd_matrix(a),
        Command::Cfl(a) => cmd_cfl(a),
        Command::StabilityMap(a) => cmd_map(a),
        Command::Dispersion(a) => cmd_dispersion(a),
        Command::Run(a) => cmd_run(a),
        Command::Convergence(a) => cmd_convergence(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
