//! Plane-wave and vortex advection runs: error norms, quadratic energy and a
//! pointwise curl monitor, plus convergence tables.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::basis::GaussRule;
use crate::error::{Error, Result};
use crate::mesh::{discrete_circulation, init_from_gradient, EdgeMomentField, Mesh};
use crate::reconstruction::ZoneReconstruction;
use crate::semidiscrete::{total_quadratic_energy, Family, Operator, SchemeSpec};
use crate::timeint::{compute_dt, step, RkMethod};
use crate::upwind::Velocity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    /// `φ = cos(2πx + 2πy)` on `[−1/2, 1/2]²`.
    PlaneWave,
    /// `φ = exp((1 − r²)/2)` on `[−10, 10]²`.
    Vortex,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::PlaneWave => "planewave",
            Problem::Vortex => "vortex",
        }
    }

    /// `(lo, hi)` of the square domain.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Problem::PlaneWave => (-0.5, 0.5),
            Problem::Vortex => (-10.0, 10.0),
        }
    }

    /// Time for one diagonal passage at unit velocity.
    pub fn default_final_time(self) -> f64 {
        match self {
            Problem::PlaneWave => 1.0,
            Problem::Vortex => 20.0,
        }
    }

    pub fn potential(self, x: f64, y: f64) -> f64 {
        match self {
            Problem::PlaneWave => (2.0 * PI * (x + y)).cos(),
            Problem::Vortex => (0.5 * (1.0 - x * x - y * y)).exp(),
        }
    }

    pub fn gradient(self, x: f64, y: f64) -> (f64, f64) {
        match self {
            Problem::PlaneWave => {
                let s = -2.0 * PI * (2.0 * PI * (x + y)).sin();
                (s, s)
            }
            Problem::Vortex => {
                let e = (0.5 * (1.0 - x * x - y * y)).exp();
                (-e * x, -e * y)
            }
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "planewave" | "plane-wave" => Ok(Problem::PlaneWave),
            "vortex" => Ok(Problem::Vortex),
            _ => Err(Error::InvalidArgument(format!("unknown problem '{s}'"))),
        }
    }
}

/// Reference maximal CFL numbers used to set time steps, by `(N, M, RK)`,
/// to four digits; `max_cfl` recomputes them.
#[allow(clippy::approx_constant)]
const FROZEN_CFL: &[(usize, usize, RkMethod, f64)] = &[
    (0, 0, RkMethod::Rk1, 0.7071),
    (0, 0, RkMethod::Ssprk2, 0.7071),
    (0, 0, RkMethod::Ssprk3, 0.8884),
    (0, 0, RkMethod::Ssprk54, 1.5495),
    (1, 1, RkMethod::Ssprk2, 0.3162),
    (1, 1, RkMethod::Ssprk3, 0.3906),
    (1, 1, RkMethod::Ssprk54, 0.6367),
    (2, 2, RkMethod::Ssprk3, 0.2069),
    (2, 2, RkMethod::Ssprk54, 0.3401),
    (3, 3, RkMethod::Ssprk54, 0.2143),
    (0, 1, RkMethod::Ssprk2, 0.7071),
    (0, 1, RkMethod::Ssprk3, 0.8318),
    (0, 1, RkMethod::Ssprk54, 1.2252),
    (0, 2, RkMethod::Ssprk3, 1.1507),
    (0, 2, RkMethod::Ssprk54, 1.4859),
    (0, 3, RkMethod::Ssprk54, 1.3040),
    (1, 2, RkMethod::Ssprk3, 0.3903),
    (1, 2, RkMethod::Ssprk54, 0.6260),
    (1, 3, RkMethod::Ssprk54, 0.6799),
];

/// Tabulated maximal CFL number of a scheme, if it has one.
pub fn reference_cfl(spec: &SchemeSpec) -> Option<f64> {
    FROZEN_CFL
        .iter()
        .find(|(n, m, rk, _)| *n == spec.n && *m == spec.m && *rk == spec.rk)
        .map(|e| e.3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub problem: Problem,
    /// Zones per direction.
    pub res: usize,
    pub final_time: f64,
    pub v: Velocity,
    pub scheme: SchemeSpec,
    /// Maximal CFL number; `None` takes the tabulated value.
    pub cfl: Option<f64>,
    /// Curl-monitor samples including `t = 0` and `t = tf` (0 disables).
    pub snapshots: usize,
}

impl ProblemSpec {
    pub fn new(problem: Problem, res: usize, scheme: SchemeSpec) -> Self {
        Self {
            problem,
            res,
            final_time: problem.default_final_time(),
            v: Velocity::new(1.0, 1.0),
            scheme,
            cfl: None,
            snapshots: 0,
        }
    }

    pub fn with_final_time(mut self, tf: f64) -> Self {
        self.final_time = tf;
        self
    }

    pub fn with_snapshots(mut self, n: usize) -> Self {
        self.snapshots = n;
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = Some(cfl);
        self
    }

    pub fn mesh(&self) -> Result<Mesh> {
        let (lo, hi) = self.problem.domain();
        Mesh::square(self.res, lo, hi)
    }

    fn nu(&self) -> Result<f64> {
        self.cfl.or_else(|| reference_cfl(&self.scheme)).ok_or_else(|| {
            Error::InvalidArgument(format!("no tabulated CFL number for {}; pass one explicitly", self.scheme))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurlSample {
    pub time: f64,
    /// Largest `|∇×J|` of the zone reconstructions at the sample points.
    pub max_pointwise_curl: f64,
    /// Largest zone circulation (mean curl from edge means).
    pub max_circulation: f64,
    /// Largest `|J|` component at the same points.
    pub max_field: f64,
}

impl CurlSample {
    /// `max(curl, circulation) / max|J|`.
    pub fn relative(&self) -> f64 {
        self.max_pointwise_curl.max(self.max_circulation) / self.max_field.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub problem: Problem,
    pub scheme: SchemeSpec,
    pub res: usize,
    pub final_time: f64,
    pub dt: f64,
    pub steps: usize,
    pub l1: f64,
    pub linf: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_fraction: f64,
    pub curl: Vec<CurlSample>,
    pub wall_seconds: f64,
}

impl RunReport {
    /// Largest relative curl over all snapshots.
    pub fn max_relative_curl(&self) -> f64 {
        self.curl.iter().fold(0.0, |m, s| m.max(s.relative()))
    }

    /// `key=value` lines.
    pub fn write_summary(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "problem={}", self.problem)?;
        writeln!(w, "scheme={}", self.scheme.label())?;
        writeln!(w, "rk={}", self.scheme.rk)?;
        writeln!(w, "res={}", self.res)?;
        writeln!(w, "final_time={}", self.final_time)?;
        writeln!(w, "dt={:.12e}", self.dt)?;
        writeln!(w, "steps={}", self.steps)?;
        writeln!(w, "l1={:.12e}", self.l1)?;
        writeln!(w, "linf={:.12e}", self.linf)?;
        writeln!(w, "energy_fraction={:.15}", self.energy_fraction)?;
        writeln!(w, "max_relative_curl={:.6e}", self.max_relative_curl())?;
        writeln!(w, "wall_seconds={:.3}", self.wall_seconds)
    }

    pub fn write_curl_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "time,max_pointwise_curl,max_circulation,max_field")?;
        for s in &self.curl {
            writeln!(
                w,
                "{:.12e},{:.6e},{:.6e},{:.12e}",
                s.time, s.max_pointwise_curl, s.max_circulation, s.max_field
            )?;
        }
        Ok(())
    }
}

fn wrap(x: f64, lo: f64, len: f64) -> f64 {
    lo + (x - lo).rem_euclid(len)
}

/// L1 and L∞ errors of the zone reconstructions against the advected exact
/// field, over `(M+2)²` Gauss points per zone.
fn error_norms(recon: &[ZoneReconstruction<f64>], mesh: &Mesh, problem: Problem, shift: (f64, f64), m: usize) -> (f64, f64) {
    let rule = GaussRule::new(m + 2);
    let (dx, dy) = (mesh.dx(), mesh.dy());
    let (mut l1, mut linf) = (0.0f64, 0.0f64);
    for r in recon {
        let (xc, yc) = r.center();
        let mut zone = 0.0;
        for (xn, wx) in rule.nodes.iter().zip(&rule.weights) {
            for (yn, wy) in rule.nodes.iter().zip(&rule.weights) {
                let (jx, jy) = r.gradient_normalized(*xn, *yn);
                let x = wrap(xc + xn * dx - shift.0, mesh.x0(), mesh.lx());
                let y = wrap(yc + yn * dy - shift.1, mesh.y0(), mesh.ly());
                let (ex, ey) = problem.gradient(x, y);
                let (ax, ay) = ((jx - ex).abs(), (jy - ey).abs());
                zone += wx * wy * 0.5 * (ax + ay);
                linf = linf.max(ax).max(ay);
            }
        }
        l1 += zone * dx * dy;
    }
    (l1 / mesh.area(), linf)
}

/// Curl monitor on `(M+1)²` uniformly spaced interior points per zone.
fn curl_sample(field: &EdgeMomentField<f64>, mesh: &Mesh, op: &Operator, time: f64) -> Result<CurlSample> {
    let recon = op.reconstruct_all(field, mesh)?;
    let k = op.spec.m + 1;
    let pts: Vec<f64> = (0..k).map(|a| -0.5 + (a as f64 + 1.0) / (k as f64 + 1.0)).collect();
    let (mut curl, mut big) = (0.0f64, 0.0f64);
    for r in &recon {
        for &xn in &pts {
            for &yn in &pts {
                curl = curl.max(r.curl_normalized(xn, yn).abs());
                let (jx, jy) = r.gradient_normalized(xn, yn);
                big = big.max(jx.abs()).max(jy.abs());
            }
        }
    }
    let lattice = mesh.lattice::<f64>();
    let mut circ = 0.0f64;
    for j in 0..mesh.ny() as isize {
        for i in 0..mesh.nx() as isize {
            circ = circ.max(discrete_circulation(field, &lattice, mesh.dx(), mesh.dy(), i, j).abs());
        }
    }
    Ok(CurlSample {
        time,
        max_pointwise_curl: curl,
        max_circulation: circ,
        max_field: big,
    })
}

/// Advance one problem to its final time and measure it.
pub fn run_problem(ps: &ProblemSpec) -> Result<RunReport> {
    ps.scheme.validate()?;
    if ps.res < 4 {
        return Err(Error::InvalidArgument(format!("resolution {} below 4", ps.res)));
    }
    if !(ps.final_time >= 0.0 && ps.final_time.is_finite()) {
        return Err(Error::InvalidArgument("final time must be finite and non-negative".into()));
    }
    let start = Instant::now();
    let mesh = ps.mesh()?;
    let problem = ps.problem;
    let mut field = init_from_gradient(|x, y| problem.potential(x, y), |x, y| problem.gradient(x, y), &mesh, ps.scheme.n);
    let op = Operator::for_mesh(ps.scheme, ps.v, &mesh);
    let lattice = mesh.lattice::<f64>();
    let dt = compute_dt(ps.nu()?, ps.v, mesh.dx(), mesh.dy(), ps.scheme.cfl_fraction)?;
    let energy_initial = total_quadratic_energy(&field, &mesh, &ps.scheme)?;

    let tf = ps.final_time;
    let marks: Vec<f64> = match ps.snapshots {
        0 => Vec::new(),
        1 => vec![tf],
        n => (0..n).map(|a| tf * a as f64 / (n - 1) as f64).collect(),
    };
    let mut next_mark = 0;
    let mut curl = Vec::with_capacity(marks.len());
    let mut t = 0.0;
    let mut steps = 0;
    loop {
        while next_mark < marks.len() && marks[next_mark] <= t + 1e-12 * tf.max(1.0) {
            curl.push(curl_sample(&field, &mesh, &op, t)?);
            next_mark += 1;
        }
        if t >= tf {
            break;
        }
        let mut h = dt.min(tf - t);
        if next_mark < marks.len() {
            h = h.min(marks[next_mark] - t);
        }
        // a sliver below roundoff would only add noise
        if tf - t - h < 1e-12 * tf {
            h = tf - t;
        }
        field = step(&field, h, ps.scheme.rk, |u| op.rhs(u, &lattice)).map_err(|e| match e {
            Error::Blowup { .. } => Error::Blowup { step: steps + 1, time: t },
            other => other,
        })?;
        steps += 1;
        t = if h == tf - t { tf } else { t + h };
        if !field.is_finite() {
            return Err(Error::Blowup { step: steps, time: t });
        }
    }
    while next_mark < marks.len() {
        curl.push(curl_sample(&field, &mesh, &op, t)?);
        next_mark += 1;
    }

    let recon = op.reconstruct_all(&field, &mesh)?;
    let (l1, linf) = error_norms(&recon, &mesh, problem, (ps.v.vx * tf, ps.v.vy * tf), ps.scheme.m);
    let energy_final = total_quadratic_energy(&field, &mesh, &ps.scheme)?;
    Ok(RunReport {
        problem,
        scheme: ps.scheme,
        res: ps.res,
        final_time: tf,
        dt,
        steps,
        l1,
        linf,
        energy_initial,
        energy_final,
        energy_fraction: energy_final / energy_initial,
        curl,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub report: RunReport,
    pub l1_order: Option<f64>,
    pub linf_order: Option<f64>,
}

/// Runs at each resolution with `log2` orders between consecutive entries
/// (scaled by the actual resolution ratio).
pub fn convergence_suite(base: &ProblemSpec, resolutions: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if resolutions.len() < 2 {
        return Err(Error::InvalidArgument("a convergence study needs at least two resolutions".into()));
    }
    if let Some(r) = resolutions.iter().find(|&&r| r < 8) {
        return Err(Error::InvalidArgument(format!("resolution {r} below 8")));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(resolutions.len());
    for &res in resolutions {
        let report = run_problem(&ProblemSpec { res, ..*base })?;
        let (l1_order, linf_order) = match rows.last() {
            Some(prev) => {
                let ratio = (res as f64 / prev.report.res as f64).ln();
                (
                    Some((prev.report.l1 / report.l1).ln() / ratio),
                    Some((prev.report.linf / report.linf).ln() / ratio),
                )
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            report,
            l1_order,
            linf_order,
        });
    }
    Ok(rows)
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], mut w: impl Write) -> std::io::Result<()> {
    let opt = |o: Option<f64>| o.map(|x| format!("{x:.4}")).unwrap_or_default();
    writeln!(w, "res,l1,l1_order,linf,linf_order,energy_fraction")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.6e},{},{:.6e},{},{:.15}",
            r.report.res,
            r.report.l1,
            opt(r.l1_order),
            r.report.linf,
            opt(r.linf_order),
            r.report.energy_fraction
        )?;
    }
    Ok(())
}

/// Parse `dg`, `p0pm`/`weno` or `p1pm`/`hweno` with degrees into a spec.
pub fn scheme_from_parts(family: &str, n: usize, m: Option<usize>, rk: Option<RkMethod>) -> Result<SchemeSpec> {
    let family = family.to_ascii_lowercase();
    let spec = match family.as_str() {
        "dg" => {
            if m.is_some_and(|m| m != n) {
                return Err(Error::InvalidScheme("DG schemes need M = N".into()));
            }
            SchemeSpec::dg(n)?
        }
        "p0pm" | "weno" | "p1pm" | "hweno" | "pnpm" => {
            let want = match family.as_str() {
                "p0pm" | "weno" => Some(0),
                "p1pm" | "hweno" => Some(1),
                _ => None,
            };
            if want.is_some_and(|w| w != n) {
                return Err(Error::InvalidScheme(format!("{family} evolves degree {} only", want.unwrap())));
            }
            let m = m.unwrap_or(n);
            if m == n {
                SchemeSpec::new(Family::Pnpm, n, m, RkMethod::for_degree(m))?
            } else {
                SchemeSpec::pnpm(n, m)?
            }
        }
        _ => return Err(Error::InvalidScheme(format!("unknown scheme family '{family}'"))),
    };
    Ok(match rk {
        Some(rk) => spec.with_rk(rk),
        None => spec,
    })
}
