//! Von Neumann analysis on the curl-free Fourier subspace.
//!
//! A single Bloch mode is represented by a `1 × 1` lattice whose `+x`
//! neighbour equals the reference zone times `e^{i kx Δx}` (so the left edge
//! carries `e^{−i kx Δx}`). The operator matrix is obtained by pushing a basis
//! of the constrained subspace through the ordinary rhs.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{project_edge_with, GaussRule};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, eigenvector, inner, null_space, vec_norm, CMatrix};
use crate::mesh::{EdgeMomentField, Lattice};
use crate::semidiscrete::{Operator, SchemeSpec};
use crate::timeint::{eval_polynomial, stability_polynomial, step, RkMethod};
use crate::upwind::Velocity;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Nondimensional wave numbers `(kxΔx, kyΔy)` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub kx_dx: f64,
    pub ky_dy: f64,
}

impl FourierMode {
    pub fn new(kx_dx: f64, ky_dy: f64) -> Self {
        Self { kx_dx, ky_dy }
    }

    pub fn negated(self) -> Self {
        Self::new(-self.kx_dx, -self.ky_dy)
    }

    fn lattice(self) -> Lattice<Complex64> {
        Lattice::bloch(Complex64::from_polar(1.0, self.kx_dx), Complex64::from_polar(1.0, self.ky_dy))
    }
}

/// Operator matrix on the constrained subspace of one Fourier mode.
#[derive(Debug, Clone)]
pub struct FourierOperator {
    /// `d × d` matrix with `dV/dt = A V`.
    pub a: CMatrix,
    /// Orthonormal columns spanning the curl-free subspace of the reference
    /// zone's DOFs `(Jy_0..Jy_N, Jx_0..Jx_N)`.
    pub basis: CMatrix,
    pub spec: SchemeSpec,
    pub mode: FourierMode,
    pub v: Velocity,
    pub dx: f64,
    pub dy: f64,
    /// Largest component of an rhs image outside the subspace.
    pub invariance_residual: f64,
}

impl FourierOperator {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }
}

fn field_from_dofs(dofs: &[Complex64], degree: usize) -> EdgeMomentField<Complex64> {
    let mut f = EdgeMomentField::zeros(1, 1, degree);
    let w = degree + 1;
    f.jy_mut(0, 0).copy_from_slice(&dofs[..w]);
    f.jx_mut(0, 0).copy_from_slice(&dofs[w..2 * w]);
    f
}

fn dofs_from_field(f: &EdgeMomentField<Complex64>) -> Vec<Complex64> {
    let mut d = f.jy(0, 0).to_vec();
    d.extend_from_slice(f.jx(0, 0));
    d
}

/// Curl-free subspace basis for a mode: null space of the mean-circulation
/// functional, which is the only compatibility condition of the zone
/// reconstruction at every degree.
pub fn constrained_basis(degree: usize, mode: FourierMode, dx: f64, dy: f64) -> CMatrix {
    let w = degree + 1;
    let mut f = CMatrix::zeros(1, 2 * w);
    let one = Complex64::new(1.0, 0.0);
    f[(0, 0)] = (one - Complex64::from_polar(1.0, -mode.kx_dx)) / dx;
    f[(0, w)] = -(one - Complex64::from_polar(1.0, -mode.ky_dy)) / dy;
    // threshold on the natural scale; the functional itself vanishes at k = 0
    null_space(&f, 1e-10 * (1.0 / dx + 1.0 / dy))
}

/// The rhs on the reference zone's full DOF vector `(Jy_0..Jy_N, Jx_0..Jx_N)`
/// of a Bloch mode.
pub fn apply_full(spec: &SchemeSpec, mode: FourierMode, v: Velocity, dx: f64, dy: f64, dofs: &[Complex64]) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if dofs.len() != 2 * (spec.n + 1) {
        return Err(Error::InvalidArgument(format!("expected {} DOFs, got {}", 2 * (spec.n + 1), dofs.len())));
    }
    let op = Operator::new(*spec, v, dx, dy);
    Ok(dofs_from_field(&op.rhs(&field_from_dofs(dofs, spec.n), &mode.lattice())?))
}

/// Assemble `A` for one mode by applying the rhs to each basis column.
pub fn assemble_a(spec: &SchemeSpec, mode: FourierMode, v: Velocity, dx: f64, dy: f64) -> Result<FourierOperator> {
    spec.validate()?;
    let n = spec.n;
    let basis = constrained_basis(n, mode, dx, dy);
    let d = basis.cols();
    let lattice = mode.lattice();
    let op = Operator::new(*spec, v, dx, dy);
    let bh = basis.adjoint();
    let mut a = CMatrix::zeros(d, d);
    let mut residual: f64 = 0.0;
    for c in 0..d {
        let field = field_from_dofs(&basis.column(c), n);
        let image = dofs_from_field(&op.rhs(&field, &lattice)?);
        let reduced = bh.mul_vec(&image);
        let back = basis.mul_vec(&reduced);
        let off: Vec<Complex64> = image.iter().zip(&back).map(|(x, y)| x - y).collect();
        residual = residual.max(vec_norm(&off));
        a.set_column(c, &reduced);
    }
    let scale = v.vx.abs() / dx + v.vy.abs() / dy;
    if residual.is_nan() || residual > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SubspaceNotInvariant { residual });
    }
    Ok(FourierOperator {
        a,
        basis,
        spec: *spec,
        mode,
        v,
        dx,
        dy,
        invariance_residual: residual,
    })
}

/// The reference closed-form `A` of the second-order DG-like scheme in the basis
/// `(J_0^{y+}, J_y^{y+}, J_x^{x+})`, transcribed coefficient by coefficient.
pub fn closed_form_a(mode: FourierMode, v: Velocity, dx: f64, dy: f64) -> CMatrix {
    let kx = mode.kx_dx / dx;
    let ky = mode.ky_dy / dy;
    let (vx, vy) = (v.vx, v.vy);
    let (avx, avy) = (vx.abs(), vy.abs());
    let (cx, sx) = ((dx * kx).cos(), (dx * kx).sin());
    let (cy, sy) = ((dy * ky).cos(), (dy * ky).sin());
    let c = |re: f64| Complex64::new(re, 0.0);
    let mut a = CMatrix::zeros(3, 3);

    a[(0, 0)] = ((c(dx * cy - dx) * avy) - I * dx * sy * vy + c(dy * cx - dy) * avx - I * dy * sx * vx) / (dx * dy);
    a[(0, 1)] = -(I * sx * avx + c((1.0 - cx) * vx)) / (2.0 * dx);
    let sp = ((dy * ky + dx * kx) / 2.0).sin();
    let sm = ((dy * ky - dx * kx) / 2.0).sin();
    let cp = ((dy * ky + dx * kx) / 2.0).cos();
    let cm = ((dy * ky - dx * kx) / 2.0).cos();
    a[(0, 2)] = -((I * sp - I * sm) * avy + c((cm - cp) * vy)) / (2.0 * dx);

    a[(1, 0)] = (6.0 * I * sx * avx + c((6.0 - 6.0 * cx) * vx)) / dx;
    a[(1, 1)] = (c((cy - 1.0) * avy) - I * sy * vy + c((-3.0 * cx - 3.0) * avx) + 3.0 * I * sx * vx) / dx;
    a[(1, 2)] = c(0.0);

    let e = |arg: f64| (I * arg).exp();
    let e3 = e((3.0 * dy * ky + dx * kx) / 2.0);
    let e2 = e((2.0 * dy * ky + dx * kx) / 2.0);
    let e1 = e((dy * ky + dx * kx) / 2.0);
    let e0 = e(dx * kx / 2.0);
    let den = dy * dy * e3 - dy * dy * e(-3.0 * dy * ky / 2.0);
    a[(2, 0)] = 3.0 * dx * e3 * avy / den - 3.0 * dx * e2 * avy / den - 3.0 * dx * e1 * avy / den + 3.0 * dx * e0 * avy / den
        - 3.0 * dx * e3 * vy / den
        + 9.0 * dx * e2 * vy / den
        - 9.0 * dx * e1 * vy / den
        + 3.0 * dx * e0 * vy / den;
    a[(2, 1)] = c(0.0);
    a[(2, 2)] = -(c((3.0 * cy + 3.0) * avy) - 3.0 * I * sy * vy + c((1.0 - cx) * avx) + I * sx * vx) / dy;
    a
}

/// Eigen-data of the one-step amplification matrix `G`.
#[derive(Debug, Clone)]
pub struct AmplificationResult {
    pub g: CMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub spectral_radius: f64,
}

/// `G` by running the RK stage recursion on matrices, then its eigenvalues.
pub fn amplification(op: &FourierOperator, dt: f64, method: RkMethod) -> Result<AmplificationResult> {
    if dt.is_nan() || dt < 0.0 {
        return Err(Error::InvalidArgument("time step must be non-negative".into()));
    }
    let g = amplification_matrix(&op.a, dt, method)?;
    let eigenvalues = eigenvalues(&g)?;
    let spectral_radius = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.norm()));
    Ok(AmplificationResult {
        g,
        eigenvalues,
        spectral_radius,
    })
}

pub fn amplification_matrix(a: &CMatrix, dt: f64, method: RkMethod) -> Result<CMatrix> {
    step(&CMatrix::identity(a.rows()), dt, method, |m: &CMatrix| Ok(a.mul(m)))
}

/// Sampling parameters of the CFL search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflOptions {
    /// Velocity directions sampled in `[0, π/4]`.
    pub angles: usize,
    /// Points per axis of the wave-number grid.
    pub k_points: usize,
    /// Sweep `[−π, π]²`; when false only `[−π/2, π/2]²` is sampled.
    pub full_nyquist: bool,
    pub scan_step: f64,
    pub c_max: f64,
    pub tolerance: f64,
}

impl Default for CflOptions {
    fn default() -> Self {
        Self {
            angles: 65,
            k_points: 65,
            full_nyquist: true,
            scan_step: 0.01,
            c_max: 4.0,
            tolerance: 1e-4,
        }
    }
}

const STABILITY_SLACK: f64 = 1e-9;

/// Half of the symmetric wave-number grid; the other half holds conjugate spectra.
fn k_grid(opts: &CflOptions) -> Vec<FourierMode> {
    let n = opts.k_points.max(2);
    let half = if opts.full_nyquist { PI } else { PI / 2.0 };
    let coord = |a: usize| -half + 2.0 * half * a as f64 / (n - 1) as f64;
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            // (a, b) ↔ (n−1−a, n−1−b) are ±k
            if (a, b) <= (n - 1 - a, n - 1 - b) {
                out.push(FourierMode::new(coord(a), coord(b)));
            }
        }
    }
    out
}

/// Eigenvalues of `A` over the k-grid for velocity `(cos θ, sin θ)`, unit zones.
fn spectrum_for_angle(spec: &SchemeSpec, theta: f64, modes: &[FourierMode]) -> Result<Vec<Complex64>> {
    let v = Velocity::new(theta.cos(), theta.sin());
    let mut all = Vec::new();
    for &mode in modes {
        let op = assemble_a(spec, mode, v, 1.0, 1.0)?;
        all.extend(eigenvalues(&op.a)?);
    }
    // large eigenvalues first, so instability is found early
    all.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(all)
}

fn stable_at(poly: &[f64], spectrum: &[Complex64], c: f64) -> bool {
    spectrum
        .iter()
        .all(|l| eval_polynomial(poly, l * c).norm() <= 1.0 + STABILITY_SLACK)
}

/// Largest stable `C` for one spectrum: scan upward, then bisect.
fn threshold(poly: &[f64], spectrum: &[Complex64], opts: &CflOptions) -> f64 {
    let c0 = 1e-3;
    if !stable_at(poly, spectrum, c0) {
        return 0.0;
    }
    let mut lo = c0;
    let mut c = opts.scan_step;
    while c <= opts.c_max + 1e-12 {
        if !stable_at(poly, spectrum, c) {
            let mut hi = c;
            while hi - lo > opts.tolerance {
                let mid = 0.5 * (lo + hi);
                if stable_at(poly, spectrum, mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo;
        }
        lo = c;
        c += opts.scan_step;
    }
    lo
}

/// Radius of the largest stable circle in the `(Cx, Cy)` plane for square zones.
pub fn max_cfl(spec: &SchemeSpec, opts: &CflOptions) -> Result<f64> {
    let per_angle = cfl_by_angle(spec, opts)?;
    Ok(per_angle.iter().fold(f64::INFINITY, |m, (_, c)| m.min(*c)))
}

/// Stable `C` along each sampled velocity direction in `[0, π/4]`.
pub fn cfl_by_angle(spec: &SchemeSpec, opts: &CflOptions) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let poly = stability_polynomial(spec.rk);
    let modes = k_grid(opts);
    let n = opts.angles.max(1);
    let thetas: Vec<f64> = (0..n)
        .map(|a| if n == 1 { 0.0 } else { PI / 4.0 * a as f64 / (n - 1) as f64 })
        .collect();
    thetas
        .par_iter()
        .map(|&theta| {
            let spectrum = spectrum_for_angle(spec, theta, &modes)?;
            Ok((theta, threshold(&poly, &spectrum, opts)))
        })
        .collect()
}

/// Max spectral radius over the k-sweep at each `(Cx, Cy)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
    /// `radius[iy][ix]`.
    pub radius: Vec<Vec<f64>>,
}

impl StabilityMap {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "cx,cy,spectral_radius")?;
        for (iy, row) in self.radius.iter().enumerate() {
            for (ix, r) in row.iter().enumerate() {
                writeln!(w, "{},{},{:.12e}", self.cx[ix], self.cy[iy], r)?;
            }
        }
        Ok(())
    }
}

pub fn stability_map(spec: &SchemeSpec, cx: &[f64], cy: &[f64], opts: &CflOptions) -> Result<StabilityMap> {
    spec.validate()?;
    let poly = stability_polynomial(spec.rk);
    let modes = k_grid(opts);
    let cells: Vec<(usize, usize)> = (0..cy.len()).flat_map(|iy| (0..cx.len()).map(move |ix| (iy, ix))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(iy, ix)| {
            let (a, b) = (cx[ix], cy[iy]);
            let c = (a * a + b * b).sqrt();
            if c == 0.0 {
                return Ok(1.0);
            }
            let spectrum = spectrum_for_angle(spec, b.atan2(a), &modes)?;
            Ok(spectrum
                .iter()
                .fold(0.0f64, |m, l| m.max(eval_polynomial(&poly, l * c).norm())))
        })
        .collect::<Result<_>>()?;
    let radius = values.chunks(cx.len()).map(|r| r.to_vec()).collect();
    Ok(StabilityMap {
        cx: cx.to_vec(),
        cy: cy.to_vec(),
        radius,
    })
}

/// Edge-moment DOFs of `∇e^{i k·x}` for the reference zone centred at the origin.
pub fn exact_mode_dofs(degree: usize, mode: FourierMode, dx: f64, dy: f64) -> Vec<Complex64> {
    let (kx, ky) = (mode.kx_dx / dx, mode.ky_dy / dy);
    let rule = GaussRule::new(8);
    let wave = |x: f64, y: f64| (I * (kx * x + ky * y)).exp();
    let mut d = project_edge_with(|t| I * ky * wave(0.5 * dx, t * dy), degree, &rule);
    d.extend(project_edge_with(|t| I * kx * wave(t * dx, 0.5 * dy), degree, &rule));
    d
}

/// The eigenvalue of `G` whose eigenvector best overlaps the exact mode.
pub fn physical_eigenvalue(op: &FourierOperator, amp: &AmplificationResult) -> Complex64 {
    let target = op.basis.adjoint().mul_vec(&exact_mode_dofs(op.spec.n, op.mode, op.dx, op.dy));
    let tn = vec_norm(&target).max(f64::MIN_POSITIVE);
    let mut best = (f64::NEG_INFINITY, amp.eigenvalues[0]);
    for &g in &amp.eigenvalues {
        let w = eigenvector(&amp.g, g);
        let overlap = inner(&target, &w).norm() / (tn * vec_norm(&w));
        if overlap > best.0 {
            best = (overlap, g);
        }
    }
    best.1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRow {
    pub angle_deg: f64,
    pub one_minus_amp: f64,
    pub phase_err: f64,
    pub wavelength: f64,
    pub v_angle_deg: f64,
    /// Wave vector normal to the velocity: the phase error is absolute.
    pub degenerate: bool,
}

/// Dissipation and phase error of the physical mode for wave vectors at
/// `−180°..=180°` (step `angle_step_deg`) relative to the velocity direction.
/// Unit zones, unit speed, `Δt = cfl`.
pub fn dispersion_sweep(
    spec: &SchemeSpec,
    v_angle_deg: f64,
    wavelength: f64,
    cfl: f64,
    angle_step_deg: f64,
) -> Result<Vec<DispersionRow>> {
    spec.validate()?;
    if !(wavelength > 0.0 && cfl > 0.0 && angle_step_deg > 0.0) {
        return Err(Error::InvalidArgument("wavelength, CFL and angle step must be positive".into()));
    }
    let tv = v_angle_deg.to_radians();
    let v = Velocity::new(tv.cos(), tv.sin());
    let dt = cfl;
    let count = (360.0 / angle_step_deg).round() as usize;
    let k = 2.0 * PI / wavelength;
    (0..=count)
        .into_par_iter()
        .map(|a| {
            let rel = -180.0 + a as f64 * angle_step_deg;
            let phi = tv + rel.to_radians();
            let mode = FourierMode::new(k * phi.cos(), k * phi.sin());
            let op = assemble_a(spec, mode, v, 1.0, 1.0)?;
            let amp = amplification(&op, dt, spec.rk)?;
            let g = physical_eigenvalue(&op, &amp);
            let g_ex = (-I * (mode.kx_dx * v.vx + mode.ky_dy * v.vy) * dt).exp();
            let degenerate = g_ex.arg().abs() < 1e-12;
            let phase_err = if degenerate {
                g.arg().abs()
            } else {
                (g / g_ex).arg().abs() / g_ex.arg().abs()
            };
            Ok(DispersionRow {
                angle_deg: rel,
                one_minus_amp: 1.0 - g.norm(),
                phase_err,
                wavelength,
                v_angle_deg,
                degenerate,
            })
        })
        .collect()
}

pub fn write_dispersion_csv(rows: &[DispersionRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "angle_deg,one_minus_amp,phase_err,wavelength,v_angle_deg")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{},{}",
            r.angle_deg, r.one_minus_amp, r.phase_err, r.wavelength, r.v_angle_deg
        )?;
    }
    Ok(())
}

/// Minimum `|g|` of the physical mode over the given velocity angles.
pub fn min_amplification(spec: &SchemeSpec, v_angles_deg: &[f64], wavelength: f64, cfl: f64) -> Result<f64> {
    let mut m = f64::INFINITY;
    for &a in v_angles_deg {
        for r in dispersion_sweep(spec, a, wavelength, cfl, 1.0)? {
            m = m.min(1.0 - r.one_minus_amp);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let a = closed_form_a(FourierMode::new(0.3, -1.1), Velocity::new(0.7, -0.4), 1.3, 0.8);
        assert_eq!(a[(1, 2)], Complex64::new(0.0, 0.0));
        assert_eq!(a[(2, 1)], Complex64::new(0.0, 0.0));
        let a = closed_form_a(FourierMode::new(0.0, 0.0), Velocity::new(0.7, -0.4), 1.3, 0.8);
        for c in 0..3 {
            assert!(a[(0, c)].norm() < 1e-15);
        }
        assert!((a[(1, 1)] - Complex64::new(-6.0 * 0.7 / 1.3, 0.0)).norm() < 1e-14);
        assert!((a[(2, 2)] - Complex64::new(-6.0 * 0.4 / 0.8, 0.0)).norm() < 1e-14);
        let a = closed_form_a(FourierMode::new(PI / 2.0, 0.0), Velocity::new(1.0, 0.0), 1.0, 1.0);
        assert!((a[(0, 0)] - Complex64::new(-1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn subspace_dimensions() {
        for n in 0..=3 {
            let b = constrained_basis(n, FourierMode::new(0.4, -0.2), 1.0, 1.0);
            assert_eq!(b.cols(), 2 * n + 1);
            let b = constrained_basis(n, FourierMode::new(0.0, 0.0), 1.0, 1.0);
            assert_eq!(b.cols(), 2 * n + 2);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let spec = SchemeSpec::dg(1).unwrap();
        let op = assemble_a(&spec, FourierMode::new(0.5, 0.2), Velocity::new(1.0, 0.3), 1.0, 1.0).unwrap();
        let amp = amplification(&op, 0.0, RkMethod::Ssprk2).unwrap();
        assert!(amp.eigenvalues.iter().all(|g| (g - 1.0).norm() < 1e-14));
    }
}
