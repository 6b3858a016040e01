//! Right-hand side of the curl-free edge-moment equations.
//!
//! For a y-edge with top vertex potential `φ**_t`, bottom `φ**_b` and edge
//! potential profile `φ*(ξ)`,
//!
//! `μ_m dJ_m/dt = (1/Δy)[−(b_m(½)φ**_t − b_m(−½)φ**_b) + ⟨b_m'(ξ) φ*⟩]`,
//!
//! and x-edges are mirrored. The same code serves the real mesh and the
//! Bloch-phase lattice used by the Fourier analysis.

use std::borrow::Cow;
use std::fmt;

use rayon::prelude::*;

use crate::basis::{basis_value, GaussRule, MASS, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::mesh::{EdgeMomentField, Lattice, Mesh};
use crate::reconstruction::{
    bubble_side_trace, complete_moments, reconstruct_zone_scaled, zone_bubble, BubbleMode, TraceSolver, ZoneEdges,
    ZoneReconstruction, BOTTOM, LEFT, RIGHT, TOP,
};
use crate::scalar::Scalar;
use crate::timeint::RkMethod;
use crate::upwind::{edge_body_integrals, edge_potential_profile, upwind_weights, vertex_potential, Velocity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// All moments up to `N` evolved.
    Dg,
    /// Moments up to `N` evolved, `N+1..=M` reconstructed along edge lines.
    Pnpm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSpec {
    pub family: Family,
    /// Evolved degree.
    pub n: usize,
    /// Degree used for reconstruction and fluxes.
    pub m: usize,
    pub rk: RkMethod,
    pub cfl_fraction: f64,
    pub bubble: BubbleMode,
}

impl SchemeSpec {
    /// DG-like scheme of degree `n` with its customary RK partner.
    pub fn dg(n: usize) -> Result<Self> {
        Self::new(Family::Dg, n, n, RkMethod::for_degree(n))
    }

    /// PNPM-like scheme with its customary RK partner (chosen by `m`).
    pub fn pnpm(n: usize, m: usize) -> Result<Self> {
        Self::new(Family::Pnpm, n, m, RkMethod::for_degree(m))
    }

    pub fn new(family: Family, n: usize, m: usize, rk: RkMethod) -> Result<Self> {
        let spec = Self {
            family,
            n,
            m,
            rk,
            cfl_fraction: 0.95,
            bubble: BubbleMode::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_rk(mut self, rk: RkMethod) -> Self {
        self.rk = rk;
        self
    }

    pub fn with_fraction(mut self, f: f64) -> Result<Self> {
        self.cfl_fraction = f;
        self.validate()?;
        Ok(self)
    }

    pub fn with_bubble(mut self, bubble: BubbleMode) -> Self {
        self.bubble = bubble;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > MAX_DEGREE || self.n > self.m {
            return Err(Error::InvalidScheme(format!("need N ≤ M ≤ 3, got N={} M={}", self.n, self.m)));
        }
        if self.family == Family::Dg && self.n != self.m {
            return Err(Error::InvalidScheme("DG schemes evolve every moment (N = M)".into()));
        }
        if self.n < self.m && self.n > 1 {
            return Err(Error::InvalidScheme("reconstructed moments need N ≤ 1".into()));
        }
        if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
            return Err(Error::InvalidScheme(format!("CFL fraction {} not in (0, 1]", self.cfl_fraction)));
        }
        Ok(())
    }

    /// Short label such as `P1P3`.
    pub fn label(&self) -> String {
        format!("P{}P{}", self.n, self.m)
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.rk)
    }
}

/// Geometry and velocity shared by every evaluation of one operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator {
    pub spec: SchemeSpec,
    pub v: Velocity,
    pub dx: f64,
    pub dy: f64,
}

const MAX_NODES: usize = MAX_DEGREE + 2;
const MAX_EQ: usize = 4 * (MAX_DEGREE + 1);
// below this many zones the work is too small to split
const PAR_THRESHOLD: usize = 1024;

impl Operator {
    pub fn new(spec: SchemeSpec, v: Velocity, dx: f64, dy: f64) -> Self {
        Self { spec, v, dx, dy }
    }

    pub fn for_mesh(spec: SchemeSpec, v: Velocity, mesh: &Mesh) -> Self {
        Self::new(spec, v, mesh.dx(), mesh.dy())
    }

    /// Time derivative of the evolved moments (degree `N` in, degree `N` out).
    pub fn rhs<S: Scalar>(&self, field: &EdgeMomentField<S>, lattice: &Lattice<S>) -> Result<EdgeMomentField<S>> {
        let (n, p) = (self.spec.n, self.spec.m);
        if field.degree() != n {
            return Err(Error::InvalidArgument(format!(
                "field has degree {} but the scheme evolves degree {n}",
                field.degree()
            )));
        }
        if field.nx() != lattice.nx() || field.ny() != lattice.ny() {
            return Err(Error::InvalidArgument("field and lattice extents differ".into()));
        }
        check_circulation(field, lattice, self.dx, self.dy)?;
        let full: Cow<EdgeMomentField<S>> = if p > n {
            Cow::Owned(complete_moments(field, lattice, p)?)
        } else {
            Cow::Borrowed(field)
        };
        let full = full.as_ref();
        let traces = self.side_traces(full, lattice);
        let vertex = self.vertex_potentials(full, lattice);
        let mut out = EdgeMomentField::zeros(field.nx(), field.ny(), n);
        let (nx, zones) = (field.nx(), lattice.zones());
        let width = n + 1;
        let row = |j: usize, jx_row: &mut [S], jy_row: &mut [S]| {
            for i in 0..nx {
                let (jy_rate, jx_rate) = self.edge_rates(full, lattice, &traces, &vertex, i as isize, j as isize);
                jy_row[i * width..(i + 1) * width].copy_from_slice(&jy_rate[..width]);
                jx_row[i * width..(i + 1) * width].copy_from_slice(&jx_rate[..width]);
            }
        };
        let (jx_out, jy_out) = out.data_mut_pair();
        if zones >= PAR_THRESHOLD {
            jx_out
                .par_chunks_mut(nx * width)
                .zip(jy_out.par_chunks_mut(nx * width))
                .enumerate()
                .for_each(|(j, (a, b))| row(j, a, b));
        } else {
            for (j, (a, b)) in jx_out.chunks_mut(nx * width).zip(jy_out.chunks_mut(nx * width)).enumerate() {
                row(j, a, b);
            }
        }
        Ok(out)
    }

    /// Normalized normal-component traces of every zone's reconstruction on
    /// its four sides, `[zone][side][node]`.
    fn side_traces<S: Scalar>(&self, full: &EdgeMomentField<S>, lattice: &Lattice<S>) -> Vec<S> {
        let p = full.degree();
        let solver = TraceSolver::get(p);
        let nq = p + 2;
        let neq = 4 * (p + 1);
        let bubble_on = self.spec.bubble.active(p);
        let nodes = &solver.rule().nodes;
        let (dx, dy) = (self.dx, self.dy);
        let nx = full.nx();
        let mut traces = vec![S::zero(); lattice.zones() * 4 * nq];
        let row = |j: usize, chunk: &mut [S]| {
            let mut data = [S::zero(); MAX_EQ];
            for i in 0..nx {
                let (ii, jj) = (i as isize, j as isize);
                gather_normalized(full, lattice, dx, dy, ii, jj, &mut data[..neq]);
                let beta = if bubble_on { zone_bubble(full, lattice, dx, dy, ii, jj) } else { S::zero() };
                let zone = &mut chunk[i * 4 * nq..(i + 1) * 4 * nq];
                for side in [LEFT, RIGHT, BOTTOM, TOP] {
                    let out = &mut zone[side * nq..(side + 1) * nq];
                    solver.side_trace(side, &data[..neq], out);
                    if bubble_on {
                        for (o, &xi) in out.iter_mut().zip(nodes) {
                            *o += beta.scale(bubble_side_trace(side, xi));
                        }
                    }
                }
            }
        };
        if lattice.zones() >= PAR_THRESHOLD {
            traces.par_chunks_mut(nx * 4 * nq).enumerate().for_each(|(j, c)| row(j, c));
        } else {
            for (j, c) in traces.chunks_mut(nx * 4 * nq).enumerate() {
                row(j, c);
            }
        }
        traces
    }

    fn vertex_potentials<S: Scalar>(&self, full: &EdgeMomentField<S>, lattice: &Lattice<S>) -> Vec<S> {
        let nx = full.nx();
        let mut out = vec![S::zero(); lattice.zones()];
        for (z, o) in out.iter_mut().enumerate() {
            *o = vertex_potential(full, lattice, (z % nx) as isize, (z / nx) as isize, self.v);
        }
        out
    }

    /// Rates of the y-edge and x-edge owned by zone `(i, j)`, all degrees up
    /// to the reconstruction degree.
    fn edge_rates<S: Scalar>(
        &self,
        full: &EdgeMomentField<S>,
        lattice: &Lattice<S>,
        traces: &[S],
        vertex: &[S],
        i: isize,
        j: isize,
    ) -> ([S; MAX_DEGREE + 1], [S; MAX_DEGREE + 1]) {
        let p = full.degree();
        let n = self.spec.n;
        let nq = p + 2;
        let rule: &GaussRule = TraceSolver::get(p).rule();
        let v = self.v;
        let (z, _) = lattice.wrap(i, j);
        let trace = |zone: usize, side: usize| &traces[(zone * 4 + side) * nq..(zone * 4 + side + 1) * nq];
        let mut side = [S::zero(); MAX_NODES];
        let mut phi = [S::zero(); MAX_NODES];
        let mut jy_rate = [S::zero(); MAX_DEGREE + 1];
        let mut jx_rate = [S::zero(); MAX_DEGREE + 1];

        // y-edge: Jx across from the upwind zone in x
        let (wl, wr) = upwind_weights(v.vx);
        let (zr, fr) = lattice.wrap(i + 1, j);
        let own = trace(z, RIGHT);
        let next = trace(zr, LEFT);
        for q in 0..nq {
            side[q] = (own[q].scale(wl) + (next[q] * fr).scale(wr)).scale(1.0 / self.dx);
        }
        edge_potential_profile(full.jy_flat(z), &side[..nq], v.vy, v.vx, rule, &mut phi[..nq]);
        let body = edge_body_integrals(&phi[..nq], rule);
        let top = vertex[z];
        let (zb, fb) = lattice.wrap(i, j - 1);
        let bottom = vertex[zb] * fb;
        moment_rates(top, bottom, &body, self.dy, n, &mut jy_rate);

        // x-edge: Jy across from the upwind zone in y
        let (wb, wt) = upwind_weights(v.vy);
        let (zt, ft) = lattice.wrap(i, j + 1);
        let own = trace(z, TOP);
        let next = trace(zt, BOTTOM);
        for q in 0..nq {
            side[q] = (own[q].scale(wb) + (next[q] * ft).scale(wt)).scale(1.0 / self.dy);
        }
        edge_potential_profile(full.jx_flat(z), &side[..nq], v.vx, v.vy, rule, &mut phi[..nq]);
        let body = edge_body_integrals(&phi[..nq], rule);
        let right = vertex[z];
        let (zl, fl) = lattice.wrap(i - 1, j);
        let left = vertex[zl] * fl;
        moment_rates(right, left, &body, self.dx, n, &mut jx_rate);

        (jy_rate, jx_rate)
    }

    /// Interior reconstructions of every zone of a real mesh (after completion).
    pub fn reconstruct_all(&self, field: &EdgeMomentField<f64>, mesh: &Mesh) -> Result<Vec<ZoneReconstruction<f64>>> {
        let lattice = mesh.lattice::<f64>();
        let full = if self.spec.m > field.degree() {
            complete_moments(field, &lattice, self.spec.m)?
        } else {
            field.clone()
        };
        let bubble_on = self.spec.bubble.active(full.degree());
        let scale = full.max_abs();
        let mut out = Vec::with_capacity(mesh.nx() * mesh.ny());
        for j in 0..mesh.ny() {
            for i in 0..mesh.nx() {
                let (ii, jj) = (i as isize, j as isize);
                let edges = ZoneEdges::gather(&full, &lattice, ii, jj);
                let beta = if bubble_on { zone_bubble(&full, &lattice, mesh.dx(), mesh.dy(), ii, jj) } else { 0.0 };
                let (xc, yc) = mesh.zone_center(i, j);
                let r = reconstruct_zone_scaled(&edges, mesh.dx(), mesh.dy(), beta, scale).map_err(|e| match e {
                    Error::ConstraintViolation { value, tolerance, .. } => Error::ConstraintViolation {
                        zone: j * mesh.nx() + i,
                        value,
                        tolerance,
                    },
                    other => other,
                })?;
                out.push(r.with_center(xc, yc));
            }
        }
        Ok(out)
    }
}

/// `rates[m] = (1/(μ_m Δ))[−(b_m(½)φ₊ − b_m(−½)φ₋) + ⟨b_m' φ*⟩]` for `m ≤ n`.
#[inline]
fn moment_rates<S: Scalar>(plus: S, minus: S, body: &[S; 3], delta: f64, n: usize, rates: &mut [S]) {
    for (m, r) in rates.iter_mut().enumerate().take(n + 1) {
        let boundary = plus.scale(basis_value(m, 0.5)) - minus.scale(basis_value(m, -0.5));
        let interior = match m {
            0 => S::zero(),
            1 => body[0],
            2 => body[1].scale(2.0),
            _ => body[2].scale(3.0),
        };
        *r = (interior - boundary).scale(1.0 / (MASS[m] * delta));
    }
}

/// Normalized trace data of zone `(i, j)` in `LEFT, RIGHT, BOTTOM, TOP` order.
#[inline]
fn gather_normalized<S: Scalar>(
    field: &EdgeMomentField<S>,
    lattice: &Lattice<S>,
    dx: f64,
    dy: f64,
    i: isize,
    j: isize,
    out: &mut [S],
) {
    let w = field.degree() + 1;
    let mut put = |slot: usize, src: &[S], f: S, scale: f64| {
        for (o, s) in out[slot * w..(slot + 1) * w].iter_mut().zip(src) {
            *o = (*s * f).scale(scale);
        }
    };
    let (zl, fl) = lattice.wrap(i - 1, j);
    put(LEFT, field.jy_flat(zl), fl, dy);
    let (z, f) = lattice.wrap(i, j);
    put(RIGHT, field.jy_flat(z), f, dy);
    let (zb, fb) = lattice.wrap(i, j - 1);
    put(BOTTOM, field.jx_flat(zb), fb, dx);
    put(TOP, field.jx_flat(z), f, dx);
}

/// Reject fields whose zone loop sums are not zero to roundoff.
fn check_circulation<S: Scalar>(field: &EdgeMomentField<S>, lattice: &Lattice<S>, dx: f64, dy: f64) -> Result<()> {
    let scale = field.max_abs() * (dx + dy);
    if !scale.is_finite() {
        return Err(Error::Blowup { step: 0, time: f64::NAN });
    }
    let tolerance = 1e-10 * scale;
    for j in 0..field.ny() as isize {
        for i in 0..field.nx() as isize {
            let (zl, fl) = lattice.wrap(i - 1, j);
            let (z, f) = lattice.wrap(i, j);
            let (zb, fb) = lattice.wrap(i, j - 1);
            let loop_sum = (field.jy_flat(z)[0] * f - field.jy_flat(zl)[0] * fl).scale(dy)
                - (field.jx_flat(z)[0] * f - field.jx_flat(zb)[0] * fb).scale(dx);
            if loop_sum.modulus() > tolerance {
                return Err(Error::ConstraintViolation {
                    zone: z,
                    value: loop_sum.modulus() / (dx * dy),
                    tolerance: tolerance / (dx * dy),
                });
            }
        }
    }
    Ok(())
}

/// `Σ_zones ΔxΔy · avg((Jx² + Jy²)/2)` over `(M+2)²` Gauss points of each
/// zone's reconstruction.
pub fn total_quadratic_energy(field: &EdgeMomentField<f64>, mesh: &Mesh, spec: &SchemeSpec) -> Result<f64> {
    let op = Operator::for_mesh(*spec, Velocity::new(1.0, 0.0), mesh);
    let recon = op.reconstruct_all(field, mesh)?;
    let rule = GaussRule::new(spec.m + 2);
    let mut total = 0.0;
    for r in &recon {
        let mut zone = 0.0;
        for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
            for (y, wy) in rule.nodes.iter().zip(&rule.weights) {
                let (jx, jy) = r.gradient_normalized(*x, *y);
                zone += wx * wy * 0.5 * (jx * jx + jy * jy);
            }
        }
        total += zone;
    }
    Ok(total * mesh.dx() * mesh.dy())
}
