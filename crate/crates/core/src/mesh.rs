//! Periodic structured mesh, edge indexing and edge-moment field storage.
//!
//! Edge ownership: zone `(i, j)` owns its RIGHT y-edge (at `x0 + (i+1)·dx`)
//! and its TOP x-edge (at `y0 + (j+1)·dy`). Left and bottom edges are reached
//! through the neighbour's storage, so every edge is stored exactly once.

use crate::basis::{eval_edge_poly, project_edge_with, GaussRule, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Quadrature used when projecting analytic data onto edges.
const INIT_QUADRATURE_POINTS: usize = 8;

/// Doubly periodic rectangular mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    x0: f64,
    y0: f64,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidMesh(format!(
                "zone counts must be at least 4, got {nx}x{ny}"
            )));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidMesh(format!("zone sizes must be positive, got {dx}, {dy}")));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidMesh("domain origin must be finite".into()));
        }
        Ok(Self { nx, ny, dx, dy, x0, y0 })
    }

    /// `n × n` zones covering `[lo, hi]²`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        let h = (hi - lo) / n as f64;
        Self::new(n, n, h, h, lo, lo)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn lx(&self) -> f64 {
        self.nx as f64 * self.dx
    }
    pub fn ly(&self) -> f64 {
        self.ny as f64 * self.dy
    }
    pub fn area(&self) -> f64 {
        self.lx() * self.ly()
    }

    pub fn zone_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.y0 + (j as f64 + 0.5) * self.dy,
        )
    }

    /// Periodic lattice (unit phases) with this mesh's extents.
    pub fn lattice<S: Scalar>(&self) -> Lattice<S> {
        Lattice::periodic(self.nx, self.ny)
    }
}

/// Neighbour access over a twisted-periodic lattice.
///
/// Index `i + q·nx` resolves to `i` multiplied by `phase_x^q` (likewise in y).
/// Real meshes use unit phases; a `1 × 1` lattice with Fourier phases
/// represents a single Bloch mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<S> {
    nx: usize,
    ny: usize,
    // phase powers for q in -PHASE_RANGE..=PHASE_RANGE
    powers_x: Vec<S>,
    powers_y: Vec<S>,
    twisted: bool,
}

const PHASE_RANGE: isize = 4;

impl<S: Scalar> Lattice<S> {
    pub fn periodic(nx: usize, ny: usize) -> Self {
        let n = (2 * PHASE_RANGE + 1) as usize;
        Self {
            nx,
            ny,
            powers_x: vec![S::one(); n],
            powers_y: vec![S::one(); n],
            twisted: false,
        }
    }

    /// Single-zone lattice whose `+x` neighbour equals `phase_x` times the reference.
    pub fn bloch(phase_x: S, phase_y: S) -> Self {
        let powers = |p: S| -> Vec<S> {
            (-PHASE_RANGE..=PHASE_RANGE)
                .map(|q| p.powi(q as i32))
                .collect()
        };
        Self {
            nx: 1,
            ny: 1,
            powers_x: powers(phase_x),
            powers_y: powers(phase_y),
            twisted: true,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn zones(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat zone index and phase factor for a possibly out-of-range `(i, j)`.
    #[inline]
    pub fn wrap(&self, i: isize, j: isize) -> (usize, S) {
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        let qi = i.div_euclid(nx);
        let qj = j.div_euclid(ny);
        let ri = i.rem_euclid(nx) as usize;
        let rj = j.rem_euclid(ny) as usize;
        let idx = rj * self.nx + ri;
        if !self.twisted {
            return (idx, S::one());
        }
        assert!(
            qi.abs() <= PHASE_RANGE && qj.abs() <= PHASE_RANGE,
            "stencil reaches beyond the supported Bloch range"
        );
        let f = self.powers_x[(qi + PHASE_RANGE) as usize] * self.powers_y[(qj + PHASE_RANGE) as usize];
        (idx, f)
    }
}

/// Modal coefficients of `Jx` on x-edges and `Jy` on y-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMomentField<S> {
    nx: usize,
    ny: usize,
    degree: usize,
    jx: Vec<S>,
    jy: Vec<S>,
}

impl<S: Scalar> EdgeMomentField<S> {
    pub fn zeros(nx: usize, ny: usize, degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE, "edge degree {degree} exceeds {MAX_DEGREE}");
        let n = nx * ny * (degree + 1);
        Self {
            nx,
            ny,
            degree,
            jx: vec![S::zero(); n],
            jy: vec![S::zero(); n],
        }
    }

    pub fn for_mesh(mesh: &Mesh, degree: usize) -> Self {
        Self::zeros(mesh.nx(), mesh.ny(), degree)
    }

    /// Uniform field `J = (a, b)`.
    pub fn uniform(nx: usize, ny: usize, degree: usize, a: S, b: S) -> Self {
        let mut f = Self::zeros(nx, ny, degree);
        let w = degree + 1;
        for z in 0..nx * ny {
            f.jx[z * w] = a;
            f.jy[z * w] = b;
        }
        f
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn zones(&self) -> usize {
        self.nx * self.ny
    }
    /// Moments per edge.
    pub fn width(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        (j * self.nx + i) * (self.degree + 1)
    }

    /// Top x-edge of zone `(i, j)`.
    #[inline]
    pub fn jx(&self, i: usize, j: usize) -> &[S] {
        let o = self.offset(i, j);
        &self.jx[o..o + self.degree + 1]
    }
    /// Right y-edge of zone `(i, j)`.
    #[inline]
    pub fn jy(&self, i: usize, j: usize) -> &[S] {
        let o = self.offset(i, j);
        &self.jy[o..o + self.degree + 1]
    }
    #[inline]
    pub fn jx_mut(&mut self, i: usize, j: usize) -> &mut [S] {
        let o = self.offset(i, j);
        let w = self.degree + 1;
        &mut self.jx[o..o + w]
    }
    #[inline]
    pub fn jy_mut(&mut self, i: usize, j: usize) -> &mut [S] {
        let o = self.offset(i, j);
        let w = self.degree + 1;
        &mut self.jy[o..o + w]
    }

    /// Edge moments by flat zone index.
    #[inline]
    pub fn jx_flat(&self, z: usize) -> &[S] {
        let w = self.degree + 1;
        &self.jx[z * w..(z + 1) * w]
    }
    #[inline]
    pub fn jy_flat(&self, z: usize) -> &[S] {
        let w = self.degree + 1;
        &self.jy[z * w..(z + 1) * w]
    }

    pub fn jx_data(&self) -> &[S] {
        &self.jx
    }
    pub fn jy_data(&self) -> &[S] {
        &self.jy
    }
    pub fn jx_data_mut(&mut self) -> &mut [S] {
        &mut self.jx
    }
    pub fn jy_data_mut(&mut self) -> &mut [S] {
        &mut self.jy
    }

    /// Both coefficient arrays at once, for writers that fill them together.
    pub fn data_mut_pair(&mut self) -> (&mut [S], &mut [S]) {
        (&mut self.jx, &mut self.jy)
    }

    pub fn max_abs(&self) -> f64 {
        self.jx
            .iter()
            .chain(&self.jy)
            .fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn is_finite(&self) -> bool {
        self.jx.iter().chain(&self.jy).all(|v| v.is_finite())
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.jx.len(), other.jx.len());
        for (s, o) in self.jx.iter_mut().zip(&other.jx) {
            *s += o.scale(a);
        }
        for (s, o) in self.jy.iter_mut().zip(&other.jy) {
            *s += o.scale(a);
        }
    }

    pub fn scale_in_place(&mut self, a: f64) {
        for v in self.jx.iter_mut().chain(self.jy.iter_mut()) {
            *v = v.scale(a);
        }
    }

    /// Same field restricted (truncated) or zero-padded to `degree`.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = Self::zeros(self.nx, self.ny, degree);
        let keep = degree.min(self.degree) + 1;
        for z in 0..self.zones() {
            let (src, dst) = (z * self.width(), z * out.width());
            out.jx[dst..dst + keep].copy_from_slice(&self.jx[src..src + keep]);
            out.jy[dst..dst + keep].copy_from_slice(&self.jy[src..src + keep]);
        }
        out
    }

    /// Evaluate the x-edge polynomial of zone `(i, j)` at normalized `xi`.
    pub fn eval_jx(&self, i: usize, j: usize, xi: f64) -> S {
        eval_edge_poly(self.jx(i, j), xi)
    }
    pub fn eval_jy(&self, i: usize, j: usize, xi: f64) -> S {
        eval_edge_poly(self.jy(i, j), xi)
    }
}

impl EdgeMomentField<f64> {
    /// Complexified copy (for feeding real data through the Fourier code path).
    pub fn to_complex(&self) -> EdgeMomentField<num_complex::Complex64> {
        let c = |v: &f64| num_complex::Complex64::new(*v, 0.0);
        EdgeMomentField {
            nx: self.nx,
            ny: self.ny,
            degree: self.degree,
            jx: self.jx.iter().map(c).collect(),
            jy: self.jy.iter().map(c).collect(),
        }
    }
}

/// Edge moments of `∇φ`: means from exact potential differences, higher
/// moments by L2 projection of the supplied analytic gradient.
///
/// Using potential differences for the means makes the discrete circulation
/// vanish to roundoff irrespective of quadrature error.
pub fn init_from_gradient(
    potential: impl Fn(f64, f64) -> f64,
    gradient: impl Fn(f64, f64) -> (f64, f64),
    mesh: &Mesh,
    degree: usize,
) -> EdgeMomentField<f64> {
    let rule = GaussRule::new(INIT_QUADRATURE_POINTS);
    let mut field = EdgeMomentField::for_mesh(mesh, degree);
    let (dx, dy) = (mesh.dx(), mesh.dy());
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let (xc, yc) = mesh.zone_center(i, j);
            // right y-edge
            let xe = xc + 0.5 * dx;
            let mut c = project_edge_with(|xi| gradient(xe, yc + xi * dy).1, degree, &rule);
            c[0] = (potential(xe, yc + 0.5 * dy) - potential(xe, yc - 0.5 * dy)) / dy;
            field.jy_mut(i, j).copy_from_slice(&c);
            // top x-edge
            let ye = yc + 0.5 * dy;
            let mut c = project_edge_with(|xi| gradient(xc + xi * dx, ye).0, degree, &rule);
            c[0] = (potential(xc + 0.5 * dx, ye) - potential(xc - 0.5 * dx, ye)) / dx;
            field.jx_mut(i, j).copy_from_slice(&c);
        }
    }
    field
}

/// Edge moments by projection of a vector field (no potential available).
pub fn project_vector_field(
    field_fn: impl Fn(f64, f64) -> (f64, f64),
    mesh: &Mesh,
    degree: usize,
) -> EdgeMomentField<f64> {
    let rule = GaussRule::new(INIT_QUADRATURE_POINTS);
    let mut field = EdgeMomentField::for_mesh(mesh, degree);
    let (dx, dy) = (mesh.dx(), mesh.dy());
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let (xc, yc) = mesh.zone_center(i, j);
            let xe = xc + 0.5 * dx;
            let c = project_edge_with(|xi| field_fn(xe, yc + xi * dy).1, degree, &rule);
            field.jy_mut(i, j).copy_from_slice(&c);
            let ye = yc + 0.5 * dy;
            let c = project_edge_with(|xi| field_fn(xc + xi * dx, ye).0, degree, &rule);
            field.jx_mut(i, j).copy_from_slice(&c);
        }
    }
    field
}

/// Discrete circulation (mean curl) of zone `(i, j)` from zeroth moments.
pub fn discrete_circulation<S: Scalar>(
    field: &EdgeMomentField<S>,
    lattice: &Lattice<S>,
    dx: f64,
    dy: f64,
    i: isize,
    j: isize,
) -> S {
    let (r, fr) = lattice.wrap(i, j);
    let (l, fl) = lattice.wrap(i - 1, j);
    let (b, fb) = lattice.wrap(i, j - 1);
    let jy_r = field.jy_flat(r)[0] * fr;
    let jy_l = field.jy_flat(l)[0] * fl;
    let jx_t = field.jx_flat(r)[0] * fr;
    let jx_b = field.jx_flat(b)[0] * fb;
    (jy_r - jy_l).scale(1.0 / dx) - (jx_t - jx_b).scale(1.0 / dy)
}

/// Largest `|circulation|` over all zones of a real periodic mesh.
pub fn max_circulation(field: &EdgeMomentField<f64>, mesh: &Mesh) -> f64 {
    let lat = mesh.lattice::<f64>();
    let mut m: f64 = 0.0;
    for j in 0..mesh.ny() as isize {
        for i in 0..mesh.nx() as isize {
            m = m.max(discrete_circulation(field, &lat, mesh.dx(), mesh.dy(), i, j).abs());
        }
    }
    m
}
