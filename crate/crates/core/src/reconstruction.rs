//! Curl-free zone reconstruction and completion of unevolved edge moments.
//!
//! Inside a zone the field is written as `J = ∇ψ` with
//! `ψ = Σ c_ab X^a Y^b`, `X = x/Δx`, `Y = y/Δy` measured from the zone centre.
//! The coefficients are fixed by matching the gradient traces to the four
//! edge polynomials. After scaling y-edge data by `Δy` and x-edge data by
//! `Δx` the trace system no longer depends on the aspect ratio, so one
//! pseudo-inverse per degree serves every mesh.
//!
//! Only monomials with `min(a, b) ≤ 1` are used. The remaining ones are either
//! bubbles (zero traces) or differ from kept monomials by a bubble, so
//! excluding them pins the bubble part of ψ to zero. At degree 3 a single
//! bubble `(X² − 1/4)(Y² − 1/4)` matters for accuracy; it can optionally be
//! estimated from neighbouring edge slopes (see [`BubbleMode`]).

use std::sync::OnceLock;

use crate::basis::{monomial_moment, GaussRule, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::linalg::{real_inverse, real_pseudo_inverse};
use crate::mesh::{EdgeMomentField, Lattice};
use crate::scalar::Scalar;

/// Edge order inside a normalized trace vector.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const BOTTOM: usize = 2;
pub const TOP: usize = 3;

/// Treatment of the interior bubble at degree 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BubbleMode {
    /// Minimum-norm choice: the bubble is zero.
    Zero,
    /// Estimated from the second difference of edge slopes across four
    /// neighbouring edges in each direction; exact for potentials of degree ≤ 5.
    #[default]
    Stencil,
}

impl BubbleMode {
    /// Whether a bubble is estimated for this reconstruction degree.
    pub fn active(self, degree: usize) -> bool {
        self == BubbleMode::Stencil && degree == 3
    }
}

/// Precomputed solution operator and side-trace tables for one degree.
#[derive(Debug)]
pub struct TraceSolver {
    degree: usize,
    monomials: Vec<(usize, usize)>,
    // monomials × equations
    pinv: Vec<f64>,
    // per side: (p+2) nodes × equations; normalized normal component
    sides: [Vec<f64>; 4],
    rule: GaussRule,
}

static SOLVERS: [OnceLock<TraceSolver>; MAX_DEGREE + 1] =
    [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

impl TraceSolver {
    pub fn get(degree: usize) -> &'static TraceSolver {
        assert!(degree <= MAX_DEGREE);
        SOLVERS[degree].get_or_init(|| TraceSolver::build(degree))
    }

    fn build(p: usize) -> Self {
        let n = p + 1;
        let mut monomials = Vec::new();
        for a in 0..=p + 1 {
            for b in 0..=p + 1 {
                if (a, b) != (0, 0) && a.min(b) <= 1 {
                    monomials.push((a, b));
                }
            }
        }
        let neq = 4 * n;
        let nu = monomials.len();
        let mut t = vec![0.0; neq * nu];
        for (col, &(a, b)) in monomials.iter().enumerate() {
            for m in 0..n {
                // ∂ψ/∂Y on X = ∓1/2
                if b >= 1 {
                    let mom = b as f64 * monomial_moment(b - 1, m);
                    t[(LEFT * n + m) * nu + col] = (-0.5f64).powi(a as i32) * mom;
                    t[(RIGHT * n + m) * nu + col] = 0.5f64.powi(a as i32) * mom;
                }
                // ∂ψ/∂X on Y = ∓1/2
                if a >= 1 {
                    let mom = a as f64 * monomial_moment(a - 1, m);
                    t[(BOTTOM * n + m) * nu + col] = (-0.5f64).powi(b as i32) * mom;
                    t[(TOP * n + m) * nu + col] = 0.5f64.powi(b as i32) * mom;
                }
            }
        }
        let pinv = real_pseudo_inverse(&t, neq, nu);
        let rule = GaussRule::new(p + 2);
        let sides = [LEFT, RIGHT, BOTTOM, TOP].map(|side| {
            let mut rows = vec![0.0; rule.len() * neq];
            for (q, &xi) in rule.nodes.iter().enumerate() {
                for (k, &(a, b)) in monomials.iter().enumerate() {
                    let w = match side {
                        LEFT | RIGHT if a >= 1 => {
                            let x0: f64 = if side == LEFT { -0.5 } else { 0.5 };
                            a as f64 * x0.powi(a as i32 - 1) * xi.powi(b as i32)
                        }
                        BOTTOM | TOP if b >= 1 => {
                            let y0: f64 = if side == BOTTOM { -0.5 } else { 0.5 };
                            b as f64 * y0.powi(b as i32 - 1) * xi.powi(a as i32)
                        }
                        _ => 0.0,
                    };
                    if w != 0.0 {
                        for e in 0..neq {
                            rows[q * neq + e] += w * pinv[k * neq + e];
                        }
                    }
                }
            }
            rows
        });
        Self {
            degree: p,
            monomials,
            pinv,
            sides,
            rule,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn equations(&self) -> usize {
        4 * (self.degree + 1)
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    /// Potential coefficients on the full `(p+2)²` grid, index `a·(p+2) + b`.
    pub fn solve<S: Scalar>(&self, data: &[S]) -> Vec<S> {
        let neq = self.equations();
        assert_eq!(data.len(), neq);
        let w = self.degree + 2;
        let mut c = vec![S::zero(); w * w];
        for (k, &(a, b)) in self.monomials.iter().enumerate() {
            let row = &self.pinv[k * neq..(k + 1) * neq];
            let mut acc = S::zero();
            for (r, d) in row.iter().zip(data) {
                acc += d.scale(*r);
            }
            c[a * w + b] = acc;
        }
        c
    }

    /// Normalized normal component on `side` at the rule's nodes:
    /// `Δx·Jx` on the left/right lines, `Δy·Jy` on the bottom/top lines.
    /// The bubble adds `±β(ξ² − 1/4)`, see [`bubble_side_trace`].
    #[inline]
    pub fn side_trace<S: Scalar>(&self, side: usize, data: &[S], out: &mut [S]) {
        let neq = self.equations();
        let rows = &self.sides[side];
        for (q, o) in out.iter_mut().enumerate() {
            let row = &rows[q * neq..(q + 1) * neq];
            let mut acc = S::zero();
            for (r, d) in row.iter().zip(data) {
                acc += d.scale(*r);
            }
            *o = acc;
        }
    }
}

/// Normalized normal trace of `β·(X² − 1/4)(Y² − 1/4)` on `side` at `ξ`.
#[inline]
pub fn bubble_side_trace(side: usize, xi: f64) -> f64 {
    let s = if side == LEFT || side == BOTTOM { -1.0 } else { 1.0 };
    s * (xi * xi - 0.25)
}

/// Bubble coefficient from the normalized slopes of four parallel edges.
///
/// `y_slopes` are `Δy·Jy₁` of the y-edges at `X = −3/2, −1/2, 1/2, 3/2`;
/// `x_slopes` are `Δx·Jx₁` of the x-edges at `Y = −3/2, −1/2, 1/2, 3/2`.
pub fn bubble_estimate<S: Scalar>(y_slopes: [S; 4], x_slopes: [S; 4]) -> S {
    let d = |s: [S; 4]| (s[0] + s[3] - s[1] - s[2]).scale(0.125);
    (d(y_slopes) + d(x_slopes)).scale(0.5)
}

/// The four edge polynomials around one zone (physical, unnormalized).
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneEdges<S> {
    pub left: Vec<S>,
    pub right: Vec<S>,
    pub bottom: Vec<S>,
    pub top: Vec<S>,
}

impl<S: Scalar> ZoneEdges<S> {
    /// Edges of zone `(i, j)` gathered through the lattice.
    pub fn gather(field: &EdgeMomentField<S>, lattice: &Lattice<S>, i: isize, j: isize) -> Self {
        let fetch_y = |ii: isize, jj: isize| {
            let (z, f) = lattice.wrap(ii, jj);
            field.jy_flat(z).iter().map(|v| *v * f).collect::<Vec<S>>()
        };
        let fetch_x = |ii: isize, jj: isize| {
            let (z, f) = lattice.wrap(ii, jj);
            field.jx_flat(z).iter().map(|v| *v * f).collect::<Vec<S>>()
        };
        Self {
            left: fetch_y(i - 1, j),
            right: fetch_y(i, j),
            bottom: fetch_x(i, j - 1),
            top: fetch_x(i, j),
        }
    }

    pub fn degree(&self) -> usize {
        self.left.len() - 1
    }

    /// Trace data scaled to the unit zone, in `LEFT, RIGHT, BOTTOM, TOP` order.
    pub fn normalized(&self, dx: f64, dy: f64) -> Vec<S> {
        let mut d = Vec::with_capacity(4 * self.left.len());
        d.extend(self.left.iter().map(|v| v.scale(dy)));
        d.extend(self.right.iter().map(|v| v.scale(dy)));
        d.extend(self.bottom.iter().map(|v| v.scale(dx)));
        d.extend(self.top.iter().map(|v| v.scale(dx)));
        d
    }

    fn max_abs(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .chain(&self.bottom)
            .chain(&self.top)
            .fold(0.0, |m, v| m.max(v.modulus()))
    }
}

/// Bubble estimate for zone `(i, j)` read from the field.
pub fn zone_bubble<S: Scalar>(field: &EdgeMomentField<S>, lattice: &Lattice<S>, dx: f64, dy: f64, i: isize, j: isize) -> S {
    let ys = [i - 2, i - 1, i, i + 1].map(|ii| {
        let (z, f) = lattice.wrap(ii, j);
        (field.jy_flat(z)[1] * f).scale(dy)
    });
    let xs = [j - 2, j - 1, j, j + 1].map(|jj| {
        let (z, f) = lattice.wrap(i, jj);
        (field.jx_flat(z)[1] * f).scale(dx)
    });
    bubble_estimate(ys, xs)
}

/// Curl-free polynomial field of one zone, stored as its potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneReconstruction<S> {
    degree: usize,
    dx: f64,
    dy: f64,
    center: (f64, f64),
    // c_ab at a·(degree+2) + b
    coeffs: Vec<S>,
}

impl<S: Scalar> ZoneReconstruction<S> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// `c_ab` of `ψ = Σ c_ab X^a Y^b`.
    pub fn coeff(&self, a: usize, b: usize) -> S {
        self.coeffs[a * (self.degree + 2) + b]
    }

    pub fn with_center(mut self, xc: f64, yc: f64) -> Self {
        self.center = (xc, yc);
        self
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    /// `J = ∇ψ` at normalized coordinates `(X, Y) ∈ [−1/2, 1/2]²`.
    pub fn gradient_normalized(&self, xn: f64, yn: f64) -> (S, S) {
        let w = self.degree + 2;
        let mut gx = S::zero();
        let mut gy = S::zero();
        for a in 0..w {
            for b in 0..w {
                let c = self.coeffs[a * w + b];
                if a >= 1 {
                    gx += c.scale(a as f64 * xn.powi(a as i32 - 1) * yn.powi(b as i32));
                }
                if b >= 1 {
                    gy += c.scale(b as f64 * xn.powi(a as i32) * yn.powi(b as i32 - 1));
                }
            }
        }
        (gx.scale(1.0 / self.dx), gy.scale(1.0 / self.dy))
    }

    /// `∂Jy/∂x − ∂Jx/∂y`, each term from differentiating its own component
    /// polynomial.
    pub fn curl_normalized(&self, xn: f64, yn: f64) -> S {
        let w = self.degree + 2;
        let mut djy_dx = S::zero();
        let mut djx_dy = S::zero();
        for a in 1..w {
            for b in 1..w {
                let c = self.coeffs[a * w + b];
                let mono = xn.powi(a as i32 - 1) * yn.powi(b as i32 - 1);
                // Jy = Σ (b c_ab / Δy) X^a Y^(b−1), then ∂/∂x
                djy_dx += c.scale(b as f64 / self.dy).scale(a as f64 / self.dx * mono);
                // Jx = Σ (a c_ab / Δx) X^(a−1) Y^b, then ∂/∂y
                djx_dy += c.scale(a as f64 / self.dx).scale(b as f64 / self.dy * mono);
            }
        }
        djy_dx - djx_dy
    }
}

/// `∇ψ` at physical `(x, y)` inside the zone.
pub fn eval_reconstruction<S: Scalar>(recon: &ZoneReconstruction<S>, x: f64, y: f64) -> (S, S) {
    let xn = (x - recon.center.0) / recon.dx;
    let yn = (y - recon.center.1) / recon.dy;
    recon.gradient_normalized(xn, yn)
}

/// Reconstruct the curl-free interior field of one zone from its edges.
/// `bubble` is the coefficient of `(X² − 1/4)(Y² − 1/4)` (zero for the
/// minimum-norm reconstruction).
pub fn reconstruct_zone<S: Scalar>(edges: &ZoneEdges<S>, dx: f64, dy: f64, bubble: S) -> Result<ZoneReconstruction<S>> {
    reconstruct_zone_scaled(edges, dx, dy, bubble, edges.max_abs())
}

/// As [`reconstruct_zone`], with the circulation tolerance measured against
/// `scale` (typically the whole field's magnitude) instead of the zone's edges.
pub fn reconstruct_zone_scaled<S: Scalar>(
    edges: &ZoneEdges<S>,
    dx: f64,
    dy: f64,
    bubble: S,
    scale: f64,
) -> Result<ZoneReconstruction<S>> {
    let p = edges.degree();
    if p > MAX_DEGREE || [&edges.right, &edges.bottom, &edges.top].iter().any(|e| e.len() != p + 1) {
        return Err(Error::InvalidArgument("edge polynomials must share a degree ≤ 3".into()));
    }
    // line integral of J around the zone
    let loop_sum = (edges.right[0] - edges.left[0]).scale(dy) - (edges.top[0] - edges.bottom[0]).scale(dx);
    let tolerance = 1e-10 * scale * (dx + dy);
    if loop_sum.modulus() > tolerance {
        return Err(Error::ConstraintViolation {
            zone: 0,
            value: loop_sum.modulus() / (dx * dy),
            tolerance: tolerance / (dx * dy),
        });
    }
    let solver = TraceSolver::get(p);
    let mut coeffs = solver.solve(&edges.normalized(dx, dy));
    if bubble != S::zero() {
        let w = p + 2;
        if w < 3 {
            return Err(Error::InvalidArgument("a bubble needs degree ≥ 1".into()));
        }
        coeffs[2 * w + 2] += bubble;
        coeffs[2 * w] -= bubble.scale(0.25);
        coeffs[2] -= bubble.scale(0.25);
    }
    Ok(ZoneReconstruction {
        degree: p,
        dx,
        dy,
        center: (0.0, 0.0),
        coeffs,
    })
}

/// Linear reconstruction of edge moments `N+1..=M` along an edge's own grid line.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionStencil {
    evolved: usize,
    target: usize,
    /// Line offsets whose means are used.
    offsets: Vec<isize>,
    /// `weights[m − N − 1][k]`; inputs are the means at `offsets`, followed by
    /// the own slope when `N = 1`.
    weights: Vec<Vec<f64>>,
}

impl CompletionStencil {
    pub fn new(evolved: usize, target: usize) -> Result<Self> {
        if evolved > 1 || target <= evolved || target > MAX_DEGREE {
            return Err(Error::InvalidScheme(format!(
                "completion from degree {evolved} to {target} is not supported"
            )));
        }
        // interpolating polynomial through the inputs, in monomials of ξ
        let (offsets, degree): (Vec<isize>, usize) = if evolved == 0 {
            let r = if target == 3 { 2 } else { 1 };
            ((-r..=r).collect(), 2 * r as usize)
        } else {
            (vec![-1, 0, 1], 3)
        };
        let n = degree + 1;
        let mut v = vec![0.0; n * n];
        for (row, &s) in offsets.iter().enumerate() {
            let (lo, hi) = (s as f64 - 0.5, s as f64 + 0.5);
            for k in 0..n {
                v[row * n + k] = (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k as f64 + 1.0);
            }
        }
        if evolved == 1 {
            let row = offsets.len();
            for k in 0..n {
                v[row * n + k] = monomial_moment(k, 1);
            }
        }
        let inv = real_inverse(&v, n);
        let weights = ((evolved + 1)..=target)
            .map(|m| {
                (0..n)
                    .map(|input| (0..n).map(|k| monomial_moment(k, m) * inv[k * n + input]).sum())
                    .collect()
            })
            .collect();
        Ok(Self {
            evolved,
            target,
            offsets,
            weights,
        })
    }

    pub fn evolved(&self) -> usize {
        self.evolved
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn offsets(&self) -> &[isize] {
        &self.offsets
    }

    /// Moments `N+1..=M` from the line means (at `offsets`) and, for `N = 1`,
    /// the own slope.
    pub fn apply<S: Scalar>(&self, means: &[S], slope: Option<S>, out: &mut [S]) {
        for (o, w) in out.iter_mut().zip(&self.weights) {
            let mut acc = S::zero();
            for (wk, mk) in w.iter().zip(means) {
                acc += mk.scale(*wk);
            }
            if let Some(s) = slope {
                acc += s.scale(w[self.offsets.len()]);
            }
            *o = acc;
        }
    }
}

fn stencil(evolved: usize, target: usize) -> &'static CompletionStencil {
    static TABLE: OnceLock<Vec<Option<CompletionStencil>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::new();
        for n in 0..=1 {
            for m in 0..=MAX_DEGREE {
                t.push(CompletionStencil::new(n, m).ok());
            }
        }
        t
    });
    table[evolved * (MAX_DEGREE + 1) + target]
        .as_ref()
        .expect("unsupported completion")
}

/// Raise the field from its evolved degree `N ∈ {0, 1}` to `target`, leaving
/// evolved moments untouched.
pub fn complete_moments<S: Scalar>(field: &EdgeMomentField<S>, lattice: &Lattice<S>, target: usize) -> Result<EdgeMomentField<S>> {
    let n = field.degree();
    if target == n {
        return Ok(field.clone());
    }
    if n > 1 || target < n || target > MAX_DEGREE {
        return Err(Error::InvalidScheme(format!("cannot complete degree {n} to {target}")));
    }
    let st = stencil(n, target);
    let mut out = field.with_degree(target);
    let mut means = vec![S::zero(); st.offsets.len()];
    let mut high = vec![S::zero(); target - n];
    for j in 0..field.ny() as isize {
        for i in 0..field.nx() as isize {
            // y-edge (i, j): neighbours along y
            for (k, &s) in st.offsets.iter().enumerate() {
                let (z, f) = lattice.wrap(i, j + s);
                means[k] = field.jy_flat(z)[0] * f;
            }
            let slope = (n == 1).then(|| field.jy(i as usize, j as usize)[1]);
            st.apply(&means, slope, &mut high);
            out.jy_mut(i as usize, j as usize)[n + 1..].copy_from_slice(&high);
            // x-edge (i, j): neighbours along x
            for (k, &s) in st.offsets.iter().enumerate() {
                let (z, f) = lattice.wrap(i + s, j);
                means[k] = field.jx_flat(z)[0] * f;
            }
            let slope = (n == 1).then(|| field.jx(i as usize, j as usize)[1]);
            st.apply(&means, slope, &mut high);
            out.jx_mut(i as usize, j as usize)[n + 1..].copy_from_slice(&high);
        }
    }
    Ok(out)
}
