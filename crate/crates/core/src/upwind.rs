//! Upwinded potentials `φ = v·J` for constant advection velocity: one value
//! per vertex (two-dimensional upwinding) and one profile per edge
//! (one-dimensional upwinding across the edge).

use crate::basis::{eval_edge_poly, GaussRule};
use crate::mesh::{EdgeMomentField, Lattice};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Velocity {
    pub vx: f64,
    pub vy: f64,
}

impl Velocity {
    pub fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn is_zero(&self) -> bool {
        self.vx == 0.0 && self.vy == 0.0
    }
}

/// Weights `(w_minus, w_plus)` of the states on the negative and positive side
/// of an interface for velocity component `c`: the upwind state gets weight 1,
/// and a zero component averages the two.
#[inline]
pub fn upwind_weights(c: f64) -> (f64, f64) {
    if c > 0.0 {
        (1.0, 0.0)
    } else if c < 0.0 {
        (0.0, 1.0)
    } else {
        (0.5, 0.5)
    }
}

/// `φ**` at vertex `(i, j)`, the top-right corner of zone `(i, j)`.
///
/// The x-edges meeting there are `jx(i, j)` (ending at `ξ = +1/2`) and
/// `jx(i+1, j)` (starting at `ξ = −1/2`); the y-edges are `jy(i, j)` and
/// `jy(i, j+1)`.
pub fn vertex_potential<S: Scalar>(field: &EdgeMomentField<S>, lattice: &Lattice<S>, i: isize, j: isize, v: Velocity) -> S {
    let end = |coeffs: &[S], f: S, xi: f64| eval_edge_poly(coeffs, xi) * f;
    let (wl, wr) = upwind_weights(v.vx);
    let mut jx = S::zero();
    if wl != 0.0 {
        let (z, f) = lattice.wrap(i, j);
        jx += end(field.jx_flat(z), f, 0.5).scale(wl);
    }
    if wr != 0.0 {
        let (z, f) = lattice.wrap(i + 1, j);
        jx += end(field.jx_flat(z), f, -0.5).scale(wr);
    }
    let (wb, wt) = upwind_weights(v.vy);
    let mut jy = S::zero();
    if wb != 0.0 {
        let (z, f) = lattice.wrap(i, j);
        jy += end(field.jy_flat(z), f, 0.5).scale(wb);
    }
    if wt != 0.0 {
        let (z, f) = lattice.wrap(i, j + 1);
        jy += end(field.jy_flat(z), f, -0.5).scale(wt);
    }
    jx.scale(v.vx) + jy.scale(v.vy)
}

/// `φ*` at the rule's nodes of one edge.
///
/// `edge` holds the edge's own polynomial (its component is the one along the
/// edge direction), `side` the upwind-selected interior value of the other
/// component at the same nodes. `along` and `across` are the velocity
/// components paired with them.
pub fn edge_potential_profile<S: Scalar>(edge: &[S], side: &[S], along: f64, across: f64, rule: &GaussRule, out: &mut [S]) {
    for ((o, &xi), s) in out.iter_mut().zip(&rule.nodes).zip(side) {
        *o = eval_edge_poly(edge, xi).scale(along) + s.scale(across);
    }
}

/// Line averages `(⟨φ*⟩, ⟨ξφ*⟩, ⟨(ξ² − 1/20)φ*⟩)` by the given rule.
pub fn edge_body_integrals<S: Scalar>(phi: &[S], rule: &GaussRule) -> [S; 3] {
    let mut out = [S::zero(); 3];
    for ((x, w), f) in rule.nodes.iter().zip(&rule.weights).zip(phi) {
        out[0] += f.scale(*w);
        out[1] += f.scale(w * x);
        out[2] += f.scale(w * (x * x - 0.05));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn body_integrals_examples() {
        let rule = GaussRule::new(3);
        let c = edge_body_integrals(&[2.0; 3], &rule);
        assert!((c[0] - 2.0).abs() < 1e-15 && c[1].abs() < 1e-15 && (c[2] - 2.0 / 30.0).abs() < 1e-15);
        let phi: Vec<f64> = rule.nodes.clone();
        let c = edge_body_integrals(&phi, &rule);
        assert!(c[0].abs() < 1e-15 && (c[1] - 1.0 / 12.0).abs() < 1e-15 && c[2].abs() < 1e-15);
    }

    #[test]
    fn body_integrals_quartic_against_fine_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rule = GaussRule::new(5);
        let fine = GaussRule::new(50);
        for _ in 0..20 {
            let a: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = |x: f64| a.iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum::<f64>();
            let phi: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
            let c = edge_body_integrals(&phi, &rule);
            let e = [
                fine.average(f),
                fine.average(|x| x * f(x)),
                fine.average(|x| (x * x - 0.05) * f(x)),
            ];
            for k in 0..3 {
                assert!((c[k] - e[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn uniform_field_vertex() {
        let field = EdgeMomentField::uniform(4, 4, 2, 0.7, -1.1);
        let lat = Lattice::periodic(4, 4);
        for v in [Velocity::new(1.0, 2.0), Velocity::new(-0.5, 0.0), Velocity::new(0.0, -3.0)] {
            let phi = vertex_potential(&field, &lat, 3, 0, v);
            assert!((phi - (0.7 * v.vx - 1.1 * v.vy)).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_upwind_endpoint() {
        let mut field = EdgeMomentField::zeros(4, 4, 1);
        field.jx_mut(1, 1).copy_from_slice(&[0.4, 0.2]);
        field.jx_mut(2, 1).copy_from_slice(&[9.0, 9.0]);
        let lat = Lattice::periodic(4, 4);
        let phi = vertex_potential(&field, &lat, 1, 1, Velocity::new(1.0, 0.0));
        assert!((phi - 0.5).abs() < 1e-15);
        let phi = vertex_potential(&field, &lat, 1, 1, Velocity::new(-1.0, 0.0));
        assert!((phi + 4.5).abs() < 1e-15);
    }
}
