// SPDX-License-Identifier: MIT OR Apache-2.0

//! Orthogonal splitting of cell fields into divergence-free, interior-gradient
//! and harmonic-gradient parts.
//!
//! * range(P2) is spanned by Q1 gradients of potentials vanishing on the
//!   boundary vertices;
//! * range(P3) is range(G) ⊖ range(P2), the gradients of discrete-harmonic
//!   potentials (constant fields belong here);
//! * P1 = I − P2 − P3 projects onto ker Gᵀ, the fields with no volume or
//!   boundary charge.

use super::grid::VoxelGrid;
use super::ops::Q1;
use crate::error::{Error, Result};
use crate::linalg::{range_basis, C64};
use ndarray::{Array1, Array2};

const RANK_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Orthonormal (Euclidean) basis of range(P2).
    pub b2: Array2<f64>,
    /// Orthonormal (Euclidean) basis of range(P3).
    pub b3: Array2<f64>,
}

pub fn subspace_projectors(grid: &VoxelGrid) -> Result<Decomposition> {
    let q = Q1::from_grid(grid);
    let g_int = q.dense_columns(&grid.interior_vertices());
    let b2 = range_basis(&g_int, RANK_TOL)?;
    let g_bnd = q.dense_columns(&grid.boundary_vertices());
    let h = &g_bnd - &b2.dot(&b2.t().dot(&g_bnd));
    let b3 = range_basis(&h, RANK_TOL)?;
    if b3.ncols() < 3 {
        return Err(Error::Degenerate { n: grid.n, detail: format!("harmonic-gradient space has dimension {}", b3.ncols()) });
    }
    let cross = b2.t().dot(&b3).iter().map(|x| x.abs()).fold(0.0, f64::max);
    if cross > 1e-8 {
        return Err(Error::Degenerate { n: grid.n, detail: format!("interior and harmonic gradients overlap ({cross:.2e})") });
    }
    Ok(Decomposition { b2, b3 })
}

fn project_basis(b: &Array2<f64>, f: &Array1<C64>) -> Array1<C64> {
    let re = f.mapv(|z| z.re);
    let im = f.mapv(|z| z.im);
    let pr = b.dot(&b.t().dot(&re));
    let pi = b.dot(&b.t().dot(&im));
    Array1::from_shape_fn(f.len(), |i| C64::new(pr[i], pi[i]))
}

impl Decomposition {
    pub fn dim(&self) -> usize {
        self.b2.nrows()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        let n = self.dim();
        let (d2, d3) = (self.b2.ncols(), self.b3.ncols());
        (n - d2 - d3, d2, d3)
    }

    pub fn p2(&self) -> Array2<f64> {
        self.b2.dot(&self.b2.t())
    }

    pub fn p3(&self) -> Array2<f64> {
        self.b3.dot(&self.b3.t())
    }

    pub fn p1(&self) -> Array2<f64> {
        let mut p = -(self.p2() + self.p3());
        for i in 0..self.dim() {
            p[[i, i]] += 1.0;
        }
        p
    }

    /// Components `(P1 f, P2 f, P3 f)` of a complex cell field.
    pub fn split(&self, f: &Array1<C64>) -> (Array1<C64>, Array1<C64>, Array1<C64>) {
        let p2 = project_basis(&self.b2, f);
        let p3 = project_basis(&self.b3, f);
        let p1 = f - &p2 - &p3;
        (p1, p2, p3)
    }

    pub fn split_real(&self, f: &Array1<f64>) -> (Array1<f64>, Array1<f64>, Array1<f64>) {
        let p2 = self.b2.dot(&self.b2.t().dot(f));
        let p3 = self.b3.dot(&self.b3.t().dot(f));
        let p1 = f - &p2 - &p3;
        (p1, p2, p3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::{voxelize, ReferenceShape};

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn projector_algebra_on_ball() {
        let g = voxelize(&ReferenceShape::ball(0.5).unwrap(), 8).unwrap();
        let d = subspace_projectors(&g).unwrap();
        let (p1, p2, p3) = (d.p1(), d.p2(), d.p3());
        let n = d.dim();
        let eye = Array2::<f64>::eye(n);
        assert!(max_abs(&(&p1 + &p2 + &p3 - &eye)) < 1e-8);
        for p in [&p1, &p2, &p3] {
            assert!(max_abs(&(p.dot(p) - p)) < 1e-8);
            assert!(max_abs(&(p - &p.t())) < 1e-12);
        }
        assert!(max_abs(&p1.dot(&p3)) < 1e-8);
        assert!(max_abs(&p1.dot(&p2)) < 1e-8);
        assert!(max_abs(&p2.dot(&p3)) < 1e-8);
        // range(P1) carries no charge
        let q = Q1::from_grid(&g);
        let gt = q.dense().t().to_owned();
        assert!(max_abs(&gt.dot(&p1)) * g.cell_size < 1e-8);
    }

    #[test]
    fn constants_are_harmonic_gradients() {
        let g = voxelize(&ReferenceShape::ball(0.5).unwrap(), 8).unwrap();
        let d = subspace_projectors(&g).unwrap();
        for a in 0..3 {
            let c = Array1::from_shape_fn(d.dim(), |i| if i % 3 == a { 1.0 } else { 0.0 });
            let (p1, p2, p3) = d.split_real(&c);
            let nc = c.dot(&c).sqrt();
            assert!(p1.dot(&p1).sqrt() < 1e-8 * nc);
            assert!(p2.dot(&p2).sqrt() < 1e-8 * nc);
            assert!((&p3 - &c).dot(&(&p3 - &c)).sqrt() < 1e-8 * nc);
        }
    }
}
