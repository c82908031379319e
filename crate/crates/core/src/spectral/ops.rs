// SPDX-License-Identifier: MIT OR Apache-2.0

//! Discrete Newtonian and magnetization operators.
//!
//! Gradients are taken with the trilinear (Q1) element: a scalar given on the
//! corners of a cell has, at the cell centre,
//! `∂_a ψ = (1/4s) Σ_d σ_a(d) ψ(v_d)` with `σ_a(d) = ±1`. The transpose `Gᵀ` of
//! this map is minus the discrete divergence, boundary charges included, so the
//! magnetization operator is assembled as `∇M = G · N_v · Gᵀ` where `N_v` is the
//! Newtonian kernel sampled on vertices. Fields in `ker Gᵀ` are annihilated exactly.

use super::grid::VoxelGrid;
use crate::linalg::{norm, sub, Vec3, C64, I};
use ndarray::Array2;
use std::f64::consts::PI;
use std::ops::{AddAssign, Mul};

/// `∫_{[−½,½]³} dx / (4π|x|)`.
pub const CUBE_SELF: f64 = 0.189_400_538_709_237_4;

pub trait Field: Copy + Default + AddAssign + Mul<f64, Output = Self> {}
impl Field for f64 {}
impl Field for C64 {}

#[inline]
fn sigma(d: usize, a: usize) -> f64 {
    if (d >> a) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

const LEVI: [(usize, usize, usize, f64); 6] =
    [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)];

/// Sparse Q1 gradient over one or several voxelized particles.
#[derive(Clone, Debug)]
pub struct Q1 {
    pub cell_vertices: Vec<[usize; 8]>,
    pub inv4s: Vec<f64>,
    pub nverts: usize,
}

impl Q1 {
    pub fn from_grid(g: &VoxelGrid) -> Self {
        Self::concat(&[g])
    }

    /// Block-diagonal gradient of disjoint grids; vertices are numbered grid by grid.
    pub fn concat(grids: &[&VoxelGrid]) -> Self {
        let mut cell_vertices = Vec::new();
        let mut inv4s = Vec::new();
        let mut offset = 0;
        for g in grids {
            for cv in &g.cell_vertices {
                cell_vertices.push(cv.map(|v| v + offset));
                inv4s.push(0.25 / g.cell_size);
            }
            offset += g.num_vertices();
        }
        Q1 { cell_vertices, inv4s, nverts: offset }
    }

    pub fn ncells(&self) -> usize {
        self.cell_vertices.len()
    }

    pub fn grad<T: Field>(&self, psi: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); 3 * self.ncells()];
        for (c, cv) in self.cell_vertices.iter().enumerate() {
            for (d, &v) in cv.iter().enumerate() {
                for a in 0..3 {
                    out[3 * c + a] += psi[v] * (sigma(d, a) * self.inv4s[c]);
                }
            }
        }
        out
    }

    pub fn grad_t<T: Field>(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); self.nverts];
        for (c, cv) in self.cell_vertices.iter().enumerate() {
            for (d, &v) in cv.iter().enumerate() {
                for a in 0..3 {
                    out[v] += f[3 * c + a] * (sigma(d, a) * self.inv4s[c]);
                }
            }
        }
        out
    }

    /// Dense `3N × |cols|` block of G restricted to the listed vertices.
    pub fn dense_columns(&self, cols: &[usize]) -> Array2<f64> {
        let mut pos = vec![usize::MAX; self.nverts];
        for (i, &v) in cols.iter().enumerate() {
            pos[v] = i;
        }
        let mut m = Array2::zeros((3 * self.ncells(), cols.len()));
        for (c, cv) in self.cell_vertices.iter().enumerate() {
            for (d, &v) in cv.iter().enumerate() {
                if pos[v] == usize::MAX {
                    continue;
                }
                for a in 0..3 {
                    m[[3 * c + a, pos[v]]] += sigma(d, a) * self.inv4s[c];
                }
            }
        }
        m
    }

    pub fn dense(&self) -> Array2<f64> {
        let all: Vec<usize> = (0..self.nverts).collect();
        self.dense_columns(&all)
    }

    /// `G · nv · Gᵀ` for a vertex kernel `nv`.
    pub fn sandwich<T: Field>(&self, nv: &Array2<T>) -> Array2<T> {
        let m = 3 * self.ncells();
        let mut y = Array2::from_elem((m, self.nverts), T::default());
        for (c, cv) in self.cell_vertices.iter().enumerate() {
            for (d, &v) in cv.iter().enumerate() {
                let row = nv.row(v);
                for a in 0..3 {
                    let w = sigma(d, a) * self.inv4s[c];
                    let mut target = y.row_mut(3 * c + a);
                    for (t, &x) in target.iter_mut().zip(row.iter()) {
                        *t += x * w;
                    }
                }
            }
        }
        let mut out = Array2::from_elem((m, m), T::default());
        for r in 0..m {
            let yr = y.row(r);
            let mut orow = out.row_mut(r);
            for (c, cv) in self.cell_vertices.iter().enumerate() {
                for (d, &v) in cv.iter().enumerate() {
                    let val = yr[v];
                    for a in 0..3 {
                        orow[3 * c + a] += val * (sigma(d, a) * self.inv4s[c]);
                    }
                }
            }
        }
        out
    }

    /// Q1 curl of a vertex vector field (layout `3·vertex + component`).
    pub fn curl<T: Field>(&self, phi: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); 3 * self.ncells()];
        for (c, cv) in self.cell_vertices.iter().enumerate() {
            for (d, &v) in cv.iter().enumerate() {
                for &(a, b, j, eps) in &LEVI {
                    out[3 * c + a] += phi[3 * v + j] * (eps * sigma(d, b) * self.inv4s[c]);
                }
            }
        }
        out
    }

    /// Dense curl restricted to vector potentials on the listed vertices.
    pub fn curl_dense_columns(&self, verts: &[usize]) -> Array2<f64> {
        let mut pos = vec![usize::MAX; self.nverts];
        for (i, &v) in verts.iter().enumerate() {
            pos[v] = i;
        }
        let mut m = Array2::zeros((3 * self.ncells(), 3 * verts.len()));
        for (c, cv) in self.cell_vertices.iter().enumerate() {
            for (d, &v) in cv.iter().enumerate() {
                if pos[v] == usize::MAX {
                    continue;
                }
                for &(a, b, j, eps) in &LEVI {
                    m[[3 * c + a, 3 * pos[v] + j]] += eps * sigma(d, b) * self.inv4s[c];
                }
            }
        }
        m
    }
}

/// Static Newtonian kernel on points that each carry a cube of side `h`.
pub fn newton_real(points: &[Vec3], h: f64) -> Array2<f64> {
    let n = points.len();
    let vol = h * h * h;
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = CUBE_SELF * h * h;
        for j in (i + 1)..n {
            let v = vol / (4.0 * PI * norm(sub(points[i], points[j])));
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

/// Helmholtz Newtonian kernel; the self term adds the regular part `ik h³/(4π)`.
pub fn newton_complex(points: &[Vec3], h: f64, k: f64) -> Array2<C64> {
    let n = points.len();
    let vol = h * h * h;
    let mut m = Array2::from_elem((n, n), C64::default());
    for i in 0..n {
        m[[i, i]] = C64::new(CUBE_SELF * h * h, k * vol / (4.0 * PI));
        for j in (i + 1)..n {
            let r = norm(sub(points[i], points[j]));
            let v = (I * (k * r)).exp() * (vol / (4.0 * PI * r));
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

/// `A ⊗ I₃` in the `3·index + component` layout.
pub fn kron3<T: Field>(a: &Array2<T>) -> Array2<T> {
    let (r, c) = a.dim();
    let mut out = Array2::from_elem((3 * r, 3 * c), T::default());
    for i in 0..r {
        for j in 0..c {
            for l in 0..3 {
                out[[3 * i + l, 3 * j + l]] = a[[i, j]];
            }
        }
    }
    out
}

/// Cell-centred static Newtonian operator (3N × 3N, block diagonal in components).
pub fn newtonian_matrix(grid: &VoxelGrid) -> Array2<f64> {
    kron3(&newton_real(&grid.centers, grid.cell_size))
}

/// Scalar Newtonian operator on cell centres.
pub fn newtonian_scalar(grid: &VoxelGrid) -> Array2<f64> {
    newton_real(&grid.centers, grid.cell_size)
}

pub fn vertex_newtonian(grid: &VoxelGrid) -> Array2<f64> {
    newton_real(&grid.vertices, grid.cell_size)
}

/// Static magnetization operator `∇M = G N_v Gᵀ` (3N × 3N).
pub fn magnetization_matrix(grid: &VoxelGrid) -> Array2<f64> {
    Q1::from_grid(grid).sandwich(&vertex_newtonian(grid))
}

/// Applies `∇M` without forming the 3N × 3N matrix.
pub fn magnetization_apply(grid: &VoxelGrid, nv: &Array2<f64>, f: &[f64]) -> Vec<f64> {
    let q = Q1::from_grid(grid);
    let charge = ndarray::Array1::from(q.grad_t(f));
    let pot = nv.dot(&charge);
    q.grad(pot.as_slice().expect("contiguous"))
}
