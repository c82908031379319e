// SPDX-License-Identifier: MIT OR Apache-2.0

use super::decomp::Decomposition;
use super::grid::VoxelGrid;
use super::ops::{kron3, newtonian_scalar, vertex_newtonian, Q1};
use crate::error::{Error, Result};
use crate::linalg::{cross, eigh_desc, CMat3, Mat3, Vec3, C64};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// Relative gap below which eigenvalues are treated as one multiplet.
pub const MULTIPLET_TOL: f64 = 1e-3;
const MOMENT_FLOOR: f64 = 1e-6;
const POTENTIAL_RESIDUAL: f64 = 5e-2;
const DIV_RESIDUAL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    DivFree,
    CurlFree,
    GradHarmonic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenMode {
    pub lambda: f64,
    /// Cell field, L²-normalized on the grid.
    pub field: Vec<f64>,
    /// Vertex vector potential (divergence-free family only).
    pub potential: Option<Vec<f64>>,
    /// `∫φ` for the divergence-free family, `∫e` otherwise.
    pub moment: Vec3,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenFamily {
    pub kind: FamilyKind,
    pub modes: Vec<EigenMode>,
    /// Dipole mode used for tuning (divergence-free family).
    pub n0: Option<usize>,
    /// Other modes with a nonzero moment, by decreasing eigenvalue.
    pub alternatives: Vec<usize>,
}

impl EigenFamily {
    /// Indices of the modes whose eigenvalue lies within the multiplet tolerance of mode `i`.
    pub fn multiplet(&self, i: usize) -> Vec<usize> {
        let l0 = self.modes[i].lambda;
        (0..self.modes.len()).filter(|&j| (self.modes[j].lambda - l0).abs() <= MULTIPLET_TOL * l0.abs()).collect()
    }

    /// The multiplet carrying the largest total squared moment, with its mean eigenvalue.
    pub fn dominant_multiplet(&self) -> (f64, Vec<usize>) {
        let mut best = (0.0, Vec::new(), f64::NEG_INFINITY);
        let mut i = 0;
        while i < self.modes.len() {
            let group = self.multiplet(i);
            let weight: f64 = group.iter().map(|&j| self.modes[j].moment.iter().map(|m| m * m).sum::<f64>()).sum();
            if weight > best.2 {
                let mean = group.iter().map(|&j| self.modes[j].lambda).sum::<f64>() / group.len() as f64;
                best = (mean, group.clone(), weight);
            }
            i = group.iter().max().map_or(i, |&m| m.max(i)) + 1;
        }
        (best.0, best.1)
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Min-norm least-squares inverse of the Q1 curl on interior-vertex potentials.
pub struct VectorPotentialSolver {
    q: Q1,
    inner: Vec<usize>,
    curl: Array2<f64>,
    /// `V Σ⁻²` restricted to the numerically nonzero singular values.
    pinv_right: Array2<f64>,
    v: Array2<f64>,
    nverts: usize,
    cell_size: f64,
}

impl VectorPotentialSolver {
    pub fn new(grid: &VoxelGrid) -> Result<Self> {
        let q = Q1::from_grid(grid);
        let inner = grid.interior_vertices();
        let curl = q.curl_dense_columns(&inner);
        let (w, v) = if curl.ncols() > 0 { eigh_desc(&curl.t().dot(&curl))? } else { (Vec::new(), Array2::zeros((0, 0))) };
        let top = w.first().cloned().unwrap_or(0.0);
        let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 1e-12 * top && w[i] > 0.0).collect();
        let mut vk = Array2::zeros((curl.ncols(), keep.len()));
        let mut scaled = Array2::zeros((curl.ncols(), keep.len()));
        for (c, &i) in keep.iter().enumerate() {
            vk.column_mut(c).assign(&v.column(i));
            scaled.column_mut(c).assign(&v.column(i).mapv(|x| x / w[i]));
        }
        Ok(Self { q, inner, curl, pinv_right: scaled, v: vk, nverts: grid.num_vertices(), cell_size: grid.cell_size })
    }

    pub fn solve(&self, e: &[f64]) -> Result<Vec<f64>> {
        let en = euclid(e);
        let mut phi = vec![0.0; 3 * self.nverts];
        if en == 0.0 {
            return Ok(phi);
        }
        let div = euclid(&self.q.grad_t(e)) * self.cell_size;
        if div > DIV_RESIDUAL * en {
            return Err(Error::Precondition(format!("field is not divergence-free (relative charge {:.2e})", div / en)));
        }
        let rhs = self.curl.t().dot(&Array1::from(e.to_vec()));
        let coeff = self.pinv_right.dot(&self.v.t().dot(&rhs));
        for (i, &vtx) in self.inner.iter().enumerate() {
            for j in 0..3 {
                phi[3 * vtx + j] = coeff[3 * i + j];
            }
        }
        let back = self.q.curl(&phi);
        let res = euclid(&back.iter().zip(e).map(|(a, b)| a - b).collect::<Vec<_>>()) / en;
        if res > POTENTIAL_RESIDUAL {
            return Err(Error::Numeric { detail: "curl least-squares did not reproduce the field".into(), residual: res });
        }
        Ok(phi)
    }
}

/// Vector potential `φ` with `curl φ = e`, vanishing on boundary vertices.
pub fn vector_potential(grid: &VoxelGrid, e: &[f64]) -> Result<Vec<f64>> {
    VectorPotentialSolver::new(grid)?.solve(e)
}

/// `∫φ` for a vertex field that vanishes on the boundary vertices.
pub fn potential_moment(grid: &VoxelGrid, phi: &[f64]) -> Vec3 {
    let mut m = [0.0; 3];
    for v in 0..grid.num_vertices() {
        for j in 0..3 {
            m[j] += phi[3 * v + j] * grid.cell_volume;
        }
    }
    m
}

/// `∫e` of a cell field.
pub fn field_moment(grid: &VoxelGrid, e: &[f64]) -> Vec3 {
    let mut m = [0.0; 3];
    for c in 0..grid.num_cells() {
        for j in 0..3 {
            m[j] += e[3 * c + j] * grid.cell_volume;
        }
    }
    m
}

/// `½ ∫ x × e`, which equals `∫φ` whenever `e = curl φ` with `φ` vanishing on the boundary.
pub fn half_cross_moment(grid: &VoxelGrid, e: &[f64]) -> Vec3 {
    let mut m = [0.0; 3];
    for (c, x) in grid.centers.iter().enumerate() {
        let xe = cross(*x, [e[3 * c], e[3 * c + 1], e[3 * c + 2]]);
        for j in 0..3 {
            m[j] += 0.5 * xe[j] * grid.cell_volume;
        }
    }
    m
}

/// Leading eigenpairs of `P1·N·P1` on range(P1).
pub fn eigen_div_free(grid: &VoxelGrid, dec: &Decomposition, n_modes: usize) -> Result<EigenFamily> {
    let n = kron3(&newtonian_scalar(grid));
    let b = ndarray::concatenate![ndarray::Axis(1), dec.b2, dec.b3];
    let nb = n.dot(&b);
    let btnb = b.t().dot(&nb);
    let a = &n - &b.dot(&nb.t()) - &nb.dot(&b.t()) + &b.dot(&btnb).dot(&b.t());
    let (w, v) = eigh_desc(&a)?;
    let solver = VectorPotentialSolver::new(grid)?;
    let norm = grid.cell_volume.sqrt();
    let count = n_modes.min(dec.dims().0);
    let mut modes = Vec::with_capacity(count);
    for i in 0..count {
        let field: Vec<f64> = v.column(i).iter().map(|x| x / norm).collect();
        let (potential, moment) = match solver.solve(&field) {
            Ok(phi) => {
                let m = potential_moment(grid, &phi);
                (Some(phi), m)
            }
            Err(_) => (None, half_cross_moment(grid, &field)),
        };
        modes.push(EigenMode { lambda: w[i], field, potential, moment });
    }
    let qualifying: Vec<usize> =
        (0..modes.len()).filter(|&i| modes[i].potential.is_some() && crate::linalg::norm(modes[i].moment) > MOMENT_FLOOR).collect();
    let n0 = *qualifying.first().ok_or(Error::NoDipoleMode)?;
    let alternatives = qualifying.iter().cloned().filter(|&i| i != n0).collect();
    Ok(EigenFamily { kind: FamilyKind::DivFree, modes, n0: Some(n0), alternatives })
}

/// Eigenpairs of `P3·∇M·P3` on range(P3); `None` keeps the whole family.
pub fn eigen_grad_harmonic(grid: &VoxelGrid, dec: &Decomposition, n_modes: Option<usize>) -> Result<EigenFamily> {
    let q = Q1::from_grid(grid);
    let gt_b3 = q.dense().t().dot(&dec.b3);
    let nv = vertex_newtonian(grid);
    let a = gt_b3.t().dot(&nv.dot(&gt_b3));
    let (w, y) = eigh_desc(&a)?;
    let fields = dec.b3.dot(&y);
    let norm = grid.cell_volume.sqrt();
    let count = n_modes.unwrap_or(w.len()).min(w.len());
    let modes = (0..count)
        .map(|i| {
            let field: Vec<f64> = fields.column(i).iter().map(|x| x / norm).collect();
            let moment = field_moment(grid, &field);
            EigenMode { lambda: w[i], field, potential: None, moment }
        })
        .collect();
    Ok(EigenFamily { kind: FamilyKind::GradHarmonic, modes, n0: None, alternatives: Vec::new() })
}

/// `P₀ = Σ_m ∫φ_{n₀,m} ⊗ ∫φ_{n₀,m}` over the multiplet of mode `n0`.
pub fn polarization_p0(family1: &EigenFamily, n0: usize) -> Result<Mat3> {
    if n0 >= family1.modes.len() {
        return Err(Error::Precondition(format!("mode {n0} not computed")));
    }
    let mut p = [[0.0; 3]; 3];
    for i in family1.multiplet(n0) {
        let mode = &family1.modes[i];
        if mode.potential.is_none() {
            return Err(Error::Precondition(format!("mode {i} of the multiplet has no vector potential")));
        }
        for r in 0..3 {
            for c in 0..3 {
                p[r][c] += mode.moment[r] * mode.moment[c];
            }
        }
    }
    Ok(p)
}

/// `Σ_n (1 + ηλ_n)⁻¹ ∫e_n ⊗ ∫e_n` over the harmonic-gradient family (without the `a³` factor).
pub fn polarization_p1(family3: &EigenFamily, eta: C64) -> Result<CMat3> {
    let mut p = [[C64::default(); 3]; 3];
    for (i, mode) in family3.modes.iter().enumerate() {
        let denom = C64::from(1.0) + eta * mode.lambda;
        if denom.norm() < 1e-10 {
            return Err(Error::ResonanceCollision { mode: i, lambda: mode.lambda });
        }
        let w = denom.inv();
        for r in 0..3 {
            for c in 0..3 {
                p[r][c] += w * (mode.moment[r] * mode.moment[c]);
            }
        }
    }
    Ok(p)
}
