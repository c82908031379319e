// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force volume solver for the Lippmann-Schwinger equation
//! `E + η∇M^k E − k²η N^k E = E^Inc` on the union of voxelized particles.
//!
//! `∇M^k` uses the same Q1 charge form as the static operator, `G·N_v^k·Gᵀ`,
//! with the Helmholtz kernel on vertices; `N^k` is the Helmholtz kernel on cell
//! centres. At `k = 0` both reduce entrywise to the spectral operators.

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::foldylax::FarFieldPattern;
use crate::greens::PlaneWave;
use crate::linalg::{dot, lu_solve, CMat3, CVec3, Vec3, C64, I};
use crate::spectral::{newton_complex, voxelize, Decomposition, VoxelGrid, Q1};
use crate::tuning::PhysicalParams;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Factorize, Solve};
use std::fmt::Write as _;
use std::path::Path;

pub const DEFAULT_UNKNOWN_CAP: usize = 15_000;
pub const LS_RESIDUAL_CAP: f64 = 1e-8;
/// Largest tolerated P² share of `‖Ẽ‖` in the diagnostics flag.
pub const P2_SHARE_CAP: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct VolumeSolution {
    /// Grid of the reference shape `B`.
    pub reference: VoxelGrid,
    /// One grid per particle, mapped to `z_m + a·B`.
    pub particles: Vec<VoxelGrid>,
    /// Concatenated cell fields, particle by particle.
    pub field: Array1<C64>,
    pub residual: f64,
}

impl VolumeSolution {
    fn offset(&self, m: usize) -> usize {
        self.particles[..m].iter().map(|g| 3 * g.num_cells()).sum()
    }

    /// Field of particle `m`; as values on the reference grid this is `Ẽ_m`.
    pub fn particle_field(&self, m: usize) -> Array1<C64> {
        let o = self.offset(m);
        self.field.slice(ndarray::s![o..o + 3 * self.particles[m].num_cells()]).to_owned()
    }

    /// Per-voxel CSV with header `px,py,pz,re_Ex,im_Ex,re_Ey,im_Ey,re_Ez,im_Ez`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("px,py,pz,re_Ex,im_Ex,re_Ey,im_Ey,re_Ez,im_Ez\n");
        let mut o = 0;
        for g in &self.particles {
            for x in &g.centers {
                let e = &self.field;
                let _ = writeln!(
                    out,
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    x[0],
                    x[1],
                    x[2],
                    e[o].re,
                    e[o].im,
                    e[o + 1].re,
                    e[o + 1].im,
                    e[o + 2].re,
                    e[o + 2].im
                );
                o += 3;
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Reference grid and one mapped copy per particle.
pub fn particle_grids(cluster: &Cluster, resolution: usize) -> Result<(VoxelGrid, Vec<VoxelGrid>)> {
    let reference = voxelize(&cluster.shape, resolution)?;
    let particles = cluster.centers.iter().map(|z| reference.scaled(cluster.a, *z)).collect();
    Ok((reference, particles))
}

/// Largest resolution whose total unknown count stays within `cap`.
fn suggest_resolution(cluster: &Cluster, cap: usize) -> usize {
    let mut best = 0;
    for n in 4..=64 {
        match voxelize(&cluster.shape, n) {
            Ok(g) if 3 * g.num_cells() * cluster.len() <= cap => best = n,
            Ok(_) => break,
            Err(_) => continue,
        }
    }
    best
}

fn all_points(grids: &[&VoxelGrid], pick: impl Fn(&VoxelGrid) -> &Vec<Vec3>) -> Vec<Vec3> {
    grids.iter().flat_map(|g| pick(g).iter().cloned()).collect()
}

fn common_cell_size(grids: &[&VoxelGrid]) -> Result<f64> {
    let h = grids.first().ok_or(Error::EmptyCluster("no particle grids".into()))?.cell_size;
    if grids.iter().any(|g| (g.cell_size - h).abs() > 1e-14 * h) {
        return Err(Error::Domain("particle grids must share one cell size".into()));
    }
    Ok(h)
}

/// `∇M^k` and `N^k ⊗ I₃` on the union of `grids` (the latter as the scalar kernel).
pub fn operator_blocks(grids: &[&VoxelGrid], k: f64) -> Result<(Array2<C64>, Array2<C64>)> {
    let h = common_cell_size(grids)?;
    let q = Q1::concat(grids);
    let nv = newton_complex(&all_points(grids, |g| &g.vertices), h, k);
    let gradm = q.sandwich(&nv);
    let nc = newton_complex(&all_points(grids, |g| &g.centers), h, k);
    Ok((gradm, nc))
}

/// `I + η∇M^k − k²η N^k` on the union of `grids`.
pub fn ls_matrix(grids: &[&VoxelGrid], eta: C64, k: f64) -> Result<Array2<C64>> {
    let (mut a, nc) = operator_blocks(grids, k)?;
    a.mapv_inplace(|x| x * eta);
    let w = -eta * (k * k);
    let n = nc.nrows();
    for i in 0..n {
        for j in 0..n {
            let v = w * nc[[i, j]];
            for l in 0..3 {
                a[[3 * i + l, 3 * j + l]] += v;
            }
        }
    }
    for i in 0..3 * n {
        a[[i, i]] += 1.0;
    }
    Ok(a)
}

fn check_cap(cluster: &Cluster, unknowns: usize, cap: usize) -> Result<()> {
    if unknowns > cap {
        return Err(Error::Resource { unknowns, cap, suggested: suggest_resolution(cluster, cap) });
    }
    Ok(())
}

pub fn ls_solve(cluster: &Cluster, params: &PhysicalParams, incident: &PlaneWave, resolution: usize, cap: usize) -> Result<VolumeSolution> {
    if cluster.len() > 1 && !cluster.is_disjoint() {
        return Err(Error::Geometry(format!("particles overlap (boundary gap {:.3e})", cluster.d_min)));
    }
    let (reference, particles) = particle_grids(cluster, resolution)?;
    let unknowns: usize = particles.iter().map(|g| 3 * g.num_cells()).sum();
    check_cap(cluster, unknowns, cap)?;
    let incident = incident.with_k(params.k)?;
    let refs: Vec<&VoxelGrid> = particles.iter().collect();
    let a = ls_matrix(&refs, params.eta, params.k)?;
    let mut rhs = Array1::from_elem(unknowns, C64::default());
    let mut o = 0;
    for g in &particles {
        for x in &g.centers {
            let ph = incident.phase(*x);
            let p = incident.theta_perp();
            for l in 0..3 {
                rhs[o + l] = ph * p[l];
            }
            o += 3;
        }
    }
    let (field, residual) = lu_solve(&a, &rhs)?;
    if residual > LS_RESIDUAL_CAP {
        return Err(Error::Numeric { detail: "volume solve".into(), residual });
    }
    Ok(VolumeSolution { reference, particles, field, residual })
}

/// `E∞(x̂) = η(I − x̂⊗x̂) Σ_cells e^{ikx̂·y} E(y) vol`.
pub fn oracle_far_field(sol: &VolumeSolution, eta: C64, k: f64, directions: &[Vec3]) -> FarFieldPattern {
    let values = directions
        .iter()
        .map(|x| {
            let mut s = [C64::default(); 3];
            let mut o = 0;
            for g in &sol.particles {
                for y in &g.centers {
                    let ph = (I * (k * dot(*x, *y))).exp() * (eta * g.cell_volume);
                    for l in 0..3 {
                        s[l] += ph * sol.field[o + l];
                    }
                    o += 3;
                }
            }
            let xs = s[0] * x[0] + s[1] * x[1] + s[2] * x[2];
            [s[0] - xs * x[0], s[1] - xs * x[1], s[2] - xs * x[2]]
        })
        .collect();
    FarFieldPattern { directions: directions.to_vec(), values, renormalized: 0 }
}

/// `Im Σ conj(E^Inc)·ηE vol`, the forward-scattering (extinction) proxy.
pub fn extinction_proxy(sol: &VolumeSolution, eta: C64, incident: &PlaneWave) -> f64 {
    let mut acc = C64::default();
    let mut o = 0;
    for g in &sol.particles {
        for y in &g.centers {
            let ph = incident.phase(*y).conj();
            let p = incident.theta_perp();
            for l in 0..3 {
                acc += ph * p[l] * eta * sol.field[o + l] * g.cell_volume;
            }
            o += 3;
        }
    }
    acc.im
}

#[derive(Clone, Debug)]
pub struct ScatteringCoefficient {
    /// `∫W` with rows `3i + a` (component `i` of `x − z`, field component `a`) and columns `c`.
    pub full: [[C64; 3]; 9],
    /// `½ 𝓜ᵀ 𝒞`, the curl part.
    pub reduced: CMat3,
    pub residual: f64,
}

impl ScatteringCoefficient {
    pub fn full_norm(&self) -> f64 {
        self.full.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn reduced_norm(&self) -> f64 {
        self.reduced.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `𝓜[(3i + a), c] = ε_{a i c}`, the curl of the matrix form of `x − z`.
pub fn curl_position_matrix() -> [[i32; 3]; 9] {
    let mut m = [[0; 3]; 9];
    for i in 0..3 {
        for a in 0..3 {
            for c in 0..3 {
                m[3 * i + a][c] = levi(a, i, c);
            }
        }
    }
    m
}

fn levi(a: usize, b: usize, c: usize) -> i32 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// Scattering coefficient of one particle `a·B`, with `z` the voxel centroid.
///
/// Solves the adjoint system (wavenumber `−k`) for the nine fields
/// `(x − z)_i e_c` and integrates each solution.
pub fn scattering_coefficient(reference: &VoxelGrid, a: f64, eta: C64, k: f64) -> Result<ScatteringCoefficient> {
    let g = reference.scaled(a, [0.0; 3]);
    let n = g.num_cells();
    let mut z = [0.0; 3];
    for x in &g.centers {
        for l in 0..3 {
            z[l] += x[l] / n as f64;
        }
    }
    let mat = ls_matrix(&[&g], eta, -k)?;
    let mut rhs = Array2::from_elem((3 * n, 9), C64::default());
    for (cell, x) in g.centers.iter().enumerate() {
        for i in 0..3 {
            for c in 0..3 {
                rhs[[3 * cell + c, 3 * i + c]] = C64::from(x[i] - z[i]);
            }
        }
    }
    let lu = mat.factorize()?;
    let mut sol = Array2::from_elem((3 * n, 9), C64::default());
    for col in 0..9 {
        let b = rhs.column(col).to_owned();
        sol.column_mut(col).assign(&lu.solve(&b)?);
    }
    let r = mat.dot(&sol) - &rhs;
    let rn = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let bn = rhs.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let residual = if bn > 0.0 { rn / bn } else { rn };
    if residual > LS_RESIDUAL_CAP {
        return Err(Error::Numeric { detail: "adjoint solve for the scattering coefficient".into(), residual });
    }
    let mut per_cell = Array2::from_elem((3, 9), C64::default());
    for cell in 0..n {
        for l in 0..3 {
            for col in 0..9 {
                per_cell[[l, col]] += sol[[3 * cell + l, col]] * g.cell_volume;
            }
        }
    }
    let mut full = [[C64::default(); 3]; 9];
    for i in 0..3 {
        for c in 0..3 {
            for l in 0..3 {
                full[3 * i + l][c] = per_cell[[l, 3 * i + c]];
            }
        }
    }
    let m = curl_position_matrix();
    let mut reduced = [[C64::default(); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            for row in 0..9 {
                reduced[r][c] += full[row][c] * (0.5 * m[row][r] as f64);
            }
        }
    }
    Ok(ScatteringCoefficient { full, reduced, residual })
}

#[derive(Clone, Debug)]
pub struct ProjectionReport {
    pub particle: usize,
    pub total: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// `‖P²Ẽ‖ ≤ 5%·‖Ẽ‖`.
    pub p2_ok: bool,
}

fn l2_norm(f: &Array1<C64>, vol: f64) -> f64 {
    (f.iter().map(|z| z.norm_sqr()).sum::<f64>() * vol).sqrt()
}

/// Norms of the three components of `Ẽ_m` on the reference grid.
pub fn projection_diagnostics(sol: &VolumeSolution, dec: &Decomposition) -> Result<Vec<ProjectionReport>> {
    if dec.dim() != 3 * sol.reference.num_cells() {
        return Err(Error::Domain("decomposition was built on a different grid".into()));
    }
    let vol = sol.reference.cell_volume;
    Ok((0..sol.particles.len())
        .map(|m| {
            let f = sol.particle_field(m);
            let (p1, p2, p3) = dec.split(&f);
            let total = l2_norm(&f, vol);
            let p2n = l2_norm(&p2, vol);
            ProjectionReport {
                particle: m,
                total,
                p1: l2_norm(&p1, vol),
                p2: p2n,
                p3: l2_norm(&p3, vol),
                p2_ok: p2n <= P2_SHARE_CAP * total,
            }
        })
        .collect())
}

/// `∫_{D_m} P³(E)` per particle, scaled back to `D_m` (factor `a³`).
pub fn p3_moments(sol: &VolumeSolution, dec: &Decomposition, a: f64) -> Vec<CVec3> {
    let vol = sol.reference.cell_volume * a.powi(3);
    (0..sol.particles.len())
        .map(|m| {
            let (_, _, p3) = dec.split(&sol.particle_field(m));
            let mut s = [C64::default(); 3];
            for (i, z) in p3.iter().enumerate() {
                s[i % 3] += z * vol;
            }
            s
        })
        .collect()
}
