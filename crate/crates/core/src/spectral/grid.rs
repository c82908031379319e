// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{norm, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

/// Normalized particle shape `B`, containing the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReferenceShape {
    Ball {
        radius: f64,
    },
    /// Occupancy of the `n³` lattice over `[−½, ½]³`, indexed `i + n(j + n·l)`.
    VoxelMask {
        n: usize,
        occupied: Vec<bool>,
    },
}

impl ReferenceShape {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidShape(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ReferenceShape::Ball { radius })
    }

    pub fn voxel_mask(n: usize, occupied: Vec<bool>) -> Result<Self> {
        if occupied.len() != n * n * n {
            return Err(Error::InvalidShape(format!("mask has {} entries, expected {}", occupied.len(), n * n * n)));
        }
        let shape = ReferenceShape::VoxelMask { n, occupied };
        shape.check_mask()?;
        Ok(shape)
    }

    /// Ball of `radius` cut by the plane `z = cut`, as an `n³` voxel mask.
    pub fn truncated_ball(n: usize, radius: f64, cut: f64) -> Result<Self> {
        let s = 1.0 / n as f64;
        let mut occupied = vec![false; n * n * n];
        for l in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let c = [i, j, l].map(|v| (v as f64 + 0.5) * s - 0.5);
                    occupied[i + n * (j + n * l)] = norm(c) < radius && c[2] > cut;
                }
            }
        }
        Self::voxel_mask(n, occupied)
    }

    fn check_mask(&self) -> Result<()> {
        let ReferenceShape::VoxelMask { n, occupied } = self else { return Ok(()) };
        let n = *n;
        let cells: Vec<usize> = (0..occupied.len()).filter(|&i| occupied[i]).collect();
        if cells.is_empty() {
            return Err(Error::InvalidShape("voxel mask is empty".into()));
        }
        let s = 1.0 / n as f64;
        let holds_origin = cells.iter().any(|&c| {
            let idx = unflatten(c, n);
            (0..3).all(|a| {
                let lo = idx[a] as f64 * s - 0.5;
                lo <= 1e-12 && lo + s >= -1e-12
            })
        });
        if !holds_origin {
            return Err(Error::InvalidShape("voxel mask does not contain the origin".into()));
        }
        let mut seen = vec![false; occupied.len()];
        let mut queue = VecDeque::from([cells[0]]);
        seen[cells[0]] = true;
        let mut count = 1;
        while let Some(c) = queue.pop_front() {
            let idx = unflatten(c, n);
            for a in 0..3 {
                for step in [-1i64, 1] {
                    let mut nb = [idx[0] as i64, idx[1] as i64, idx[2] as i64];
                    nb[a] += step;
                    if nb.iter().any(|&v| v < 0 || v >= n as i64) {
                        continue;
                    }
                    let f = nb[0] as usize + n * (nb[1] as usize + n * nb[2] as usize);
                    if occupied[f] && !seen[f] {
                        seen[f] = true;
                        count += 1;
                        queue.push_back(f);
                    }
                }
            }
        }
        if count != cells.len() {
            return Err(Error::InvalidShape(format!("voxel mask is not connected ({count} of {} cells reachable)", cells.len())));
        }
        Ok(())
    }

    /// Radius of the smallest origin-centred ball containing the shape.
    pub fn circumradius(&self) -> f64 {
        match self {
            ReferenceShape::Ball { radius } => *radius,
            ReferenceShape::VoxelMask { n, occupied } => {
                let s = 1.0 / *n as f64;
                let mut r: f64 = 0.0;
                for (c, &occ) in occupied.iter().enumerate() {
                    if !occ {
                        continue;
                    }
                    let idx = unflatten(c, *n);
                    for d in 0..8 {
                        let p = [0, 1, 2].map(|a| (idx[a] + ((d >> a) & 1)) as f64 * s - 0.5);
                        r = r.max(norm(p));
                    }
                }
                r
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            ReferenceShape::Ball { radius } => format!("ball({radius})"),
            ReferenceShape::VoxelMask { n, occupied } => {
                format!("mask{n}:{}", occupied.iter().filter(|&&o| o).count())
            }
        }
    }
}

fn unflatten(c: usize, n: usize) -> [usize; 3] {
    [c % n, (c / n) % n, c / (n * n)]
}

/// Voxel discretization of a reference shape, with the Q1 vertex structure.
///
/// Vector fields live on cells (layout `3·cell + component`); scalar potentials
/// live on the corners of the occupied cells.
#[derive(Clone, Debug)]
pub struct VoxelGrid {
    pub n: usize,
    pub cell_size: f64,
    pub cell_volume: f64,
    pub centers: Vec<Vec3>,
    pub vertices: Vec<Vec3>,
    /// Corner `d = dx + 2dy + 4dz` of each cell.
    pub cell_vertices: Vec<[usize; 8]>,
    /// A vertex is interior when all eight cells around it are occupied.
    pub interior: Vec<bool>,
}

pub fn voxelize(shape: &ReferenceShape, n: usize) -> Result<VoxelGrid> {
    if n < 4 {
        return Err(Error::InvalidShape(format!("resolution must be at least 4, got {n}")));
    }
    let (half, occupied): (f64, Box<dyn Fn([usize; 3], Vec3) -> bool>) = match shape {
        ReferenceShape::Ball { radius } => {
            let r = *radius;
            (r, Box::new(move |_, c: Vec3| norm(c) < r))
        }
        ReferenceShape::VoxelMask { n: m, occupied } => {
            if *m != n {
                return Err(Error::InvalidShape(format!("mask resolution {m} differs from requested {n}")));
            }
            let occ = occupied.clone();
            (0.5, Box::new(move |i: [usize; 3], _| occ[i[0] + n * (i[1] + n * i[2])]))
        }
    };
    let s = 2.0 * half / n as f64;
    let mut cells = Vec::new();
    let mut centers = Vec::new();
    for l in 0..n {
        for j in 0..n {
            for i in 0..n {
                let c = [i, j, l].map(|v| (v as f64 + 0.5) * s - half);
                if occupied([i, j, l], c) {
                    cells.push([i, j, l]);
                    centers.push(c);
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::InvalidShape("no voxel centre lies inside the shape".into()));
    }
    let mut vmap: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vidx = Vec::new();
    let mut cell_vertices = Vec::with_capacity(cells.len());
    for c in &cells {
        let mut corners = [0usize; 8];
        for (d, slot) in corners.iter_mut().enumerate() {
            let v = [c[0] + (d & 1), c[1] + ((d >> 1) & 1), c[2] + ((d >> 2) & 1)];
            *slot = *vmap.entry(v).or_insert_with(|| {
                vidx.push(v);
                vidx.len() - 1
            });
        }
        cell_vertices.push(corners);
    }
    let cellset: std::collections::HashSet<[usize; 3]> = cells.iter().cloned().collect();
    let interior = vidx
        .iter()
        .map(|v| {
            (0..8).all(|d| {
                let off = [d & 1, (d >> 1) & 1, (d >> 2) & 1];
                if (0..3).any(|a| v[a] < 1 - off[a]) {
                    return false;
                }
                cellset.contains(&[v[0] + off[0] - 1, v[1] + off[1] - 1, v[2] + off[2] - 1])
            })
        })
        .collect();
    let vertices = vidx.iter().map(|v| v.map(|x| x as f64 * s - half)).collect();
    Ok(VoxelGrid { n, cell_size: s, cell_volume: s * s * s, centers, vertices, cell_vertices, interior })
}

impl VoxelGrid {
    pub fn num_cells(&self) -> usize {
        self.centers.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn volume(&self) -> f64 {
        self.cell_volume * self.num_cells() as f64
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| self.interior[v]).collect()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| !self.interior[v]).collect()
    }

    /// Copy of the grid mapped by `x ↦ z + a·x`.
    pub fn scaled(&self, a: f64, z: Vec3) -> VoxelGrid {
        let map = |p: &Vec3| [z[0] + a * p[0], z[1] + a * p[1], z[2] + a * p[2]];
        let s = self.cell_size * a;
        VoxelGrid {
            n: self.n,
            cell_size: s,
            cell_volume: s * s * s,
            centers: self.centers.iter().map(map).collect(),
            vertices: self.vertices.iter().map(map).collect(),
            cell_vertices: self.cell_vertices.clone(),
            interior: self.interior.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_voxel_count() {
        let g = voxelize(&ReferenceShape::ball(0.5).unwrap(), 8).unwrap();
        // independent count of lattice centres strictly inside the ball
        let mut count = 0;
        for i in 0..8 {
            for j in 0..8 {
                for l in 0..8 {
                    let c = [i, j, l].map(|v| (v as f64 + 0.5) / 8.0 - 0.5);
                    if c.iter().map(|x| x * x).sum::<f64>() < 0.25 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(g.num_cells(), count);
        let ideal = PI / 6.0 * 512.0;
        assert!((count as f64 - ideal).abs() <= 0.15 * ideal);
        let g4 = voxelize(&ReferenceShape::ball(0.5).unwrap(), 4).unwrap();
        assert!(g4.centers.iter().all(|c| norm(*c) < 0.5));
    }

    #[test]
    fn single_cell_mask() {
        let mut occ = vec![false; 64];
        occ[1 + 4 * (1 + 4 * 1)] = true;
        let shape = ReferenceShape::voxel_mask(4, occ).unwrap();
        let g = voxelize(&shape, 4).unwrap();
        assert_eq!(g.num_cells(), 1);
        assert_eq!(g.num_vertices(), 8);
        assert!(g.interior.iter().all(|&b| !b));
    }

    #[test]
    fn mask_validation() {
        assert!(ReferenceShape::voxel_mask(4, vec![false; 64]).is_err());
        let mut occ = vec![false; 64];
        occ[0] = true;
        assert!(ReferenceShape::voxel_mask(4, occ.clone()).is_err(), "corner cell misses the origin");
        occ[1 + 4 * (1 + 4 * 1)] = true;
        occ[0] = false;
        occ[3 + 4 * (3 + 4 * 3)] = true;
        assert!(ReferenceShape::voxel_mask(4, occ).is_err(), "disconnected");
    }

    #[test]
    fn interior_vertices_of_a_block() {
        let occ = vec![true; 64];
        let g = voxelize(&ReferenceShape::voxel_mask(4, occ).unwrap(), 4).unwrap();
        assert_eq!(g.num_vertices(), 125);
        assert_eq!(g.interior_vertices().len(), 27);
        assert!((g.volume() - 1.0).abs() < 1e-14);
    }
}
