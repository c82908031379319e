// SPDX-License-Identifier: MIT OR Apache-2.0

//! Particle placement: cubic lattices in a box and quasi-uniform sets on surfaces.
//!
//! The separation `d` is the gap between particle boundaries, so lattice
//! centres sit `d + 2a·circumradius` apart.

use crate::error::{Error, Result};
use crate::linalg::{norm, sub, Vec3};
use crate::spectral::ReferenceShape;
use crate::tuning::{regime_check, PhysicalParams, RegimeReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub centers: Vec<Vec3>,
    pub a: f64,
    pub shape: ReferenceShape,
    /// Smallest boundary-to-boundary gap (infinite for a single particle).
    pub d_min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lo: Vec3,
    pub hi: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface {
    Sphere {
        radius: f64,
    },
    /// Patch `[0, size_x] × [0, size_y]` in the plane `z = 0`.
    Plane {
        size: [f64; 2],
    },
}

/// Minimum pairwise centre distance, infinite below two points.
pub fn min_center_distance(centers: &[Vec3]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            best = best.min(norm(sub(centers[i], centers[j])));
        }
    }
    best
}

fn nearest_neighbours(centers: &[Vec3]) -> Vec<f64> {
    (0..centers.len())
        .map(|i| (0..centers.len()).filter(|&j| j != i).map(|j| norm(sub(centers[i], centers[j]))).fold(f64::INFINITY, f64::min))
        .collect()
}

impl Cluster {
    pub fn new(centers: Vec<Vec3>, a: f64, shape: ReferenceShape) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyCluster("no centres given".into()));
        }
        if !(a > 0.0) {
            return Err(Error::Domain(format!("particle scale must be positive, got {a}")));
        }
        let d_min = min_center_distance(&centers) - 2.0 * a * shape.circumradius();
        Ok(Cluster { centers, a, shape, d_min })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        self.d_min > 0.0
    }

    /// Plain-text table: `a=` and `shape=` header lines, then one `z_x z_y z_z` line per particle.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "a={:e}", self.a);
        match &self.shape {
            ReferenceShape::Ball { radius } => {
                let _ = writeln!(out, "shape=ball {radius:e}");
            }
            ReferenceShape::VoxelMask { n, occupied } => {
                let bits: String = occupied.iter().map(|&o| if o { '1' } else { '0' }).collect();
                let _ = writeln!(out, "shape=mask {n} {bits}");
            }
        }
        for z in &self.centers {
            let _ = writeln!(out, "{:e} {:e} {:e}", z[0], z[1], z[2]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut a = None;
        let mut shape = None;
        let mut centers = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let bad = |msg: &str| Error::Config { line: i + 1, msg: msg.to_string() };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("a=") {
                a = Some(v.trim().parse::<f64>().map_err(|_| bad("bad value for a"))?);
            } else if let Some(v) = line.strip_prefix("shape=") {
                let parts: Vec<&str> = v.split_whitespace().collect();
                shape = Some(match parts.as_slice() {
                    ["ball", r] => ReferenceShape::ball(r.parse().map_err(|_| bad("bad ball radius"))?)?,
                    ["mask", n, bits] => {
                        let n: usize = n.parse().map_err(|_| bad("bad mask resolution"))?;
                        ReferenceShape::voxel_mask(n, bits.chars().map(|c| c == '1').collect())?
                    }
                    _ => return Err(bad("unknown shape")),
                });
            } else {
                let v: Vec<f64> = line
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("expected three coordinates"))?;
                if v.len() != 3 {
                    return Err(bad("expected three coordinates"));
                }
                centers.push([v[0], v[1], v[2]]);
            }
        }
        let a = a.ok_or(Error::Config { line: 0, msg: "missing a= header".into() })?;
        let shape = shape.ok_or(Error::Config { line: 0, msg: "missing shape= header".into() })?;
        Cluster::new(centers, a, shape)
    }
}

pub fn lattice_cluster(bbox: Aabb, d: f64, a: f64, shape: ReferenceShape) -> Result<Cluster> {
    let rc = shape.circumradius();
    if !(d > 2.0 * a * rc) {
        return Err(Error::Geometry(format!("separation {d} must exceed 2a·circumradius = {}", 2.0 * a * rc)));
    }
    let pitch = d + 2.0 * a * rc;
    let counts = [0, 1, 2].map(|i| ((bbox.hi[i] - bbox.lo[i]) / pitch + 1e-9).floor().max(0.0) as usize);
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::EmptyCluster(format!("box cannot hold one cell of pitch {pitch}")));
    }
    let mut centers = Vec::with_capacity(counts.iter().product());
    for l in 0..counts[2] {
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let idx = [i, j, l];
                centers.push([0, 1, 2].map(|a| bbox.lo[a] + (idx[a] as f64 + 0.5) * pitch));
            }
        }
    }
    Cluster::new(centers, a, shape)
}

/// Quasi-uniform unit vectors: polar angle `acos(1 − 2(i+½)/n)`, azimuth `π(1+√5)(i+½)`.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (1.0 + 5f64.sqrt());
    (0..n)
        .map(|i| {
            let u = i as f64 + 0.5;
            let polar = (1.0 - 2.0 * u / n as f64).acos();
            let az = golden * u;
            [polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()]
        })
        .collect()
}

/// Centres on a surface with nearest-neighbour spacing in `[d, 2d]`.
///
/// `jitter` displaces points by up to `jitter·d` (seeded, off when zero); the
/// spacing bound is re-checked afterwards.
pub fn surface_cluster(surface: Surface, d: f64, a: f64, shape: ReferenceShape, jitter: f64, seed: u64) -> Result<Cluster> {
    let rc = shape.circumradius();
    if !(d > 2.0 * a * rc) {
        return Err(Error::Geometry(format!("spacing {d} must exceed 2a·circumradius = {}", 2.0 * a * rc)));
    }
    let mut centers = match surface {
        Surface::Sphere { radius } => {
            let area = 4.0 * PI * radius * radius;
            let start = ((area / (d * d * 3f64.sqrt() / 2.0)).floor() as usize).max(1);
            let mut found = None;
            for n in (1..=start).rev() {
                let pts: Vec<Vec3> = fibonacci_sphere(n).into_iter().map(|p| p.map(|x| x * radius)).collect();
                if n == 1 {
                    found = Some(pts);
                    break;
                }
                let nn = nearest_neighbours(&pts);
                let lo = nn.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = nn.iter().cloned().fold(0.0, f64::max);
                if lo >= d {
                    if hi <= 2.0 * d {
                        found = Some(pts);
                    }
                    break;
                }
            }
            found.ok_or_else(|| Error::EmptyCluster(format!("no Fibonacci set on radius {radius} meets spacing {d}")))?
        }
        Surface::Plane { size } => {
            let counts = size.map(|s| (s / d + 1e-9).floor() as usize);
            if counts.iter().any(|&c| c == 0) {
                return Err(Error::EmptyCluster(format!("patch {size:?} cannot hold spacing {d}")));
            }
            let pitch = [size[0] / counts[0] as f64, size[1] / counts[1] as f64];
            let mut pts = Vec::new();
            for j in 0..counts[1] {
                for i in 0..counts[0] {
                    pts.push([(i as f64 + 0.5) * pitch[0], (j as f64 + 0.5) * pitch[1], 0.0]);
                }
            }
            pts
        }
    };
    if jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for z in centers.iter_mut() {
            for x in z.iter_mut() {
                *x += jitter * d * (2.0 * rng.gen::<f64>() - 1.0);
            }
        }
        if centers.len() > 1 && min_center_distance(&centers) <= 2.0 * a * rc {
            return Err(Error::Geometry("jitter made particles overlap".into()));
        }
    }
    Cluster::new(centers, a, shape)
}

#[derive(Clone, Debug)]
pub struct ClusterReport {
    pub aleph: usize,
    pub d: f64,
    /// `log d / log a`.
    pub t_inferred: f64,
    pub disjoint: bool,
    pub aleph_d3: f64,
    pub regime: RegimeReport,
}

impl ClusterReport {
    pub fn passed(&self) -> bool {
        self.disjoint && self.regime.passed()
    }
}

pub fn validate_cluster(c: &Cluster, p: &PhysicalParams) -> ClusterReport {
    let d = c.d_min;
    let t_inferred = if c.len() > 1 { d.ln() / c.a.ln() } else { f64::NAN };
    let regime = regime_check(p.h, p.t, p.sigma, c.a, c.len(), d);
    ClusterReport {
        aleph: c.len(),
        d,
        t_inferred,
        disjoint: c.len() == 1 || d > 0.0,
        aleph_d3: if c.len() > 1 { c.len() as f64 * d.powi(3) } else { 0.0 },
        regime,
    }
}
