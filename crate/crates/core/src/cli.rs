// SPDX-License-Identifier: MIT OR Apache-2.0

//! Scenario runner behind the `dcluster` binary.
//!
//! A scenario is a TOML file; the schema lives in `docs/config.md`. Stages run
//! in order (spectral, tuning, cluster, point interaction, volume solve) and
//! each writes its files before the next one starts.

use crate::cluster::{fibonacci_sphere, lattice_cluster, surface_cluster, validate_cluster, Aabb, Cluster, Surface};
use crate::error::{Error, Result};
use crate::foldylax::{
    assemble_electric, assemble_magnetic, electric_polarization, far_field, far_field_p3_correction, solve, FarFieldPattern,
    FoldyLaxSolution,
};
use crate::greens::PlaneWave;
use crate::linalg::{Mat3, Vec3, C64};
use crate::oracle::{ls_solve, oracle_far_field, projection_diagnostics, ProjectionReport, DEFAULT_UNKNOWN_CAP};
use crate::spectral::{
    cache, eigen_div_free, eigen_grad_harmonic, polarization_p0, subspace_projectors, voxelize, EigenFamily, ReferenceShape,
};
use crate::tuning::{lorentz_params, PhysicalParams, Sign};
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Pair([f64; 2]),
}

impl Complex {
    pub fn value(self) -> C64 {
        match self {
            Complex::Real(x) => C64::from(x),
            Complex::Pair([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    #[serde(default = "default_kind_ball")]
    pub kind: String,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Plane `z = cut` for `truncated_ball`.
    pub cut: Option<f64>,
    /// Text file holding `n` and then `n³` occupancy digits, for `mask`.
    pub mask_file: Option<PathBuf>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_modes")]
    pub modes: usize,
    pub cache: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub a: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    pub t: Option<f64>,
    pub sigma: Complex,
    #[serde(default = "default_c0")]
    pub c0: Complex,
    #[serde(default = "default_sign")]
    pub sign: String,
    /// Wavenumber used only when `sigma = 0`, where no resonance can be tuned.
    pub k: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzSection {
    pub kp: f64,
    pub k0: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSection {
    #[serde(default = "default_direction")]
    pub direction: Vec3,
    #[serde(default = "default_polarization")]
    pub polarization: Vec3,
}

impl Default for IncidentSection {
    fn default() -> Self {
        Self { direction: default_direction(), polarization: default_polarization() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    #[serde(default = "default_cluster_kind")]
    pub kind: String,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Boundary gap; `a^t` when absent.
    pub gap: Option<f64>,
    pub lo: Option<Vec3>,
    pub hi: Option<Vec3>,
    pub radius: Option<f64>,
    pub size: Option<[f64; 2]>,
    #[serde(default)]
    pub jitter: f64,
    pub path: Option<PathBuf>,
}

impl Default for ClusterSection {
    fn default() -> Self {
        Self { kind: default_cluster_kind(), count: 1, gap: None, lo: None, hi: None, radius: None, size: None, jitter: 0.0, path: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Add the harmonic-gradient term to the point-interaction far field.
    #[serde(default = "default_true")]
    pub gradient_correction: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out(), directions: default_directions(), seed: 0, gradient_correction: true }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_oracle_resolution")]
    pub resolution: usize,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { enabled: false, resolution: default_oracle_resolution(), cap: default_cap() }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub a: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub shape: ShapeSection,
    pub physics: PhysicsSection,
    pub lorentz: Option<LorentzSection>,
    #[serde(default)]
    pub incident: IncidentSection,
    #[serde(default)]
    pub cluster: ClusterSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

fn default_kind_ball() -> String {
    "ball".into()
}
fn default_radius() -> f64 {
    0.5
}
fn default_resolution() -> usize {
    8
}
fn default_modes() -> usize {
    12
}
fn default_h() -> f64 {
    0.9
}
fn default_c0() -> Complex {
    Complex::Real(1.0)
}
fn default_sign() -> String {
    "minus".into()
}
fn default_direction() -> Vec3 {
    [0.0, 0.0, 1.0]
}
fn default_polarization() -> Vec3 {
    [1.0, 0.0, 0.0]
}
fn default_cluster_kind() -> String {
    "line".into()
}
fn default_count() -> usize {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_directions() -> usize {
    200
}
fn default_true() -> bool {
    true
}
fn default_oracle_resolution() -> usize {
    8
}
fn default_cap() -> usize {
    DEFAULT_UNKNOWN_CAP
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)
            .map_err(|e| Error::Config { line: e.span().map_or(0, |s| line_of(text, s.start)), msg: e.message().to_string() })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<()> {
        let field = |msg: String| Error::Config { line: 0, msg };
        if Sign::parse(&self.physics.sign).is_none() {
            return Err(field(format!("physics.sign: unknown value `{}`", self.physics.sign)));
        }
        if self.output.directions == 0 {
            return Err(field("output.directions must be positive".into()));
        }
        if self.physics.sigma.value() == C64::default() && self.physics.k.is_none() {
            return Err(field("physics.k is required when sigma = 0".into()));
        }
        Ok(())
    }

    pub fn t(&self) -> f64 {
        self.physics.t.unwrap_or((3.0 - self.physics.h) / 3.0)
    }

    pub fn sign(&self) -> Sign {
        Sign::parse(&self.physics.sign).unwrap_or(Sign::Minus)
    }

    pub fn reference_shape(&self) -> Result<ReferenceShape> {
        let s = &self.shape;
        match s.kind.as_str() {
            "ball" => ReferenceShape::ball(s.radius),
            "truncated_ball" => {
                let cut = s.cut.ok_or(Error::Config { line: 0, msg: "shape.cut is required for truncated_ball".into() })?;
                ReferenceShape::truncated_ball(s.resolution, s.radius, cut)
            }
            "mask" => {
                let path = s.mask_file.as_ref().ok_or(Error::Config { line: 0, msg: "shape.mask_file is required for mask".into() })?;
                let text = fs::read_to_string(path)?;
                let mut tokens = text.split_whitespace();
                let n: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or(Error::Config { line: 1, msg: "mask file must start with its resolution".into() })?;
                let bits: Vec<bool> = tokens.flat_map(|t| t.chars()).map(|c| c == '1').collect();
                ReferenceShape::voxel_mask(n, bits)
            }
            other => Err(Error::Config { line: 0, msg: format!("shape.kind: unknown value `{other}`") }),
        }
    }

    pub fn incident(&self) -> Result<PlaneWave> {
        PlaneWave::new(self.incident.direction, self.incident.polarization, 1.0)
    }
}

/// Spectral data shared by every stage of one scenario.
pub struct SpectralData {
    pub shape: ReferenceShape,
    pub family1: EigenFamily,
    pub family3: EigenFamily,
    pub n0: usize,
    pub lambda_n0: f64,
    pub p0: Mat3,
    pub dims: (usize, usize, usize),
}

pub fn spectral_stage(cfg: &ScenarioConfig) -> Result<SpectralData> {
    let shape = cfg.reference_shape()?;
    let n = cfg.shape.resolution;
    let cached = match &cfg.shape.cache {
        Some(p) => cache::load(p, &shape, n)?,
        None => None,
    };
    let grid = voxelize(&shape, n)?;
    let dec = subspace_projectors(&grid)?;
    let (family1, family3) = match cached {
        Some(mut f) if f.len() == 2 => {
            let f3 = f.remove(1);
            (f.remove(0), f3)
        }
        _ => {
            let f1 = eigen_div_free(&grid, &dec, cfg.shape.modes)?;
            let f3 = eigen_grad_harmonic(&grid, &dec, None)?;
            if let Some(p) = &cfg.shape.cache {
                cache::save(p, &shape, n, &[f1.clone(), f3.clone()])?;
            }
            (f1, f3)
        }
    };
    let n0 = family1.n0.ok_or(Error::NoDipoleMode)?;
    let lambda_n0 = family1.modes[n0].lambda;
    let p0 = polarization_p0(&family1, n0)?;
    Ok(SpectralData { shape, family1, family3, n0, lambda_n0, p0, dims: dec.dims() })
}

pub fn physical_params(cfg: &ScenarioConfig, a: f64, lambda_n0: f64) -> Result<PhysicalParams> {
    let p = &cfg.physics;
    let sigma = p.sigma.value();
    if sigma == C64::default() {
        let k = p.k.unwrap_or(1.0);
        return Ok(PhysicalParams { a, h: p.h, t: cfg.t(), sigma, c0: p.c0.value(), sign: cfg.sign(), eta: sigma, k, lambda_n0 });
    }
    PhysicalParams::tuned(a, p.h, cfg.t(), sigma, p.c0.value(), cfg.sign(), lambda_n0)
}

pub fn build_cluster(cfg: &ScenarioConfig, shape: &ReferenceShape, a: f64) -> Result<Cluster> {
    let c = &cfg.cluster;
    let gap = c.gap.unwrap_or_else(|| a.powf(cfg.t()));
    let rc = shape.circumradius();
    let need =
        |v: Option<Vec3>, name: &str| v.ok_or(Error::Config { line: 0, msg: format!("cluster.{name} is required for kind {}", c.kind) });
    match c.kind.as_str() {
        "line" => {
            let pitch = gap + 2.0 * a * rc;
            Cluster::new((0..c.count.max(1)).map(|i| [i as f64 * pitch, 0.0, 0.0]).collect(), a, shape.clone())
        }
        "lattice" => lattice_cluster(Aabb { lo: need(c.lo, "lo")?, hi: need(c.hi, "hi")? }, gap, a, shape.clone()),
        "sphere" => {
            let radius = c.radius.ok_or(Error::Config { line: 0, msg: "cluster.radius is required for sphere".into() })?;
            surface_cluster(Surface::Sphere { radius }, gap + 2.0 * a * rc, a, shape.clone(), c.jitter, cfg.output.seed)
        }
        "plane" => {
            let size = c.size.ok_or(Error::Config { line: 0, msg: "cluster.size is required for plane".into() })?;
            surface_cluster(Surface::Plane { size }, gap + 2.0 * a * rc, a, shape.clone(), c.jitter, cfg.output.seed)
        }
        "file" => {
            let path = c.path.as_ref().ok_or(Error::Config { line: 0, msg: "cluster.path is required for file".into() })?;
            let read = Cluster::from_text(&fs::read_to_string(path)?)?;
            Cluster::new(read.centers, a, shape.clone())
        }
        other => Err(Error::Config { line: 0, msg: format!("cluster.kind: unknown value `{other}`") }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Eigens,
    Tune,
    Validate,
    Solve,
    FarField,
    Oracle,
}

#[derive(Clone, Debug)]
pub struct ScaleResult {
    pub a: f64,
    pub params: PhysicalParams,
    pub aleph: usize,
    pub margin: f64,
    pub point: FarFieldPattern,
    pub oracle: Option<FarFieldPattern>,
    pub discrepancy: Option<f64>,
    pub diagnostics: Vec<ProjectionReport>,
}

fn g(x: f64) -> String {
    format!("{x:.17e}")
}

fn write(out: &Path, name: &str, body: &str) -> Result<()> {
    fs::write(out.join(name), body)?;
    Ok(())
}

fn eigen_report(sd: &SpectralData, n: usize) -> String {
    let mut s = String::from("family,index,lambda,moment_x,moment_y,moment_z,potential\n");
    for (tag, fam) in [("div_free", &sd.family1), ("grad_harmonic", &sd.family3)] {
        for (i, m) in fam.modes.iter().enumerate() {
            let _ =
                writeln!(s, "{tag},{i},{},{},{},{},{}", g(m.lambda), g(m.moment[0]), g(m.moment[1]), g(m.moment[2]), m.potential.is_some());
        }
    }
    let _ = writeln!(s, "# resolution={n} dims={:?} n0={} lambda_n0={}", sd.dims, sd.n0, g(sd.lambda_n0));
    s
}

fn tuning_report(cfg: &ScenarioConfig, p: &PhysicalParams) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "a = {}", g(p.a));
    let _ = writeln!(s, "h = {}", g(p.h));
    let _ = writeln!(s, "t = {}", g(p.t));
    let _ = writeln!(s, "sign = {:?}", p.sign);
    let _ = writeln!(s, "lambda_n0 = {}", g(p.lambda_n0));
    let _ = writeln!(s, "eta = {} {}", g(p.eta.re), g(p.eta.im));
    let _ = writeln!(s, "k = {}", g(p.k));
    let _ = writeln!(s, "tuning_residual = {}", g(p.residual()));
    if let Some(l) = &cfg.lorentz {
        let t = lorentz_params(l.kp, l.k0, p.lambda_n0, p.a, p.h, p.c0, p.sign)?;
        let _ = writeln!(s, "lorentz_k = {}", g(t.k));
        let _ = writeln!(s, "lorentz_gamma = {}", g(t.gamma));
        let _ = writeln!(s, "lorentz_eps_r = {} {}", g(t.eps_r.re), g(t.eps_r.im));
        let _ = writeln!(s, "lorentz_eta = {} {}", g(t.eta.re), g(t.eta.im));
        let _ = writeln!(s, "lorentz_residual = {}", g(t.residual.norm()));
    }
    Ok(s)
}

fn q_table(sol: &FoldyLaxSolution) -> String {
    let mut s = String::from("particle,re_Qx,im_Qx,re_Qy,im_Qy,re_Qz,im_Qz\n");
    for (m, q) in sol.q.iter().enumerate() {
        let _ = writeln!(s, "{m},{},{},{},{},{},{}", g(q[0].re), g(q[0].im), g(q[1].re), g(q[1].im), g(q[2].re), g(q[2].im));
    }
    s
}

/// Runs one scale `a` through `stage`, writing files into `out` when given.
pub fn run_scale(cfg: &ScenarioConfig, sd: &SpectralData, a: f64, stage: Stage, out: Option<&Path>) -> Result<ScaleResult> {
    let params = physical_params(cfg, a, sd.lambda_n0).map_err(|e| e.in_stage("tuning"))?;
    if let Some(o) = out {
        write(o, "tuning.txt", &tuning_report(cfg, &params).map_err(|e| e.in_stage("tuning"))?)?;
    }
    let cluster = build_cluster(cfg, &sd.shape, a).map_err(|e| e.in_stage("cluster"))?;
    let report = validate_cluster(&cluster, &params);
    if let Some(o) = out {
        let mut s = String::new();
        let _ = writeln!(s, "aleph = {}", report.aleph);
        let _ = writeln!(s, "d = {}", g(report.d));
        let _ = writeln!(s, "t_inferred = {}", g(report.t_inferred));
        let _ = writeln!(s, "aleph_d3 = {}", g(report.aleph_d3));
        for c in &report.regime.checks {
            let _ = writeln!(s, "{} = {} ({})", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail);
        }
        for w in &report.regime.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        write(o, "validation.txt", &s)?;
        write(o, "cluster.txt", &cluster.to_text())?;
    }
    if !report.passed() {
        let mut why = report.regime.failures();
        if !report.disjoint {
            why.push("particles overlap".into());
        }
        return Err(Error::Regime(why.join("; ")).in_stage("validate"));
    }
    let dirs = fibonacci_sphere(cfg.output.directions);
    let mut result = ScaleResult {
        a,
        params: params.clone(),
        aleph: cluster.len(),
        margin: 0.0,
        point: FarFieldPattern::zeros(dirs.clone()),
        oracle: None,
        discrepancy: None,
        diagnostics: Vec::new(),
    };
    if stage < Stage::Solve {
        return Ok(result);
    }
    let inc = cfg.incident().map_err(|e| e.in_stage("incident"))?;
    let no_scatterer = params.eta == C64::default();
    if !no_scatterer {
        let fl = || -> Result<(FoldyLaxSolution, FoldyLaxSolution)> {
            let magnetic = solve(&assemble_magnetic(&cluster, &params, &sd.p0, &inc)?)?;
            let p1 = electric_polarization(&sd.family3, params.eta, a)?;
            let electric = solve(&assemble_electric(&cluster, &params, &p1, &inc)?)?;
            Ok((magnetic, electric))
        };
        let (magnetic, electric) = fl().map_err(|e| e.in_stage("point interaction"))?;
        result.margin = magnetic.margin;
        if let Some(o) = out {
            write(o, "q_magnetic.csv", &q_table(&magnetic))?;
            write(o, "q_electric.csv", &q_table(&electric))?;
            write(o, "margin.txt", &format!("magnetic = {}\nelectric = {}\n", g(magnetic.margin), g(electric.margin)))?;
        }
        if stage >= Stage::FarField {
            let main = far_field(&cluster, &magnetic, params.eta, params.k, &dirs)?;
            let corr = far_field_p3_correction(&cluster, &electric, params.eta, params.k, &dirs)?;
            if let Some(o) = out {
                main.write_csv(&o.join("farfield_magnetic.csv"))?;
                corr.write_csv(&o.join("farfield_gradient.csv"))?;
            }
            result.point = if cfg.output.gradient_correction { main.add(&corr)? } else { main };
        }
    } else if let Some(o) = out {
        write(o, "margin.txt", "magnetic = 0\nelectric = 0\n")?;
    }
    if let Some(o) = out {
        if stage >= Stage::FarField {
            result.point.write_csv(&o.join("farfield.csv"))?;
        }
    }
    if stage >= Stage::Oracle || (stage >= Stage::FarField && cfg.oracle.enabled) {
        let res = cfg.oracle.resolution;
        let run = || -> Result<(FarFieldPattern, Vec<ProjectionReport>)> {
            let sol = ls_solve(&cluster, &params, &inc, res, cfg.oracle.cap)?;
            let ff = oracle_far_field(&sol, params.eta, params.k, &dirs);
            let dec = subspace_projectors(&sol.reference)?;
            let diag = projection_diagnostics(&sol, &dec)?;
            if let Some(o) = out {
                sol.write_csv(&o.join("oracle_field.csv"))?;
            }
            Ok((ff, diag))
        };
        let (ff, diag) = run().map_err(|e| e.in_stage("oracle"))?;
        if let Some(o) = out {
            ff.write_csv(&o.join("farfield_oracle.csv"))?;
            let mut s = String::from("particle,total,p1,p2,p3,p2_ok\n");
            for r in &diag {
                let _ = writeln!(s, "{},{},{},{},{},{}", r.particle, g(r.total), g(r.p1), g(r.p2), g(r.p3), r.p2_ok);
            }
            write(o, "projections.csv", &s)?;
        }
        result.discrepancy = Some(result.point.relative_discrepancy(&ff)?);
        result.oracle = Some(ff);
        result.diagnostics = diag;
    }
    Ok(result)
}

/// Full pipeline for one configuration; returns the summary text.
pub fn run_scenario(cfg: &ScenarioConfig, stage: Stage, out: &Path) -> Result<String> {
    fs::create_dir_all(out)?;
    let sd = spectral_stage(cfg).map_err(|e| e.in_stage("spectral"))?;
    write(out, "eigens.csv", &eigen_report(&sd, cfg.shape.resolution))?;
    let mut s = String::new();
    let _ = writeln!(s, "shape = {}", sd.shape.tag());
    let _ = writeln!(s, "resolution = {}", cfg.shape.resolution);
    let _ = writeln!(s, "lambda_n0 = {}", g(sd.lambda_n0));
    if stage > Stage::Eigens {
        let r = run_scale(cfg, &sd, cfg.physics.a, stage, Some(out))?;
        let _ = writeln!(s, "a = {}", g(r.a));
        let _ = writeln!(s, "k = {}", g(r.params.k));
        let _ = writeln!(s, "aleph = {}", r.aleph);
        if stage >= Stage::Solve {
            let _ = writeln!(s, "margin = {}", g(r.margin));
        }
        if stage >= Stage::FarField {
            let _ = writeln!(s, "farfield_rms = {}", g(r.point.rms()));
        }
        if let (Some(ff), Some(d)) = (&r.oracle, r.discrepancy) {
            let _ = writeln!(s, "oracle_rms = {}", g(ff.rms()));
            let _ = writeln!(s, "discrepancy = {}", g(d));
        }
    }
    write(out, "summary.txt", &s)?;
    Ok(s)
}

/// Least-squares slope of `log y` against `log x`; NaN with fewer than two points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// One row per scale with margin and discrepancy, then a `slope` footer.
pub fn convergence_study(cfg: &ScenarioConfig, sweep: &[f64], out: &Path) -> Result<String> {
    if sweep.is_empty() {
        return Err(Error::Config { line: 0, msg: "sweep.a is empty".into() });
    }
    fs::create_dir_all(out)?;
    let sd = spectral_stage(cfg).map_err(|e| e.in_stage("spectral"))?;
    let mut s = String::from("a,k,margin,discrepancy,farfield_rms,oracle_rms\n");
    let mut disc = Vec::new();
    for &a in sweep {
        let r = run_scale(cfg, &sd, a, Stage::Oracle, None)?;
        let d = r.discrepancy.unwrap_or(f64::NAN);
        disc.push(d);
        let orms = r.oracle.as_ref().map_or(f64::NAN, |f| f.rms());
        let _ = writeln!(s, "{},{},{},{},{},{}", g(a), g(r.params.k), g(r.margin), g(d), g(r.point.rms()), g(orms));
    }
    let slope = loglog_slope(sweep, &disc);
    let _ = writeln!(s, "slope,{}{}", g(slope), if slope.is_nan() { ",undetermined" } else { "" });
    write(out, "convergence.csv", &s)?;
    Ok(s)
}
