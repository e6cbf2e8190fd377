//! Implicit quasi-static plane-stress solver.
//!
//! Displacement-controlled loading is ramped linearly over `n_steps`
//! pseudo-time steps.  Each step runs a full Newton iteration on the
//! free degrees of freedom with a finite-difference consistent tangent;
//! a step that fails to converge is retried on half the increment, up
//! to [`MAX_HALVINGS`] levels deep.  Everything is serial and ordered,
//! so a given (mesh, model, protocol) triple reproduces its results bit
//! for bit.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::band::BandedSpd;
use super::element::{bmat, gauss_points};
use super::mesh::Mesh;
use crate::constitutive::{MaterialModel, MaterialState, ModelError};
use crate::io::fmt_f64;
use crate::stress::{PlaneStrain, PlaneStress};

/// Newton iteration cap per (sub-)increment.
pub const MAX_NEWTON: usize = 25;

/// Maximum recursive increment-halving depth.
pub const MAX_HALVINGS: usize = 4;

/// Convergence: residual 2-norm on free dofs below this fraction of the
/// applied-force scale (2-norm of the internal forces at prescribed dofs).
pub const RESIDUAL_REL: f64 = 1e-8;

/// Engineering-strain perturbation of the finite-difference tangent.
const FD_STRAIN: f64 = 1e-7;

/// Prescribed displacement components on one named boundary node set.
/// `None` leaves the component free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeConstraint {
    pub boundary: String,
    pub ux: Option<f64>,
    pub uy: Option<f64>,
}

impl EdgeConstraint {
    pub fn new(boundary: &str, ux: Option<f64>, uy: Option<f64>) -> Self {
        EdgeConstraint {
            boundary: boundary.to_string(),
            ux,
            uy,
        }
    }
}

/// Displacement-controlled load case: edge constraints ramped linearly
/// to their full values over `n_steps` equal pseudo-time steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProtocol {
    pub n_steps: usize,
    pub constraints: Vec<EdgeConstraint>,
}

impl LoadProtocol {
    /// Uniaxial tension along x on a rectangle meshed with symmetry
    /// supports: xmin held, ymin held laterally, xmax pulled to `u`.
    pub fn uniaxial_x(u: f64, n_steps: usize) -> Self {
        LoadProtocol {
            n_steps,
            constraints: vec![
                EdgeConstraint::new("xmin", Some(0.0), None),
                EdgeConstraint::new("ymin", None, Some(0.0)),
                EdgeConstraint::new("xmax", Some(u), None),
            ],
        }
    }

    /// Equibiaxial pull on a quarter model: symmetry planes on xmin and
    /// ymin, both arm tips pulled outward by `u`.
    pub fn equibiaxial(u: f64, n_steps: usize) -> Self {
        LoadProtocol {
            n_steps,
            constraints: vec![
                EdgeConstraint::new("xmin", Some(0.0), None),
                EdgeConstraint::new("ymin", None, Some(0.0)),
                EdgeConstraint::new("xmax", Some(u), None),
                EdgeConstraint::new("ymax", None, Some(u)),
            ],
        }
    }

    /// Grip tension along y: ymin clamped, ymax clamped laterally and
    /// pulled to `u` (the usual way to load a notched shear strip).
    pub fn grip_tension_y(u: f64, n_steps: usize) -> Self {
        LoadProtocol {
            n_steps,
            constraints: vec![
                EdgeConstraint::new("ymin", Some(0.0), Some(0.0)),
                EdgeConstraint::new("ymax", Some(0.0), Some(u)),
            ],
        }
    }
}

#[derive(Debug, Error)]
pub enum FemError {
    #[error("constraint references unknown boundary set `{0}`")]
    UnknownBoundary(String),
    #[error("conflicting prescribed values on boundary `{0}` (node {1})")]
    ConflictingConstraint(String, usize),
    #[error("load protocol needs at least one step and one constraint")]
    EmptyProtocol,
    #[error("invalid material: {0}")]
    Model(#[from] ModelError),
    #[error(
        "step {step} did not converge (residual {rnorm:.3e} after halving to depth {depth})"
    )]
    Diverged {
        step: usize,
        depth: usize,
        rnorm: f64,
    },
    #[error("boundary `{0}` carries no prescribed displacement")]
    NotLoaded(String),
}

/// One per-element sample of the solution fields (Gauss-point average,
/// reported at the element centroid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub elem: usize,
    pub x: f64,
    pub y: f64,
    pub strain: PlaneStrain,
    pub stress: PlaneStress,
    pub ebar_p: f64,
}

/// Converged state at the end of one load step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// 1-based step index.
    pub step: usize,
    /// Fraction of the full prescribed displacement applied (step / n_steps).
    pub load_factor: f64,
    /// Prescribed displacement per constrained boundary at this step.
    pub applied: BTreeMap<String, [f64; 2]>,
    /// Sum of nodal internal forces over each named boundary set.
    pub reactions: BTreeMap<String, [f64; 2]>,
    pub points: Vec<SamplePoint>,
}

/// Full solution history: one snapshot per load step over a fixed set of
/// sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHistory {
    pub snapshots: Vec<Snapshot>,
    /// Per-sample validity mask (all true as solved; data corruption
    /// stages may clear entries).
    pub valid: Vec<bool>,
    pub n_points: usize,
}

impl FieldHistory {
    /// (displacement, force) pairs for a loaded boundary, one per step,
    /// taking the dominant prescribed component.
    pub fn reaction_curve(&self, boundary: &str) -> Result<Vec<(f64, f64)>, FemError> {
        let last = self
            .snapshots
            .last()
            .ok_or_else(|| FemError::NotLoaded(boundary.to_string()))?;
        let total = last
            .applied
            .get(boundary)
            .ok_or_else(|| FemError::UnknownBoundary(boundary.to_string()))?;
        if total[0] == 0.0 && total[1] == 0.0 {
            return Err(FemError::NotLoaded(boundary.to_string()));
        }
        let comp = usize::from(total[1].abs() > total[0].abs());
        Ok(self
            .snapshots
            .iter()
            .map(|s| (s.applied[boundary][comp], s.reactions[boundary][comp]))
            .collect())
    }

    /// Flat iterator over (step index, sample) pairs.
    pub fn samples(&self) -> impl Iterator<Item = (usize, &SamplePoint)> {
        self.snapshots
            .iter()
            .flat_map(|s| s.points.iter().map(move |p| (s.step, p)))
    }
}

/// Per-dof prescribed total displacements (length `2 * n_nodes`).
fn build_prescribed(mesh: &Mesh, protocol: &LoadProtocol) -> Result<Vec<Option<f64>>, FemError> {
    let mut prescribed = vec![None; 2 * mesh.n_nodes()];
    for c in &protocol.constraints {
        let set = mesh
            .boundary
            .get(&c.boundary)
            .ok_or_else(|| FemError::UnknownBoundary(c.boundary.clone()))?;
        for &node in set {
            for (k, v) in [c.ux, c.uy].into_iter().enumerate() {
                if let Some(v) = v {
                    let dof = 2 * node + k;
                    match prescribed[dof] {
                        Some(old) if old != v => {
                            return Err(FemError::ConflictingConstraint(c.boundary.clone(), node));
                        }
                        _ => prescribed[dof] = Some(v),
                    }
                }
            }
        }
    }
    Ok(prescribed)
}

/// Solve a load protocol on a mesh.  Returns one snapshot per step.
pub fn solve(
    mesh: &Mesh,
    model: &MaterialModel,
    protocol: &LoadProtocol,
) -> Result<FieldHistory, FemError> {
    if protocol.n_steps == 0 || protocol.constraints.is_empty() {
        return Err(FemError::EmptyProtocol);
    }
    let prescribed = build_prescribed(mesh, protocol)?;
    solve_ramp(mesh, model, &prescribed, protocol.n_steps, Some(protocol))
}

/// Low-level entry: ramp arbitrary per-dof prescribed displacements
/// (length `2 * n_nodes`) linearly over `n_steps`.  Snapshots carry no
/// per-boundary `applied` record on this path.
pub fn solve_prescribed(
    mesh: &Mesh,
    model: &MaterialModel,
    prescribed: &[Option<f64>],
    n_steps: usize,
) -> Result<FieldHistory, FemError> {
    solve_ramp(mesh, model, prescribed, n_steps, None)
}

fn solve_ramp(
    mesh: &Mesh,
    model: &MaterialModel,
    prescribed: &[Option<f64>],
    n_steps: usize,
    protocol: Option<&LoadProtocol>,
) -> Result<FieldHistory, FemError> {
    model.validate()?;
    assert_eq!(prescribed.len(), 2 * mesh.n_nodes());

    let mut sys = System::new(mesh, model, prescribed);
    let mut snapshots = Vec::with_capacity(n_steps);
    let mut t_prev = 0.0;
    for step in 1..=n_steps {
        let t = step as f64 / n_steps as f64;
        sys.increment(step, t_prev, t, 0)?;
        t_prev = t;
        snapshots.push(sys.snapshot(step, t, protocol));
    }
    let n_points = mesh.n_elems();
    Ok(FieldHistory {
        snapshots,
        valid: vec![true; n_points],
        n_points,
    })
}

/// Committed Gauss-point data: state plus the on-surface stress returned
/// by the integrator.
type GpData = [(MaterialState, PlaneStress); 4];

struct System<'a> {
    mesh: &'a Mesh,
    model: &'a MaterialModel,
    prescribed: &'a [Option<f64>],
    /// dof -> compact free index (usize::MAX if prescribed).
    free_of: Vec<usize>,
    /// compact free index -> dof.
    free: Vec<usize>,
    bw: usize,
    /// Constant elastic tangent, used when a Gauss point steps elastically.
    c_el: Matrix3<f64>,
    u: Vec<f64>,
    states: Vec<GpData>,
    /// Internal force vector of the last converged assembly.
    f_int: Vec<f64>,
}

impl<'a> System<'a> {
    fn new(mesh: &'a Mesh, model: &'a MaterialModel, prescribed: &'a [Option<f64>]) -> Self {
        let n_dof = 2 * mesh.n_nodes();
        let mut free_of = vec![usize::MAX; n_dof];
        let mut free = Vec::new();
        for d in 0..n_dof {
            if prescribed[d].is_none() {
                free_of[d] = free.len();
                free.push(d);
            }
        }
        // Free-dof bandwidth over element couplings.
        let mut bw = 0usize;
        for conn in &mesh.elems {
            let idx: Vec<usize> = conn
                .iter()
                .flat_map(|&n| [2 * n, 2 * n + 1])
                .filter_map(|d| (free_of[d] != usize::MAX).then(|| free_of[d]))
                .collect();
            for &a in &idx {
                for &b in &idx {
                    bw = bw.max(a.abs_diff(b));
                }
            }
        }
        let zero = (MaterialState::default(), PlaneStress::new(0.0, 0.0, 0.0));
        System {
            mesh,
            model,
            prescribed,
            free_of,
            free,
            bw,
            c_el: model.elastic_matrix(),
            u: vec![0.0; n_dof],
            states: vec![[zero; 4]; mesh.n_elems()],
            f_int: vec![0.0; n_dof],
        }
    }

    /// Internal forces, tangent, and trial Gauss-point data at `u`,
    /// integrating from the committed states.  Fails if any material
    /// point rejects its strain increment.
    fn assemble(
        &self,
        u: &[f64],
        trial: &mut [GpData],
        f_int: &mut [f64],
    ) -> Option<BandedSpd> {
        let thickness = self.mesh.thickness;
        let mut k = BandedSpd::new(self.free.len(), self.bw);
        f_int.fill(0.0);
        let gps = gauss_points();
        for (e, conn) in self.mesh.elems.iter().enumerate() {
            let coords = self.mesh.elem_coords(e);
            let mut ue = SVector::<f64, 8>::zeros();
            for (i, &n) in conn.iter().enumerate() {
                ue[2 * i] = u[2 * n];
                ue[2 * i + 1] = u[2 * n + 1];
            }
            let mut fe = SVector::<f64, 8>::zeros();
            let mut ke = SMatrix::<f64, 8, 8>::zeros();
            for (g, &[xi, eta]) in gps.iter().enumerate() {
                // Meshes are validated, so the Jacobian stays positive.
                let (b, detj) = bmat(&coords, xi, eta).expect("element Jacobian");
                let w = detj * thickness;
                let e_eng = b * ue;
                let committed = &self.states[e][g].0;
                let deps = PlaneStrain::new(
                    e_eng[0] - committed.eps.e11,
                    e_eng[1] - committed.eps.e22,
                    0.5 * e_eng[2] - committed.eps.e12,
                );
                let (new_state, stress) = self.model.integrate_step(committed, deps).ok()?;
                let s = nalgebra::Vector3::new(stress.s11, stress.s22, stress.t12);
                fe += b.transpose() * s * w;
                // Tangent: exact elastic matrix on elastic steps, else
                // forward differences on the engineering strain increment.
                let d = if new_state.ebar_p == committed.ebar_p {
                    self.c_el
                } else {
                    let mut d = Matrix3::zeros();
                    for col in 0..3 {
                        let mut dp = deps;
                        match col {
                            0 => dp.e11 += FD_STRAIN,
                            1 => dp.e22 += FD_STRAIN,
                            _ => dp.e12 += 0.5 * FD_STRAIN,
                        }
                        let (_, sp) = self.model.integrate_step(committed, dp).ok()?;
                        d[(0, col)] = (sp.s11 - stress.s11) / FD_STRAIN;
                        d[(1, col)] = (sp.s22 - stress.s22) / FD_STRAIN;
                        d[(2, col)] = (sp.t12 - stress.t12) / FD_STRAIN;
                    }
                    0.5 * (d + d.transpose())
                };
                ke += b.transpose() * d * b * w;
                trial[e][g] = (new_state, stress);
            }
            for (i, &n) in conn.iter().enumerate() {
                f_int[2 * n] += fe[2 * i];
                f_int[2 * n + 1] += fe[2 * i + 1];
            }
            for p in 0..8 {
                let dp = 2 * conn[p / 2] + p % 2;
                let ip = self.free_of[dp];
                if ip == usize::MAX {
                    continue;
                }
                for q in 0..8 {
                    let dq = 2 * conn[q / 2] + q % 2;
                    let iq = self.free_of[dq];
                    if iq != usize::MAX {
                        k.add(ip, iq, ke[(p, q)]);
                    }
                }
            }
        }
        Some(k)
    }

    /// Advance the committed solution from load factor `t0` to `t1`,
    /// halving recursively on failure.
    ///
    /// Each Newton direction comes from the consistent tangent and is a
    /// descent direction of the incremental potential (the tangent is
    /// symmetric positive definite for hardening materials), so a
    /// backtracking line search on the residual norm keeps the iteration
    /// from overshooting across elastic/plastic switches.
    fn increment(&mut self, step: usize, t0: f64, t1: f64, depth: usize) -> Result<(), FemError> {
        let mut u_try = self.u.clone();
        for (d, p) in self.prescribed.iter().enumerate() {
            if let Some(total) = p {
                u_try[d] = t1 * total;
            }
        }
        let n_dof = u_try.len();
        let mut trial = self.states.clone();
        let mut f_int = vec![0.0; n_dof];
        let mut converged = false;
        let mut last_rnorm = f64::INFINITY;
        if let Some(mut k) = self.assemble(&u_try, &mut trial, &mut f_int) {
            let mut rnorm = l2_over(&f_int, &self.free);
            last_rnorm = rnorm;
            for _iter in 0..MAX_NEWTON {
                let scale = l2_prescribed(&f_int, self.prescribed);
                if !rnorm.is_finite() {
                    break;
                }
                if rnorm <= RESIDUAL_REL * scale {
                    converged = true;
                    break;
                }
                let Ok(chol) = k.cholesky() else { break };
                let mut dir: Vec<f64> = self.free.iter().map(|&d| -f_int[d]).collect();
                chol.solve(&mut dir);
                if dir.iter().any(|v| !v.is_finite()) {
                    break;
                }
                // Backtracking: accept the longest step that reduces the
                // residual norm (or any finite residual on the last try).
                let mut accepted = None;
                let mut alpha = 1.0;
                for _ in 0..8 {
                    let mut u_cand = u_try.clone();
                    for (i, &d) in self.free.iter().enumerate() {
                        u_cand[d] += alpha * dir[i];
                    }
                    let mut trial_cand = self.states.clone();
                    let mut f_cand = vec![0.0; n_dof];
                    if let Some(k_cand) = self.assemble(&u_cand, &mut trial_cand, &mut f_cand) {
                        let r_cand = l2_over(&f_cand, &self.free);
                        if r_cand.is_finite() && r_cand < rnorm {
                            accepted = Some((u_cand, trial_cand, f_cand, k_cand, r_cand));
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                let Some((u_new, trial_new, f_new, k_new, r_new)) = accepted else {
                    break;
                };
                u_try = u_new;
                trial = trial_new;
                f_int = f_new;
                k = k_new;
                rnorm = r_new;
                last_rnorm = rnorm;
            }
            // The loop breaks with the state of the last accepted iterate;
            // re-test convergence in case the final accepted step landed.
            if !converged && rnorm.is_finite() {
                let scale = l2_prescribed(&f_int, self.prescribed);
                converged = rnorm <= RESIDUAL_REL * scale;
            }
        }
        if converged {
            self.u = u_try;
            self.states = trial;
            self.f_int = f_int;
            return Ok(());
        }
        if depth >= MAX_HALVINGS {
            return Err(FemError::Diverged {
                step,
                depth,
                rnorm: last_rnorm,
            });
        }
        let mid = 0.5 * (t0 + t1);
        self.increment(step, t0, mid, depth + 1)?;
        self.increment(step, mid, t1, depth + 1)
    }

    fn snapshot(&self, step: usize, t: f64, protocol: Option<&LoadProtocol>) -> Snapshot {
        let mut applied = BTreeMap::new();
        if let Some(p) = protocol {
            for c in &p.constraints {
                let e = applied.entry(c.boundary.clone()).or_insert([0.0, 0.0]);
                if let Some(v) = c.ux {
                    e[0] = t * v;
                }
                if let Some(v) = c.uy {
                    e[1] = t * v;
                }
            }
        }
        let mut reactions = BTreeMap::new();
        for (name, set) in &self.mesh.boundary {
            let mut r = [0.0, 0.0];
            for &n in set {
                r[0] += self.f_int[2 * n];
                r[1] += self.f_int[2 * n + 1];
            }
            reactions.insert(name.clone(), r);
        }
        let points = (0..self.mesh.n_elems())
            .map(|e| {
                let [cx, cy] = self.mesh.centroid(e);
                let mut eps = [0.0; 3];
                let mut sig = [0.0; 3];
                let mut ebar = 0.0;
                for (st, s) in &self.states[e] {
                    eps[0] += 0.25 * st.eps.e11;
                    eps[1] += 0.25 * st.eps.e22;
                    eps[2] += 0.25 * st.eps.e12;
                    sig[0] += 0.25 * s.s11;
                    sig[1] += 0.25 * s.s22;
                    sig[2] += 0.25 * s.t12;
                    ebar += 0.25 * st.ebar_p;
                }
                SamplePoint {
                    elem: e,
                    x: cx,
                    y: cy,
                    strain: PlaneStrain::new(eps[0], eps[1], eps[2]),
                    stress: PlaneStress::new(sig[0], sig[1], sig[2]),
                    ebar_p: ebar,
                }
            })
            .collect();
        Snapshot {
            step,
            load_factor: t,
            applied,
            reactions,
            points,
        }
    }
}

fn l2_over(v: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&d| v[d] * v[d]).sum::<f64>().sqrt()
}

fn l2_prescribed(v: &[f64], prescribed: &[Option<f64>]) -> f64 {
    prescribed
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_some())
        .map(|(d, _)| v[d] * v[d])
        .sum::<f64>()
        .sqrt()
}


/// Full field table: one row per (step, sample point).
pub fn write_fields_csv<P: AsRef<std::path::Path>>(
    history: &FieldHistory,
    path: P,
) -> std::io::Result<()> {
    let header = [
        "step", "elem_id", "x", "y", "e11", "e22", "e12", "s11", "s22", "t12", "ebar_p",
    ];
    let rows = history.samples().map(|(step, p)| {
        vec![
            step.to_string(),
            p.elem.to_string(),
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(p.strain.e11),
            fmt_f64(p.strain.e22),
            fmt_f64(p.strain.e12),
            fmt_f64(p.stress.s11),
            fmt_f64(p.stress.s22),
            fmt_f64(p.stress.t12),
            fmt_f64(p.ebar_p),
        ]
    });
    crate::io::write_csv(path, &header, rows)
}

/// Reaction curve table for one loaded boundary: step, displacement, force.
pub fn write_reactions_csv<P: AsRef<std::path::Path>>(
    history: &FieldHistory,
    boundary: &str,
    path: P,
) -> std::io::Result<()> {
    let curve = history
        .reaction_curve(boundary)
        .map_err(std::io::Error::other)?;
    let rows = curve
        .iter()
        .enumerate()
        .map(|(i, (u, f))| vec![(i + 1).to_string(), fmt_f64(*u), fmt_f64(*f)]);
    crate::io::write_csv(path, &["step", "u", "F"], rows)
}
