use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::integrand::Integrand;
use super::sparse::{nested_dissection, Factor, Symbolic};
use super::{SolveReport, SolverConfig, StageReport, StopReason, Warning};
use crate::geometry::{norm, Diagonal, GridDomain, Mesh};
use crate::{Error, Result};

const NONE: usize = usize::MAX;
const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Newton continuation engine for one domain and one set of fixed nodes.
///
/// The sparsity analysis is done once, so repeated solves with different
/// fixed values (θ searches, exhaustion stages) only pay for numeric work.
#[derive(Clone, Debug)]
pub struct Solver {
    domain: Arc<GridDomain>,
    mesh: Mesh,
    fixed: Vec<bool>,
    free: Vec<usize>,
    index: Vec<usize>,
    sym: Symbolic,
    slots: Vec<[usize; 6]>,
    inc_off: Vec<usize>,
    inc: Vec<usize>,
}

impl Solver {
    /// `fixed[id]` marks Dirichlet nodes. Free nodes touching no element are fixed as well.
    pub fn new(domain: Arc<GridDomain>, mut fixed: Vec<bool>) -> Result<Self> {
        if fixed.len() != domain.len() {
            return Err(Error::InvalidArgument(format!("mask has {} entries for {} nodes", fixed.len(), domain.len())));
        }
        let mesh = Mesh::new(&domain, Diagonal::Main);
        let (inc_off, inc) = mesh.incidence(domain.len());
        for id in 0..domain.len() {
            if inc_off[id + 1] == inc_off[id] {
                fixed[id] = true;
            }
        }
        let mut index = vec![NONE; domain.len()];
        let mut free = Vec::new();
        for id in 0..domain.len() {
            if !fixed[id] {
                index[id] = free.len();
                free.push(id);
            }
        }
        let mut adjacency = vec![Vec::new(); free.len()];
        for e in &mesh.elements {
            for &a in e.vertices() {
                for &b in e.vertices() {
                    if a != b && index[a] != NONE && index[b] != NONE {
                        adjacency[index[a]].push(index[b]);
                    }
                }
            }
        }
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        let coords: Vec<_> = free.iter().map(|&id| domain.lattice(id)).collect();
        let sym = Symbolic::new(&adjacency, nested_dissection(&coords));
        let slots = mesh
            .elements
            .iter()
            .map(|e| {
                let mut s = [NONE; 6];
                for (k, &(a, b)) in PAIRS.iter().enumerate() {
                    if a < e.len && b < e.len {
                        let (fa, fb) = (index[e.nodes[a]], index[e.nodes[b]]);
                        if fa != NONE && fb != NONE {
                            s[k] = sym.slot(fa, fb).expect("pattern covers element pairs");
                        }
                    }
                }
                s
            })
            .collect();
        Ok(Solver { domain, mesh, fixed, free, index, sym, slots, inc_off, inc })
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn is_fixed(&self, id: usize) -> bool {
        self.fixed[id]
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    fn relaxed_energy(&self, integrand: &Integrand, u: &[f64]) -> f64 {
        self.mesh.elements.iter().map(|e| e.measure * integrand.value(e.gradient(u))).sum()
    }

    /// Returns relaxed energy; fills gradient `g` (free order) and, if given, matrix values.
    fn assemble(&self, integrand: &Integrand, u: &[f64], g: &mut [f64], cx: Option<&mut [f64]>) -> f64 {
        g.iter_mut().for_each(|x| *x = 0.0);
        let mut energy = 0.0;
        let mut cx = cx;
        if let Some(c) = cx.as_deref_mut() {
            c.iter_mut().for_each(|x| *x = 0.0);
        }
        for (eid, e) in self.mesh.elements.iter().enumerate() {
            let p = e.gradient(u);
            let l = integrand.eval(p);
            let a = e.measure;
            energy += a * l.f;
            for v in 0..e.len {
                let fv = self.index[e.nodes[v]];
                if fv != NONE {
                    g[fv] += a * (l.df[0] * e.grad[v][0] + l.df[1] * e.grad[v][1]);
                }
            }
            if let Some(c) = cx.as_deref_mut() {
                let mut ng = [[0.0; 2]; 3];
                for v in 0..e.len {
                    let q = e.grad[v];
                    ng[v] = [l.n[0] * q[0] + l.n[1] * q[1], l.n[1] * q[0] + l.n[2] * q[1]];
                }
                for (k, &(x, y)) in PAIRS.iter().enumerate() {
                    let s = self.slots[eid][k];
                    if s != NONE {
                        c[s] += a * (e.grad[x][0] * ng[y][0] + e.grad[x][1] * ng[y][1]);
                    }
                }
            }
        }
        energy
    }

    fn factor_with_shift(&self, factor: &mut Factor, cx: &mut [f64], warnings: &mut Vec<Warning>) -> Result<()> {
        if factor.factor(&self.sym, cx).is_ok() {
            return Ok(());
        }
        let diag: Vec<usize> = (0..self.free.len()).map(|k| self.sym.slot(k, k).unwrap()).collect();
        let scale = diag.iter().fold(0.0f64, |m, &s| m.max(cx[s].abs())).max(f64::MIN_POSITIVE);
        let mut shift = 1e-12 * scale;
        let mut applied = 0.0;
        for _ in 0..12 {
            for &s in &diag {
                cx[s] += shift - applied;
            }
            applied = shift;
            if factor.factor(&self.sym, cx).is_ok() {
                warnings.push(Warning::DiagonalShift { shift });
                return Ok(());
            }
            shift *= 100.0;
        }
        Err(Error::NotPositiveDefinite(self.free.len()))
    }

    /// Runs the δ-schedule from `u` (full node vector; fixed entries are boundary values).
    pub(crate) fn run(&self, u: &mut [f64], config: &SolverConfig) -> Result<SolveReport> {
        config.validate()?;
        let n = self.free.len();
        let mut warnings = Vec::new();
        let mut stages = Vec::with_capacity(config.delta_schedule.len());
        let mut grad = vec![0.0; n];
        let mut trial = u.to_vec();
        let mut cx = vec![0.0; self.sym.matrix_nnz()];
        let mut factor = Factor::new(&self.sym);
        let mut step = vec![0.0; n];
        let mut last_grad = 0.0;

        for &delta in &config.delta_schedule {
            let integrand = Integrand::new(delta);
            let mut history: Vec<f64> = Vec::new();
            let mut stop = StopReason::MaxIters;
            let mut iterations = 0;
            let mut energy = 0.0;
            let mut gnorm = 0.0;
            if n == 0 {
                energy = self.relaxed_energy(&integrand, u);
                stop = StopReason::NoFreeNodes;
            }
            while n > 0 {
                energy = self.assemble(&integrand, u, &mut grad, Some(&mut cx));
                gnorm = grad.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if gnorm < config.stationarity_tol {
                    stop = StopReason::Stationary;
                    break;
                }
                history.push(energy);
                let w = config.stall_window;
                if history.len() > w {
                    let prev = history[history.len() - 1 - w];
                    if (energy - prev).abs() <= config.energy_stall_tol * energy.abs().max(1e-300) {
                        stop = StopReason::EnergyStall;
                        break;
                    }
                }
                if iterations >= config.max_iters {
                    break;
                }
                iterations += 1;
                self.factor_with_shift(&mut factor, &mut cx, &mut warnings)?;
                step.copy_from_slice(&grad);
                factor.solve(&self.sym, &mut step);
                let slope: f64 = grad.iter().zip(&step).map(|(a, b)| a * b).sum();
                let mut alpha = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    trial.copy_from_slice(u);
                    for (k, &id) in self.free.iter().enumerate() {
                        trial[id] += alpha * step[k];
                    }
                    let e_new = self.relaxed_energy(&integrand, &trial);
                    if e_new >= energy + 1e-4 * alpha * slope {
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    // at roundoff level the energy cannot resolve the step; fall back on the gradient
                    trial.copy_from_slice(u);
                    for (k, &id) in self.free.iter().enumerate() {
                        trial[id] += step[k];
                    }
                    let mut g_new = vec![0.0; n];
                    self.assemble(&integrand, &trial, &mut g_new, None);
                    let gn = g_new.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if slope.abs() <= 1e-12 * energy.abs().max(1e-300) && gn < gnorm {
                        accepted = true;
                    }
                }
                if !accepted {
                    stop = StopReason::LineSearch;
                    break;
                }
                u.copy_from_slice(&trial);
            }
            if n > 0 && stop != StopReason::Stationary {
                energy = self.assemble(&integrand, u, &mut grad, None);
                gnorm = grad.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if stop == StopReason::MaxIters || stop == StopReason::LineSearch {
                    warnings.push(Warning::StageNotConverged { delta, iterations, grad_norm: gnorm });
                }
            }
            last_grad = gnorm;
            stages.push(StageReport { delta, iterations, energy, grad_norm: gnorm, stop });
        }

        let sweeps = self.project(u, config.projection_sweeps);
        let max_norm = self.max_gradient_norm(u);
        let feasible = max_norm <= 1.0 + 1e-12;
        if !feasible {
            let over = self.mesh.elements.iter().filter(|e| norm(e.gradient(u)) > 1.0 + 1e-12).count();
            warnings.push(Warning::GridInfeasible { max_norm, elements: over });
        }
        Ok(SolveReport {
            energy: clamped_energy(&self.mesh, u),
            stages,
            grad_norm: last_grad,
            max_gradient_norm: max_norm,
            feasible,
            projection_sweeps: sweeps,
            warnings,
            wall_time_s: None,
        })
    }

    pub(crate) fn max_gradient_norm(&self, u: &[f64]) -> f64 {
        self.mesh.elements.iter().map(|e| norm(e.gradient(u))).fold(0.0, f64::max)
    }

    /// Node-correction sweeps: each free node is moved to the nearest value making all
    /// incident slopes `<= 1`, when such a value exists. Returns the number of sweeps used.
    fn project(&self, u: &mut [f64], max_sweeps: usize) -> usize {
        for sweep in 0..max_sweeps {
            let mut changed = false;
            for &node in &self.free {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                let mut violated = false;
                let mut empty = false;
                for &eid in &self.inc[self.inc_off[node]..self.inc_off[node + 1]] {
                    let e = &self.mesh.elements[eid];
                    let v = e.nodes[..e.len].iter().position(|&x| x == node).unwrap();
                    let p = e.gradient(u);
                    let q = e.grad[v];
                    let a = q[0] * q[0] + q[1] * q[1];
                    let b = p[0] * q[0] + p[1] * q[1];
                    let c = p[0] * p[0] + p[1] * p[1] - 1.0;
                    if c > 2e-13 {
                        violated = true;
                    }
                    let disc = b * b - a * c;
                    if disc < 0.0 {
                        empty = true;
                        break;
                    }
                    let r = libm::sqrt(disc);
                    lo = lo.max((-b - r) / a);
                    hi = hi.min((-b + r) / a);
                }
                if violated && !empty && lo <= hi {
                    let t = if 0.0 < lo { lo } else if 0.0 > hi { hi } else { 0.0 };
                    // aim slightly inside so roundoff cannot leave the slope above one
                    let t = t + if t == lo { 1e-3 * (hi - lo) } else if t == hi { -1e-3 * (hi - lo) } else { 0.0 };
                    u[node] += t;
                    changed = true;
                }
            }
            if !changed {
                return sweep;
            }
        }
        max_sweeps
    }
}

pub(crate) fn clamped_energy(mesh: &Mesh, u: &[f64]) -> f64 {
    mesh.elements
        .iter()
        .map(|e| {
            let p = e.gradient(u);
            e.measure * libm::sqrt((1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0))
        })
        .sum()
}
