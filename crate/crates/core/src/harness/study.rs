use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{CoarseSpaceKind, LevelParams, RateScale, SolverKind, StudyConfig};
use super::errors::{compute_errors, compute_errors_against, ErrorNorms};
use super::problems::{problem, ProblemSpec};
use super::rates::{estimate_rates, Rate};
use crate::coarse_space::{multiscale_trace_basis, polynomial_trace_basis, TraceBasis};
use crate::error::{Error, Result};
use crate::hdg::{assign_tau, TauPolicy};
use crate::homogenization::{solve_cell_problems, CellSolution};
use crate::mesh::{build_structured, build_structured_with, validate, MeshHierarchy, Rect, Scales};
use crate::upscaled::{solve_monolithic, solve_two_level, Diagnostics, DiscreteProblem, DiscreteSolution, SolveReport};

pub const CSV_HEADER: &str = "level,L,H,h,tau,dim_coarse,err_q_alpha,err_q_l2,err_u_l2,jump_max,cons_max,rate_q,rate_u";

/// Fine single-subdomain solve standing in for an unknown exact solution.
#[derive(Debug, Clone)]
pub struct Reference {
    pub mesh: MeshHierarchy,
    pub solution: DiscreteSolution,
}

/// One solved level.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub level: usize,
    pub params: LevelParams,
    pub mesh: MeshHierarchy,
    pub tau: f64,
    pub report: SolveReport,
    pub norms: Option<ErrorNorms>,
}

/// Stateful driver holding the problem and lazily built shared data.
pub struct Study {
    pub config: StudyConfig,
    pub problem: ProblemSpec,
    cell: Option<Arc<CellSolution>>,
    conductivity_cell: Option<Arc<CellSolution>>,
    reference: Option<Arc<Reference>>,
    cache_dir: Option<PathBuf>,
}

/// 64-bit FNV-1a, stable across platforms and toolchains.
fn fnv1a(text: &str) -> u64 {
    text.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl Study {
    pub fn new(config: StudyConfig) -> Result<Self> {
        let p = &config.problem;
        let problem = problem(&p.id, p.alpha, p.eps)?;
        Ok(Self {
            config,
            problem,
            cell: None,
            conductivity_cell: None,
            reference: None,
            cache_dir: None,
        })
    }

    /// Directory for cached reference solutions.
    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn mesh(&self, p: LevelParams) -> Result<MeshHierarchy> {
        let mesh = build_structured_with(Rect::UNIT, p.n_sub, p.n_seg, &[p.n_fine], self.config.mesh.diagonal)?;
        let violations = validate(&mesh);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidMesh(list.join("; ")));
        }
        Ok(mesh)
    }

    /// Builds and validates the mesh of every level.
    pub fn validate_meshes(&self) -> Result<Vec<MeshHierarchy>> {
        self.config.levels().into_iter().map(|p| self.mesh(p)).collect()
    }

    fn cell_coefficient(&self) -> Result<Arc<dyn Fn(crate::fem::Point) -> f64 + Send + Sync>> {
        match &self.problem.two_scale {
            Some(ts) => Ok(ts.cell.clone()),
            None => {
                let a = self.problem.alpha.clone();
                if !a.is_constant() {
                    return Err(Error::Config("problem has neither a cell coefficient nor a constant alpha".into()));
                }
                Ok(Arc::new(move |y| a.eval(y)))
            }
        }
    }

    /// Cell problems for the coefficient `alpha` itself.
    pub fn cell_solution(&mut self) -> Result<Arc<CellSolution>> {
        if let Some(c) = &self.cell {
            return Ok(c.clone());
        }
        let a = self.cell_coefficient()?;
        let cell = Arc::new(solve_cell_problems(|y| a(y), self.config.discretization.n_cell)?);
        self.cell = Some(cell.clone());
        Ok(cell)
    }

    /// Cell problems for the conductivity `1 / alpha`; their correctors
    /// describe the oscillation of `u`.
    pub fn conductivity_cell(&mut self) -> Result<Arc<CellSolution>> {
        if let Some(c) = &self.conductivity_cell {
            return Ok(c.clone());
        }
        let a = self.cell_coefficient()?;
        let cell = Arc::new(solve_cell_problems(|y| 1.0 / a(y), self.config.discretization.n_cell)?);
        self.conductivity_cell = Some(cell.clone());
        Ok(cell)
    }

    pub fn trace_bases(&mut self, mesh: &MeshHierarchy) -> Result<Vec<TraceBasis>> {
        let d = self.config.discretization.clone();
        match d.coarse_space {
            CoarseSpaceKind::Polynomial => Ok(mesh.skeleton_segments.iter().map(|s| polynomial_trace_basis(s, d.l)).collect()),
            CoarseSpaceKind::Multiscale => {
                let eps = self
                    .problem
                    .two_scale
                    .as_ref()
                    .map(|t| t.eps)
                    .ok_or_else(|| Error::Config("key 'discretization.coarse_space': multiscale needs a two-scale problem".into()))?;
                let cell = self.conductivity_cell()?;
                let hw = d.half_width.unwrap_or(0.5 * mesh.scales.big_h);
                mesh.skeleton_segments
                    .iter()
                    .map(|s| multiscale_trace_basis(s, d.l, cell.clone(), eps, hw))
                    .collect()
            }
        }
    }

    fn reference_params(&self) -> (usize, usize) {
        let s = &self.config.study;
        let k = self.config.discretization.k;
        let k_ref = s.reference_k.unwrap_or((k + 1).min(4));
        let n_ref = s.reference_n_fine.unwrap_or_else(|| match &self.problem.two_scale {
            Some(t) => (8.0 / t.eps - 1e-9).ceil() as usize,
            None => 4 * self.config.levels().iter().map(|p| p.n_sub * p.n_fine).max().unwrap_or(1),
        });
        (n_ref, k_ref)
    }

    fn reference_key(&self) -> String {
        let (n_ref, k_ref) = self.reference_params();
        let p = &self.config.problem;
        let key = format!("v1|{}|{:e}|{:?}|{n_ref}|{k_ref}|uniform|1", p.id, p.alpha, self.problem.two_scale.as_ref().map(|t| t.eps));
        format!("{:016x}", fnv1a(&key))
    }

    /// Reference solution, loaded from the cache directory when present.
    pub fn reference(&mut self) -> Result<Arc<Reference>> {
        if let Some(r) = &self.reference {
            return Ok(r.clone());
        }
        let (n_ref, k_ref) = self.reference_params();
        let mesh = build_structured(Rect::UNIT, 1, 1, n_ref)?;
        let path = self.cache_dir.as_ref().map(|d| d.join(format!("reference_{}.json", self.reference_key())));
        let cached = path.as_ref().and_then(|p| load_cached(p, &mesh, k_ref));
        let solution = match cached {
            Some(s) => {
                log::info!("reference loaded from cache");
                s
            }
            None => {
                log::info!("reference solve: n_fine = {n_ref}, k = {k_ref}");
                let tau = assign_tau(&mesh, TauPolicy::Uniform, 1.0)?;
                let dp = DiscreteProblem {
                    mesh: &mesh,
                    alpha: &self.problem.alpha,
                    source: Some(self.problem.source_fn()),
                    tau: &tau,
                    k: k_ref,
                    trace_bases: &[],
                    allow_underresolved: self.config.study.allow_underresolved,
                };
                let sol = solve_monolithic(&dp)?.solution;
                if let Some(p) = &path {
                    store_cached(p, &sol)?;
                }
                sol
            }
        };
        let r = Arc::new(Reference { mesh, solution });
        self.reference = Some(r.clone());
        Ok(r)
    }

    pub fn solve_level(&mut self, level: usize) -> Result<LevelRun> {
        let params = *self
            .config
            .levels()
            .get(level)
            .ok_or_else(|| Error::InvalidArgument(format!("level {level} out of range")))?;
        let mesh = self.mesh(params)?;
        let d = self.config.discretization.clone();
        let tau_value = d.tau.resolve(mesh.scales.big_h);
        let tau = assign_tau(&mesh, d.tau_policy, tau_value)?;
        let bases = self.trace_bases(&mesh)?;
        let problem = self.problem.clone();
        let dp = DiscreteProblem {
            mesh: &mesh,
            alpha: &problem.alpha,
            source: Some(problem.source_fn()),
            tau: &tau,
            k: d.k,
            trace_bases: &bases,
            allow_underresolved: self.config.study.allow_underresolved,
        };
        let report = match self.config.study.solver {
            SolverKind::TwoLevel => solve_two_level(&dp)?,
            SolverKind::Monolithic => solve_monolithic(&dp)?,
        };
        let norms = match &problem.exact {
            Some(ex) => Some(compute_errors(&report.solution, ex, &mesh, &problem.alpha)?),
            None => {
                let r = self.reference()?;
                Some(compute_errors_against(&report.solution, &mesh, &r.solution, &r.mesh, &problem.alpha)?)
            }
        };
        Ok(LevelRun {
            level,
            params,
            mesh,
            tau: tau_value,
            report,
            norms,
        })
    }
}

fn load_cached(path: &Path, mesh: &MeshHierarchy, k: usize) -> Option<DiscreteSolution> {
    let text = std::fs::read_to_string(path).ok()?;
    let sol: DiscreteSolution = serde_json::from_str(&text).ok()?;
    let np = (k + 1) * (k + 2) / 2;
    let fits = sol.k == k
        && sol.subdomains.len() == mesh.subdomains.len()
        && sol.subdomains.iter().zip(&mesh.subdomains).all(|(s, m)| s.u.len() == m.elements.len() * np);
    fits.then_some(sol)
}

fn store_cached(path: &Path, sol: &DiscreteSolution) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string(sol).map_err(|e| Error::InvalidArgument(format!("serializing reference: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RowStatus {
    Ok,
    DiagnosticsFailed,
    SolverFailed(String),
}

/// One line of the convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub scales: Option<Scales>,
    pub tau: Option<f64>,
    pub dim_coarse: Option<usize>,
    pub norms: Option<ErrorNorms>,
    pub diagnostics: Option<Diagnostics>,
    pub rate_q: Option<Rate>,
    pub rate_u: Option<Rate>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
}

fn num(v: f64) -> String {
    format!("{v:.6e}")
}

fn checked(v: f64, ok: bool) -> String {
    if ok {
        num(v)
    } else {
        format!("FAIL({})", num(v))
    }
}

impl StudyResult {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Ok)
    }

    /// Rate of the last consecutive pair.
    pub fn last_rate_q(&self) -> Option<Rate> {
        self.rows.last().and_then(|r| r.rate_q)
    }

    pub fn last_rate_u(&self) -> Option<Rate> {
        self.rows.last().and_then(|r| r.rate_u)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let mut cells = vec![r.level.to_string()];
            match &r.scales {
                Some(s) => cells.extend([num(s.big_l), num(s.big_h), num(s.h)]),
                None => cells.extend(["FAIL".into(), "FAIL".into(), "FAIL".into()]),
            }
            cells.push(r.tau.map_or("FAIL".into(), num));
            match (&r.status, r.norms, r.diagnostics) {
                (RowStatus::SolverFailed(_), _, _) => cells.extend(std::iter::repeat_n("FAIL".to_string(), 8)),
                (_, norms, Some(d)) => {
                    cells.push(r.dim_coarse.map_or(String::new(), |v| v.to_string()));
                    match norms {
                        Some(n) => cells.extend([num(n.q_alpha), num(n.q_l2), num(n.u_l2)]),
                        None => cells.extend([String::new(), String::new(), String::new()]),
                    }
                    cells.push(checked(d.jump_max, d.jump_ok()));
                    cells.push(checked(d.cons_max, d.cons_ok()));
                    let rate = |x: Option<Rate>| x.map_or(String::new(), |v| v.to_string());
                    cells.push(rate(r.rate_q));
                    cells.push(rate(r.rate_u));
                }
                _ => cells.extend(std::iter::repeat_n(String::new(), 8)),
            }
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

fn pair_rate(prev: Option<(f64, f64)>, cur: Option<(f64, f64)>) -> Option<Rate> {
    let ((e0, s0), (e1, s1)) = (prev?, cur?);
    estimate_rates(&[e0, e1], &[s0, s1]).ok().map(|r| r[0])
}

/// Runs every level in order. Solver errors abort only their own level.
pub fn run_convergence(study: &mut Study) -> Result<StudyResult> {
    let levels = study.config.levels();
    if levels.len() < 2 {
        return Err(Error::Config("a convergence study needs two or more levels".into()));
    }
    let meshes = study.validate_meshes()?;
    let rate_scale = study.config.study.rate_scale;
    let scale_of = move |s: &Scales| match rate_scale {
        RateScale::CoarseH => s.big_h,
        RateScale::FineH => s.h,
    };
    let mut rows: Vec<StudyRow> = Vec::with_capacity(levels.len());
    let mut prev: Option<(Option<(f64, f64)>, Option<(f64, f64)>)> = None;
    for (i, mesh) in meshes.iter().enumerate() {
        log::info!("level {i}: {:?}", levels[i]);
        let tau = study.config.discretization.tau.resolve(mesh.scales.big_h);
        let row = match study.solve_level(i) {
            Ok(run) => {
                let d = run.report.diagnostics;
                let s = scale_of(&mesh.scales);
                let q = run.norms.map(|n| (n.q_alpha, s));
                let u = run.norms.map(|n| (n.u_l2, s));
                let (rate_q, rate_u) = match prev {
                    Some((pq, pu)) => (pair_rate(pq, q), pair_rate(pu, u)),
                    None => (None, None),
                };
                prev = Some((q, u));
                StudyRow {
                    level: i,
                    scales: Some(mesh.scales),
                    tau: Some(run.tau),
                    dim_coarse: Some(run.report.coarse_dim),
                    norms: run.norms,
                    diagnostics: Some(d),
                    rate_q,
                    rate_u,
                    status: if d.jump_ok() && d.cons_ok() {
                        RowStatus::Ok
                    } else {
                        RowStatus::DiagnosticsFailed
                    },
                }
            }
            Err(e) => {
                log::error!("level {i} failed: {e}");
                prev = Some((None, None));
                StudyRow {
                    level: i,
                    scales: Some(mesh.scales),
                    tau: Some(tau),
                    dim_coarse: None,
                    norms: None,
                    diagnostics: None,
                    rate_q: None,
                    rate_u: None,
                    status: RowStatus::SolverFailed(e.to_string()),
                }
            }
        };
        rows.push(row);
    }
    Ok(StudyResult { rows })
}
