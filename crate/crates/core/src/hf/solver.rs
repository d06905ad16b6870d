use super::archive::{Snapshot, SnapshotArchive, Variability};
use super::loading::{external_force_vector, LoadingProgram};
use crate::behavior::{Law, LawResponse, MaterialState};
use crate::error::{Error, Result};
use crate::fem::{assemble_forces_and_tangent, FeBasis, GlobalIntegrationTable, WeightedPoint};
use crate::linalg::solve_lu;
use crate::mesh::Mesh;
use crate::par;
use crate::tensor::{Stiffness, SymTensor};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-5,
            max_iter: 25,
        }
    }
}

/// Residual and optional tangent at a trial point.
pub type Evaluation = (DVector<f64>, Option<DMatrix<f64>>);

/// Newton iteration on `R(x) = 0` with the relative stopping rule
/// `|R| <= tol |F_ext|` (absolute when `F_ext = 0`). `eval(x, tangent)`
/// returns the residual, plus the tangent when asked. Returns the solution,
/// the number of linear solves and the residual history.
pub fn newton_iterate<F>(
    x0: DVector<f64>,
    f_ext_norm: f64,
    opts: NewtonOptions,
    context: &str,
    mut eval: F,
) -> Result<(DVector<f64>, usize, Vec<f64>)>
where
    F: FnMut(&DVector<f64>, bool) -> Result<Evaluation>,
{
    if !(opts.tol > 0.0) {
        return Err(Error::Config("Newton tolerance must be positive".into()));
    }
    let scale = if f_ext_norm > 0.0 { f_ext_norm } else { 1.0 };
    let mut x = x0;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (r, _) = eval(&x, false)?;
        let ratio = r.norm() / scale;
        history.push(ratio);
        if !ratio.is_finite() {
            return Err(Error::NewtonDivergence { iterations, history });
        }
        if ratio <= opts.tol {
            return Ok((x, iterations, history));
        }
        if iterations == opts.max_iter {
            return Err(Error::NewtonDivergence { iterations, history });
        }
        let (r, k) = eval(&x, true)?;
        let k = k.ok_or_else(|| Error::Dimension("tangent was requested but not returned".into()))?;
        let dx = solve_lu(k, &(-r), context)?;
        x += dx;
        iterations += 1;
    }
}

/// Converged state of one time step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub u: Vec<f64>,
    pub stresses: Vec<SymTensor>,
    pub states: Vec<MaterialState>,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// High-fidelity finite-element model.
#[derive(Clone, Debug)]
pub struct HfModel {
    mesh: Mesh,
    table: GlobalIntegrationTable,
    law: Law,
    points: Vec<WeightedPoint>,
}

impl HfModel {
    pub fn new(mesh: Mesh, law: Law) -> Result<Self> {
        law.validate()?;
        let table = GlobalIntegrationTable::build(&mesh)?;
        let points = table.points().iter().enumerate().map(|(k, p)| (k, p.measure)).collect();
        Ok(HfModel {
            mesh,
            table,
            law,
            points,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn table(&self) -> &GlobalIntegrationTable {
        &self.table
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn basis(&self) -> FeBasis<'_> {
        FeBasis::new(&self.mesh, &self.table)
    }

    /// Law evaluation at every integration point for displacement `u`.
    pub fn evaluate(
        &self,
        u: &[f64],
        states: &[MaterialState],
        temperatures: &[f64],
        dt: f64,
        with_tangent: bool,
    ) -> Result<Vec<LawResponse>> {
        par::try_map_indexed(self.table.len(), |k| {
            let eps = self.table.strain(&self.mesh, u, k);
            self.law.integrate(&states[k], &eps, temperatures[k], dt, with_tangent)
        })
    }

    /// Newton solve of step `step` of `loading` from the committed `states`.
    pub fn newton_solve(
        &self,
        loading: &LoadingProgram,
        step: usize,
        states: &[MaterialState],
        u_guess: &[f64],
        opts: NewtonOptions,
    ) -> Result<StepOutcome> {
        if states.len() != self.table.len() || u_guess.len() != self.mesh.dof_count() {
            return Err(Error::Dimension("state table or initial guess does not match the mesh".into()));
        }
        let t = loading.times[step];
        let dt = loading.dt(step);
        let basis = self.basis();
        let temps = loading.ip_temperatures(&self.mesh, &self.table, t)?;
        let f_ext = DVector::from_vec(basis.restrict(&external_force_vector(&self.mesh, &self.table, loading, t)?));
        let mut last: Vec<LawResponse> = Vec::new();
        let x0 = DVector::from_vec(basis.restrict(u_guess));
        let (x, iterations, residuals) = newton_iterate(x0, f_ext.norm(), opts, "HF tangent", |x, with_tangent| {
            let u = basis.expand(x.as_slice());
            last = self.evaluate(&u, states, &temps, dt, with_tangent)?;
            let stresses: Vec<SymTensor> = last.iter().map(|r| r.stress).collect();
            let tangents: Option<Vec<Stiffness>> =
                with_tangent.then(|| last.iter().map(|r| r.tangent.unwrap_or_default()).collect());
            let (f_int, k) = assemble_forces_and_tangent(&basis, &self.points, &stresses, tangents.as_deref())?;
            Ok((f_int - &f_ext, k))
        })?;
        Ok(StepOutcome {
            u: basis.expand(x.as_slice()),
            stresses: last.iter().map(|r| r.stress).collect(),
            states: last.iter().map(|r| r.state).collect(),
            iterations,
            residuals,
        })
    }

    /// Time-marches every step of `loading` from the virgin state.
    pub fn run_transient(&self, loading: &LoadingProgram, opts: NewtonOptions) -> Result<SnapshotArchive> {
        loading.validate(&self.mesh)?;
        let mut archive = SnapshotArchive::new(self.mesh.dof_count(), self.table.len());
        let mut states = vec![MaterialState::default(); self.table.len()];
        let mut u = vec![0.0; self.mesh.dof_count()];
        for step in 0..loading.steps() {
            let out = self
                .newton_solve(loading, step, &states, &u, opts)
                .map_err(|e| e.at_step(step))?;
            log::debug!(
                "{} step {step}: {} iterations, residual {:e}",
                loading.label,
                out.iterations,
                out.residuals.last().copied().unwrap_or(0.0)
            );
            states = out.states.clone();
            u = out.u.clone();
            archive.insert(
                Variability::new(&loading.label, step),
                Snapshot::from_outcome(loading.times[step], out),
            )?;
        }
        Ok(archive)
    }
}
