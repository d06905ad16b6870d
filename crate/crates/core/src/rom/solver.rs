use super::model::{Quantity, ReducedModel};
use crate::behavior::{LawResponse, MaterialState};
use crate::error::Result;
use crate::fem::{assemble_forces_and_tangent, NodalL2};
use crate::hf::{external_force_vector, newton_iterate, HfModel, LoadingProgram, NewtonOptions, Snapshot};
use crate::par;
use crate::tensor::{Stiffness, SymTensor};
use nalgebra::DVector;

/// Reduced external forces `psi^T F_ext`.
pub fn project_online_loading(hf: &HfModel, loading: &LoadingProgram, t: f64, model: &ReducedModel) -> Result<DVector<f64>> {
    let f = external_force_vector(hf.mesh(), hf.table(), loading, t)?;
    Ok(DVector::from_iterator(
        model.n(),
        model.primal.modes.iter().map(|m| m.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>()),
    ))
}

/// Committed reduced state: coefficients and one material state per union
/// point.
#[derive(Clone, Debug, PartialEq)]
pub struct RomState {
    pub u_hat: DVector<f64>,
    pub states: Vec<MaterialState>,
}

impl RomState {
    pub fn zero(model: &ReducedModel) -> Self {
        RomState {
            u_hat: DVector::zeros(model.n()),
            states: vec![MaterialState::default(); model.union_points.len()],
        }
    }

    /// State taken from an HF snapshot: L2 projection of the displacement
    /// and the HF material states at the union points.
    pub fn from_snapshot(hf: &HfModel, model: &ReducedModel, snap: &Snapshot) -> Self {
        let ip = NodalL2::new(hf.mesh(), hf.table());
        RomState {
            u_hat: DVector::from_vec(model.primal.project(&snap.u, &ip)),
            states: model.union_points.iter().map(|&k| snap.states[k]).collect(),
        }
    }
}

/// Converged reduced step: new state and law outputs at the union points.
#[derive(Clone, Debug)]
pub struct RomStep {
    pub state: RomState,
    pub stresses: Vec<SymTensor>,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Reduced Newton solve of step `step`: tangent and residual assembled with
/// the reduced quadrature; the law is then evaluated at the remaining
/// union points with the converged coefficients.
pub fn reduced_newton(
    hf: &HfModel,
    model: &ReducedModel,
    loading: &LoadingProgram,
    step: usize,
    state: &RomState,
    opts: NewtonOptions,
) -> Result<RomStep> {
    let t = loading.times[step];
    let dt = loading.dt(step);
    let (mesh, table, law) = (hf.mesh(), hf.table(), hf.law());
    let nodal_t = loading.temperature(t)?;
    let temps: Vec<f64> = model
        .union_points
        .iter()
        .map(|&k| table.interpolate_scalar(mesh, &nodal_t, k))
        .collect();
    let f_ext = project_online_loading(hf, loading, t, model)?;
    let eval_at = |positions: &[usize], x: &DVector<f64>, tangent: bool| -> Result<Vec<LawResponse>> {
        par::try_map_indexed(positions.len(), |j| {
            let u = positions[j];
            let eps = model.strains.combine(model.union_points[u], x.as_slice());
            law.integrate(&state.states[u], &eps, temps[u], dt, tangent)
        })
    };
    let mut last: Vec<LawResponse> = Vec::new();
    let (x, iterations, residuals) = newton_iterate(
        state.u_hat.clone(),
        f_ext.norm(),
        opts,
        "reduced tangent",
        |x, with_tangent| {
            last = eval_at(&model.quad_pos, x, with_tangent)?;
            let stresses: Vec<SymTensor> = last.iter().map(|r| r.stress).collect();
            let tangents: Option<Vec<Stiffness>> =
                with_tangent.then(|| last.iter().map(|r| r.tangent.unwrap_or_default()).collect());
            let (f_int, k) = assemble_forces_and_tangent(&model.strains, &model.quad_points, &stresses, tangents.as_deref())?;
            Ok((f_int - &f_ext, k))
        },
    )?;
    let mut is_quad = vec![false; model.union_points.len()];
    model.quad_pos.iter().for_each(|&p| is_quad[p] = true);
    let others: Vec<usize> = (0..model.union_points.len()).filter(|&p| !is_quad[p]).collect();
    let extra = eval_at(&others, &x, false)?;
    let mut responses: Vec<Option<LawResponse>> = vec![None; model.union_points.len()];
    for (&p, r) in model.quad_pos.iter().zip(last) {
        responses[p] = Some(r);
    }
    for (&p, r) in others.iter().zip(extra) {
        responses[p] = Some(r);
    }
    let responses: Vec<LawResponse> = responses.into_iter().map(|r| r.expect("every union point evaluated")).collect();
    Ok(RomStep {
        state: RomState {
            u_hat: x,
            states: responses.iter().map(|r| r.state).collect(),
        },
        stresses: responses.iter().map(|r| r.stress).collect(),
        iterations,
        residuals,
    })
}

/// Law values, Gappy reconstruction at the points and full field of one
/// dual quantity at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct DualRecord {
    pub points: Vec<usize>,
    /// Law evaluations at the points.
    pub hat: Vec<f64>,
    /// Reconstruction at the points.
    pub tilde: Vec<f64>,
    /// Reconstructed field at every integration point.
    pub field: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RomStepRecord {
    pub time: f64,
    pub iterations: usize,
    pub u_hat: Vec<f64>,
    /// Reconstructed displacement on all dofs.
    pub u: Vec<f64>,
    /// Indexed like [`Quantity::ALL`].
    pub duals: Vec<DualRecord>,
    /// The step was replaced by the HF reference.
    pub enriched: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RomSolution {
    pub label: String,
    pub steps: Vec<RomStepRecord>,
}

/// Gappy reconstruction of every dual quantity from a converged step.
pub fn reconstruct_step(model: &ReducedModel, time: f64, step: &RomStep) -> Result<RomStepRecord> {
    let mut duals = Vec::with_capacity(Quantity::ALL.len());
    for q in Quantity::ALL {
        let g = model.dual(q);
        let hat: Vec<f64> = model
            .dual_positions(q)
            .iter()
            .map(|&p| q.value(&step.stresses[p], &step.state.states[p]))
            .collect();
        let z = g.coefficients(&hat)?;
        duals.push(DualRecord {
            points: g.points.clone(),
            tilde: g.at_points(&z),
            field: g.field(&z),
            hat,
        });
    }
    Ok(RomStepRecord {
        time,
        iterations: step.iterations,
        u_hat: step.state.u_hat.as_slice().to_vec(),
        u: model.primal.reconstruct(step.state.u_hat.as_slice()),
        duals,
        enriched: false,
    })
}

/// Record of a step replaced by an HF snapshot: the law values and their
/// reconstruction are the HF values themselves.
pub fn hf_step_record(model: &ReducedModel, snap: &Snapshot, u_hat: &DVector<f64>) -> RomStepRecord {
    let duals = Quantity::ALL
        .iter()
        .map(|&q| {
            let field = q.field(snap);
            let points = model.dual(q).points.clone();
            let hat: Vec<f64> = points.iter().map(|&k| field[k]).collect();
            DualRecord {
                points,
                tilde: hat.clone(),
                hat,
                field,
            }
        })
        .collect();
    RomStepRecord {
        time: snap.time,
        iterations: 0,
        u_hat: u_hat.as_slice().to_vec(),
        u: snap.u.clone(),
        duals,
        enriched: true,
    }
}

/// Marches every step of `loading` with the reduced model from rest.
pub fn run_rom_transient(
    hf: &HfModel,
    model: &ReducedModel,
    loading: &LoadingProgram,
    opts: NewtonOptions,
) -> Result<RomSolution> {
    loading.validate(hf.mesh())?;
    let mut state = RomState::zero(model);
    let mut solution = RomSolution {
        label: loading.label.clone(),
        steps: Vec::with_capacity(loading.steps()),
    };
    for step in 0..loading.steps() {
        let out = reduced_newton(hf, model, loading, step, &state, opts).map_err(|e| e.at_step(step))?;
        solution
            .steps
            .push(reconstruct_step(model, loading.times[step], &out).map_err(|e| e.at_step(step))?);
        state = out.state;
    }
    Ok(solution)
}

impl RomSolution {
    pub fn enrichments(&self) -> usize {
        self.steps.iter().filter(|s| s.enriched).count()
    }
}
