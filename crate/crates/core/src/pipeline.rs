//! End-to-end alignment pipeline: kernels, diffusion similarities, label
//! bridging, transport, and shared representations, with per-stage error
//! context and timing.

use std::time::Instant;

use ndarray::Array2;

use crate::bridge::{class_priors, cosine_cost, label_profile, shared_classes};
use crate::dataio::DomainDataset;
use crate::diffusion::{dpt_similarity, stationary_distribution, DptSimilarity};
use crate::embedding::{
    barycentric_projection, joint_affinity, spectral_embedding, JointAffinity, OffdiagMode,
    SharedEmbedding,
};
use crate::error::{Error, Result};
use crate::graph::{alpha_decay_kernel, diffusion_operator};
use crate::transport::{exact_assignment, sinkhorn, uniform_masses, Coupling};

/// Numeric configuration of one alignment run. Defaults follow the standard
/// working point: `alpha = 10`, `knn = 10`, hard assignment (`epsilon = 0`),
/// equal topology/correspondence weight, 10 embedding dimensions.
#[derive(Debug, Clone)]
pub struct AlignParams {
    pub alpha: f64,
    pub knn: usize,
    pub epsilon: f64,
    pub mu: f64,
    pub dim: usize,
    pub offdiag_mode: OffdiagMode,
    pub sinkhorn_tol: f64,
    pub sinkhorn_max_iter: usize,
}

impl Default for AlignParams {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            knn: 10,
            epsilon: 0.0,
            mu: 0.5,
            dim: 10,
            offdiag_mode: OffdiagMode::Wxy,
            sinkhorn_tol: crate::transport::DEFAULT_TOL,
            sinkhorn_max_iter: crate::transport::DEFAULT_MAX_ITER,
        }
    }
}

/// Which shared representation(s) to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    Spectral,
    Barycentric,
    Both,
}

impl ProjectionKind {
    pub fn wants_spectral(self) -> bool {
        matches!(self, ProjectionKind::Spectral | ProjectionKind::Both)
    }

    pub fn wants_barycentric(self) -> bool {
        matches!(self, ProjectionKind::Barycentric | ProjectionKind::Both)
    }
}

impl std::fmt::Display for ProjectionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjectionKind::Spectral => write!(f, "spectral"),
            ProjectionKind::Barycentric => write!(f, "barycentric"),
            ProjectionKind::Both => write!(f, "both"),
        }
    }
}

impl std::str::FromStr for ProjectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(ProjectionKind::Spectral),
            "barycentric" => Ok(ProjectionKind::Barycentric),
            "both" => Ok(ProjectionKind::Both),
            other => Err(Error::InvalidParameter(format!(
                "unknown projection '{other}' (expected 'spectral', 'barycentric' or 'both')"
            ))),
        }
    }
}

/// Wall time spent in one pipeline stage.
#[derive(Debug, Clone)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

/// Everything one alignment run produces.
#[derive(Debug, Clone)]
pub struct AlignmentResult {
    pub coupling: Coupling,
    pub joint: JointAffinity,
    pub spectral: Option<SharedEmbedding>,
    /// Source features mapped into the target ambient space.
    pub barycentric: Option<Array2<f64>>,
    pub timings: Vec<StageTiming>,
}

fn validate(source: &DomainDataset, target: &DomainDataset, params: &AlignParams) -> Result<()> {
    let n = source.n_samples();
    let m = target.n_samples();
    if !params.alpha.is_finite() || params.alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {}",
            params.alpha
        )));
    }
    for (side, count) in [("source", n), ("target", m)] {
        if params.knn == 0 || params.knn > count.saturating_sub(1) {
            return Err(Error::InvalidParameter(format!(
                "knn = {} out of range [1, {}] for the {side} domain",
                params.knn,
                count.saturating_sub(1)
            )));
        }
    }
    if !params.epsilon.is_finite() || params.epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be >= 0, got {}",
            params.epsilon
        )));
    }
    if params.epsilon == 0.0 && n != m {
        return Err(Error::InvalidParameter(format!(
            "epsilon = 0 (exact assignment) requires equal sample counts, got {n} and {m}; use epsilon > 0"
        )));
    }
    if !(0.0..=1.0).contains(&params.mu) {
        return Err(Error::InvalidParameter(format!(
            "mu must lie in [0, 1], got {}",
            params.mu
        )));
    }
    if params.dim == 0 || params.dim > n + m - 1 {
        return Err(Error::InvalidParameter(format!(
            "dim = {} out of range [1, {}]",
            params.dim,
            n + m - 1
        )));
    }
    Ok(())
}

fn domain_similarity(
    dataset: &DomainDataset,
    params: &AlignParams,
) -> Result<(crate::graph::AffinityMatrix, DptSimilarity)> {
    let kernel = alpha_decay_kernel(dataset, params.alpha, params.knn)?;
    let operator = diffusion_operator(&kernel);
    let stationary = stationary_distribution(&operator)?;
    let similarity = dpt_similarity(&operator, &stationary)?;
    Ok((kernel, similarity))
}

/// Run the full pipeline. Every stage validates its inputs; a failure
/// anywhere aborts with the stage name attached to the error.
pub fn align(
    source: &DomainDataset,
    target: &DomainDataset,
    params: &AlignParams,
    projection: ProjectionKind,
) -> Result<AlignmentResult> {
    validate(source, target, params).map_err(|e| e.at_stage("validate"))?;
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let lap = |timings: &mut Vec<StageTiming>, stage: &'static str, clock: &mut Instant| {
        timings.push(StageTiming {
            stage,
            seconds: clock.elapsed().as_secs_f64(),
        });
        *clock = Instant::now();
    };

    let (source_kernel, source_similarity) =
        domain_similarity(source, params).map_err(|e| e.at_stage("diffusion-source"))?;
    lap(&mut timings, "diffusion-source", &mut clock);
    let (target_kernel, target_similarity) =
        domain_similarity(target, params).map_err(|e| e.at_stage("diffusion-target"))?;
    lap(&mut timings, "diffusion-target", &mut clock);

    let cost = (|| {
        let classes = shared_classes(source.labels(), target.labels())?;
        let source_priors = class_priors(source.labels(), &classes)?;
        let target_priors = class_priors(target.labels(), &classes)?;
        let source_profile = label_profile(
            &source_similarity,
            source.labels(),
            &classes,
            &source_priors,
        )?;
        let target_profile = label_profile(
            &target_similarity,
            target.labels(),
            &classes,
            &target_priors,
        )?;
        cosine_cost(&source_profile, &target_profile)
    })()
    .map_err(|e| e.at_stage("bridge"))?;
    lap(&mut timings, "bridge", &mut clock);

    let coupling = (|| {
        if params.epsilon == 0.0 {
            exact_assignment(&cost)
        } else {
            let masses = uniform_masses(source.n_samples(), target.n_samples())?;
            sinkhorn(
                &cost,
                &masses,
                params.epsilon,
                params.sinkhorn_tol,
                params.sinkhorn_max_iter,
            )
        }
    })()
    .map_err(|e| e.at_stage("transport"))?;
    lap(&mut timings, "transport", &mut clock);

    let joint = joint_affinity(
        &source_kernel,
        &target_kernel,
        &coupling,
        params.mu,
        params.offdiag_mode,
    )
    .map_err(|e| e.at_stage("joint-affinity"))?;
    lap(&mut timings, "joint-affinity", &mut clock);

    let spectral = if projection.wants_spectral() {
        let embedding = spectral_embedding(&joint, params.dim)
            .map_err(|e| e.at_stage("spectral-embedding"))?;
        lap(&mut timings, "spectral-embedding", &mut clock);
        Some(embedding)
    } else {
        None
    };

    let barycentric = if projection.wants_barycentric() {
        let projected = barycentric_projection(&coupling, target)
            .map_err(|e| e.at_stage("barycentric-projection"))?;
        lap(&mut timings, "barycentric-projection", &mut clock);
        Some(projected)
    } else {
        None
    };

    Ok(AlignmentResult {
        coupling,
        joint,
        spectral,
        barycentric,
        timings,
    })
}
