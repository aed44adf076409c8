use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("geometry is not in the analytic class (max residual {max_residual:.3e})")]
    NotAnalytic { max_residual: f64 },

    #[error("invalid joint vector: {0}")]
    InvalidJoints(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("all coefficients of the characteristic cubic vanish (continuum of solutions)")]
    AllCoefficientsZero,

    #[error("both linear equations degenerate at this orientation (continuum of positions)")]
    BothEquationsDegenerate,

    #[error("linear equations are inconsistent at this orientation")]
    Inconsistent,

    #[error("tracked branch approached a singularity at step {step} (detM = {det:.3e})")]
    SingularApproach { step: usize, det: f64 },

    #[error("continuation could not follow the branch at step {step} (step fraction {step_fraction:.3e})")]
    BranchJump { step: usize, step_fraction: f64 },

    #[error("start pose is not a solution for the first waypoint (residual {residual:.3e})")]
    StartNotOnBranch { residual: f64 },

    #[error("loop crosses another singularity surface: {0}")]
    LoopCrossesOtherSurface(String),

    #[error("failed to parse geometry: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
