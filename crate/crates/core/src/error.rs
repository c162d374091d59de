use thiserror::Error;

use crate::index::HalfInt;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnError {
    #[error("coefficient of z^{exp} requested outside the known window [{min_exp}, {trunc})")]
    OutOfWindow { exp: i64, min_exp: i64, trunc: i64 },

    #[error("argument scale must be nonzero")]
    ZeroScale,

    #[error("q-derivative parameter must be positive and different from 1, got {0}")]
    InvalidQDerivative(f64),

    #[error("deformation parameter q must be positive and different from 1, got {0}")]
    InvalidQ(f64),

    #[error("degenerate parameters: {0}")]
    DegenerateParameter(String),

    #[error("need at least {needed} samples for {count} coefficients, got {got}")]
    TooFewSamples { needed: usize, count: usize, got: usize },

    #[error("non-finite sample at z = {re}{im:+}i: singularity on the sampling circle")]
    SingularityOnCircle { re: f64, im: f64 },

    #[error("leading coefficient {magnitude:e} at declared order {order} is numerically zero")]
    WrongLeadingOrder { order: i64, magnitude: f64 },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("index {index} not available in the basis family")]
    MissingIndex { index: HalfInt },

    #[error("basis element {index} has no {what} expansion")]
    MissingSeries { index: HalfInt, what: &'static str },

    #[error("exponent law violated for {what}_{index}: {detail}")]
    ExponentLaw { what: &'static str, index: HalfInt, detail: String },

    #[error("duality residual {residual:e} at (m, n) = ({m}, {n}) exceeds {tol:e}")]
    Duality { m: HalfInt, n: HalfInt, residual: f64, tol: f64 },

    #[error("index {0} has the wrong parity for this genus")]
    IndexParity(HalfInt),

    #[error("basis file: {0}")]
    BasisFile(String),

    #[error("config: {0}")]
    Config(String),

    #[error("output: {0}")]
    Output(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<KnError>,
    },
}

impl KnError {
    pub fn context(self, context: impl Into<String>) -> Self {
        KnError::Context { context: context.into(), source: Box::new(self) }
    }

    /// Innermost error, with context layers stripped.
    pub fn root(&self) -> &KnError {
        match self {
            KnError::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, KnError>;
