//! Span programs from guess-colored decision trees.
//!
//! Pipeline: a decision tree with a coloring ([`dtree`]) yields a span
//! program ([`spanprog`]); the tree is rewritten into a decision graph whose
//! matrix has an explicitly known kernel ([`mgraph`], [`kernel`]); the
//! resulting quantum algorithm is simulated on state vectors ([`qsim`]).
//! [`problems`] holds the graph-search frontends and their classical oracles;
//! [`experiment`] and [`suite`] drive the pipeline and its self-checks.

pub mod dense;
pub mod dtree;
pub mod experiment;
pub mod fft;
pub mod kernel;
pub mod mgraph;
pub mod problems;
pub mod qsim;
pub mod report;
pub mod scalar;
pub mod sparse;
pub mod suite;
pub mod spanprog;

pub use scalar::Real;

/// Double-precision instantiations.
pub type InstanceF64 = qsim::Instance<f64>;
pub type SpanProgramF64 = spanprog::SpanProgram<f64>;
pub type NbspF64 = spanprog::Nbsp<f64>;
pub type KernelReflectorF64 = kernel::KernelReflector<f64>;

/// Single-precision instantiations.
pub type InstanceF32 = qsim::Instance<f32>;
pub type SpanProgramF32 = spanprog::SpanProgram<f32>;
pub type NbspF32 = spanprog::Nbsp<f32>;
pub type KernelReflectorF32 = kernel::KernelReflector<f32>;
