//! # finv
//!
//! Exact f-invariant entropy for measure-preserving actions of finitely
//! generated free groups, restricted to systems that admit a finite
//! description: finite actions, Bernoulli and coset-Bernoulli shifts, tree
//! Markov processes, hidden-Markov factors of those, and finite direct sums.
//!
//! Every quantity is computed from Shannon entropies of the canonical
//! partition pulled back along finite subsets `F` of the group. Three
//! truncated routes to `f` are provided and can be cross-checked:
//!
//! | Route | Quantity at truncation `n` |
//! |-------|----------------------------|
//! | ball limit | `(1-2r) H(B_n) + Σ_{s∈S} H(B_n ∪ sB_n)` |
//! | sphere formula | `(1-r) H(B_n) + ½ H(B_{n+1} / B_n)` |
//! | decay series | `H(α) - ½ Σ_{1≠g∈B_R} δ(g)` |
//!
//! plus the closed forms for purely atomic systems and for direct sums
//! (ergodic decomposition identity).
//!
//! Two numeric modes are supported through the [`Weight`] trait: `f64` with
//! compensated, order-fixed summation, and exact [`Rational`] arithmetic in
//! which entropies are kept as exact linear forms in logarithms
//! ([`LogLinear`]).
//!
//! ```
//! use finv::{System, FEntropy, ComputeOptions, Rational, EntropyValue};
//!
//! let sys = System::from_toml_str(r#"
//! rank = 2
//! [system]
//! kind = "bernoulli"
//! base = { "0" = "1/2", "1" = "1/2" }
//! "#).unwrap();
//! let fe = FEntropy::new(&sys, ComputeOptions::default()).unwrap();
//! let f = fe.f_ball::<Rational>(1, finv::Conditioning::Trivial).unwrap();
//! assert!((f.to_f64() - std::f64::consts::LN_2).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod corpus;
pub mod engine;
pub mod fentropy;
pub mod marginals;
pub mod numeric;
pub mod prob;
pub mod reduce;
pub mod report;
pub mod systems;
pub mod word;

mod error;

pub use engine::{Conditioning, EntropyEngine};
pub use error::{Error, Result};
pub use fentropy::{EntropyReport, FEntropy, Route, Value};
pub use marginals::{Pattern, PatternDistribution};
pub use numeric::{EntropyValue, LogLinear, NumericMode, Rational, Weight};
pub use prob::{FiniteDistribution, LabeledPartition};
pub use reduce::ExecPolicy;
pub use systems::{System, SystemSpec};
pub use word::{Letter, LetterOrder, OrderedBall, Word};

/// Default bound on the number of elements of an enumerated ball.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

/// Default bound on the number of label patterns a single enumeration may visit.
pub const DEFAULT_PATTERN_CAP: u64 = 1 << 28;

/// Default bound for the brute-force oracle.
pub const DEFAULT_ORACLE_CAP: u64 = 1 << 20;

/// Knobs shared by every computation.
#[derive(Debug, Clone)]
pub struct ComputeOptions {
    pub order: LetterOrder,
    pub pattern_cap: u64,
    pub ball_cap: usize,
    pub policy: ExecPolicy,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        ComputeOptions {
            order: LetterOrder::Canonical,
            pattern_cap: DEFAULT_PATTERN_CAP,
            ball_cap: DEFAULT_BALL_CAP,
            policy: ExecPolicy::default(),
        }
    }
}
