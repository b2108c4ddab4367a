//! Finite descriptions of measure-preserving actions of the free group `F_r`,
//! each with a canonical finite generating partition.
//!
//! Conventions. The group acts on the left, `(h·x)(g) = x(h⁻¹g)`, so the
//! translate `g·α` of the identity-coordinate partition reads coordinate `g`.
//! Tree Markov measures factor over the edges `(g, g·s)`; these are preserved
//! by left translation, which is what makes the measure invariant.

mod io;
mod validate;

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{Rational, Weight};
use crate::prob::{FiniteDistribution, LabeledPartition};
use crate::word::{Letter, Word};

pub use io::{normalize_toml, parse_error_position};
pub use validate::{Tolerance, ValidationReport, Violation, ViolationKind};

/// Largest alphabet a canonical partition may have; labels are stored as bytes.
pub const MAX_ALPHABET: usize = 255;

/// A labeled probability vector kept exactly as written.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    pub labels: Vec<String>,
    pub probs: Vec<Rational>,
}

impl Categorical {
    pub fn new(pairs: impl IntoIterator<Item = (String, Rational)>) -> Self {
        let (labels, probs) = pairs.into_iter().unzip();
        Categorical { labels, probs }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Converts to a validated distribution in the target mode.
    pub fn to_distribution<W: Weight>(&self) -> Result<FiniteDistribution<W>> {
        let ws: Vec<W> = self.probs.iter().map(W::from_rational).collect();
        FiniteDistribution::new(self.labels.clone(), ws)
    }

    pub fn weights<W: Weight>(&self) -> Vec<W> {
        self.probs.iter().map(W::from_rational).collect()
    }
}

/// Row-major square matrix.
pub type Matrix = Vec<Vec<Rational>>;

/// Finitely many points permuted by the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteActionSpec {
    /// Point names and masses.
    pub mass: Categorical,
    /// `generators[i][x]` is the image of point `x` under generator `i`.
    pub generators: Vec<Vec<usize>>,
    /// Optional coarser labeling of the points; `None` means the point partition.
    pub partition: Option<Vec<String>>,
}

impl FiniteActionSpec {
    /// Image of point `x` under one letter.
    pub fn apply_letter(&self, l: Letter, x: usize) -> usize {
        let perm = &self.generators[l.generator_index()];
        if l.is_inverse() {
            perm.iter().position(|&y| y == x).expect("bijection")
        } else {
            perm[x]
        }
    }

    /// `g·x`, applying the letters of `g` from right to left.
    pub fn apply(&self, g: &Word, x: usize) -> usize {
        g.letters().iter().rev().fold(x, |y, &l| self.apply_letter(l, y))
    }

    /// Label alphabet and the label index of every point.
    pub fn point_labels(&self) -> (Vec<String>, Vec<u8>) {
        let raw: Vec<&String> = match &self.partition {
            Some(p) => p.iter().collect(),
            None => self.mass.labels.iter().collect(),
        };
        let mut alphabet: Vec<String> = Vec::new();
        let idx = raw
            .iter()
            .map(|l| match alphabet.iter().position(|a| a == *l) {
                Some(i) => i as u8,
                None => {
                    alphabet.push((*l).clone());
                    (alphabet.len() - 1) as u8
                }
            })
            .collect();
        (alphabet, idx)
    }
}

/// I.i.d. labels on the group elements.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliSpec {
    pub base: Categorical,
}

/// A tree Markov measure: stationary law `π` and one transition matrix per
/// letter, indexed by [`Letter::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSpec {
    pub stationary: Categorical,
    pub transitions: Vec<Matrix>,
}

impl MarkovSpec {
    pub fn states(&self) -> &[String] {
        &self.stationary.labels
    }

    pub fn transition(&self, l: Letter) -> &Matrix {
        &self.transitions[l.index()]
    }

    /// The Bernoulli measure viewed as a Markov measure with constant rows.
    pub fn from_bernoulli(b: &BernoulliSpec, rank: usize) -> MarkovSpec {
        let row = b.base.probs.clone();
        let m: Matrix = vec![row; b.base.len()];
        MarkovSpec {
            stationary: b.base.clone(),
            transitions: vec![m; 2 * rank],
        }
    }

    /// Builds from `π` and the matrices of the generators `a, b, …`; inverse
    /// letters get the adjoint matrices.
    pub fn from_forward(stationary: Categorical, forward: Vec<Matrix>) -> MarkovSpec {
        let mut transitions = Vec::with_capacity(2 * forward.len());
        for p in forward {
            let back = Self::adjoint(&stationary.probs, &p);
            transitions.push(p);
            transitions.push(back);
        }
        MarkovSpec {
            stationary,
            transitions,
        }
    }

    /// Fills `P_{s⁻¹}` from `P_s` by `π(b)·P_{s⁻¹}(b,a) = π(a)·P_s(a,b)`;
    /// rows of null states become identity rows.
    pub fn adjoint(stationary: &[Rational], p: &Matrix) -> Matrix {
        let n = stationary.len();
        (0..n)
            .map(|b| {
                (0..n)
                    .map(|a| {
                        if stationary[b] == Rational::from_integer(0.into()) {
                            if a == b {
                                Rational::from_integer(1.into())
                            } else {
                                Rational::from_integer(0.into())
                            }
                        } else {
                            &stationary[a] * &p[a][b] / &stationary[b]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// A factor of a Markov or Bernoulli system through a map on inner states.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenMarkovSpec {
    pub inner: Box<SystemSpec>,
    /// Observed label index of each inner state.
    pub letter_map: Vec<usize>,
    pub observed: Vec<String>,
}

impl HiddenMarkovSpec {
    /// The inner process as a Markov spec.
    pub fn inner_markov(&self, rank: usize) -> MarkovSpec {
        match &*self.inner {
            SystemSpec::Markov(m) => m.clone(),
            SystemSpec::Bernoulli(b) => MarkovSpec::from_bernoulli(b, rank),
            _ => unreachable!("validated hidden-Markov inner system"),
        }
    }
}

/// A finite mixture of systems living on disjoint labeled copies.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectSumSpec {
    pub weights: Vec<Rational>,
    pub components: Vec<SystemSpec>,
}

/// I.i.d. labels on the left cosets of the cyclic subgroup `⟨t⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetBernoulliSpec {
    pub base: Categorical,
    pub marked: Letter,
}

impl CosetBernoulliSpec {
    /// Shortlex-least representative of `g⟨t⟩`: strip trailing `t^{±1}`.
    pub fn coset_rep(&self, g: &Word) -> Word {
        let letters = g.letters();
        let keep = letters
            .iter()
            .rposition(|l| l.generator_index() != self.marked.generator_index())
            .map_or(0, |i| i + 1);
        Word::from_letters(letters[..keep].iter().copied())
    }
}

/// One of the supported system descriptions.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    FiniteAction(FiniteActionSpec),
    Bernoulli(BernoulliSpec),
    Markov(MarkovSpec),
    HiddenMarkov(HiddenMarkovSpec),
    DirectSum(DirectSumSpec),
    CosetBernoulli(CosetBernoulliSpec),
}

impl SystemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SystemSpec::FiniteAction(_) => "finite-action",
            SystemSpec::Bernoulli(_) => "bernoulli",
            SystemSpec::Markov(_) => "markov",
            SystemSpec::HiddenMarkov(_) => "hidden-markov",
            SystemSpec::DirectSum(_) => "direct-sum",
            SystemSpec::CosetBernoulli(_) => "coset-bernoulli",
        }
    }

    /// Label alphabet of the canonical partition.
    pub fn alphabet(&self) -> Vec<String> {
        match self {
            SystemSpec::FiniteAction(fa) => fa.point_labels().0,
            SystemSpec::Bernoulli(b) => b.base.labels.clone(),
            SystemSpec::CosetBernoulli(c) => c.base.labels.clone(),
            SystemSpec::Markov(m) => m.stationary.labels.clone(),
            SystemSpec::HiddenMarkov(h) => h.observed.clone(),
            SystemSpec::DirectSum(d) => d
                .components
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.alphabet().into_iter().map(move |l| format!("{i}:{l}")))
                .collect(),
        }
    }

    /// Whether `δ(g) = 0` for `|g| ≥ 2` holds by construction, so that
    /// truncations at radius one are already exact.
    pub fn markov_structured(&self) -> bool {
        match self {
            SystemSpec::Bernoulli(_)
            | SystemSpec::Markov(_)
            | SystemSpec::CosetBernoulli(_)
            | SystemSpec::FiniteAction(_) => true,
            SystemSpec::HiddenMarkov(_) => false,
            SystemSpec::DirectSum(d) => d.components.iter().all(|c| c.markov_structured()),
        }
    }

    /// Whether computing entropies requires enumerating hidden states.
    pub fn needs_enumeration(&self) -> bool {
        match self {
            SystemSpec::HiddenMarkov(_) => true,
            SystemSpec::DirectSum(d) => d.components.iter().any(|c| c.needs_enumeration()),
            _ => false,
        }
    }
}

/// The canonical partition: its label alphabet, and for finite actions the
/// labeling of the points.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPartition {
    pub alphabet: Vec<String>,
    pub points: Option<LabeledPartition>,
    pub description: String,
}

/// A system together with the rank of the acting free group.
#[derive(Clone, Debug, PartialEq)]
pub struct System {
    pub rank: usize,
    pub spec: SystemSpec,
}

impl System {
    pub fn new(rank: usize, spec: SystemSpec) -> Result<System> {
        let sys = System { rank, spec };
        let report = sys.validate(Tolerance::Exact);
        if !report.is_ok() {
            return Err(Error::Validation(report));
        }
        Ok(sys)
    }

    /// Builds without validation; useful for reporting on invalid input.
    pub fn unchecked(rank: usize, spec: SystemSpec) -> System {
        System { rank, spec }
    }

    pub fn from_toml_str(src: &str) -> Result<System> {
        let sys = io::parse(src)?;
        let report = sys.validate(Tolerance::Exact);
        if !report.is_ok() {
            return Err(Error::Validation(report));
        }
        Ok(sys)
    }

    /// Parses without validating.
    pub fn parse_toml(src: &str) -> Result<System> {
        io::parse(src)
    }

    pub fn to_toml_string(&self) -> String {
        io::render(self)
    }

    pub fn validate(&self, tol: Tolerance) -> ValidationReport {
        validate::validate(self, tol)
    }

    pub fn canonical_partition(&self) -> Result<CanonicalPartition> {
        let alphabet = self.spec.alphabet();
        let (points, description) = match &self.spec {
            SystemSpec::FiniteAction(fa) => {
                let (_, idx) = fa.point_labels();
                let part = LabeledPartition::from_labels(idx.iter().copied());
                if let Err(msg) = validate::check_generating(fa, self.rank) {
                    return Err(Error::NotGenerating(msg));
                }
                let d = if fa.partition.is_some() {
                    "user partition of the points"
                } else {
                    "point partition"
                };
                (Some(part), d.to_string())
            }
            SystemSpec::Bernoulli(_) | SystemSpec::CosetBernoulli(_) | SystemSpec::Markov(_) => {
                (None, "label of the identity coordinate".to_string())
            }
            SystemSpec::HiddenMarkov(_) => (None, "observed label of the identity coordinate".into()),
            SystemSpec::DirectSum(_) => (None, "(component, label) pairs".into()),
        };
        Ok(CanonicalPartition {
            alphabet,
            points,
            description,
        })
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} system, rank {}", self.spec.kind(), self.rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parse_rational;

    #[test]
    fn coset_representatives() {
        let c = CosetBernoulliSpec {
            base: Categorical::new([("0".into(), parse_rational("1").unwrap())]),
            marked: Letter::generator(0, false),
        };
        let w = |s: &str| s.parse::<Word>().unwrap();
        assert_eq!(c.coset_rep(&w("a")), Word::identity());
        assert_eq!(c.coset_rep(&w("baa")), w("b"));
        assert_eq!(c.coset_rep(&w("ab")), w("ab"));
        assert_eq!(c.coset_rep(&w("bA")), w("b"));
    }

    #[test]
    fn finite_action_apply() {
        let fa = FiniteActionSpec {
            mass: Categorical::new((0..3).map(|i| (i.to_string(), parse_rational("1/3").unwrap()))),
            generators: vec![vec![1, 2, 0], vec![0, 1, 2]],
            partition: None,
        };
        let a = "a".parse::<Word>().unwrap();
        let aa_inv = "AA".parse::<Word>().unwrap();
        assert_eq!(fa.apply(&a, 0), 1);
        assert_eq!(fa.apply(&aa_inv, 0), 1);
    }
}
