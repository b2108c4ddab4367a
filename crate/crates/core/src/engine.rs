//! Entropies `H(F·α)` of finite sets, by closed form where the structure of
//! the system gives one and by pattern enumeration otherwise.

use crate::error::Result;
use crate::marginals::{check_rank, normalize_set, stream_entropy};
use crate::numeric::{entropy_of_weights, EntropyValue, Weight};
use crate::systems::{MarkovSpec, System, SystemSpec};
use crate::word::{is_tree_connected, Word};
use crate::ComputeOptions;

/// Finite invariant partition to condition on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Conditioning {
    #[default]
    Trivial,
    /// The partition separating the components of a direct sum; trivial for
    /// other systems.
    Components,
}

/// How set entropies are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Closed forms where available, enumeration otherwise.
    #[default]
    Structural,
    /// Always enumerate patterns.
    Enumerate,
}

#[derive(Clone, Debug)]
pub struct EntropyEngine<'a> {
    system: &'a System,
    options: ComputeOptions,
    strategy: Strategy,
}

impl<'a> EntropyEngine<'a> {
    pub fn new(system: &'a System, options: ComputeOptions) -> Self {
        EntropyEngine {
            system,
            options,
            strategy: Strategy::Structural,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn system(&self) -> &System {
        self.system
    }

    pub fn options(&self) -> &ComputeOptions {
        &self.options
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// `H(F·α / Σ)`.
    pub fn entropy<W: Weight>(&self, set: &[Word], cond: Conditioning) -> Result<W::Entropy> {
        let set = normalize_set(set);
        check_rank(self.system, &set)?;
        if set.is_empty() {
            return Ok(W::Entropy::zero());
        }
        self.spec_entropy::<W>(&self.system.spec, &set, cond)
    }

    /// `H(A·α / B·α ∨ Σ) = H((A∪B)·α / Σ) - H(B·α / Σ)`.
    pub fn conditional<W: Weight>(&self, a: &[Word], b: &[Word], cond: Conditioning) -> Result<W::Entropy> {
        let union: Vec<Word> = a.iter().chain(b).cloned().collect();
        Ok(self.entropy::<W>(&union, cond)?.sub(&self.entropy::<W>(b, cond)?))
    }

    fn spec_entropy<W: Weight>(&self, spec: &SystemSpec, set: &[Word], cond: Conditioning) -> Result<W::Entropy> {
        let rank = self.system.rank;
        if let SystemSpec::DirectSum(d) = spec {
            if cond == Conditioning::Components || self.strategy == Strategy::Structural {
                // H(F / ξ) = Σ p_i H_i(F), and H(F) = H(τ) + H(F / ξ) for nonempty F.
                let mut total = W::Entropy::zero();
                for (w, c) in d.weights.iter().zip(&d.components) {
                    let w = W::from_rational(w);
                    if w.is_zero() {
                        continue;
                    }
                    let h = self.spec_entropy::<W>(c, set, Conditioning::Trivial)?;
                    total = total.add(&w.weigh(&h));
                }
                if cond == Conditioning::Trivial {
                    let tau: Vec<W> = d.weights.iter().map(W::from_rational).collect();
                    total = total.add(&entropy_of_weights(&tau));
                }
                return Ok(total);
            }
        }
        if self.strategy == Strategy::Structural {
            if let Some(h) = structural::<W>(spec, rank, set) {
                return Ok(h);
            }
        }
        let sys = System::unchecked(rank, spec.clone());
        stream_entropy::<W>(&sys, set, &self.options)
    }
}

/// `Σ_a π(a)·H(P(a,·))`.
fn transition_entropy<W: Weight>(m: &MarkovSpec, letter: usize) -> W::Entropy {
    let p = &m.transitions[letter];
    let mut total = W::Entropy::zero();
    for (a, row) in p.iter().enumerate() {
        let pa = W::from_rational(&m.stationary.probs[a]);
        if pa.is_zero() {
            continue;
        }
        let row: Vec<W> = row.iter().map(W::from_rational).collect();
        total = total.add(&pa.weigh(&entropy_of_weights(&row)));
    }
    total
}

/// Closed forms; `None` when the set entropy needs enumeration.
fn structural<W: Weight>(spec: &SystemSpec, rank: usize, set: &[Word]) -> Option<W::Entropy> {
    match spec {
        SystemSpec::Bernoulli(b) => {
            let h = entropy_of_weights(&b.base.weights::<W>());
            Some(h.scale(set.len() as i64, 1))
        }
        SystemSpec::CosetBernoulli(c) => {
            let reps: Vec<Word> = set.iter().map(|g| c.coset_rep(g)).collect();
            let k = normalize_set(&reps).len();
            let h = entropy_of_weights(&c.base.weights::<W>());
            Some(h.scale(k as i64, 1))
        }
        SystemSpec::Markov(m) if is_tree_connected(set) => {
            let _ = rank;
            let members: std::collections::HashSet<&Word> = set.iter().collect();
            let mut per_letter: Vec<Option<W::Entropy>> = vec![None; m.transitions.len()];
            let mut total = entropy_of_weights(&m.stationary.weights::<W>());
            for g in set {
                let Some(p) = g.prefix_parent() else { continue };
                if !members.contains(&p) {
                    continue;
                }
                let l = g.last().expect("non-identity").index();
                let h = per_letter[l].get_or_insert_with(|| transition_entropy::<W>(m, l));
                total = total.add(h);
            }
            Some(total)
        }
        _ => None,
    }
}
