//! Finite distributions, labeled partitions of a finite sample space, and
//! Shannon entropy of partitions and their joins.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::numeric::{entropy_of_weights, EntropyAccumulator, EntropyValue, Rational, Weight};

/// A probability vector over named labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution<W> {
    labels: Vec<String>,
    weights: Vec<W>,
}

impl<W: Weight> FiniteDistribution<W> {
    /// Validates nonnegativity, distinct labels, and normalization.
    pub fn new(labels: Vec<String>, weights: Vec<W>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidDistribution(format!("duplicate label {l:?}")));
            }
        }
        if let Some((l, w)) = labels.iter().zip(&weights).find(|(_, w)| w.is_negative()) {
            return Err(Error::InvalidDistribution(format!(
                "negative weight {} on {l:?}",
                w.render()
            )));
        }
        if !W::sums_to_one(&weights) {
            return Err(Error::InvalidDistribution(format!(
                "weights do not sum to 1 ({} mode)",
                W::mode_name()
            )));
        }
        Ok(FiniteDistribution { labels, weights })
    }

    /// Builds from exact rationals, converting to the target mode.
    pub fn from_rationals(labels: Vec<String>, weights: &[Rational]) -> Result<Self> {
        // Validate exactly first so float conversion cannot hide a bad sum.
        FiniteDistribution::<Rational>::new(labels.clone(), weights.to_vec())?;
        Ok(FiniteDistribution {
            labels,
            weights: weights.iter().map(W::from_rational).collect(),
        })
    }

    /// Unnamed distribution labeled `0..n`.
    pub fn from_weights(weights: Vec<W>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight_of(&self, label: &str) -> Option<&W> {
        self.labels.iter().position(|l| l == label).map(|i| &self.weights[i])
    }
}

/// Shannon entropy in nats; zero weights are skipped.
pub fn shannon<W: Weight>(d: &FiniteDistribution<W>) -> W::Entropy {
    entropy_of_weights(d.weights())
}

/// A partition of the sample space `0..n`; block ids are assigned in order of
/// first appearance so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledPartition {
    blocks: Vec<u32>,
    count: u32,
}

impl LabeledPartition {
    /// Builds the partition whose blocks are the fibers of `labeling`.
    pub fn from_labels<T: Hash + Eq>(labeling: impl IntoIterator<Item = T>) -> Self {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let blocks = labeling
            .into_iter()
            .map(|t| {
                let next = ids.len() as u32;
                *ids.entry(t).or_insert(next)
            })
            .collect();
        LabeledPartition {
            blocks,
            count: ids.len() as u32,
        }
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_labels(std::iter::repeat_n(0u8, n))
    }

    pub fn discrete(n: usize) -> Self {
        Self::from_labels(0..n)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.count as usize
    }

    pub fn block_of(&self, point: usize) -> u32 {
        self.blocks[point]
    }

    pub fn join(&self, other: &LabeledPartition) -> Result<LabeledPartition> {
        check_len(self.len(), other.len())?;
        Ok(Self::from_labels(self.blocks.iter().zip(&other.blocks)))
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &LabeledPartition) -> bool {
        self.len() == other.len() && self.join(other).map(|j| j.count == self.count).unwrap_or(false)
    }

    fn masses<W: Weight>(&self, mu: &FiniteDistribution<W>) -> Result<Vec<W>> {
        check_len(self.len(), mu.len())?;
        let mut out = vec![W::zero(); self.block_count()];
        for (b, w) in self.blocks.iter().zip(mu.weights()) {
            out[*b as usize] = out[*b as usize].add(w);
        }
        Ok(out)
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::MismatchedSpaces(a, b));
    }
    Ok(())
}

/// `H(α)`.
pub fn partition_entropy<W: Weight>(
    alpha: &LabeledPartition,
    mu: &FiniteDistribution<W>,
) -> Result<W::Entropy> {
    Ok(entropy_of_weights(&alpha.masses(mu)?))
}

/// `H(α ∨ β)`.
pub fn joint_entropy<W: Weight>(
    alpha: &LabeledPartition,
    beta: &LabeledPartition,
    mu: &FiniteDistribution<W>,
) -> Result<W::Entropy> {
    partition_entropy(&alpha.join(beta)?, mu)
}

/// `H(α / β) = H(α ∨ β) - H(β)`.
pub fn conditional<W: Weight>(
    alpha: &LabeledPartition,
    beta: &LabeledPartition,
    mu: &FiniteDistribution<W>,
) -> Result<W::Entropy> {
    Ok(joint_entropy(alpha, beta, mu)?.sub(&partition_entropy(beta, mu)?))
}

/// `Σ_C μ(C) · H_{μ_C}(α)` over the blocks `C` of a finite invariant
/// partition `ξ`, computed block by block from the conditional measures.
pub fn conditional_on_invariant<W: Weight>(
    alpha: &LabeledPartition,
    xi: &LabeledPartition,
    mu: &FiniteDistribution<W>,
) -> Result<W::Entropy> {
    check_len(alpha.len(), mu.len())?;
    let xi_mass = xi.masses(mu)?;
    let mut per_block: Vec<HashMap<u32, W>> = vec![HashMap::new(); xi.block_count()];
    for (i, w) in mu.weights().iter().enumerate() {
        let slot = per_block[xi.block_of(i) as usize]
            .entry(alpha.block_of(i))
            .or_insert_with(W::zero);
        *slot = slot.add(w);
    }
    let mut total = W::Entropy::zero();
    for (mass, cells) in xi_mass.iter().zip(per_block) {
        if mass.is_zero() {
            continue;
        }
        let mut keys: Vec<_> = cells.into_iter().collect();
        keys.sort_by_key(|(k, _)| *k);
        let mut acc = W::Acc::default();
        for (_, w) in &keys {
            acc.push(&w.div(mass));
        }
        total = total.add(&mass.weigh(&acc.finish()));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{parse_rational, LogLinear};

    fn rats(xs: &[&str]) -> Vec<Rational> {
        xs.iter().map(|s| parse_rational(s).unwrap()).collect()
    }

    #[test]
    fn shannon_examples() {
        let d = FiniteDistribution::<Rational>::from_weights(rats(&["1/2", "1/2"])).unwrap();
        assert_eq!(shannon(&d), LogLinear::ln(&parse_rational("2").unwrap()));
        let d = FiniteDistribution::<f64>::from_weights(vec![1.0]).unwrap();
        assert_eq!(shannon(&d), 0.0);
        let d = FiniteDistribution::<f64>::from_weights(vec![0.5, 0.25, 0.25, 0.0]).unwrap();
        assert!((shannon(&d) - 1.5 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(FiniteDistribution::<Rational>::from_weights(rats(&["1/2", "1/3"])).is_err());
        assert!(FiniteDistribution::<Rational>::from_weights(rats(&["3/2", "-1/2"])).is_err());
        assert!(FiniteDistribution::<f64>::from_weights(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(FiniteDistribution::<f64>::from_weights(vec![0.5, 0.5 + 1e-9]).is_err());
    }

    #[test]
    fn conditional_examples() {
        // Two independent uniform bits on four points.
        let mu = FiniteDistribution::<Rational>::from_weights(rats(&["1/4"; 4])).unwrap();
        let a = LabeledPartition::from_labels([0, 0, 1, 1]);
        let b = LabeledPartition::from_labels([0, 1, 0, 1]);
        let ln2 = LogLinear::ln(&parse_rational("2").unwrap());
        assert!(conditional(&a, &a, &mu).unwrap().is_zero());
        assert_eq!(conditional(&a, &b, &mu).unwrap(), ln2);
        assert_eq!(conditional_on_invariant(&a, &b, &mu).unwrap(), ln2);
        assert!(conditional_on_invariant(&a, &a, &mu).unwrap().is_zero());
        let triv = LabeledPartition::trivial(4);
        assert_eq!(
            conditional_on_invariant(&a, &triv, &mu).unwrap(),
            partition_entropy(&a, &mu).unwrap()
        );
    }

    #[test]
    fn mismatched_spaces() {
        let mu = FiniteDistribution::<f64>::from_weights(vec![0.5, 0.5]).unwrap();
        let a = LabeledPartition::discrete(3);
        assert!(matches!(
            partition_entropy(&a, &mu),
            Err(Error::MismatchedSpaces(3, 2))
        ));
    }

    #[test]
    fn refinement() {
        let a = LabeledPartition::from_labels([0, 1, 2, 2]);
        let b = LabeledPartition::from_labels(["x", "x", "y", "y"]);
        assert!(a.refines(&b));
        assert!(!b.refines(&a));
    }
}
