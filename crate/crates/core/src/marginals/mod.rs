//! Joint laws of the canonical partition over finite subsets of the group.
//!
//! A pattern on a finite set `F` (kept sorted) assigns one label index to each
//! element of `F`; its probability is the measure of `⋂_{g∈F} g·A_g`.

mod oracle;
mod tree;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::numeric::{entropy_of_weights, EntropyAccumulator, EntropyValue, Weight};
use crate::systems::{MarkovSpec, System, SystemSpec};
use crate::word::{format_set, is_tree_connected, prefix_hull, Word};
use crate::ComputeOptions;

pub use oracle::oracle_marginal;
pub(crate) use tree::PatternSink;

/// Label indices, one per element of the support.
pub type Pattern = Box<[u8]>;

/// Exact joint law of the labels on a finite set.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternDistribution<W> {
    support: Vec<Word>,
    labels: Vec<String>,
    probs: BTreeMap<Pattern, W>,
}

impl<W: Weight> PatternDistribution<W> {
    pub(crate) fn from_parts(support: Vec<Word>, labels: Vec<String>, probs: BTreeMap<Pattern, W>) -> Self {
        PatternDistribution {
            support,
            labels,
            probs,
        }
    }

    pub fn support(&self) -> &[Word] {
        &self.support
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &BTreeMap<Pattern, W> {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> W {
        self.probs.values().fold(W::zero(), |a, b| a.add(b))
    }

    pub fn prob(&self, pattern: &[u8]) -> W {
        self.probs.get(pattern).cloned().unwrap_or_else(W::zero)
    }

    /// Marginal on a subset of the support.
    pub fn restrict(&self, subset: &[Word]) -> Result<PatternDistribution<W>> {
        let sub = normalize_set(subset);
        let idx = sub
            .iter()
            .map(|g| {
                self.support
                    .binary_search(g)
                    .map_err(|_| Error::NotSubset(format_set(&sub)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut probs: BTreeMap<Pattern, W> = BTreeMap::new();
        for (pat, p) in &self.probs {
            let key: Pattern = idx.iter().map(|&i| pat[i]).collect();
            let slot = probs.entry(key).or_insert_with(W::zero);
            *slot = slot.add(p);
        }
        Ok(PatternDistribution {
            support: sub,
            labels: self.labels.clone(),
            probs,
        })
    }

    /// `H(F·α)`.
    pub fn entropy(&self) -> W::Entropy {
        entropy_of_weights(self.probs.values())
    }

    /// `H(F·α / F'·α) = H(F·α) - H(F'·α)` for `F' ⊆ F`.
    pub fn conditional_between(&self, subset: &[Word]) -> Result<W::Entropy> {
        Ok(self.entropy().sub(&self.restrict(subset)?.entropy()))
    }

    /// Renders a pattern as a label string; labels are concatenated when all
    /// are single characters and comma-separated otherwise.
    pub fn pattern_string(&self, pattern: &[u8]) -> String {
        let short = self.labels.iter().all(|l| l.chars().count() == 1);
        let parts: Vec<&str> = pattern.iter().map(|&i| self.labels[i as usize].as_str()).collect();
        if short {
            parts.concat()
        } else {
            parts.join(",")
        }
    }

    /// One `label-string probability` line per pattern, sorted.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .probs
            .iter()
            .map(|(k, p)| format!("{} {}", self.pattern_string(k), p.render()))
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

/// `H(F·α)` for a materialized distribution.
pub fn entropy_of<W: Weight>(pd: &PatternDistribution<W>) -> W::Entropy {
    pd.entropy()
}

/// Sorted, deduplicated copy of a set.
pub fn normalize_set(set: &[Word]) -> Vec<Word> {
    let s: BTreeSet<Word> = set.iter().cloned().collect();
    s.into_iter().collect()
}

pub(crate) fn check_rank(sys: &System, set: &[Word]) -> Result<()> {
    if let Some(g) = set.iter().find(|g| g.min_rank() > sys.rank) {
        return Err(Error::RankMismatch(format!("{g} uses a generator beyond rank {}", sys.rank)));
    }
    Ok(())
}

fn tree_factorized(spec: &SystemSpec) -> bool {
    match spec {
        SystemSpec::Markov(_) | SystemSpec::HiddenMarkov(_) => true,
        SystemSpec::DirectSum(d) => d.components.iter().any(tree_factorized),
        _ => false,
    }
}

/// Rejects sets on which tree factorization does not apply, naming the hull.
pub fn require_connected(sys: &System, set: &[Word]) -> Result<()> {
    if tree_factorized(&sys.spec) && !is_tree_connected(set) {
        let hull = prefix_hull(set);
        return Err(Error::Disconnected {
            hull_size: hull.len(),
            hull: format_set(&hull),
        });
    }
    Ok(())
}

/// Exact joint law of the canonical partition on `set`.
///
/// Markov-type systems are factorized along the right Cayley tree, which
/// requires `set` to span a connected subtree; other sets are rejected with
/// the hull that would make them valid.
pub fn marginal<W: Weight>(
    sys: &System,
    set: &[Word],
    opts: &ComputeOptions,
) -> Result<PatternDistribution<W>> {
    let support = normalize_set(set);
    check_rank(sys, &support)?;
    require_connected(sys, &support)?;
    let sink = stream(sys, &support, opts, MapSink::default())?;
    Ok(PatternDistribution {
        support,
        labels: sys.spec.alphabet(),
        probs: sink.map,
    })
}

/// `H(F·α)` by streaming every pattern of positive probability. Vertices of
/// the hull outside `set` are summed out, so any finite set is accepted.
pub fn stream_entropy<W: Weight>(sys: &System, set: &[Word], opts: &ComputeOptions) -> Result<W::Entropy> {
    let support = normalize_set(set);
    check_rank(sys, &support)?;
    if support.is_empty() {
        return Ok(W::Entropy::zero());
    }
    let sink = stream(sys, &support, opts, EntropySink::<W>::default())?;
    Ok(sink.acc.finish())
}

pub(crate) struct MapSink<W> {
    pub(crate) map: BTreeMap<Pattern, W>,
}

impl<W> Default for MapSink<W> {
    fn default() -> Self {
        MapSink { map: BTreeMap::new() }
    }
}

impl<W: Weight> PatternSink<W> for MapSink<W> {
    const NEEDS_PATTERN: bool = true;

    fn accept(&mut self, pattern: &[u8], p: &W) {
        match self.map.get_mut(pattern) {
            Some(slot) => *slot = slot.add(p),
            None => {
                self.map.insert(pattern.into(), p.clone());
            }
        }
    }

    fn fresh(&self) -> Self {
        MapSink { map: BTreeMap::new() }
    }

    fn merge(&mut self, other: Self) {
        for (k, v) in other.map {
            self.accept(&k, &v);
        }
    }
}

pub(crate) struct EntropySink<W: Weight> {
    acc: W::Acc,
}

impl<W: Weight> Default for EntropySink<W> {
    fn default() -> Self {
        EntropySink { acc: W::Acc::default() }
    }
}

impl<W: Weight> PatternSink<W> for EntropySink<W> {
    const NEEDS_PATTERN: bool = false;

    fn accept(&mut self, _pattern: &[u8], p: &W) {
        self.acc.push(p);
    }

    fn fresh(&self) -> Self {
        Self::default()
    }

    fn merge(&mut self, other: Self) {
        self.acc.merge(other.acc);
    }
}

pub(crate) fn stream<W: Weight, S: PatternSink<W>>(
    sys: &System,
    support: &[Word],
    opts: &ComputeOptions,
    sink: S,
) -> Result<S> {
    walk(&sys.spec, sys.rank, support, opts, &W::one(), 0, sink)
}

fn walk<W: Weight, S: PatternSink<W>>(
    spec: &SystemSpec,
    rank: usize,
    support: &[Word],
    opts: &ComputeOptions,
    scale: &W,
    offset: u8,
    mut sink: S,
) -> Result<S> {
    let identity = |n: usize| (0..n).map(|i| offset + i as u8).collect::<Vec<u8>>();
    match spec {
        SystemSpec::Bernoulli(b) => {
            let m = MarkovSpec::from_bernoulli(b, rank);
            let model = tree::TreeModel::new(&m, &identity(b.base.len()), support, scale, opts.pattern_cap)?;
            Ok(model.run(opts.policy, sink))
        }
        SystemSpec::Markov(m) => {
            let model = tree::TreeModel::new(m, &identity(m.states().len()), support, scale, opts.pattern_cap)?;
            Ok(model.run(opts.policy, sink))
        }
        SystemSpec::HiddenMarkov(h) => {
            let m = h.inner_markov(rank);
            let emit: Vec<u8> = h.letter_map.iter().map(|&y| offset + y as u8).collect();
            let model = tree::TreeModel::new(&m, &emit, support, scale, opts.pattern_cap)?;
            Ok(model.run(opts.policy, sink))
        }
        SystemSpec::CosetBernoulli(c) => {
            let reps: Vec<Word> = support.iter().map(|g| c.coset_rep(g)).collect();
            let classes = normalize_set(&reps);
            let class_of: Vec<usize> = reps
                .iter()
                .map(|r| classes.binary_search(r).expect("present"))
                .collect();
            let base: Vec<W> = c.base.weights();
            let k = classes.len() as u32;
            let a = base.len();
            let needed = (a as u64).checked_pow(k).unwrap_or(u64::MAX);
            if needed > opts.pattern_cap {
                return Err(Error::cap("pattern enumeration", format!("{a}^{k}"), opts.pattern_cap));
            }
            let mut digits = vec![0usize; k as usize];
            let mut pattern = vec![0u8; support.len()];
            'outer: loop {
                let mut p = scale.clone();
                for &d in &digits {
                    p = p.mul(&base[d]);
                }
                if !p.is_zero() {
                    for (slot, &cl) in pattern.iter_mut().zip(&class_of) {
                        *slot = offset + digits[cl] as u8;
                    }
                    sink.accept(&pattern, &p);
                }
                for d in digits.iter_mut().rev() {
                    *d += 1;
                    if *d < a {
                        continue 'outer;
                    }
                    *d = 0;
                }
                break;
            }
            Ok(sink)
        }
        SystemSpec::FiniteAction(fa) => {
            let (_, labels) = fa.point_labels();
            let inverses: Vec<Word> = support.iter().map(|g| g.inverse()).collect();
            let mut acc: BTreeMap<Vec<u8>, W> = BTreeMap::new();
            for (x, q) in fa.mass.probs.iter().enumerate() {
                let w = W::from_rational(q).mul(scale);
                if w.is_zero() {
                    continue;
                }
                let pat: Vec<u8> = inverses
                    .iter()
                    .map(|gi| offset + labels[fa.apply(gi, x)])
                    .collect();
                let slot = acc.entry(pat).or_insert_with(W::zero);
                *slot = slot.add(&w);
            }
            for (k, p) in &acc {
                sink.accept(k, p);
            }
            Ok(sink)
        }
        SystemSpec::DirectSum(d) => {
            let mut off = offset;
            for (w, c) in d.weights.iter().zip(&d.components) {
                let width = c.alphabet().len() as u8;
                let w = W::from_rational(w);
                if !w.is_zero() {
                    sink = walk(c, rank, support, opts, &scale.mul(&w), off, sink)?;
                }
                off += width;
            }
            Ok(sink)
        }
    }
}
