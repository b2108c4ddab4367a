//! Brute-force marginals: every label assignment of positive weight is
//! visited and weighed separately, with no message passing or tabulation.

use std::collections::BTreeMap;

use super::{check_rank, normalize_set, Pattern, PatternDistribution};
use crate::error::{Error, Result};
use crate::numeric::Weight;
use crate::systems::{FiniteActionSpec, MarkovSpec, System, SystemSpec};
use crate::word::{prefix_hull, Letter, Word};

/// Same contract as [`super::marginal`], by exhaustive enumeration over at
/// most `cap` inner assignments. Disconnected sets are handled through their
/// hull.
pub fn oracle_marginal<W: Weight>(sys: &System, set: &[Word], cap: u64) -> Result<PatternDistribution<W>> {
    let support = normalize_set(set);
    check_rank(sys, &support)?;
    let mut probs: BTreeMap<Pattern, W> = BTreeMap::new();
    collect(&sys.spec, sys.rank, &support, cap, &W::one(), 0, &mut probs)?;
    probs.retain(|_, p| !p.is_zero());
    Ok(PatternDistribution::from_parts(support, sys.spec.alphabet(), probs))
}

fn add<W: Weight>(probs: &mut BTreeMap<Pattern, W>, key: Pattern, p: W) {
    let slot = probs.entry(key).or_insert_with(W::zero);
    *slot = slot.add(&p);
}

/// Visits every vector in `[0, base)^len`.
fn odometer(len: usize, base: usize, cap: u64, mut f: impl FnMut(&[usize])) -> Result<()> {
    let needed = (base as u64).checked_pow(len as u32).unwrap_or(u64::MAX);
    if needed > cap {
        return Err(Error::cap("oracle enumeration", format!("{base}^{len}"), cap));
    }
    let mut digits = vec![0usize; len];
    loop {
        f(&digits);
        let mut i = len;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
        }
    }
}

fn collect<W: Weight>(
    spec: &SystemSpec,
    rank: usize,
    support: &[Word],
    cap: u64,
    scale: &W,
    offset: u8,
    probs: &mut BTreeMap<Pattern, W>,
) -> Result<()> {
    match spec {
        SystemSpec::Bernoulli(b) => {
            let base: Vec<W> = b.base.weights();
            odometer(support.len(), base.len(), cap, |xs| {
                let p = xs.iter().fold(scale.clone(), |acc, &x| acc.mul(&base[x]));
                add(probs, xs.iter().map(|&x| offset + x as u8).collect(), p);
            })
        }
        SystemSpec::Markov(m) => {
            let emit: Vec<u8> = (0..m.states().len()).map(|i| offset + i as u8).collect();
            markov(m, &emit, support, cap, scale, probs)
        }
        SystemSpec::HiddenMarkov(h) => {
            let emit: Vec<u8> = h.letter_map.iter().map(|&y| offset + y as u8).collect();
            markov(&h.inner_markov(rank), &emit, support, cap, scale, probs)
        }
        SystemSpec::CosetBernoulli(c) => {
            let base: Vec<W> = c.base.weights();
            let t = c.marked.generator_index();
            // g and h share a coordinate when g⁻¹h is a power of t.
            let same = |g: &Word, h: &Word| {
                let w = g.inverse().multiply(h);
                w.letters().iter().all(|l| l.generator_index() == t && Some(*l) == w.first())
            };
            let n = support.len();
            let mut first = vec![0usize; n];
            for i in 0..n {
                first[i] = (0..=i).find(|&j| same(&support[j], &support[i])).unwrap();
            }
            odometer(n, base.len(), cap, |xs| {
                if (0..n).any(|i| xs[i] != xs[first[i]]) {
                    return;
                }
                let p = (0..n)
                    .filter(|&i| first[i] == i)
                    .fold(scale.clone(), |acc, i| acc.mul(&base[xs[i]]));
                add(probs, xs.iter().map(|&x| offset + x as u8).collect(), p);
            })
        }
        SystemSpec::FiniteAction(fa) => {
            finite_action(fa, rank, support, scale, offset, probs);
            Ok(())
        }
        SystemSpec::DirectSum(d) => {
            let mut off = offset;
            for (w, c) in d.weights.iter().zip(&d.components) {
                let s = scale.mul(&W::from_rational(w));
                collect(c, rank, support, cap, &s, off, probs)?;
                off += c.alphabet().len() as u8;
            }
            Ok(())
        }
    }
}

fn markov<W: Weight>(
    m: &MarkovSpec,
    emit: &[u8],
    support: &[Word],
    cap: u64,
    scale: &W,
    probs: &mut BTreeMap<Pattern, W>,
) -> Result<()> {
    // Shortlex order puts every hull vertex after its prefix parent, so the
    // joint law is π at the root times one transition factor per later vertex.
    let hull = prefix_hull(support);
    if hull.is_empty() {
        add(probs, Pattern::default(), scale.clone());
        return Ok(());
    }
    let n = m.states().len();
    let pi: Vec<W> = m.stationary.weights();
    let trans: Vec<Vec<Vec<W>>> = m
        .transitions
        .iter()
        .map(|p| p.iter().map(|row| row.iter().map(W::from_rational).collect()).collect())
        .collect();
    // Only the root of the hull, its shortest element, lacks a parent.
    let parent: Vec<Option<(usize, Letter)>> = hull
        .iter()
        .map(|w| {
            let p = w.prefix_parent()?;
            hull.binary_search(&p).ok().map(|i| (i, w.last().unwrap()))
        })
        .collect();
    debug_assert!(parent.iter().skip(1).all(Option::is_some));
    let positions: Vec<usize> = support
        .iter()
        .map(|w| hull.binary_search(w).expect("hull member"))
        .collect();
    let mut xs = vec![0usize; hull.len()];
    let mut visited = 0u64;
    let mut partial: Vec<W> = vec![W::zero(); hull.len() + 1];
    partial[0] = scale.clone();
    // Iterative depth-first search over assignments with zero-weight pruning.
    let mut depth = 0usize;
    let mut next = vec![0usize; hull.len() + 1];
    loop {
        if depth == hull.len() {
            visited += 1;
            if visited > cap {
                return Err(Error::cap("oracle enumeration", format!("more than {cap} assignments"), cap));
            }
            let key: Pattern = positions.iter().map(|&i| emit[xs[i]]).collect();
            add(probs, key, partial[depth].clone());
            depth -= 1;
            continue;
        }
        let x = next[depth];
        if x == n {
            next[depth] = 0;
            if depth == 0 {
                return Ok(());
            }
            depth -= 1;
            continue;
        }
        next[depth] = x + 1;
        let factor = match parent[depth] {
            None => &pi[x],
            Some((u, l)) => &trans[l.index()][xs[u]][x],
        };
        if factor.is_zero() {
            continue;
        }
        xs[depth] = x;
        partial[depth + 1] = partial[depth].mul(factor);
        depth += 1;
    }
}

fn finite_action<W: Weight>(
    fa: &FiniteActionSpec,
    rank: usize,
    support: &[Word],
    scale: &W,
    offset: u8,
    probs: &mut BTreeMap<Pattern, W>,
) {
    let (_, labels) = fa.point_labels();
    let n = fa.mass.len();
    // Permutation of each letter as a full table, composed along the word.
    let table: Vec<Vec<usize>> = Letter::all(rank)
        .map(|l| (0..n).map(|x| fa.apply_letter(l, x)).collect())
        .collect();
    let perm_of = |g: &Word| -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        for l in g.letters() {
            let t = &table[l.index()];
            // perm ← perm ∘ t, so that perm(x) = g(x) after all letters.
            perm = (0..n).map(|x| perm[t[x]]).collect();
        }
        perm
    };
    let perms: Vec<Vec<usize>> = support.iter().map(|g| perm_of(&g.inverse())).collect();
    for x in 0..n {
        let w = W::from_rational(&fa.mass.probs[x]).mul(scale);
        let key: Pattern = perms.iter().map(|p| offset + labels[p[x]]).collect();
        add(probs, key, w);
    }
}
