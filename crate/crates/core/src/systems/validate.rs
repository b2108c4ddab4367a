use std::fmt;

use num_traits::{Signed, Zero};

use super::{Categorical, FiniteActionSpec, Matrix, MarkovSpec, System, SystemSpec, MAX_ALPHABET};
use crate::numeric::{rational_to_f64, Rational};
use crate::word::Letter;

/// How strictly equalities are checked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    Exact,
    Float(f64),
}

impl Tolerance {
    fn eq(&self, a: &Rational, b: &Rational) -> bool {
        match self {
            Tolerance::Exact => a == b,
            Tolerance::Float(t) => rational_to_f64(&(a - b)).abs() <= *t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Shape,
    NegativeWeight,
    NotNormalized,
    NonStochasticRow,
    Stationarity,
    Adjointness,
    NotBijection,
    MassMismatch,
    NotGenerating,
    AlphabetTooLarge,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Shape => "shape",
            ViolationKind::NegativeWeight => "negative weight",
            ViolationKind::NotNormalized => "not normalized",
            ViolationKind::NonStochasticRow => "non-stochastic row",
            ViolationKind::Stationarity => "stationarity failure",
            ViolationKind::Adjointness => "adjointness failure",
            ViolationKind::NotBijection => "not a bijection",
            ViolationKind::MassMismatch => "mass mismatch",
            ViolationKind::NotGenerating => "partition not generating",
            ViolationKind::AlphabetTooLarge => "alphabet too large",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Location inside the description, e.g. `system.transitions.a[1]`.
    pub path: String,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Every invariant violation found in a description.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, path: &str, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation {
            path: path.to_string(),
            kind,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{}: {}: {}", v.path, v.kind, v.detail)?;
        }
        Ok(())
    }
}

pub(super) fn validate(sys: &System, tol: Tolerance) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if sys.rank == 0 {
        rep.push("rank", ViolationKind::Shape, "rank must be at least 1");
        return rep;
    }
    spec(&sys.spec, sys.rank, tol, "system", &mut rep);
    rep
}

fn spec(s: &SystemSpec, rank: usize, tol: Tolerance, path: &str, rep: &mut ValidationReport) {
    match s {
        SystemSpec::Bernoulli(b) => categorical(&b.base, tol, &format!("{path}.base"), rep),
        SystemSpec::CosetBernoulli(c) => {
            categorical(&c.base, tol, &format!("{path}.base"), rep);
            if c.marked.is_inverse() || c.marked.generator_index() >= rank {
                rep.push(
                    &format!("{path}.marked"),
                    ViolationKind::Shape,
                    format!("{} is not a free generator of rank {rank}", c.marked),
                );
            }
        }
        SystemSpec::Markov(m) => markov(m, rank, tol, path, rep),
        SystemSpec::HiddenMarkov(h) => {
            match &*h.inner {
                SystemSpec::Markov(_) | SystemSpec::Bernoulli(_) => {
                    spec(&h.inner, rank, tol, &format!("{path}.inner"), rep)
                }
                other => rep.push(
                    &format!("{path}.inner"),
                    ViolationKind::Shape,
                    format!("inner system must be markov or bernoulli, got {}", other.kind()),
                ),
            }
            let inner_len = h.inner.alphabet().len();
            if h.letter_map.len() != inner_len {
                rep.push(
                    &format!("{path}.letter_map"),
                    ViolationKind::Shape,
                    format!("maps {} states, inner system has {inner_len}", h.letter_map.len()),
                );
            }
            if h.letter_map.iter().any(|&y| y >= h.observed.len()) {
                rep.push(&format!("{path}.letter_map"), ViolationKind::Shape, "unknown observed label");
            }
            for (y, name) in h.observed.iter().enumerate() {
                if !h.letter_map.contains(&y) {
                    rep.push(
                        &format!("{path}.letter_map"),
                        ViolationKind::Shape,
                        format!("observed label {name:?} has no preimage"),
                    );
                }
            }
            alphabet_size(h.observed.len(), path, rep);
        }
        SystemSpec::DirectSum(d) => {
            let cat = Categorical {
                labels: (0..d.weights.len()).map(|i| i.to_string()).collect(),
                probs: d.weights.clone(),
            };
            categorical(&cat, tol, &format!("{path}.components[].weight"), rep);
            if d.components.len() != d.weights.len() {
                rep.push(path, ViolationKind::Shape, "one weight per component required");
            }
            for (i, c) in d.components.iter().enumerate() {
                spec(c, rank, tol, &format!("{path}.components[{i}]"), rep);
            }
            alphabet_size(s.alphabet().len(), path, rep);
        }
        SystemSpec::FiniteAction(fa) => finite_action(fa, rank, tol, path, rep),
    }
}

fn alphabet_size(n: usize, path: &str, rep: &mut ValidationReport) {
    if n > MAX_ALPHABET {
        rep.push(
            path,
            ViolationKind::AlphabetTooLarge,
            format!("{n} labels, at most {MAX_ALPHABET} supported"),
        );
    }
}

fn categorical(c: &Categorical, tol: Tolerance, path: &str, rep: &mut ValidationReport) {
    if c.is_empty() {
        rep.push(path, ViolationKind::Shape, "empty distribution");
        return;
    }
    alphabet_size(c.len(), path, rep);
    let mut seen = std::collections::HashSet::new();
    for l in &c.labels {
        if !seen.insert(l) {
            rep.push(path, ViolationKind::Shape, format!("duplicate label {l:?}"));
        }
    }
    for (l, p) in c.labels.iter().zip(&c.probs) {
        if p.is_negative() {
            rep.push(path, ViolationKind::NegativeWeight, format!("{l:?} has weight {p}"));
        }
    }
    let sum: Rational = c.probs.iter().sum();
    if !tol.eq(&sum, &Rational::from_integer(1.into())) {
        rep.push(path, ViolationKind::NotNormalized, format!("weights sum to {sum}"));
    }
}

fn markov(m: &MarkovSpec, rank: usize, tol: Tolerance, path: &str, rep: &mut ValidationReport) {
    let pi = &m.stationary;
    categorical(pi, tol, &format!("{path}.stationary"), rep);
    let n = pi.len();
    if m.transitions.len() != 2 * rank {
        rep.push(
            &format!("{path}.transitions"),
            ViolationKind::Shape,
            format!("expected {} matrices, found {}", 2 * rank, m.transitions.len()),
        );
        return;
    }
    let square = |p: &Matrix| p.len() == n && p.iter().all(|row| row.len() == n);
    for l in Letter::all(rank) {
        let p = m.transition(l);
        let at = format!("{path}.transitions.{l}");
        if !square(p) {
            rep.push(&at, ViolationKind::Shape, format!("expected a {n}x{n} matrix"));
            continue;
        }
        for (a, row) in p.iter().enumerate() {
            if row.iter().any(|x| x.is_negative()) {
                rep.push(&format!("{at}[{a}]"), ViolationKind::NegativeWeight, "negative entry");
            }
            let s: Rational = row.iter().sum();
            if !tol.eq(&s, &Rational::from_integer(1.into())) {
                rep.push(
                    &format!("{at}[{a}]"),
                    ViolationKind::NonStochasticRow,
                    format!("row sums to {s}"),
                );
            }
        }
        for b in 0..n {
            let s: Rational = (0..n).map(|a| &pi.probs[a] * &p[a][b]).sum();
            if !tol.eq(&s, &pi.probs[b]) {
                rep.push(
                    &at,
                    ViolationKind::Stationarity,
                    format!("(πP)({}) = {s}, π({}) = {}", pi.labels[b], pi.labels[b], pi.probs[b]),
                );
            }
        }
    }
    for l in Letter::all(rank).filter(|l| !l.is_inverse()) {
        let (p, q) = (m.transition(l), m.transition(l.inverse()));
        if !square(p) || !square(q) {
            continue;
        }
        for a in 0..n {
            for b in 0..n {
                let lhs = &pi.probs[a] * &p[a][b];
                let rhs = &pi.probs[b] * &q[b][a];
                if !tol.eq(&lhs, &rhs) {
                    rep.push(
                        &format!("{path}.transitions.{l}"),
                        ViolationKind::Adjointness,
                        format!(
                            "π({0})P_{l}({0},{1}) = {lhs} but π({1})P_{2}({1},{0}) = {rhs}",
                            pi.labels[a],
                            pi.labels[b],
                            l.inverse()
                        ),
                    );
                }
            }
        }
    }
}

fn finite_action(fa: &FiniteActionSpec, rank: usize, tol: Tolerance, path: &str, rep: &mut ValidationReport) {
    categorical(&fa.mass, tol, &format!("{path}.mass"), rep);
    let n = fa.mass.len();
    if fa.generators.len() != rank {
        rep.push(
            &format!("{path}.generators"),
            ViolationKind::Shape,
            format!("expected {rank} generator maps, found {}", fa.generators.len()),
        );
        return;
    }
    let mut ok = true;
    for (i, perm) in fa.generators.iter().enumerate() {
        let at = format!("{path}.generators.{}", Letter::generator(i, false));
        let mut hit = vec![false; n];
        let mut bijective = perm.len() == n;
        for &y in perm {
            if y >= n || hit[y] {
                bijective = false;
                break;
            }
            hit[y] = true;
        }
        if !bijective {
            rep.push(&at, ViolationKind::NotBijection, "map is not a bijection of the points");
            ok = false;
            continue;
        }
        for (x, &y) in perm.iter().enumerate() {
            if !tol.eq(&fa.mass.probs[x], &fa.mass.probs[y]) {
                rep.push(
                    &at,
                    ViolationKind::MassMismatch,
                    format!(
                        "{} (mass {}) maps to {} (mass {})",
                        fa.mass.labels[x], fa.mass.probs[x], fa.mass.labels[y], fa.mass.probs[y]
                    ),
                );
            }
        }
    }
    if let Some(p) = &fa.partition {
        if p.len() != n {
            rep.push(&format!("{path}.partition"), ViolationKind::Shape, "one label per point required");
            ok = false;
        }
    }
    alphabet_size(fa.point_labels().0.len(), path, rep);
    if ok {
        if let Err(msg) = check_generating(fa, rank) {
            rep.push(&format!("{path}.partition"), ViolationKind::NotGenerating, msg);
        }
    }
}

/// Refines the partition by its translates until stable; the partition is
/// generating when the result separates all points of positive mass.
pub(super) fn check_generating(fa: &FiniteActionSpec, rank: usize) -> Result<(), String> {
    let (_, mut block) = {
        let (a, idx) = fa.point_labels();
        (a, idx.into_iter().map(|b| b as usize).collect::<Vec<_>>())
    };
    let n = block.len();
    let count = |b: &[usize]| b.iter().collect::<std::collections::HashSet<_>>().len();
    loop {
        let before = count(&block);
        let keys: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                let mut k = vec![block[x]];
                for l in Letter::all(rank) {
                    k.push(block[fa.apply_letter(l, x)]);
                }
                k
            })
            .collect();
        let mut ids: std::collections::HashMap<&Vec<usize>, usize> = Default::default();
        let next: Vec<usize> = keys
            .iter()
            .map(|k| {
                let id = ids.len();
                *ids.entry(k).or_insert(id)
            })
            .collect();
        block = next;
        if count(&block) == before {
            break;
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            if block[x] == block[y] && !fa.mass.probs[x].is_zero() && !fa.mass.probs[y].is_zero() {
                return Err(format!(
                    "points {} and {} are never separated by translates of the partition",
                    fa.mass.labels[x], fa.mass.labels[y]
                ));
            }
        }
    }
    Ok(())
}
