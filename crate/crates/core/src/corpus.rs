//! Built-in regression systems with independently derived expected values.
//!
//! Expected values come either from textbook closed forms evaluated with
//! plain `f64` logarithms, or, where no closed form exists, from the
//! brute-force oracle applied to the ball functional at radius one.

use std::f64::consts::LN_2;
use std::fmt::Write;

use crate::engine::Conditioning;
use crate::error::Result;
use crate::fentropy::{resolve_mode, FEntropy, Value};
use crate::marginals::oracle_marginal;
use crate::numeric::{EntropyValue, NumericMode, Rational, Weight};
use crate::report::sig7;
use crate::systems::System;
use crate::word::{Letter, OrderedBall, Word};
use crate::{ComputeOptions, DEFAULT_ORACLE_CAP};

/// Agreement tolerance against float expectations.
pub const CORPUS_TOL: f64 = 1e-9;

/// Radius of the ball and sphere routes; the decay series runs to one more.
pub const CORPUS_RADIUS: usize = 1;

#[derive(Clone, Copy, Debug)]
pub enum Expected {
    /// A closed form evaluated in floating point.
    Closed(fn() -> f64),
    /// The ball functional at radius one computed by the oracle.
    OracleBall,
}

#[derive(Clone, Copy, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub expected: Expected,
}

impl CorpusEntry {
    pub fn system(&self) -> System {
        System::from_toml_str(self.source).expect("corpus systems are valid")
    }
}

fn h(ps: &[f64]) -> f64 {
    ps.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
}

pub const ENTRIES: &[CorpusEntry] = &[
    CorpusEntry {
        name: "bernoulli-fair",
        source: r#"rank = 2
[system]
kind = "bernoulli"
base = { "0" = "1/2", "1" = "1/2" }
"#,
        expected: Expected::Closed(|| LN_2),
    },
    CorpusEntry {
        name: "bernoulli-skew",
        source: r#"rank = 2
[system]
kind = "bernoulli"
base = { "0" = "1/4", "1" = "3/4" }
"#,
        expected: Expected::Closed(|| h(&[0.25, 0.75])),
    },
    CorpusEntry {
        name: "bernoulli-third-r3",
        source: r#"rank = 3
[system]
kind = "bernoulli"
base = { "x" = "1/3", "y" = "1/3", "z" = "1/3" }
"#,
        expected: Expected::Closed(|| 3f64.ln()),
    },
    CorpusEntry {
        name: "markov-symmetric",
        source: r#"rank = 2
[system]
kind = "markov"
stationary = { "0" = "1/2", "1" = "1/2" }
[system.transitions]
a = [["9/10", "1/10"], ["1/10", "9/10"]]
b = [["9/10", "1/10"], ["1/10", "9/10"]]
"#,
        // (1-r) H(π) + Σ_s H(P_s | π)
        expected: Expected::Closed(|| -LN_2 + 2.0 * h(&[0.9, 0.1])),
    },
    CorpusEntry {
        name: "markov-sparse",
        source: r#"rank = 2
[system]
kind = "markov"
stationary = { "0" = "1/2", "1" = "1/4", "2" = "1/4" }
[system.transitions]
a = [["1/2", "1/2", "0"], ["1", "0", "0"], ["0", "0", "1"]]
b = [["1/2", "0", "1/2"], ["0", "1", "0"], ["1", "0", "0"]]
"#,
        expected: Expected::Closed(|| -h(&[0.5, 0.25, 0.25]) + 2.0 * 0.5 * LN_2),
    },
    CorpusEntry {
        name: "coset-bernoulli",
        source: r#"rank = 2
[system]
kind = "coset-bernoulli"
base = { "0" = "1/2", "1" = "1/2" }
marked = "a"
"#,
        expected: Expected::Closed(|| 0.0),
    },
    CorpusEntry {
        name: "finite-action-cycle",
        source: r#"rank = 2
[system]
kind = "finite-action"
mass = { "p" = "1/3", "q" = "1/3", "s" = "1/3" }
[system.generators]
a = { "p" = "q", "q" = "s", "s" = "p" }
b = { "p" = "p", "q" = "q", "s" = "s" }
"#,
        expected: Expected::Closed(|| -3f64.ln()),
    },
    CorpusEntry {
        name: "finite-action-swap",
        source: r#"rank = 2
[system]
kind = "finite-action"
mass = { "p" = "1/4", "q" = "1/4", "s" = "1/2" }
[system.generators]
a = { "p" = "q", "q" = "p", "s" = "s" }
b = { "p" = "p", "q" = "q", "s" = "s" }
"#,
        expected: Expected::Closed(|| -h(&[0.25, 0.25, 0.5])),
    },
    CorpusEntry {
        name: "direct-sum",
        source: r#"rank = 2
[system]
kind = "direct-sum"

[[system.components]]
weight = "1/2"
[system.components.system]
kind = "bernoulli"
base = { "0" = "1/2", "1" = "1/2" }

[[system.components]]
weight = "1/2"
[system.components.system]
kind = "markov"
stationary = { "0" = "1/2", "1" = "1/2" }
[system.components.system.transitions]
a = [["9/10", "1/10"], ["1/10", "9/10"]]
b = [["9/10", "1/10"], ["1/10", "9/10"]]
"#,
        // Σ p_i f_i - (r-1) H(τ)
        expected: Expected::Closed(|| 0.5 * LN_2 + 0.5 * (-LN_2 + 2.0 * h(&[0.9, 0.1])) - LN_2),
    },
    CorpusEntry {
        name: "hidden-markov",
        source: r#"rank = 2
[system]
kind = "hidden-markov"
letter_map = { "0" = "x", "1" = "x", "2" = "y" }
[system.inner]
kind = "markov"
stationary = { "0" = "1/3", "1" = "1/3", "2" = "1/3" }
[system.inner.transitions]
a = [["1/2", "1/2", "0"], ["0", "1/2", "1/2"], ["1/2", "0", "1/2"]]
b = [["2/3", "0", "1/3"], ["1/3", "2/3", "0"], ["0", "1/3", "2/3"]]
"#,
        expected: Expected::OracleBall,
    },
    CorpusEntry {
        name: "markov-rank1",
        source: r#"rank = 1
[system]
kind = "markov"
stationary = { "0" = "1/2", "1" = "1/2" }
[system.transitions]
a = [["9/10", "1/10"], ["1/10", "9/10"]]
"#,
        // Entropy rate of the chain.
        expected: Expected::Closed(|| h(&[0.9, 0.1])),
    },
];

pub fn entry(name: &str) -> Option<&'static CorpusEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// `F(1) = (1-2r) H(B_1) + Σ_s H(B_1 ∪ s B_1)` from oracle marginals alone.
pub fn oracle_ball_one(sys: &System) -> Result<f64> {
    let ball = OrderedBall::new(sys.rank, 1, &Default::default(), usize::MAX)?;
    let b1 = ball.elements().to_vec();
    let hb = oracle_marginal::<f64>(sys, &b1, DEFAULT_ORACLE_CAP)?.entropy();
    let mut total = (1.0 - 2.0 * sys.rank as f64) * hb;
    for s in Letter::generators(sys.rank) {
        let shifted: Vec<Word> = b1.iter().map(|g| Word::letter(s).multiply(g)).collect();
        let union: Vec<Word> = b1.iter().chain(&shifted).cloned().collect();
        total += oracle_marginal::<f64>(sys, &union, DEFAULT_ORACLE_CAP)?.entropy();
    }
    Ok(total)
}

/// Outcome of one corpus system.
#[derive(Clone, Debug)]
pub struct EntryOutcome {
    pub name: &'static str,
    pub text: String,
    pub ok: bool,
}

/// Outcome of the whole corpus.
#[derive(Clone, Debug)]
pub struct CorpusOutcome {
    pub entries: Vec<EntryOutcome>,
}

impl CorpusOutcome {
    pub fn ok(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.text);
        }
        let passed = self.entries.iter().filter(|e| e.ok).count();
        writeln!(out, "corpus: {passed}/{} systems agree", self.entries.len()).unwrap();
        out
    }
}

/// Runs every entry. Cap errors and other failures are reported per entry.
pub fn run_corpus(opts: &ComputeOptions, mode: NumericMode) -> CorpusOutcome {
    let entries = ENTRIES
        .iter()
        .map(|e| match run_entry(e, opts, mode) {
            Ok(o) => o,
            Err(err) => EntryOutcome {
                name: e.name,
                text: format!("{}\n  error: {err}\n  status: FAIL\n", e.name),
                ok: false,
            },
        })
        .collect();
    CorpusOutcome { entries }
}

pub fn run_entry(e: &CorpusEntry, opts: &ComputeOptions, mode: NumericMode) -> Result<EntryOutcome> {
    let sys = e.system();
    let largest = OrderedBall::new(sys.rank, CORPUS_RADIUS + 1, &opts.order, opts.ball_cap)?.len();
    match resolve_mode(mode, &sys.spec, largest) {
        NumericMode::Float => run_typed::<f64>(e, &sys, opts, "float"),
        _ => run_typed::<Rational>(e, &sys, opts, "rational"),
    }
}

fn run_typed<W: Weight>(e: &CorpusEntry, sys: &System, opts: &ComputeOptions, mode: &str) -> Result<EntryOutcome> {
    let fe = FEntropy::new(sys, opts.clone())?;
    let cond = Conditioning::Trivial;
    let n = CORPUS_RADIUS;
    let ball0 = fe.f_ball::<W>(0, cond)?.into_value();
    let ball = fe.f_ball::<W>(n, cond)?.into_value();
    let sphere = fe.f_sphere::<W>(n, cond)?.into_value();
    let decay = fe.f_decay::<W>(n + 1, cond)?;
    let exact = decay.exact;
    let decay = decay.value;

    let mut text = String::new();
    writeln!(text, "{} ({}, r={}, mode={mode})", e.name, sys.spec.kind(), sys.rank).unwrap();
    let mut ok = true;
    let mut row = |label: &str, v: &Value, pass: bool| {
        ok &= pass;
        let status = if pass { "ok" } else { "FAIL" };
        writeln!(text, "  {label:<22} {:>14}  {status}", sig7(v.to_f64())).unwrap();
    };
    match e.expected {
        Expected::Closed(f) => {
            let want = Value::Float(f());
            for (label, v) in [
                (format!("ball-limit n={n}"), &ball),
                (format!("sphere-formula n={n}"), &sphere),
                (format!("decay-series R={}", n + 1), &decay),
            ] {
                row(&label, v, v.agrees(&want, CORPUS_TOL));
            }
            // Structured systems have exact routes: all truncations coincide.
            let same = ball.agrees(&ball0, CORPUS_TOL) && ball.agrees(&sphere, CORPUS_TOL) && ball.agrees(&decay, CORPUS_TOL);
            row("expected", &want, exact && same);
        }
        Expected::OracleBall => {
            let want = Value::Float(oracle_ball_one(sys)?);
            row(&format!("ball-limit n={n}"), &ball, ball.agrees(&want, CORPUS_TOL));
            row(
                &format!("sphere-formula n={n}"),
                &sphere,
                sphere.to_f64() <= ball.to_f64() + CORPUS_TOL,
            );
            // The decay series truncated at R equals the sphere formula at R-1.
            row(&format!("decay-series R={}", n + 1), &decay, decay.agrees(&sphere, CORPUS_TOL));
            row("ball-limit n=0", &ball0, ball.to_f64() <= ball0.to_f64() + CORPUS_TOL);
            row("expected (oracle)", &want, true);
        }
    }
    writeln!(text, "  status: {}", if ok { "ok" } else { "FAIL" }).unwrap();
    Ok(EntryOutcome { name: e.name, text, ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses() {
        for e in ENTRIES {
            let sys = e.system();
            assert!(sys.validate(crate::systems::Tolerance::Exact).is_ok(), "{}", e.name);
        }
    }
}
