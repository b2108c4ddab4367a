//! TOML system descriptions.
//!
//! ```toml
//! rank = 2
//!
//! [system]
//! kind = "markov"
//! stationary = { "0" = "1/2", "1" = "1/2" }
//!
//! [system.transitions]
//! a = [["9/10", "1/10"], ["1/10", "9/10"]]
//! b = [["9/10", "1/10"], ["1/10", "9/10"]]
//! ```
//!
//! Numbers may be written as `"p/q"` strings, integers, or decimals; they are
//! read exactly. Inverse transitions that are omitted are filled in as the
//! adjoint of the given ones.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{
    BernoulliSpec, Categorical, CosetBernoulliSpec, DirectSumSpec, FiniteActionSpec,
    HiddenMarkovSpec, Matrix, MarkovSpec, System, SystemSpec,
};
use crate::error::{Error, Result};
use crate::numeric::{format_rational, parse_rational, Rational};
use crate::word::Letter;

#[derive(Serialize, Deserialize)]
struct RawFile {
    rank: usize,
    system: RawSystem,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum RawSystem {
    FiniteAction {
        mass: IndexMap<String, RawNum>,
        generators: IndexMap<String, IndexMap<String, String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        partition: Option<IndexMap<String, String>>,
    },
    Bernoulli {
        base: IndexMap<String, RawNum>,
    },
    Markov {
        stationary: IndexMap<String, RawNum>,
        transitions: IndexMap<String, Vec<Vec<RawNum>>>,
    },
    HiddenMarkov {
        letter_map: IndexMap<String, String>,
        inner: Box<RawSystem>,
    },
    DirectSum {
        components: Vec<RawComponent>,
    },
    CosetBernoulli {
        base: IndexMap<String, RawNum>,
        marked: String,
    },
}

#[derive(Serialize, Deserialize)]
struct RawComponent {
    weight: RawNum,
    system: RawSystem,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawNum {
    Str(String),
    Int(i64),
    Float(f64),
}

impl RawNum {
    fn value(&self) -> Result<Rational> {
        match self {
            RawNum::Str(s) => parse_rational(s),
            RawNum::Int(i) => Ok(Rational::from_integer((*i).into())),
            RawNum::Float(x) => parse_rational(&format!("{x}")),
        }
    }

    fn of(q: &Rational) -> RawNum {
        RawNum::Str(format_rational(q))
    }
}

/// Line and column (both 1-based) of a byte offset.
pub fn parse_error_position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

pub(super) fn parse(src: &str) -> Result<System> {
    let raw: RawFile = toml::from_str(src).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| parse_error_position(src, s.start))
            .unwrap_or((0, 0));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    if raw.rank == 0 {
        return Err(Error::InvalidSystem("rank must be at least 1".into()));
    }
    let spec = from_raw(&raw.system, raw.rank)?;
    Ok(System {
        rank: raw.rank,
        spec,
    })
}

fn categorical(m: &IndexMap<String, RawNum>) -> Result<Categorical> {
    let pairs = m
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.value()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Categorical::new(pairs))
}

fn letter(key: &str, rank: usize) -> Result<Letter> {
    let mut chars = key.chars();
    match (chars.next().and_then(Letter::from_char), chars.next()) {
        (Some(l), None) if l.generator_index() < rank => Ok(l),
        _ => Err(Error::InvalidSystem(format!(
            "{key:?} is not a letter of the rank-{rank} free group"
        ))),
    }
}

fn from_raw(raw: &RawSystem, rank: usize) -> Result<SystemSpec> {
    Ok(match raw {
        RawSystem::Bernoulli { base } => SystemSpec::Bernoulli(BernoulliSpec {
            base: categorical(base)?,
        }),
        RawSystem::CosetBernoulli { base, marked } => SystemSpec::CosetBernoulli(CosetBernoulliSpec {
            base: categorical(base)?,
            marked: letter(marked, rank)?,
        }),
        RawSystem::Markov {
            stationary,
            transitions,
        } => {
            let stationary = categorical(stationary)?;
            let mut given: Vec<Option<Matrix>> = vec![None; 2 * rank];
            for (k, rows) in transitions {
                let l = letter(k, rank)?;
                let m = rows
                    .iter()
                    .map(|row| row.iter().map(RawNum::value).collect::<Result<Vec<_>>>())
                    .collect::<Result<Matrix>>()?;
                given[l.index()] = Some(m);
            }
            let mut out = Vec::with_capacity(2 * rank);
            for l in Letter::all(rank) {
                let m = match (&given[l.index()], &given[l.inverse().index()]) {
                    (Some(m), _) => m.clone(),
                    (None, Some(m)) => {
                        let n = stationary.len();
                        if m.len() != n || m.iter().any(|r| r.len() != n) {
                            return Err(Error::InvalidSystem(format!(
                                "transition for {} must be {n}x{n}",
                                l.inverse()
                            )));
                        }
                        MarkovSpec::adjoint(&stationary.probs, m)
                    }
                    (None, None) => {
                        return Err(Error::InvalidSystem(format!(
                            "missing transition matrix for {l} and {}",
                            l.inverse()
                        )))
                    }
                };
                out.push(m);
            }
            SystemSpec::Markov(MarkovSpec {
                stationary,
                transitions: out,
            })
        }
        RawSystem::HiddenMarkov { letter_map, inner } => {
            let inner = from_raw(inner, rank)?;
            let states = inner.alphabet();
            let mut observed: Vec<String> = Vec::new();
            let mut map = Vec::with_capacity(states.len());
            for s in &states {
                let y = letter_map
                    .get(s)
                    .ok_or_else(|| Error::InvalidSystem(format!("letter_map misses inner state {s:?}")))?;
                let idx = match observed.iter().position(|o| o == y) {
                    Some(i) => i,
                    None => {
                        observed.push(y.clone());
                        observed.len() - 1
                    }
                };
                map.push(idx);
            }
            if let Some(k) = letter_map.keys().find(|k| !states.contains(k)) {
                return Err(Error::InvalidSystem(format!("letter_map names unknown state {k:?}")));
            }
            SystemSpec::HiddenMarkov(HiddenMarkovSpec {
                inner: Box::new(inner),
                letter_map: map,
                observed,
            })
        }
        RawSystem::DirectSum { components } => {
            let mut weights = Vec::new();
            let mut comps = Vec::new();
            for c in components {
                weights.push(c.weight.value()?);
                comps.push(from_raw(&c.system, rank)?);
            }
            SystemSpec::DirectSum(DirectSumSpec {
                weights,
                components: comps,
            })
        }
        RawSystem::FiniteAction {
            mass,
            generators,
            partition,
        } => {
            let mass = categorical(mass)?;
            let point = |name: &str| {
                mass.index_of(name)
                    .ok_or_else(|| Error::InvalidSystem(format!("unknown point {name:?}")))
            };
            let mut gens: Vec<Option<Vec<usize>>> = vec![None; rank];
            for (k, map) in generators {
                let l = letter(k, rank)?;
                if l.is_inverse() {
                    return Err(Error::InvalidSystem(format!(
                        "generator maps are given for {}, not its inverse",
                        l.inverse()
                    )));
                }
                let mut perm = vec![usize::MAX; mass.len()];
                for (x, y) in map {
                    perm[point(x)?] = point(y)?;
                }
                if let Some(x) = perm.iter().position(|&y| y == usize::MAX) {
                    return Err(Error::InvalidSystem(format!(
                        "generator {k} does not map point {:?}",
                        mass.labels[x]
                    )));
                }
                gens[l.generator_index()] = Some(perm);
            }
            let generators = gens
                .into_iter()
                .enumerate()
                .map(|(i, g)| {
                    g.ok_or_else(|| {
                        Error::InvalidSystem(format!("missing map for generator {}", Letter::generator(i, false)))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let partition = match partition {
                None => None,
                Some(p) => {
                    let mut labels = vec![None; mass.len()];
                    for (x, lab) in p {
                        labels[point(x)?] = Some(lab.clone());
                    }
                    Some(
                        labels
                            .into_iter()
                            .enumerate()
                            .map(|(i, l)| {
                                l.ok_or_else(|| {
                                    Error::InvalidSystem(format!("partition misses point {:?}", mass.labels[i]))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
            };
            SystemSpec::FiniteAction(FiniteActionSpec {
                mass,
                generators,
                partition,
            })
        }
    })
}

fn raw_categorical(c: &Categorical) -> IndexMap<String, RawNum> {
    c.labels.iter().cloned().zip(c.probs.iter().map(RawNum::of)).collect()
}

fn to_raw(spec: &SystemSpec, rank: usize) -> RawSystem {
    match spec {
        SystemSpec::Bernoulli(b) => RawSystem::Bernoulli {
            base: raw_categorical(&b.base),
        },
        SystemSpec::CosetBernoulli(c) => RawSystem::CosetBernoulli {
            base: raw_categorical(&c.base),
            marked: c.marked.to_string(),
        },
        SystemSpec::Markov(m) => RawSystem::Markov {
            stationary: raw_categorical(&m.stationary),
            transitions: Letter::all(rank)
                .map(|l| {
                    let rows = m
                        .transition(l)
                        .iter()
                        .map(|r| r.iter().map(RawNum::of).collect())
                        .collect();
                    (l.to_string(), rows)
                })
                .collect(),
        },
        SystemSpec::HiddenMarkov(h) => RawSystem::HiddenMarkov {
            letter_map: h
                .inner
                .alphabet()
                .into_iter()
                .zip(h.letter_map.iter().map(|&y| h.observed[y].clone()))
                .collect(),
            inner: Box::new(to_raw(&h.inner, rank)),
        },
        SystemSpec::DirectSum(d) => RawSystem::DirectSum {
            components: d
                .weights
                .iter()
                .zip(&d.components)
                .map(|(w, c)| RawComponent {
                    weight: RawNum::of(w),
                    system: to_raw(c, rank),
                })
                .collect(),
        },
        SystemSpec::FiniteAction(fa) => {
            let names = &fa.mass.labels;
            RawSystem::FiniteAction {
                mass: raw_categorical(&fa.mass),
                generators: fa
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, perm)| {
                        let map = perm
                            .iter()
                            .enumerate()
                            .map(|(x, &y)| (names[x].clone(), names[y].clone()))
                            .collect();
                        (Letter::generator(i, false).to_string(), map)
                    })
                    .collect(),
                partition: fa
                    .partition
                    .as_ref()
                    .map(|p| names.iter().cloned().zip(p.iter().cloned()).collect()),
            }
        }
    }
}

pub(super) fn render(sys: &System) -> String {
    let raw = RawFile {
        rank: sys.rank,
        system: to_raw(&sys.spec, sys.rank),
    };
    toml::to_string(&raw).expect("system descriptions always serialize")
}

/// Parses and re-renders a description in canonical form.
pub fn normalize_toml(src: &str) -> Result<String> {
    Ok(render(&parse(src)?))
}
