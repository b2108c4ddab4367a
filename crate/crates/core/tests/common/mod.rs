//! Random system generators shared by integration tests.
#![allow(dead_code)]

use finv::systems::{
    BernoulliSpec, Categorical, DirectSumSpec, FiniteActionSpec, HiddenMarkovSpec, Matrix, MarkovSpec,
};
use finv::{Rational, System, SystemSpec};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn labels(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

/// Positive integers normalized to a probability vector.
pub fn random_probs(rng: &mut impl Rng, k: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|x| q(x, total)).collect()
}

pub fn categorical(probs: Vec<Rational>) -> Categorical {
    Categorical::new(labels(probs.len()).into_iter().zip(probs))
}

fn identity(k: usize) -> Matrix {
    (0..k)
        .map(|i| (0..k).map(|j| q((i == j) as i64, 1)).collect())
        .collect()
}

fn permutation_matrix(perm: &[usize]) -> Matrix {
    let k = perm.len();
    (0..k)
        .map(|i| (0..k).map(|j| q((perm[i] == j) as i64, 1)).collect())
        .collect()
}

fn combine(parts: &[(Rational, Matrix)]) -> Matrix {
    let k = parts[0].1.len();
    let mut out = vec![vec![q(0, 1); k]; k];
    for (w, m) in parts {
        for i in 0..k {
            for j in 0..k {
                out[i][j] += w * &m[i][j];
            }
        }
    }
    out
}

/// A stochastic matrix fixing `π`: with uniform `π` a random mixture of
/// permutation matrices, otherwise a mixture of the identity and `1πᵀ`.
fn stationary_matrix(rng: &mut impl Rng, pi: &[Rational], uniform: bool) -> Matrix {
    let k = pi.len();
    if uniform {
        let terms = rng.gen_range(1..=3);
        let ws = random_probs(rng, terms);
        let parts: Vec<(Rational, Matrix)> = ws
            .into_iter()
            .map(|w| {
                let mut perm: Vec<usize> = (0..k).collect();
                perm.shuffle(rng);
                (w, permutation_matrix(&perm))
            })
            .collect();
        combine(&parts)
    } else {
        let t = q(rng.gen_range(0..=3), 4);
        let flat: Matrix = vec![pi.to_vec(); k];
        combine(&[(t.clone(), identity(k)), (q(1, 1) - t, flat)])
    }
}

pub fn random_markov_spec(rng: &mut impl Rng, rank: usize, states: usize) -> MarkovSpec {
    let uniform = rng.gen_bool(0.5);
    let pi = if uniform {
        vec![q(1, states as i64); states]
    } else {
        random_probs(rng, states)
    };
    let forward: Vec<Matrix> = (0..rank).map(|_| stationary_matrix(rng, &pi, uniform)).collect();
    MarkovSpec::from_forward(categorical(pi), forward)
}

pub fn random_markov(rng: &mut impl Rng, rank: usize) -> System {
    let states = rng.gen_range(2..=3);
    System::new(rank, SystemSpec::Markov(random_markov_spec(rng, rank, states))).unwrap()
}

pub fn random_bernoulli_spec(rng: &mut impl Rng, k: usize) -> SystemSpec {
    SystemSpec::Bernoulli(BernoulliSpec {
        base: categorical(random_probs(rng, k)),
    })
}

/// Three inner states mapped onto two observed labels, both used.
pub fn random_hmm(rng: &mut impl Rng, rank: usize) -> System {
    let inner = random_markov_spec(rng, rank, 3);
    let mut letter_map = vec![0usize, 0, 1];
    letter_map.shuffle(rng);
    let spec = SystemSpec::HiddenMarkov(HiddenMarkovSpec {
        inner: Box::new(SystemSpec::Markov(inner)),
        letter_map,
        observed: vec!["x".into(), "y".into()],
    });
    System::new(rank, spec).unwrap()
}

/// Up to `max_points` points, random permutations, mass constant on orbits.
pub fn random_finite_action(rng: &mut impl Rng, rank: usize, max_points: usize) -> System {
    let n = rng.gen_range(1..=max_points);
    let generators: Vec<Vec<usize>> = (0..rank)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    // Orbits of the generated group by union-find.
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while root[x] != x {
            root[x] = root[root[x]];
            x = root[x];
        }
        x
    }
    for g in &generators {
        for (x, &gx) in g.iter().enumerate() {
            let (a, b) = (find(&mut root, x), find(&mut root, gx));
            root[a] = b;
        }
    }
    let orbit: Vec<usize> = (0..n).map(|x| find(&mut root, x)).collect();
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
    let weight: Vec<i64> = (0..n).map(|x| raw[orbit[x]]).collect();
    let total: i64 = weight.iter().sum();
    let mass = Categorical::new((0..n).map(|x| (format!("p{x}"), q(weight[x], total))));
    let spec = SystemSpec::FiniteAction(FiniteActionSpec {
        mass,
        generators,
        partition: None,
    });
    System::new(rank, spec).unwrap()
}

/// Up to three Markov or Bernoulli components.
pub fn random_direct_sum(rng: &mut impl Rng, rank: usize) -> System {
    let k = rng.gen_range(1..=3);
    let weights = random_probs(rng, k);
    let components = (0..k)
        .map(|_| {
            let k = rng.gen_range(2..=3);
            if rng.gen_bool(0.5) {
                SystemSpec::Markov(random_markov_spec(rng, rank, k))
            } else {
                random_bernoulli_spec(rng, k)
            }
        })
        .collect();
    let spec = SystemSpec::DirectSum(DirectSumSpec { weights, components });
    System::new(rank, spec).unwrap()
}
