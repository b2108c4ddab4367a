mod common;

use std::collections::BTreeMap;

use common::{random_direct_sum, random_finite_action, random_hmm, random_markov, rng};
use finv::corpus;
use finv::marginals::{marginal, oracle_marginal, stream_entropy};
use finv::word::prefix_hull;
use finv::{ComputeOptions, EntropyValue, Error, OrderedBall, PatternDistribution, Rational, System, Weight, Word};
use rand::seq::SliceRandom;
use rand::Rng;

const CAP: u64 = 1 << 20;

fn words(s: &str) -> Vec<Word> {
    s.split(',').map(|w| w.parse().unwrap()).collect()
}

fn same<W: Weight>(a: &PatternDistribution<W>, b: &PatternDistribution<W>) -> bool {
    a.support() == b.support() && a.probs() == b.probs()
}

/// A random prefix-closed subset of `B_2`.
fn random_connected(rng: &mut impl Rng, rank: usize) -> Vec<Word> {
    let ball = OrderedBall::new(rank, 2, &Default::default(), 1000).unwrap();
    let mut picks: Vec<Word> = ball.elements().to_vec();
    picks.shuffle(rng);
    let k = rng.gen_range(1..=6);
    prefix_hull(&picks[..k])
}

fn random_systems(seed: u64) -> Vec<System> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for _ in 0..6 {
        out.push(random_markov(&mut r, 2));
        out.push(random_hmm(&mut r, 2));
        out.push(random_finite_action(&mut r, 2, 5));
        out.push(random_direct_sum(&mut r, 2));
    }
    out.extend(corpus::ENTRIES.iter().map(|e| e.system()).filter(|s| s.rank == 2));
    out
}

#[test]
fn matches_oracle_on_random_markov_balls() {
    let mut r = rng(10);
    let b1 = OrderedBall::new(2, 1, &Default::default(), 100).unwrap();
    for _ in 0..50 {
        let sys = random_markov(&mut r, 2);
        let fast = marginal::<Rational>(&sys, b1.elements(), &ComputeOptions::default()).unwrap();
        let slow = oracle_marginal::<Rational>(&sys, b1.elements(), CAP).unwrap();
        assert!(same(&fast, &slow));
        assert_eq!(fast.total(), Rational::from_integer(1.into()));
    }
}

#[test]
fn matches_oracle_on_random_connected_sets() {
    let mut r = rng(11);
    for sys in random_systems(12) {
        for _ in 0..4 {
            let set = random_connected(&mut r, 2);
            let fast = marginal::<Rational>(&sys, &set, &ComputeOptions::default()).unwrap();
            let slow = oracle_marginal::<Rational>(&sys, &set, CAP).unwrap();
            assert!(same(&fast, &slow), "{} on {set:?}", sys.spec.kind());
        }
    }
}

#[test]
fn streamed_entropy_sums_out_hidden_hull_vertices() {
    let mut r = rng(13);
    let ball = OrderedBall::new(2, 2, &Default::default(), 1000).unwrap();
    for sys in random_systems(14) {
        let mut picks = ball.elements().to_vec();
        picks.shuffle(&mut r);
        let set = &picks[..r.gen_range(1..=5)];
        let slow = oracle_marginal::<Rational>(&sys, set, CAP).unwrap().entropy();
        let exact = stream_entropy::<Rational>(&sys, set, &ComputeOptions::default()).unwrap();
        assert!(exact.sub(&slow).is_zero(), "{} on {set:?}", sys.spec.kind());
        let float = stream_entropy::<f64>(&sys, set, &ComputeOptions::default()).unwrap();
        assert!((float - slow.to_f64()).abs() < 1e-10);
    }
}

#[test]
fn restriction_is_consistent() {
    let mut r = rng(15);
    let opts = ComputeOptions::default();
    for sys in random_systems(16) {
        let set = random_connected(&mut r, 2);
        let big = marginal::<Rational>(&sys, &set, &opts).unwrap();
        let mut sub = set.clone();
        sub.shuffle(&mut r);
        sub.truncate(r.gen_range(1..=set.len()));
        let hull = prefix_hull(&sub);
        let direct = marginal::<Rational>(&sys, &hull, &opts).unwrap().restrict(&sub).unwrap();
        assert!(same(&big.restrict(&sub).unwrap(), &direct));
    }
}

/// Law of the labels on `g·F`, re-indexed by `F`.
fn shifted(pd: &PatternDistribution<Rational>, g: &Word, set: &[Word]) -> BTreeMap<Vec<u8>, Rational> {
    let moved: Vec<Word> = set.iter().map(|h| g.multiply(h)).collect();
    let sub = pd.restrict(&moved).unwrap();
    let pos: Vec<usize> = moved
        .iter()
        .map(|w| sub.support().binary_search(w).unwrap())
        .collect();
    sub.probs()
        .iter()
        .map(|(k, p)| (pos.iter().map(|&i| k[i]).collect(), p.clone()))
        .collect()
}

#[test]
fn laws_are_invariant_under_left_translation() {
    let opts = ComputeOptions::default();
    let b1 = OrderedBall::new(2, 1, &Default::default(), 100).unwrap();
    for sys in random_systems(17) {
        let small = marginal::<Rational>(&sys, b1.elements(), &opts).unwrap();
        let expect: BTreeMap<Vec<u8>, Rational> =
            small.probs().iter().map(|(k, p)| (k.to_vec(), p.clone())).collect();
        for s in b1.sphere(1) {
            // B_1 ∪ s·B_1 is connected and contains the translate.
            let mut set = b1.elements().to_vec();
            set.extend(b1.elements().iter().map(|h| s.multiply(h)));
            let big = marginal::<Rational>(&sys, &set, &opts).unwrap();
            assert_eq!(shifted(&big, s, b1.elements()), expect, "{} shifted by {s}", sys.spec.kind());
        }
    }
}

#[test]
fn documented_examples() {
    let opts = ComputeOptions::default();
    let fair = corpus::entry("bernoulli-fair").unwrap().system();
    let b1 = OrderedBall::new(2, 1, &Default::default(), 100).unwrap();
    let pd = marginal::<Rational>(&fair, b1.elements(), &opts).unwrap();
    assert_eq!(pd.len(), 32);
    assert!(pd.probs().values().all(|p| *p == Rational::new(1.into(), 32.into())));
    let h = pd.entropy().to_f64();
    assert!((h - 5.0 * std::f64::consts::LN_2).abs() < 1e-12);
    assert!(pd.conditional_between(b1.elements()).unwrap().is_zero());

    let markov = corpus::entry("markov-symmetric").unwrap().system();
    let pd = marginal::<Rational>(&markov, &words("e,a"), &opts).unwrap();
    let half = |x: i64, y: i64| Rational::new(x.into(), y.into()) / Rational::from_integer(2.into());
    assert_eq!(pd.prob(&[0, 0]), half(9, 10));
    assert_eq!(pd.prob(&[0, 1]), half(1, 10));
    let c = pd.conditional_between(&words("e")).unwrap().to_f64();
    assert!((c - 0.325_082_973_391_448_2).abs() < 1e-12);

    let fixed = System::from_toml_str(
        r#"rank = 2
[system]
kind = "finite-action"
mass = { "p" = "1/2", "q" = "1/4", "s" = "1/4" }
[system.generators]
a = { "p" = "p", "q" = "q", "s" = "s" }
b = { "p" = "p", "q" = "q", "s" = "s" }
"#,
    )
    .unwrap();
    let b2 = OrderedBall::new(2, 2, &Default::default(), 100).unwrap();
    assert_eq!(marginal::<Rational>(&fixed, b2.elements(), &opts).unwrap().len(), 3);
}

#[test]
fn disconnected_sets_name_their_hull() {
    let markov = corpus::entry("markov-symmetric").unwrap().system();
    let err = marginal::<Rational>(&markov, &words("e,ab"), &ComputeOptions::default()).unwrap_err();
    match err {
        Error::Disconnected { hull_size, hull } => {
            assert_eq!(hull_size, 3);
            assert!(hull.contains("ab") && hull.contains('a'));
        }
        other => panic!("unexpected {other}"),
    }
    let bern = corpus::entry("bernoulli-fair").unwrap().system();
    assert!(marginal::<Rational>(&bern, &words("e,ab"), &ComputeOptions::default()).is_ok());
}

#[test]
fn cap_is_enforced() {
    let markov = corpus::entry("markov-symmetric").unwrap().system();
    let b2 = OrderedBall::new(2, 2, &Default::default(), 100).unwrap();
    let opts = ComputeOptions {
        pattern_cap: 1000,
        ..Default::default()
    };
    assert!(matches!(
        marginal::<f64>(&markov, b2.elements(), &opts),
        Err(Error::CapExceeded { .. })
    ));
    assert!(matches!(
        oracle_marginal::<f64>(&markov, b2.elements(), 1000),
        Err(Error::CapExceeded { .. })
    ));
}
