mod common;

use std::f64::consts::LN_2;

use common::{q, random_direct_sum, random_finite_action, random_hmm, random_markov, rng};
use finv::corpus;
use finv::engine::{EntropyEngine, Strategy};
use finv::systems::{BernoulliSpec, Categorical, DirectSumSpec};
use finv::{
    ComputeOptions, Conditioning, EntropyValue, FEntropy, LogLinear, OrderedBall, Rational, System, SystemSpec,
    Word,
};
use rand::Rng;

const T: Conditioning = Conditioning::Trivial;

fn fe(sys: &System) -> FEntropy<'_> {
    FEntropy::new(sys, ComputeOptions::default()).unwrap()
}

fn sys(name: &str) -> System {
    corpus::entry(name).unwrap().system()
}

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn ln(n: i64) -> LogLinear {
    LogLinear::ln(&q(n, 1))
}

fn bernoulli(rank: usize, probs: &[(i64, i64)]) -> System {
    let base = Categorical::new(probs.iter().enumerate().map(|(i, &(n, d))| (i.to_string(), q(n, d))));
    System::new(rank, SystemSpec::Bernoulli(BernoulliSpec { base })).unwrap()
}

#[test]
fn bernoulli_routes() {
    let s = sys("bernoulli-fair");
    let f = fe(&s);
    assert_eq!(f.f_ball::<Rational>(0, T).unwrap(), ln(2));
    assert_eq!(f.f_sphere::<Rational>(0, T).unwrap(), ln(2));
    let d = f.f_decay::<Rational>(1, T).unwrap();
    assert!(d.exact);
    assert_eq!(d.value, finv::Value::Exact(ln(2)));
    for g in OrderedBall::new(2, 2, &Default::default(), 100).unwrap().elements().iter().skip(1) {
        assert!(f.delta::<Rational>(g, T).unwrap().is_zero(), "δ({g})");
    }
}

#[test]
fn coset_routes_and_decay() {
    let s = sys("coset-bernoulli");
    let f = fe(&s);
    assert!(f.delta::<Rational>(&w("a"), T).unwrap().sub(&ln(2)).is_zero());
    assert!(f.delta::<Rational>(&w("A"), T).unwrap().sub(&ln(2)).is_zero());
    assert!(f.delta::<Rational>(&w("b"), T).unwrap().is_zero());
    assert!(f.delta::<Rational>(&w("B"), T).unwrap().is_zero());
    assert!(f.f_decay::<Rational>(2, T).unwrap().value.agrees(&finv::Value::Exact(LogLinear::zero()), 0.0));
    assert!(f.f_ball::<Rational>(1, T).unwrap().is_zero());
}

#[test]
fn finite_action_is_constant() {
    let mut r = rng(20);
    for _ in 0..10 {
        let rank = r.gen_range(1..=3);
        let s = random_finite_action(&mut r, rank, 5);
        let f = fe(&s);
        let atomic = f.f_atomic::<Rational>().unwrap().value;
        for n in 0..=1 {
            let v = f.f_ball::<Rational>(n, T).unwrap().into_value();
            assert!(v.agrees(&atomic, 0.0));
            let v = f.f_sphere::<Rational>(n, T).unwrap().into_value();
            assert!(v.agrees(&atomic, 0.0));
        }
        if rank == 1 {
            assert!(atomic.agrees(&finv::Value::Exact(LogLinear::zero()), 0.0));
        }
        let g = f.growth_profile::<Rational>(1, T).unwrap();
        assert!(g.iter().all(|row| row.increment.to_f64() == 0.0));
    }
}

#[test]
fn two_point_action_is_minus_log_two() {
    let s = System::from_toml_str(
        r#"rank = 2
[system]
kind = "finite-action"
mass = { "p" = "1/2", "q" = "1/2" }
[system.generators]
a = { "p" = "q", "q" = "p" }
b = { "p" = "p", "q" = "q" }
"#,
    )
    .unwrap();
    let v = fe(&s).f_atomic::<Rational>().unwrap().value;
    assert!(v.agrees(&finv::Value::Exact(LogLinear::zero().sub(&ln(2))), 0.0));
}

#[test]
fn markov_routes_agree_and_decay_vanishes_beyond_radius_one() {
    let mut r = rng(21);
    for _ in 0..10 {
        let s = random_markov(&mut r, 2);
        let f = fe(&s);
        let b0 = f.f_ball::<Rational>(0, T).unwrap();
        assert!(f.f_ball::<Rational>(1, T).unwrap().sub(&b0).is_zero());
        assert!(f.f_sphere::<Rational>(1, T).unwrap().sub(&b0).is_zero());
        assert!(f.f_decay::<Rational>(2, T).unwrap().value.agrees(&b0.clone().into_value(), 0.0));
        for g in ["ab", "aa", "Ba", "bA"] {
            assert!(f.delta::<Rational>(&w(g), T).unwrap().is_zero(), "δ({g})");
        }
        let rows = f.growth_profile::<Rational>(2, T).unwrap();
        for n in 1..rows.len() {
            let prev = rows[n - 1].increment.clone();
            let cur = rows[n].increment.clone();
            let (finv::Value::Exact(p), finv::Value::Exact(c)) = (prev, cur) else { unreachable!() };
            assert!(c.sub(&p.scale_rational(&q(3, 1))).is_zero(), "growth at {n}");
        }
    }
}

#[test]
fn rank_one_chain_gives_entropy_rate() {
    let s = sys("markov-rank1");
    let f = fe(&s);
    let rate = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
    for n in 0..=3 {
        assert!((f.f_ball::<f64>(n, T).unwrap() - rate).abs() < 1e-9);
    }
}

#[test]
fn telescoping_along_geodesics() {
    let mut r = rng(22);
    let ball = OrderedBall::new(2, 2, &Default::default(), 100).unwrap();
    for _ in 0..20 {
        let s = random_markov(&mut r, 2);
        let f = fe(&s);
        let target = &ball.elements()[r.gen_range(1..ball.len())];
        let path = Word::identity().geodesic(target);
        let start = r.gen_range(0..path.len() - 1);
        let path = &path[start..];
        let sum = path[1..]
            .iter()
            .fold(LogLinear::zero(), |acc, g| acc.add(&f.delta::<Rational>(g, T).unwrap()));
        let diff = f
            .conditional_increment::<Rational>(&path[0], T)
            .unwrap()
            .sub(&f.conditional_increment::<Rational>(path.last().unwrap(), T).unwrap());
        assert!(sum.sub(&diff).is_zero());
    }
}

#[test]
fn decay_truncation_equals_sphere_formula_one_radius_earlier() {
    let mut r = rng(23);
    for _ in 0..3 {
        let s = random_hmm(&mut r, 2);
        let f = fe(&s);
        let sphere = f.f_sphere::<f64>(1, T).unwrap();
        let decay = f.f_decay::<f64>(2, T).unwrap().value.to_f64();
        assert!((sphere - decay).abs() < 1e-10);
        let ball0 = f.f_ball::<f64>(0, T).unwrap();
        let ball1 = f.f_ball::<f64>(1, T).unwrap();
        assert!(ball1 <= ball0 + 1e-9);
        assert!(sphere <= ball1 + 1e-9);
    }
}

#[test]
fn direct_sum_identity() {
    let mut r = rng(24);
    for _ in 0..5 {
        let s = random_direct_sum(&mut r, 2);
        let d = fe(&s).f_direct_sum::<Rational>(1).unwrap();
        assert!(d.direct.agrees(&d.formula, 0.0));
        assert!(d.relative.agrees(&d.relative_expected, 0.0));
    }
    // ½ fair ⊕ ½ uniform on three letters.
    let s = System::new(
        2,
        SystemSpec::DirectSum(DirectSumSpec {
            weights: vec![q(1, 2), q(1, 2)],
            components: vec![
                bernoulli(2, &[(1, 2), (1, 2)]).spec,
                bernoulli(2, &[(1, 3), (1, 3), (1, 3)]).spec,
            ],
        }),
    )
    .unwrap();
    let d = fe(&s).f_direct_sum::<f64>(1).unwrap();
    let expected = 0.5 * LN_2 + 0.5 * 3f64.ln() - LN_2;
    assert!((d.formula.to_f64() - expected).abs() < 1e-12);
    assert!((d.direct.to_f64() - expected).abs() < 1e-12);
    // A single component of weight one.
    let s = System::new(
        2,
        SystemSpec::DirectSum(DirectSumSpec {
            weights: vec![q(1, 1)],
            components: vec![bernoulli(2, &[(1, 4), (3, 4)]).spec],
        }),
    )
    .unwrap();
    let d = fe(&s).f_direct_sum::<Rational>(1).unwrap();
    assert!(d.formula.agrees(&d.components[0], 0.0));
}

#[test]
fn closed_forms_match_enumeration() {
    let mut r = rng(25);
    let ball = OrderedBall::new(2, 2, &Default::default(), 100).unwrap();
    let mut systems = vec![sys("coset-bernoulli"), sys("bernoulli-skew")];
    for _ in 0..4 {
        systems.push(random_markov(&mut r, 2));
        systems.push(random_direct_sum(&mut r, 2));
    }
    for s in &systems {
        let structural = EntropyEngine::new(s, ComputeOptions::default());
        let enumerate = structural.clone().with_strategy(Strategy::Enumerate);
        for k in [1, 3, 5, 8, 12] {
            let set = &ball.elements()[..k];
            let a = structural.entropy::<Rational>(set, T).unwrap();
            let b = enumerate.entropy::<Rational>(set, T).unwrap();
            assert!(a.sub(&b).is_zero(), "{} on {k} elements", s.spec.kind());
        }
    }
}

#[test]
fn float_and_rational_routes_agree() {
    let mut r = rng(26);
    for _ in 0..5 {
        for s in [random_markov(&mut r, 2), random_direct_sum(&mut r, 2), random_hmm(&mut r, 2)] {
            let f = fe(&s);
            let exact = f.f_ball::<Rational>(1, T).unwrap().to_f64();
            let float = f.f_ball::<f64>(1, T).unwrap();
            assert!((exact - float).abs() < 1e-9, "{} {exact} {float}", s.spec.kind());
        }
    }
}

#[test]
fn cyclic_entropy_examples() {
    let bern = sys("bernoulli-fair");
    for k in 1..=3 {
        let v = fe(&bern).ks_cyclic::<Rational>(&w("a"), 0, k, T).unwrap();
        assert_eq!(v, ln(2));
    }
    let coset = sys("coset-bernoulli");
    assert!(fe(&coset).ks_cyclic::<Rational>(&w("a"), 0, 2, T).unwrap().is_zero());
    let markov = sys("markov-symmetric");
    let v = fe(&markov).ks_cyclic::<f64>(&w("a"), 0, 1, T).unwrap();
    assert!((v - 0.325_082_973_391_448_2).abs() < 1e-12);
    assert!(fe(&markov).ks_cyclic::<f64>(&Word::identity(), 0, 1, T).is_err());
}

#[test]
fn cyclic_formula_examples() {
    for name in ["bernoulli-fair", "coset-bernoulli", "finite-action-cycle", "markov-symmetric"] {
        let s = sys(name);
        let c = fe(&s).rformula_check::<Rational>(0, 4, T).unwrap();
        let right = c.right.expect("terms stabilize");
        assert!(right.agrees(&c.left, 0.0), "{name}");
    }
}

#[test]
fn relative_routes_on_direct_sums() {
    let s = sys("direct-sum");
    let f = fe(&s);
    let rel = f.f_ball::<Rational>(1, Conditioning::Components).unwrap().to_f64();
    let fair = LN_2;
    let markov = -LN_2 + 2.0 * -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
    assert!((rel - 0.5 * (fair + markov)).abs() < 1e-12);
    let abs = f.f_ball::<Rational>(1, T).unwrap().to_f64();
    assert!((abs - (rel - LN_2)).abs() < 1e-12);
}
