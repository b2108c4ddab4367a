//! Serial against parallel execution of the pattern-enumeration core.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use finv::corpus;
use finv::marginals::stream_entropy;
use finv::reduce::{chunked, CompensatedSum};
use finv::{ComputeOptions, ExecPolicy, OrderedBall};

const POLICIES: [(&str, ExecPolicy); 2] = [("serial", ExecPolicy::Serial), ("parallel", ExecPolicy::Parallel)];

fn hidden_markov_ball(c: &mut Criterion) {
    let sys = corpus::entry("hidden-markov").unwrap().system();
    let ball = OrderedBall::new(2, 2, &Default::default(), usize::MAX).unwrap();
    let mut group = c.benchmark_group("hmm-ball2-entropy");
    group.sample_size(10);
    for (name, policy) in POLICIES {
        let opts = ComputeOptions {
            policy,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| stream_entropy::<f64>(&sys, ball.elements(), opts).unwrap())
        });
    }
    group.finish();
}

fn compensated_sum(c: &mut Criterion) {
    let n = 1usize << 20;
    let mut group = c.benchmark_group("compensated-sum");
    for (name, policy) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| {
                chunked(
                    policy,
                    n,
                    1 << 14,
                    |range| {
                        let mut s = CompensatedSum::default();
                        for i in range {
                            s.add(1.0 / (i + 1) as f64);
                        }
                        s
                    },
                    |mut a, b| {
                        a.merge(&b);
                        a
                    },
                )
                .map(|s| s.value())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, hidden_markov_ball, compensated_sum);
criterion_main!(benches);
