use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use csp_core::verify::{run_suite, Exec, Suite, SuiteConfig};

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for suite in [Suite::TreeMargin, Suite::BipartiteNoLoss] {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let cfg = SuiteConfig {
                max_n: Some(6),
                samples: Some(20),
                exec,
                ..SuiteConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(suite.name(), format!("{exec:?}")), &cfg, |b, cfg| {
                b.iter(|| {
                    let r = run_suite(suite, cfg);
                    assert!(r.passed());
                    r.checked
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
