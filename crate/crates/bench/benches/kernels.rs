use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use eedesign::analytic::energy_efficiency;
use eedesign::geometry::{sample_drop_with, BsCount};
use eedesign::mc::channel::{draw, ChannelScenario};
use eedesign::{alternating_optimize, Combiner, DesignPoint, TorusRegion};
use eedesign_bench::{design, network, power_model};

fn closed_form(c: &mut Criterion) {
    let net = network(3.0);
    let pm = power_model(&net);
    let dp = design();
    c.bench_function("energy_efficiency", |b| {
        b.iter(|| energy_efficiency(black_box(&net), &pm, black_box(&dp), Combiner::Zf))
    });
    let start = DesignPoint::new(2.0, 8.0, 64.0);
    for combiner in Combiner::ALL {
        c.bench_function(&format!("alternating_optimize_{combiner}"), |b| {
            b.iter(|| alternating_optimize(black_box(&net), &pm, start, combiner))
        });
    }
}

fn sampling(c: &mut Criterion) {
    let net = network(3.0);
    let region = TorusRegion::default();
    let mut i = 0;
    c.bench_function("sample_drop_lambda100_k2", |b| {
        b.iter(|| {
            i += 1;
            sample_drop_with(&net, &region, 2, 1, i, BsCount::Poisson)
        })
    });
    let scn = ChannelScenario::small(&net, &DesignPoint::new(3.0, 3.0, 8.0), 9, 1).unwrap();
    let mut j = 0;
    c.bench_function("channel_draw_m8_k3", |b| {
        b.iter(|| {
            j += 1;
            draw(&scn, 1, j)
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = closed_form, sampling
}
criterion_main!(benches);
