use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use critcircle::bounds::{fit_cubic, sample_d1_upper, tracker_campaign, GridSpec, Tracker};
use critcircle::circle_map::golden_standard;
use critcircle::exec::Exec;
use critcircle::siegel::blaschke::golden;
use critcircle::siegel::{render, RasterSpec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn julia_raster(c: &mut Criterion) {
    let f = golden();
    let spec = RasterSpec {
        resolution: 256,
        ..RasterSpec::default()
    };
    let mut g = c.benchmark_group("render_256");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| render(&f, &spec, exec)));
    }
    g.finish();
}

fn tracker(c: &mut Criterion) {
    let f = golden_standard();
    let t = Tracker::new(&f, 6, 0.2, 50.0).unwrap();
    let samples = sample_d1_upper(t.discs[0], 200, 1);
    let mut g = c.benchmark_group("campaign_n6");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| tracker_campaign(&t, &samples, exec))
        });
    }
    g.finish();
}

fn cubic(c: &mut Criterion) {
    let f = golden_standard();
    let mut g = c.benchmark_group("fit_cubic_n8");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_cubic(&f, 8, GridSpec::default(), 5.0, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, julia_raster, tracker, cubic);
criterion_main!(benches);
