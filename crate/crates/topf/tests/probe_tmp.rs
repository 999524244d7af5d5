use topf::bench::{adjusted_rand_index, kmeans};
use topf::harmonic::WeightScheme;
use topf::{generate_benchmark, topf as run_topf, BenchmarkDataset, BenchmarkSpec, PointCloud, TopfConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn probe_full_scale() {
    let ds = BenchmarkDataset::TwoSpheresTwoCircles;
    let t0 = std::time::Instant::now();
    let pc = generate_benchmark(&BenchmarkSpec::new(ds, 1)).unwrap();
    let res = run_topf(&pc, &TopfConfig::default()).unwrap();
    let t1 = t0.elapsed().as_secs_f64();
    let rows = res.matrix.augmented_rows();
    let pred = kmeans(&rows, 4, 7, 10).unwrap();
    let pred: Vec<i64> = pred.iter().map(|&c| c as i64).collect();
    let ari = adjusted_rand_index(pc.labels().unwrap(), &pred).unwrap();
    println!("full 2S2C: n={} features={} ARI {:.3} topf {:.2}s total {:.2}s",
        pc.len(), res.matrix.n_features(), ari, t1, t0.elapsed().as_secs_f64());
}

#[test]
fn probe_circle_theorem() {
    // 100 exact unit-circle points + 50 far blob points.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut points: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            vec![a.cos(), a.sin()]
        })
        .collect();
    for _ in 0..50 {
        points.push(vec![5.0 + rng.gen::<f64>(), rng.gen::<f64>() - 0.5]);
    }
    let pc = PointCloud::new(points, None).unwrap();
    let mut config = TopfConfig::default();
    config.weights = WeightScheme::Unweighted;
    let res = run_topf(&pc, &config).unwrap();
    println!("circle: {} features", res.matrix.n_features());
    for (j, m) in res.matrix.meta.iter().enumerate() {
        let col = res.matrix.column(j);
        let on_min = col[..100].iter().cloned().fold(f64::INFINITY, f64::min);
        let off_max = col[100..].iter().cloned().fold(0.0f64, f64::max);
        println!("  col {j} dim {} [{:.4},{:.4}] on_min={:.6} off_max={:.2e}",
            m.dim, m.birth, m.death, on_min, off_max);
    }
}
