// Temporary calibration probe (removed before release).
use mali_core::dataio::{generate_blobs_pair, generate_helix_pair, DomainDataset, PairSet};
use mali_core::evaluation::foscttm;
use mali_core::pipeline::{align, AlignParams, ProjectionKind};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn helix_run(seed: u64, params: &AlignParams) -> (f64, f64, f64) {
    let (x, y, pairs) = generate_helix_pair(300, 5, 0.05, seed).unwrap();
    let result = align(&x, &y, params, ProjectionKind::Spectral).unwrap();
    let e = result.spectral.unwrap();
    let f = foscttm(e.source_coords(), e.target_coords(), &pairs).unwrap();
    let acc = mali_core::evaluation::label_transfer(
        e.source_coords(),
        x.labels(),
        e.target_coords(),
        y.labels(),
        1,
    )
    .unwrap();
    // shuffled-pairs baseline
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000));
    let mut base = 0.0;
    for _ in 0..5 {
        let mut perm: Vec<usize> = (0..300).collect();
        perm.shuffle(&mut rng);
        let shuffled = PairSet::new((0..300).map(|i| (i, perm[i])).collect(), 300, 300).unwrap();
        base += foscttm(e.source_coords(), e.target_coords(), &shuffled).unwrap();
    }
    (f, acc, base / 5.0)
}

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "helix".into());
    match mode.as_str() {
        "helix" => {
            let params = AlignParams::default();
            let mut fs = vec![];
            let mut accs = vec![];
            let mut bases = vec![];
            for seed in 0..10 {
                let t0 = std::time::Instant::now();
                let (f, acc, base) = helix_run(seed, &params);
                println!(
                    "seed {seed}: foscttm {f:.4}  acc1 {acc:.4}  baseline {base:.4}  ({:.2}s)",
                    t0.elapsed().as_secs_f64()
                );
                fs.push(f);
                accs.push(acc);
                bases.push(base);
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            println!(
                "MEAN foscttm {:.4}  acc1 {:.4}  baseline {:.4}  ratio {:.2}",
                mean(&fs),
                mean(&accs),
                mean(&bases),
                mean(&bases) / mean(&fs)
            );
        }
        "dims" => {
            let (x, y, pairs) = generate_helix_pair(300, 5, 0.05, 0).unwrap();
            for mode_name in ["wxy", "t"] {
                let mut scores = vec![];
                for d in 2..=20 {
                    let params = AlignParams {
                        dim: d,
                        offdiag_mode: mode_name.parse().unwrap(),
                        ..AlignParams::default()
                    };
                    let result = align(&x, &y, &params, ProjectionKind::Spectral).unwrap();
                    let e = result.spectral.unwrap();
                    let f = foscttm(e.source_coords(), e.target_coords(), &pairs).unwrap();
                    scores.push(f);
                }
                let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
                let worst = scores.iter().cloned().fold(0.0, f64::max);
                println!(
                    "{mode_name}: best {best:.4} worst {worst:.4} ratio {:.2}\n  {scores:.4?}",
                    worst / best
                );
            }
        }
        "kernelsweep" => {
            let (x, y, pairs) = generate_helix_pair(300, 5, 0.05, 0).unwrap();
            let mut all = vec![];
            for alpha in [2.0, 10.0, 40.0] {
                for knn in [5, 10, 20] {
                    let params = AlignParams {
                        alpha,
                        knn,
                        ..AlignParams::default()
                    };
                    match align(&x, &y, &params, ProjectionKind::Spectral) {
                        Ok(result) => {
                            let e = result.spectral.unwrap();
                            let f = foscttm(e.source_coords(), e.target_coords(), &pairs).unwrap();
                            println!("alpha {alpha} k {knn}: foscttm {f:.4}");
                            all.push(f);
                        }
                        Err(e) => println!("alpha {alpha} k {knn}: ERROR {e}"),
                    }
                }
            }
            let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = all.iter().cloned().fold(0.0, f64::max);
            println!("spread {:.4}", max - min);
        }
        "soft" => {
            let (x, y, pairs) = generate_helix_pair(300, 5, 0.05, 0).unwrap();
            for eps in [0.0, 0.001] {
                let params = AlignParams {
                    epsilon: eps,
                    ..AlignParams::default()
                };
                let t0 = std::time::Instant::now();
                let result = align(&x, &y, &params, ProjectionKind::Spectral).unwrap();
                let e = result.spectral.unwrap();
                let f = foscttm(e.source_coords(), e.target_coords(), &pairs).unwrap();
                let masses = mali_core::transport::uniform_masses(300, 300).unwrap();
                println!(
                    "eps {eps}: foscttm {f:.4} converged {} iters {} violation {:.3e} ({:.2}s)",
                    result.coupling.converged(),
                    result.coupling.iterations(),
                    result.coupling.marginal_violation(&masses),
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        "dims3" => {
            // d-sweep with partially labeled target and kernel variants
            for seed in [0u64, 1, 2] {
                let (x, y, pairs) = generate_helix_pair(300, 5, 0.05, seed).unwrap();
                for (frac, alpha, knn, eps) in [
                    (0.5, 10.0, 10, 0.0),
                    (0.5, 2.0, 10, 0.0),
                    (0.3, 10.0, 10, 0.0),
                    (1.0, 2.0, 20, 0.0),
                    (1.0, 10.0, 10, 0.05),
                    (0.5, 10.0, 10, 0.001),
                ] {
                    let ym = y.mask_labels(frac, seed.wrapping_add(500)).unwrap();
                    let mut scores = vec![];
                    for d in 2..=20 {
                        let params = AlignParams {
                            alpha,
                            knn,
                            dim: d,
                            epsilon: eps,
                            sinkhorn_max_iter: 3000,
                            ..AlignParams::default()
                        };
                        let result = align(&x, &ym, &params, ProjectionKind::Spectral).unwrap();
                        let e = result.spectral.unwrap();
                        scores
                            .push(foscttm(e.source_coords(), e.target_coords(), &pairs).unwrap());
                    }
                    let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
                    let worst = scores.iter().cloned().fold(0.0, f64::max);
                    println!(
                        "seed {seed} frac {frac} alpha {alpha} k {knn} eps {eps}: best {best:.4} worst {worst:.4} ratio {:.2}",
                        worst / best
                    );
                }
            }
        }
        "softdecay" => {
            let (x, y, _) = generate_helix_pair(300, 5, 0.05, 0).unwrap();
            for max_iter in [10_000usize, 40_000, 160_000] {
                let params = AlignParams {
                    epsilon: 0.001,
                    sinkhorn_max_iter: max_iter,
                    ..AlignParams::default()
                };
                let t0 = std::time::Instant::now();
                let result = align(&x, &y, &params, ProjectionKind::Spectral).unwrap();
                let masses = mali_core::transport::uniform_masses(300, 300).unwrap();
                println!(
                    "max_iter {max_iter}: converged {} violation {:.3e} ({:.1}s)",
                    result.coupling.converged(),
                    result.coupling.marginal_violation(&masses),
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        "dims2" => {
            // d-sweep under alternative couplings / weights
            let (x, y, pairs) = generate_helix_pair(300, 5, 0.05, 0).unwrap();
            for (eps, mu) in [(0.0, 0.05), (0.0, 0.1), (0.0, 0.2), (0.001, 0.1), (0.0, 0.9)] {
                let mut scores = vec![];
                for d in 2..=20 {
                    let params = AlignParams {
                        dim: d,
                        epsilon: eps,
                        mu,
                        sinkhorn_max_iter: 3000,
                        ..AlignParams::default()
                    };
                    let result = align(&x, &y, &params, ProjectionKind::Spectral).unwrap();
                    let e = result.spectral.unwrap();
                    scores.push(foscttm(e.source_coords(), e.target_coords(), &pairs).unwrap());
                }
                let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
                let worst = scores.iter().cloned().fold(0.0, f64::max);
                println!("eps {eps} mu {mu}: best {best:.4} worst {worst:.4} ratio {:.2}", worst / best);
            }
        }
        "blobs" => {
            // criterion-4 style: duplicate + shuffle
            for (sep, alpha) in [(2.0, 2.0f64), (3.0, 2.0), (2.0, 10.0)] {
                let (x, _, _) = generate_blobs_pair(200, 4, 6, 6, sep, 7).unwrap();
                let n = 200;
                let mut rng = ChaCha8Rng::seed_from_u64(8);
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                // target row j = source row perm[j]
                let mut tf = Array2::zeros((n, 6));
                let mut tl = vec![None; n];
                for j in 0..n {
                    for c in 0..6 {
                        tf[[j, c]] = x.features()[[perm[j], c]];
                    }
                    tl[j] = x.labels()[perm[j]].clone();
                }
                let y = DomainDataset::new(tf, tl, "target").unwrap();
                let params = AlignParams {
                    alpha,
                    ..AlignParams::default()
                };
                match align(&x, &y, &params, ProjectionKind::Both) {
                    Ok(result) => {
                        let mut exact = true;
                        for j in 0..n {
                            if result.coupling.values()[[perm[j], j]] != 1.0 {
                                exact = false;
                            }
                        }
                        let pairs =
                            PairSet::new((0..n).map(|j| (perm[j], j)).collect(), n, n).unwrap();
                        let amb = result.barycentric.unwrap();
                        let f =
                            foscttm(amb.view(), y.features().view(), &pairs).unwrap();
                        println!("sep {sep} alpha {alpha}: exact {exact} ambient foscttm {f}");
                    }
                    Err(e) => println!("sep {sep} alpha {alpha}: ERROR {e}"),
                }
            }
        }
        other => eprintln!("unknown probe '{other}'"),
    }
}
