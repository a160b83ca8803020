//! Synthetic benchmark pairs: a 3-D helix/line pair sharing a latent curve
//! parameter, and per-class Gaussian blobs in independent ambient spaces.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DomainDataset, PairSet};
use crate::error::{Error, Result};

/// Latent parameter range for the helix pair: two full turns.
const T_MAX: f64 = 4.0 * std::f64::consts::PI;
/// Vertical pitch of the helix and the matching line.
const PITCH: f64 = 0.15;

fn check_class_params(n: usize, classes: usize) -> Result<()> {
    if classes < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 classes to bridge domains, got {classes}"
        )));
    }
    if n < classes {
        return Err(Error::InvalidParameter(format!(
            "sample count {n} is smaller than class count {classes}"
        )));
    }
    Ok(())
}

fn class_of(t: f64, classes: usize) -> usize {
    // equal-width bins of the latent parameter, shared by both domains
    let bin = (t / T_MAX * classes as f64).floor() as usize;
    bin.min(classes - 1)
}

/// Generate a paired helix/line benchmark.
///
/// A shared latent parameter `t_i ~ U[0, 4*pi]` drives both domains: the
/// source samples a 3-D helix `(cos t, sin t, 0.15 t)`, the target a straight
/// line `(0, 0, 0.15 t)`, each plus isotropic Gaussian noise. Row `i` of both
/// domains gets the label of `t_i`'s equal-width bin, and the returned pair
/// set is the identity pairing.
pub fn generate_helix_pair(
    n: usize,
    classes: usize,
    noise: f64,
    seed: u64,
) -> Result<(DomainDataset, DomainDataset, PairSet)> {
    check_class_params(n, classes)?;
    if !noise.is_finite() || noise < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise standard deviation must be >= 0, got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // one jittered sample per stratum: uniform coverage of [0, T_MAX] with
    // the largest gap bounded by two strata, so the chain graph stays
    // connected even under sharply decaying kernels
    let stratum = T_MAX / n as f64;
    let t: Vec<f64> = (0..n)
        .map(|i| (i as f64 + rng.random_range(0.0..1.0)) * stratum)
        .collect();

    let mut source = Array2::zeros((n, 3));
    for (i, &ti) in t.iter().enumerate() {
        source[[i, 0]] = ti.cos();
        source[[i, 1]] = ti.sin();
        source[[i, 2]] = PITCH * ti;
    }
    add_noise(&mut source, noise, &mut rng);

    let mut target = Array2::zeros((n, 3));
    for (i, &ti) in t.iter().enumerate() {
        target[[i, 2]] = PITCH * ti;
    }
    add_noise(&mut target, noise, &mut rng);

    let labels: Vec<Option<String>> = t
        .iter()
        .map(|&ti| Some(class_of(ti, classes).to_string()))
        .collect();

    let x = DomainDataset::new(source, labels.clone(), "source")?;
    let y = DomainDataset::new(target, labels, "target")?;
    Ok((x, y, PairSet::identity(n)))
}

/// Generate paired per-class Gaussian blobs with shared class structure but
/// independent ambient spaces (and possibly different dimensionality).
///
/// Class centers are drawn as `separation * N(0, I)` independently per
/// domain; row `i` belongs to class `i mod classes` in both domains, so the
/// identity pairing matches samples within their class.
pub fn generate_blobs_pair(
    n: usize,
    classes: usize,
    dims_source: usize,
    dims_target: usize,
    separation: f64,
    seed: u64,
) -> Result<(DomainDataset, DomainDataset, PairSet)> {
    check_class_params(n, classes)?;
    if dims_source == 0 || dims_target == 0 {
        return Err(Error::InvalidParameter(
            "feature dimensions must be >= 1".to_string(),
        ));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "separation must be >= 0, got {separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers_source = sample_centers(classes, dims_source, separation, &mut rng);
    let centers_target = sample_centers(classes, dims_target, separation, &mut rng);

    let mut source = Array2::zeros((n, dims_source));
    for i in 0..n {
        let c = i % classes;
        for j in 0..dims_source {
            let eps: f64 = rng.sample(StandardNormal);
            source[[i, j]] = centers_source[[c, j]] + eps;
        }
    }
    let mut target = Array2::zeros((n, dims_target));
    for i in 0..n {
        let c = i % classes;
        for j in 0..dims_target {
            let eps: f64 = rng.sample(StandardNormal);
            target[[i, j]] = centers_target[[c, j]] + eps;
        }
    }

    let labels: Vec<Option<String>> = (0..n).map(|i| Some((i % classes).to_string())).collect();
    let x = DomainDataset::new(source, labels.clone(), "source")?;
    let y = DomainDataset::new(target, labels, "target")?;
    Ok((x, y, PairSet::identity(n)))
}

fn sample_centers(
    classes: usize,
    dims: usize,
    separation: f64,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let mut centers = Array2::zeros((classes, dims));
    for c in 0..classes {
        for j in 0..dims {
            let g: f64 = rng.sample(StandardNormal);
            centers[[c, j]] = separation * g;
        }
    }
    centers
}

fn add_noise(points: &mut Array2<f64>, noise: f64, rng: &mut ChaCha8Rng) {
    if noise == 0.0 {
        return;
    }
    for v in points.iter_mut() {
        let eps: f64 = rng.sample(StandardNormal);
        *v += noise * eps;
    }
}
