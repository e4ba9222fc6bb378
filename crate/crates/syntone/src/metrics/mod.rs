//! Supervised disentanglement metrics.
//!
//! All five scores are computed from one shared substrate: a plug-in
//! (histogram) estimate of the mutual information between each latent
//! dimension and each ground-truth factor. Latents are discretized into
//! 20 uniform-width bins over their observed range; factors enter as
//! their discrete indices. Everything is in nats.
//!
//! Scores:
//!
//! * `mig` — normalized gap between the two latents most informative
//!   about each factor; compactness, higher is better, in [0, 1].
//! * `sap` — gap between the two best single-latent predictors of each
//!   factor (nearest-class-centroid, seeded 50/50 split); in [0, 1].
//! * `dcimig` — per-latent gaps aggregated over factors, normalized by
//!   total factor entropy; in [0, 1].
//! * `jemmig` — joint entropy minus the MI gap, reported raw in nats;
//!   lower is better, 0 is ideal.
//! * `modularity` — deviation of each latent's MI profile from the
//!   one-factor ideal; in [0, 1].

pub mod probes;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::synth::FactorTuple;

pub use probes::{probe_representation, ProbeKind};

/// Number of ground-truth factors (timbre, amplitude, frequency).
pub const N_FACTORS: usize = 3;
/// Default number of discretization bins per latent.
pub const DEFAULT_BINS: usize = 20;
/// Latents whose best MI falls below this are excluded from modularity.
pub const DEAD_LATENT_EPS: f64 = 1e-6;

/// Latent codes aligned with their generative factors.
#[derive(Debug, Clone)]
pub struct Representation {
    /// N x D matrix of latent values.
    pub codes: Mat,
    /// One factor tuple per row of `codes`.
    pub factors: Vec<FactorTuple>,
}

impl Representation {
    pub fn new(codes: Mat, factors: Vec<FactorTuple>) -> Result<Self> {
        if codes.rows != factors.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} code rows vs {} factor tuples",
                codes.rows,
                factors.len()
            )));
        }
        if codes.rows < 2 || codes.cols < 1 {
            return Err(Error::InvalidArgument(
                "representation needs at least 2 samples and 1 latent".into(),
            ));
        }
        Ok(Self { codes, factors })
    }

    pub fn n_samples(&self) -> usize {
        self.codes.rows
    }

    pub fn n_latents(&self) -> usize {
        self.codes.cols
    }

    /// Discrete value of factor `k` for row `i`.
    pub fn factor_value(&self, i: usize, k: usize) -> usize {
        let t = &self.factors[i];
        match k {
            0 => t.timbre.index(),
            1 => t.amp_index,
            2 => t.freq_index,
            _ => panic!("factor index {k} out of range"),
        }
    }

    /// Row subset, preserving order of `idx`.
    pub fn select(&self, idx: &[usize]) -> Representation {
        let mut codes = Mat::zeros(idx.len(), self.codes.cols);
        let mut factors = Vec::with_capacity(idx.len());
        for (r, &i) in idx.iter().enumerate() {
            codes.row_mut(r).copy_from_slice(self.codes.row(i));
            factors.push(self.factors[i]);
        }
        Representation { codes, factors }
    }
}

/// Mutual information between every latent and every factor, plus the
/// entropies the scores need.
#[derive(Debug, Clone)]
pub struct MIMatrix {
    /// D x K mutual information in nats, clamped at 0.
    pub mi: Mat,
    /// H(v_k) for each factor, nats.
    pub factor_entropy: [f64; N_FACTORS],
    /// D x K joint entropies H(z_j, v_k), nats.
    pub joint_entropy: Mat,
    /// H(z_j) of each discretized latent, nats.
    pub latent_entropy: Vec<f64>,
}

/// Mean and standard deviation over evaluation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// The five scores of one model evaluation, in report column order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub mig: MeanStd,
    pub sap: MeanStd,
    pub dcimig: MeanStd,
    pub jemmig: MeanStd,
    pub modularity: MeanStd,
}

/// Per-column uniform-width binning over `[min, max]`.
///
/// Returns one label vector per latent column. Constant columns map to
/// bin 0 everywhere; the column maximum lands in the top bin.
pub fn discretize(codes: &Mat, n_bins: usize) -> Result<Vec<Vec<usize>>> {
    if n_bins < 2 {
        return Err(Error::InvalidArgument("n_bins must be >= 2".into()));
    }
    let mut out = Vec::with_capacity(codes.cols);
    for c in 0..codes.cols {
        let col = codes.col(c);
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value in latent {c}")));
        }
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = (max - min) / n_bins as f64;
        let labels = if width <= 0.0 {
            vec![0; col.len()]
        } else {
            col.iter()
                .map(|&v| (((v - min) / width) as usize).min(n_bins - 1))
                .collect()
        };
        out.push(labels);
    }
    Ok(out)
}

/// Plug-in entropy of a label sequence, nats.
pub fn entropy(labels: &[usize]) -> f64 {
    assert!(!labels.is_empty(), "entropy of empty sequence");
    let max = *labels.iter().max().unwrap();
    let mut counts = vec![0usize; max + 1];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len() as f64;
    // Dense counts keep the summation order fixed, so results are
    // bit-reproducible.
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Plug-in MI and the three entropies of a discrete pair:
/// `(mi, h_x, h_y, h_joint)` with `mi = max(0, h_x + h_y - h_joint)`.
pub fn mutual_information(x: &[usize], y: &[usize]) -> (f64, f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let h_x = entropy(x);
    let h_y = entropy(y);
    let y_max = *y.iter().max().unwrap();
    let joint: Vec<usize> = x.iter().zip(y).map(|(&a, &b)| a * (y_max + 1) + b).collect();
    let h_joint = entropy(&joint);
    ((h_x + h_y - h_joint).max(0.0), h_x, h_y, h_joint)
}

/// MI between every discretized latent and every factor.
pub fn mi_matrix(rep: &Representation, n_bins: usize) -> Result<MIMatrix> {
    let binned = discretize(&rep.codes, n_bins)?;
    let d = rep.n_latents();
    let n = rep.n_samples();

    let mut mi = Mat::zeros(d, N_FACTORS);
    let mut joint_entropy = Mat::zeros(d, N_FACTORS);
    let mut factor_entropy = [0.0; N_FACTORS];
    let mut latent_entropy = vec![0.0; d];

    let factor_labels: Vec<Vec<usize>> = (0..N_FACTORS)
        .map(|k| (0..n).map(|i| rep.factor_value(i, k)).collect())
        .collect();
    for (k, labels) in factor_labels.iter().enumerate() {
        factor_entropy[k] = entropy(labels);
    }
    for (j, z) in binned.iter().enumerate() {
        latent_entropy[j] = entropy(z);
        for (k, v) in factor_labels.iter().enumerate() {
            let (i_zv, _, _, h_zv) = mutual_information(z, v);
            mi.set(j, k, i_zv);
            joint_entropy.set(j, k, h_zv);
        }
    }
    Ok(MIMatrix { mi, factor_entropy, joint_entropy, latent_entropy })
}

/// Indices of the largest and second-largest value in `xs`, ties broken
/// toward the lower index. `None` second when `xs` has one element.
fn top_two(xs: &[f64]) -> (usize, Option<usize>) {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    let mut second: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        if i == best {
            continue;
        }
        match second {
            None => second = Some(i),
            Some(s) if x > xs[s] => second = Some(i),
            _ => {}
        }
    }
    (best, second)
}

fn require_factor_entropy(m: &MIMatrix) -> Result<()> {
    for (k, &h) in m.factor_entropy.iter().enumerate() {
        if h <= 0.0 {
            return Err(Error::DegenerateRepresentation(format!(
                "factor {k} has zero entropy on the evaluation set"
            )));
        }
    }
    Ok(())
}

/// Mutual Information Gap: mean normalized gap between the two most
/// informative latents per factor.
pub fn mig(m: &MIMatrix) -> Result<f64> {
    require_factor_entropy(m)?;
    let mut total = 0.0;
    for k in 0..N_FACTORS {
        let col = m.mi.col(k);
        let (best, second) = top_two(&col);
        let gap = col[best] - second.map_or(0.0, |s| col[s]);
        total += gap / m.factor_entropy[k];
    }
    Ok((total / N_FACTORS as f64).clamp(0.0, 1.0))
}

/// Joint Entropy Minus the MI Gap, raw nats; lower is better.
pub fn jemmig(m: &MIMatrix) -> Result<f64> {
    require_factor_entropy(m)?;
    let mut total = 0.0;
    for k in 0..N_FACTORS {
        let col = m.mi.col(k);
        let (best, second) = top_two(&col);
        total += m.joint_entropy.get(best, k) - col[best] + second.map_or(0.0, |s| col[s]);
    }
    Ok(total / N_FACTORS as f64)
}

/// DCIMIG: per-latent MI gaps claimed by their strongest factor, summed
/// and normalized by the total factor entropy.
pub fn dcimig(m: &MIMatrix) -> Result<f64> {
    require_factor_entropy(m)?;
    let total_entropy: f64 = m.factor_entropy.iter().sum();
    let mut claimed = [0.0f64; N_FACTORS];
    for j in 0..m.mi.rows {
        let row = m.mi.row(j);
        let (best, second) = top_two(row);
        let gap = row[best] - second.map_or(0.0, |s| row[s]);
        if gap > claimed[best] {
            claimed[best] = gap;
        }
    }
    Ok((claimed.iter().sum::<f64>() / total_entropy).clamp(0.0, 1.0))
}

/// Modularity score: 1 minus the normalized off-template MI mass, mean
/// over latents that carry any information.
pub fn modularity(m: &MIMatrix) -> Result<f64> {
    let k_minus_1 = (N_FACTORS - 1) as f64;
    let mut total = 0.0;
    let mut alive = 0usize;
    for j in 0..m.mi.rows {
        let row = m.mi.row(j);
        let (best, _) = top_two(row);
        let theta = row[best];
        if theta < DEAD_LATENT_EPS {
            continue;
        }
        let off: f64 =
            row.iter().enumerate().filter(|&(k, _)| k != best).map(|(_, &v)| v * v).sum();
        total += 1.0 - off / (theta * theta * k_minus_1);
        alive += 1;
    }
    if alive == 0 {
        return Err(Error::DegenerateRepresentation(
            "all latents are dead; modularity undefined".into(),
        ));
    }
    Ok((total / alive as f64).clamp(0.0, 1.0))
}

/// SAP: mean over factors of the gap between the two best single-latent
/// nearest-class-centroid predictors, scored by held-out balanced
/// accuracy on a seeded 50/50 split.
pub fn sap(rep: &Representation, seed: u64) -> Result<f64> {
    let n = rep.n_samples();
    if n < 20 {
        return Err(Error::InvalidArgument(format!("sap needs >= 20 samples, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (train_idx, test_idx) = order.split_at(n / 2);

    let d = rep.n_latents();
    let mut scores = Mat::zeros(d, N_FACTORS);
    for k in 0..N_FACTORS {
        let n_classes = (0..n).map(|i| rep.factor_value(i, k)).max().unwrap() + 1;
        for j in 0..d {
            scores.set(j, k, centroid_balanced_accuracy(rep, j, k, n_classes, train_idx, test_idx)?);
        }
    }

    let mut total = 0.0;
    for k in 0..N_FACTORS {
        let col = scores.col(k);
        let (best, second) = top_two(&col);
        total += col[best] - second.map_or(0.0, |s| col[s]);
    }
    Ok((total / N_FACTORS as f64).clamp(0.0, 1.0))
}

/// Balanced accuracy of a one-latent nearest-class-centroid classifier.
fn centroid_balanced_accuracy(
    rep: &Representation,
    latent: usize,
    factor: usize,
    n_classes: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<f64> {
    let mut sums = vec![0.0f64; n_classes];
    let mut counts = vec![0usize; n_classes];
    for &i in train_idx {
        let c = rep.factor_value(i, factor);
        sums[c] += rep.codes.get(i, latent);
        counts[c] += 1;
    }
    // Classes never seen in training have no centroid to predict from.
    let test_classes: Vec<usize> = {
        let mut seen = vec![false; n_classes];
        for &i in test_idx {
            seen[rep.factor_value(i, factor)] = true;
        }
        (0..n_classes).filter(|&c| seen[c]).collect()
    };
    for &c in &test_classes {
        if counts[c] == 0 {
            return Err(Error::DegenerateRepresentation(format!(
                "factor {factor} class {c} missing from train split"
            )));
        }
    }
    let centroids: Vec<Option<f64>> = (0..n_classes)
        .map(|c| (counts[c] > 0).then(|| sums[c] / counts[c] as f64))
        .collect();

    let mut correct = vec![0usize; n_classes];
    let mut totals = vec![0usize; n_classes];
    for &i in test_idx {
        let z = rep.codes.get(i, latent);
        let truth = rep.factor_value(i, factor);
        let mut pred = None;
        let mut best = f64::INFINITY;
        for (c, centroid) in centroids.iter().enumerate() {
            if let Some(m) = centroid {
                let dist = (z - m).abs();
                if dist < best {
                    best = dist;
                    pred = Some(c);
                }
            }
        }
        totals[truth] += 1;
        if pred == Some(truth) {
            correct[truth] += 1;
        }
    }
    let recall_sum: f64 =
        test_classes.iter().map(|&c| correct[c] as f64 / totals[c] as f64).sum();
    Ok(recall_sum / test_classes.len() as f64)
}

/// Score all five metrics `runs` times on seeded 80% row subsamples and
/// report mean and standard deviation per metric.
pub fn evaluate(rep: &Representation, runs: usize, seed: u64, n_bins: usize) -> Result<MetricReport> {
    if runs < 1 {
        return Err(Error::InvalidArgument("runs must be >= 1".into()));
    }
    let n = rep.n_samples();
    let take = ((n as f64 * 0.8) as usize).max(2);

    let mut values = [const { Vec::new() }; 5];
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        idx.truncate(take);
        let sub = rep.select(&idx);
        let m = mi_matrix(&sub, n_bins)?;
        values[0].push(mig(&m)?);
        values[1].push(sap(&sub, rng.gen())?);
        values[2].push(dcimig(&m)?);
        values[3].push(jemmig(&m)?);
        values[4].push(modularity(&m)?);
    }
    let stat = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        MeanStd { mean, std: var.sqrt() }
    };
    Ok(MetricReport {
        mig: stat(&values[0]),
        sap: stat(&values[1]),
        dcimig: stat(&values[2]),
        jemmig: stat(&values[3]),
        modularity: stat(&values[4]),
    })
}

/// Point scores on the full representation, no resampling.
///
/// This is the oracle-endpoint view: a perfect bin-aligned code scores
/// exactly (1, 1, 0, 1) on (MIG, DCIMIG, JEMMIG, Modularity).
pub fn point_scores(rep: &Representation, seed: u64, n_bins: usize) -> Result<[(String, Result<f64>); 5]> {
    let m = mi_matrix(rep, n_bins)?;
    Ok([
        ("mig".into(), mig(&m)),
        ("sap".into(), sap(rep, seed)),
        ("dcimig".into(), dcimig(&m)),
        ("jemmig".into(), jemmig(&m)),
        ("modularity".into(), modularity(&m)),
    ])
}
