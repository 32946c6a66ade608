//! Evaluation metrics: graph recovery (SHD, precision/recall), distribution
//! distances (JSD, MMD, MSE), treatment effects (ATE, CATE) and the random
//! Erdos-Renyi DAG baseline.

use crate::rng::NoiseStream;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("adjacency size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("probability vector sums to {0}, expected 1")]
    NotNormalized(f64),
    #[error("input must be non-empty")]
    Empty,
    #[error("sample dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("conditioning stratum is empty in the {0} population")]
    EmptyStratum(&'static str),
}

/// Dense boolean adjacency matrix with zero diagonal; `entries[i][j]` means
/// a directed edge i -> j.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl AdjacencyMatrix {
    pub fn new(n: usize) -> Self {
        AdjacencyMatrix { n, entries: vec![false; n * n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut m = AdjacencyMatrix::new(n);
        for &(i, j) in edges {
            m.set(i, j, true);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    /// Self-loops are ignored: the diagonal stays zero.
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        if i != j {
            self.entries[i * self.n + j] = value;
        }
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Structural Hamming distance: the number of directed adjacency entries on
/// which the two matrices differ. A reversed edge therefore costs 2.
pub fn shd(a: &AdjacencyMatrix, a_star: &AdjacencyMatrix) -> Result<u64, MetricsError> {
    if a.n != a_star.n {
        return Err(MetricsError::SizeMismatch(a.n, a_star.n));
    }
    Ok(a.entries
        .iter()
        .zip(&a_star.entries)
        .filter(|(x, y)| x != y)
        .count() as u64)
}

/// Edge-classification precision and recall over directed entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    /// False when the corresponding ratio was 0/0 and reported as 0.
    pub precision_defined: bool,
    pub recall_defined: bool,
}

pub fn precision_recall(
    a: &AdjacencyMatrix,
    a_star: &AdjacencyMatrix,
) -> Result<PrecisionRecall, MetricsError> {
    if a.n != a_star.n {
        return Err(MetricsError::SizeMismatch(a.n, a_star.n));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (&pred, &truth) in a.entries.iter().zip(&a_star.entries) {
        match (pred, truth) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision_defined = tp + fp > 0;
    let recall_defined = tp + fn_ > 0;
    Ok(PrecisionRecall {
        precision: if precision_defined { tp as f64 / (tp + fp) as f64 } else { 0.0 },
        recall: if recall_defined { tp as f64 / (tp + fn_) as f64 } else { 0.0 },
        precision_defined,
        recall_defined,
    })
}

fn check_prob_vector(p: &[f64]) -> Result<(), MetricsError> {
    if p.is_empty() {
        return Err(MetricsError::Empty);
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || p.iter().any(|&x| !(0.0..=1.0 + 1e-9).contains(&x)) {
        return Err(MetricsError::NotNormalized(sum));
    }
    Ok(())
}

/// Jensen-Shannon divergence in base 2: symmetric, in [0, 1], zero iff the
/// distributions coincide.
pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::LengthMismatch(p.len(), q.len()));
    }
    check_prob_vector(p)?;
    check_prob_vector(q)?;
    let kl_to_mid = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                if x <= 0.0 {
                    0.0
                } else {
                    let m = 0.5 * (x + y);
                    x * (x / m).log2()
                }
            })
            .sum()
    };
    let value: f64 = 0.5 * kl_to_mid(p, q) + 0.5 * kl_to_mid(q, p);
    Ok(value.clamp(0.0, 1.0))
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Kahan-compensated accumulator; keeps the O(n^2) kernel sums stable and
/// order-robust.
#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Biased V-statistic MMD^2 with an RBF kernel. The bandwidth is the median
/// pairwise Euclidean distance over the pooled samples (median heuristic);
/// a zero median falls back to 1.0. Identical samples give exactly 0.
pub fn mmd(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64, MetricsError> {
    if x.is_empty() || y.is_empty() {
        return Err(MetricsError::Empty);
    }
    let d = x[0].len();
    for row in x.iter().chain(y) {
        if row.len() != d {
            return Err(MetricsError::DimensionMismatch(d, row.len()));
        }
    }

    let pooled: Vec<&Vec<f64>> = x.iter().chain(y.iter()).collect();
    let mut dists = Vec::with_capacity(pooled.len() * (pooled.len() - 1) / 2);
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            dists.push(sq_dist(pooled[i], pooled[j]).sqrt());
        }
    }
    let bandwidth = if dists.is_empty() {
        1.0
    } else {
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = dists.len() / 2;
        let median = if dists.len() % 2 == 0 {
            0.5 * (dists[mid - 1] + dists[mid])
        } else {
            dists[mid]
        };
        if median > 0.0 {
            median
        } else {
            1.0
        }
    };
    let gamma = 1.0 / (2.0 * bandwidth * bandwidth);
    let kernel = |a: &[f64], b: &[f64]| (-gamma * sq_dist(a, b)).exp();

    let mean_kernel = |u: &[Vec<f64>], v: &[Vec<f64>]| -> f64 {
        let mut acc = Kahan::default();
        for a in u {
            for b in v {
                acc.add(kernel(a, b));
            }
        }
        acc.sum / (u.len() as f64 * v.len() as f64)
    };

    let value = mean_kernel(x, x) + mean_kernel(y, y) - 2.0 * mean_kernel(x, y);
    Ok(value.max(0.0))
}

/// Mean squared error between paired vectors.
pub fn mse(u: &[f64], v: &[f64]) -> Result<f64, MetricsError> {
    if u.len() != v.len() {
        return Err(MetricsError::LengthMismatch(u.len(), v.len()));
    }
    if u.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / u.len() as f64)
}

/// Average treatment effect: mean(treated) - mean(control).
pub fn ate(y_treated: &[f64], y_control: &[f64]) -> Result<f64, MetricsError> {
    if y_treated.is_empty() || y_control.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(mean(y_treated) - mean(y_control))
}

/// Conditional average treatment effect: ATE restricted to rows whose
/// covariate equals `condition` (compared with exact equality on the numeric
/// embedding).
pub fn cate(
    y_treated: &[f64],
    x_treated: &[f64],
    y_control: &[f64],
    x_control: &[f64],
    condition: f64,
) -> Result<f64, MetricsError> {
    if y_treated.len() != x_treated.len() {
        return Err(MetricsError::LengthMismatch(y_treated.len(), x_treated.len()));
    }
    if y_control.len() != x_control.len() {
        return Err(MetricsError::LengthMismatch(y_control.len(), x_control.len()));
    }
    let select = |y: &[f64], x: &[f64]| -> Vec<f64> {
        y.iter()
            .zip(x)
            .filter(|(_, &xv)| xv == condition)
            .map(|(&yv, _)| yv)
            .collect()
    };
    let t = select(y_treated, x_treated);
    let c = select(y_control, x_control);
    if t.is_empty() {
        return Err(MetricsError::EmptyStratum("treated"));
    }
    if c.is_empty() {
        return Err(MetricsError::EmptyStratum("control"));
    }
    ate(&t, &c)
}

/// Random Erdos-Renyi DAG baseline: fix the identity ordering and include
/// each upper-triangular edge independently with probability `p`. Always
/// acyclic; deterministic per seed.
pub fn random_er_dag(n: usize, p: f64, seed: u64) -> Result<AdjacencyMatrix, MetricsError> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(MetricsError::BadProbability(p));
    }
    let mut stream = NoiseStream::tagged(seed, 0x4552_4441_47);
    let mut m = AdjacencyMatrix::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if stream.next_f64() < p {
                m.set(i, j, true);
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shd_examples() {
        let empty = AdjacencyMatrix::new(4);
        let truth = AdjacencyMatrix::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(shd(&truth, &truth).unwrap(), 0);
        assert_eq!(shd(&empty, &truth).unwrap(), 3);
        let pred = AdjacencyMatrix::from_edges(4, &[(1, 2), (2, 3)]);
        let truth2 = AdjacencyMatrix::from_edges(4, &[(1, 2), (1, 3)]);
        assert_eq!(shd(&pred, &truth2).unwrap(), 2);
        assert!(shd(&pred, &AdjacencyMatrix::new(3)).is_err());
    }

    #[test]
    fn shd_is_a_metric() {
        let a = AdjacencyMatrix::from_edges(5, &[(0, 1), (2, 3)]);
        let b = AdjacencyMatrix::from_edges(5, &[(0, 1), (3, 2), (1, 4)]);
        let c = AdjacencyMatrix::from_edges(5, &[(4, 0)]);
        assert_eq!(shd(&a, &b).unwrap(), shd(&b, &a).unwrap());
        assert_eq!(shd(&a, &a).unwrap(), 0);
        assert!(shd(&a, &c).unwrap() <= shd(&a, &b).unwrap() + shd(&b, &c).unwrap());
    }

    #[test]
    fn precision_recall_examples() {
        let truth = AdjacencyMatrix::from_edges(4, &[(1, 2), (1, 3)]);
        let perfect = precision_recall(&truth, &truth).unwrap();
        assert_eq!((perfect.precision, perfect.recall), (1.0, 1.0));

        let empty = precision_recall(&AdjacencyMatrix::new(4), &truth).unwrap();
        assert_eq!((empty.precision, empty.recall), (0.0, 0.0));
        assert!(!empty.precision_defined);
        assert!(empty.recall_defined);

        let pred = AdjacencyMatrix::from_edges(4, &[(1, 2), (2, 3)]);
        let pr = precision_recall(&pred, &truth).unwrap();
        assert_eq!((pr.precision, pr.recall), (0.5, 0.5));
    }

    #[test]
    fn jsd_examples() {
        assert_eq!(jsd(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((jsd(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        // Direct-formula oracle for p = (1/2, 1/2), q = (1, 0):
        // m = (3/4, 1/4)
        // KL(p||m) = 1/2 lg(2/3) + 1/2 lg(2)       = 0.20751874963942190...
        // KL(q||m) = lg(4/3)                        = 0.41503749927884381...
        // JSD = mean                                = 0.31127812445913283...
        let v = jsd(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((v - 0.31127812445913283).abs() < 1e-12, "{v}");
        assert!(jsd(&[0.5, 0.5], &[0.9, 0.2]).is_err());
        assert!(jsd(&[0.5, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn jsd_is_symmetric_and_bounded() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.4, 0.3, 0.2, 0.1];
        let a = jsd(&p, &q).unwrap();
        let b = jsd(&q, &p).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn mmd_identities() {
        let x = vec![vec![0.0, 1.0], vec![0.5, -0.5], vec![2.0, 0.25]];
        assert_eq!(mmd(&x, &x).unwrap(), 0.0);
        assert_eq!(mmd(&[vec![0.0]], &[vec![0.0]]).unwrap(), 0.0);
        let y = vec![vec![1.0, 0.0]];
        assert_eq!(mmd(&x, &y).unwrap(), mmd(&y, &x).unwrap());
        assert!(mmd(&x, &[]).is_err());
        assert!(mmd(&x, &[vec![1.0]]).is_err());
    }

    #[test]
    fn mmd_far_clusters_approach_twice_one_minus_cross_kernel() {
        // Two tight unit clusters far apart: within-cluster kernels ~= 1 and
        // the cross kernel is tiny, so MMD^2 ~= 2 * (1 - k_cross).
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![0.001 * f64::from(i)]).collect();
        let y: Vec<Vec<f64>> = (0..20).map(|i| vec![100.0 + 0.001 * f64::from(i)]).collect();
        let v = mmd(&x, &y).unwrap();

        // Direct O(n^2) double-sum oracle with the same kernel definition.
        let pooled: Vec<&Vec<f64>> = x.iter().chain(y.iter()).collect();
        let mut dists = Vec::new();
        for i in 0..pooled.len() {
            for j in i + 1..pooled.len() {
                dists.push(sq_dist(pooled[i], pooled[j]).sqrt());
            }
        }
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = dists.len() / 2;
        let median = if dists.len() % 2 == 0 { 0.5 * (dists[mid - 1] + dists[mid]) } else { dists[mid] };
        let gamma = 1.0 / (2.0 * median * median);
        let k = |a: &[f64], b: &[f64]| (-gamma * sq_dist(a, b)).exp();
        let mean_k = |u: &[Vec<f64>], v: &[Vec<f64>]| {
            let mut s = 0.0;
            for a in u {
                for b in v {
                    s += k(a, b);
                }
            }
            s / (u.len() * v.len()) as f64
        };
        let oracle = mean_k(&x, &x) + mean_k(&y, &y) - 2.0 * mean_k(&x, &y);
        assert!((v - oracle).abs() < 1e-12);
        let cross = mean_k(&x, &y);
        assert!((v - 2.0 * (1.0 - cross)).abs() < 1e-3, "{v}");
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        let v = mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ate_examples() {
        assert_eq!(ate(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(ate(&[0.5, 0.7], &[0.5, 0.7]).unwrap(), 0.0);
        assert_eq!(ate(&[2.0, 4.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert!(ate(&[], &[1.0]).is_err());
    }

    #[test]
    fn cate_examples() {
        // Single stratum: conditioning on everything equals the plain ATE.
        let v = cate(&[2.0, 4.0], &[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(v, ate(&[2.0, 4.0], &[1.0, 1.0]).unwrap());

        // treated {(1,a),(0,b)}, control {(0,a),(1,b)}, condition a -> 1.
        let v = cate(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], 0.0).unwrap();
        assert_eq!(v, 1.0);

        assert!(matches!(
            cate(&[1.0], &[0.0], &[1.0], &[0.0], 5.0),
            Err(MetricsError::EmptyStratum(_))
        ));
    }

    #[test]
    fn er_dag_examples() {
        let empty = random_er_dag(6, 0.0, 1).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = random_er_dag(3, 1.0, 1).unwrap();
        assert_eq!(full.edge_count(), 3);
        assert_eq!(
            random_er_dag(10, 0.3, 9).unwrap(),
            random_er_dag(10, 0.3, 9).unwrap()
        );
        assert!(random_er_dag(3, 1.5, 0).is_err());
    }

    #[test]
    fn er_dag_is_acyclic_and_upper_triangular() {
        let m = random_er_dag(20, 0.5, 123).unwrap();
        for (i, j) in m.edges() {
            assert!(i < j);
        }
    }

    #[test]
    fn er_dag_edge_count_matches_monte_carlo_oracle() {
        // n = 50, p = 0.1 over 1225 pairs: 99% binomial interval.
        let n_pairs: f64 = 1225.0;
        let p = 0.1;
        let sd = (n_pairs * p * (1.0 - p)).sqrt();
        let m = random_er_dag(50, p, 42).unwrap();
        let count = m.edge_count() as f64;
        assert!((count - n_pairs * p).abs() < 2.6 * sd, "count {count}");

        // Direct simulation oracle: empirical edge frequency across seeds.
        let mut total = 0usize;
        let seeds = 200u64;
        for seed in 0..seeds {
            total += random_er_dag(50, p, seed).unwrap().edge_count();
        }
        let freq = total as f64 / (seeds as f64 * n_pairs);
        assert!((freq - p).abs() < 0.01, "freq {freq}");
    }
}
