//! Paired t-test and Kendall's tau-b.

use std::cmp::Ordering;

use super::AgreementVector;
use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 10_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of Student's t statistic with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Paired two-sided t-test on per-set correctness indicators.
///
/// Identical vectors give p = 1. Constant nonzero differences give p = 0.
pub fn paired_ttest(a: &AgreementVector, b: &AgreementVector) -> Result<f64> {
    if a.set_ids != b.set_ids || a.correct.len() != b.correct.len() || a.correct.len() != a.set_ids.len() {
        return Err(Error::Misaligned(
            "agreement vectors must cover the same sets in the same order".into(),
        ));
    }
    let n = a.correct.len();
    if n < 2 {
        return Err(Error::InsufficientPairs);
    }
    let diffs: Vec<f64> = a
        .correct
        .iter()
        .zip(&b.correct)
        .map(|(x, y)| f64::from(u8::from(*x)) - f64::from(u8::from(*y)))
        .collect();
    if diffs.iter().all(|d| *d == 0.0) {
        return Ok(1.0);
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        return Ok(0.0);
    }
    let t = mean / (var / nf).sqrt();
    Ok(student_t_two_sided_p(t, nf - 1.0))
}

pub fn bonferroni(p: f64, comparisons: usize) -> f64 {
    (p * comparisons.max(1) as f64).min(1.0)
}

/// Number of pairs within runs of equal values in a sorted slice.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for i in 1..sorted.len() {
        if eq(&sorted[i - 1], &sorted[i]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts by `y` and returns the number of inversions (exchanges).
fn merge_count(v: &mut [(f64, f64)], buf: &mut Vec<(f64, f64)>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j].1.total_cmp(&v[i].1) == Ordering::Less {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(
            "kendall_tau needs at least 2 observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("kendall_tau input contains NaN".into()));
    }
    // -0.0 and 0.0 are the same rank.
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n = pairs.len() as u64;
    let n0 = n * (n - 1) / 2;
    let x_ties = tied_pairs(&pairs, |a, b| a.0 == b.0);
    let joint_ties = tied_pairs(&pairs, |a, b| a.0 == b.0 && a.1 == b.1);
    let mut buf = Vec::with_capacity(pairs.len());
    let swaps = merge_count(&mut pairs, &mut buf);
    let y_ties = tied_pairs(&pairs, |a, b| a.1 == b.1);

    if x_ties == n0 || y_ties == n0 {
        return Err(Error::ConstantInput);
    }
    let numerator = n0 as f64 - x_ties as f64 - y_ties as f64 + joint_ties as f64 - 2.0 * swaps as f64;
    let denominator = ((n0 - x_ties) as f64 * (n0 - y_ties) as f64).sqrt();
    Ok((numerator / denominator).clamp(-1.0, 1.0))
}

/// Pairwise tau-b; `None` where a column is constant.
pub fn kendall_matrix(columns: &[Vec<f64>]) -> Result<Vec<Vec<Option<f64>>>> {
    let k = columns.len();
    let mut out = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let tau = match kendall_tau(&columns[i], &columns[j]) {
                Ok(t) => Some(if i == j { 1.0 } else { t }),
                Err(Error::ConstantInput) => None,
                Err(e) => return Err(e),
            };
            out[i][j] = tau;
            out[j][i] = tau;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn av(bits: &[u8]) -> AgreementVector {
        AgreementVector {
            set_ids: (0..bits.len()).map(|i| i.to_string()).collect(),
            correct: bits.iter().map(|b| *b == 1).collect(),
        }
    }

    #[test]
    fn ttest_conventions() {
        let a = av(&[1, 0, 1, 1]);
        assert_eq!(paired_ttest(&a, &a).unwrap(), 1.0);
        assert!(matches!(
            paired_ttest(&av(&[1]), &av(&[0])),
            Err(Error::InsufficientPairs)
        ));
        let mut b = av(&[1, 0, 1, 1]);
        b.set_ids[0] = "other".into();
        assert!(paired_ttest(&a, &b).is_err());
        assert_eq!(paired_ttest(&av(&[1, 1, 1]), &av(&[0, 0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn ttest_four_of_ten() {
        let a = av(&[1, 1, 1, 1, 0, 0, 0, 0, 0, 0]);
        let b = av(&[0; 10]);
        let p = paired_ttest(&a, &b).unwrap();
        // t = 0.4 / sqrt(0.26667 / 10) = 2.4495 on 9 df; reference value
        // from scipy.stats.t.sf.
        assert!((p - 0.036_787_497_879_786_13).abs() < 1e-9, "{p}");
    }

    #[test]
    fn gamma_and_beta_spot_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        // I_x(1, 1) = x; I_x(a, 1) = x^a.
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.3) - 0.3).abs() < 1e-14);
        assert!((regularized_incomplete_beta(3.0, 1.0, 0.5) - 0.125).abs() < 1e-14);
        assert_eq!(student_t_two_sided_p(0.0, 5.0), 1.0);
    }

    #[test]
    fn tau_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        let t = kendall_tau(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((t - 4.0 / 6.0).abs() < 1e-12);
        assert!(kendall_tau(&x, &[1.0]).is_err());
        assert!(kendall_tau(&[1.0], &[1.0]).is_err());
        assert!(matches!(kendall_tau(&x, &[2.0; 4]), Err(Error::ConstantInput)));
    }

    #[test]
    fn matrix_is_symmetric_with_unit_diagonal() {
        let cols = vec![
            vec![1.0, 2.0, 3.0, 5.0],
            vec![2.0, 1.0, 4.0, 3.0],
            vec![0.0, 0.0, 1.0, 1.0],
        ];
        let m = kendall_matrix(&cols).unwrap();
        #[allow(clippy::needless_range_loop)]
        for i in 0..3 {
            assert_eq!(m[i][i], Some(1.0));
            for j in 0..3 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        let m = kendall_matrix(&[vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(m[0][0], None);
    }
}
