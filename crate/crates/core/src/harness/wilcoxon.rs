use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::HarnessError;

/// Largest effective sample size handled exactly in [`WilcoxonMode::Auto`].
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMode {
    /// Exact up to [`EXACT_MAX_N`] nonzero differences, normal beyond.
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub n: usize,
    pub n_effective: usize,
    pub zeros_dropped: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(W+, W-)`.
    pub w: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
    pub ties: bool,
}

/// Average ranks of `values` (1-based), ties sharing the mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// `P(W+ <= w)` under the null, for the given (possibly tied) ranks, by
/// dynamic programming over the sum of doubled ranks. Average ranks are
/// multiples of 1/2, so doubling makes them integral.
pub fn exact_lower_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut ways = vec![0.0f64; max + 1];
    ways[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            ways[s] += ways[s - r];
        }
    }
    let limit = (w * 2.0 + 1e-9).floor() as usize;
    let hit: f64 = ways[..=limit.min(max)].iter().sum();
    hit / 2f64.powi(ranks.len() as i32)
}

/// Two-sided signed-rank test on `a - b`.
///
/// Zero differences are dropped; remaining `|d|` get average ranks. The
/// exact path conditions on the observed ranks, so it also covers ties; the
/// normal path uses the tie-corrected variance and a 0.5 continuity
/// correction.
pub fn wilcoxon_signed_rank(
    pairs: &[(f64, f64)],
    mode: WilcoxonMode,
) -> Result<WilcoxonResult, HarnessError> {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Err(HarnessError::Degenerate);
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .fold(0.0, |acc, (_, r)| acc + r);
    let w_minus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d < 0.0)
        .fold(0.0, |acc, (_, r)| acc + r);
    let w = w_plus.min(w_minus);

    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut ties = false;
    let mut i = 0;
    while i < n {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        if j > 1 {
            ties = true;
            tie_term += (j * j * j - j) as f64;
        }
        i += j;
    }

    let exact = match mode {
        WilcoxonMode::Exact => true,
        WilcoxonMode::Normal => false,
        WilcoxonMode::Auto => n <= EXACT_MAX_N,
    };
    let (p, method) = if exact {
        (
            (2.0 * exact_lower_tail(&ranks, w)).min(1.0),
            WilcoxonMethod::Exact,
        )
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
            let normal = Normal::new(0.0, 1.0).expect("standard normal");
            (2.0 * (1.0 - normal.cdf(z))).min(1.0)
        };
        (p, WilcoxonMethod::NormalApproximation)
    };
    Ok(WilcoxonResult {
        n: pairs.len(),
        n_effective: n,
        zeros_dropped: pairs.len() - n,
        w_plus,
        w_minus,
        w,
        p_value: p,
        method,
        ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diffs(d: &[f64]) -> Vec<(f64, f64)> {
        d.iter().map(|x| (*x, 0.0)).collect()
    }

    #[test]
    fn hand_checked_cases() {
        let r = wilcoxon_signed_rank(&diffs(&[1.0, 2.0, 3.0]), WilcoxonMode::Auto).unwrap();
        assert_eq!(
            (r.w, r.p_value, r.method),
            (0.0, 0.25, WilcoxonMethod::Exact)
        );
        let r = wilcoxon_signed_rank(&diffs(&[3.0, -1.0, 2.0]), WilcoxonMode::Auto).unwrap();
        assert_eq!((r.w, r.p_value), (1.0, 0.5));
    }

    #[test]
    fn zeros_are_dropped() {
        let r = wilcoxon_signed_rank(&diffs(&[0.0, 1.0, 2.0, 3.0]), WilcoxonMode::Auto).unwrap();
        assert_eq!((r.n, r.n_effective, r.zeros_dropped), (4, 3, 1));
        assert!(matches!(
            wilcoxon_signed_rank(&diffs(&[0.0, 0.0]), WilcoxonMode::Auto),
            Err(HarnessError::Degenerate)
        ));
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(
            average_ranks(&[2.0, 1.0, 2.0, 3.0]),
            vec![2.5, 1.0, 2.5, 4.0]
        );
    }
}
