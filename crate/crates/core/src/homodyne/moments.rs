//! Streaming central moments up to order eight.
//!
//! The accumulator keeps the running mean and the central power sums
//! Σ(xᵢ − mean)ᵖ for p = 2..=8, updated with the numerically stable one-pass
//! recurrences of the pairwise-update family (Welford's algorithm generalized
//! to arbitrary order). Orders 2 and 4 feed the g²(0) inversion; order 3 is
//! required for exact merging of order 4; orders 5–8 feed the delta-method
//! variance of the g²(0) ratio estimator.

use super::{HomodyneError, QuadratureRecord};

/// Highest central-moment order tracked.
pub const MAX_MOMENT_ORDER: usize = 8;

/// Number of tracked power sums (orders 2..=MAX_MOMENT_ORDER).
const N_SUMS: usize = MAX_MOMENT_ORDER - 1;

/// Binomial coefficients C(p, k) for p ≤ 8.
const BINOM: [[f64; 9]; 9] = {
    let mut b = [[0.0; 9]; 9];
    let mut p = 0;
    while p < 9 {
        b[p][0] = 1.0;
        let mut k = 1;
        while k <= p {
            b[p][k] = b[p - 1][k - 1] + if k < p { b[p - 1][k] } else { 0.0 };
            k += 1;
        }
        p += 1;
    }
    b
};

/// Streaming, mergeable central-moment statistics of a sample stream.
///
/// Read-outs are the population central moments: [`MomentSet::m2`] is
/// Σ(x−x̄)²/n, [`MomentSet::m4`] is Σ(x−x̄)⁴/n, and so on up to order eight
/// via [`MomentSet::central_moment`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentSet {
    count: u64,
    mean: f64,
    /// sums[p-2] = Σ (x − mean)^p for p in 2..=MAX_MOMENT_ORDER.
    sums: [f64; N_SUMS],
}

impl MomentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a `MomentSet` from normalized central moments
    /// (`central[p-2]` = Σ(x−mean)ᵖ / count), e.g. for synthetic statistics.
    pub fn from_normalized(count: u64, mean: f64, central: [f64; N_SUMS]) -> Self {
        let n = count as f64;
        let mut sums = [0.0; N_SUMS];
        for (s, c) in sums.iter_mut().zip(central.iter()) {
            *s = c * n;
        }
        Self { count, mean, sums }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Second central moment Σ(x−x̄)²/n (population variance).
    pub fn m2(&self) -> f64 {
        self.central_moment(2)
    }

    /// Fourth central moment Σ(x−x̄)⁴/n.
    pub fn m4(&self) -> f64 {
        self.central_moment(4)
    }

    /// p-th central moment, p in 2..=MAX_MOMENT_ORDER. Zero for an empty set.
    pub fn central_moment(&self, p: usize) -> f64 {
        assert!(
            (2..=MAX_MOMENT_ORDER).contains(&p),
            "central moment order {p} out of range"
        );
        if self.count == 0 {
            0.0
        } else {
            self.sums[p - 2] / self.count as f64
        }
    }

    /// Adds one observation.
    pub fn push(&mut self, x: f64) {
        if self.count == 0 {
            self.count = 1;
            self.mean = x;
            return;
        }
        let na = self.count as f64;
        let n = na + 1.0;
        let delta = x - self.mean;
        // Per-order update: the incoming singleton has zero central sums, so
        // only the existing sums and the mean-shift cross term contribute.
        let wa = -delta / n;
        let last = na * delta / n;
        let mut wa_pow = [1.0; MAX_MOMENT_ORDER + 1];
        let mut last_pow = [1.0; MAX_MOMENT_ORDER + 1];
        for k in 1..=MAX_MOMENT_ORDER {
            wa_pow[k] = wa_pow[k - 1] * wa;
            last_pow[k] = last_pow[k - 1] * last;
        }
        let inv_na = -1.0 / na;
        let mut inv_na_pow = [1.0; MAX_MOMENT_ORDER];
        for k in 1..MAX_MOMENT_ORDER {
            inv_na_pow[k] = inv_na_pow[k - 1] * inv_na;
        }
        // Descending order: the update for order p reads original sums of
        // orders < p only.
        for p in (2..=MAX_MOMENT_ORDER).rev() {
            let mut acc = self.sums[p - 2];
            for k in 1..=(p - 2) {
                acc += BINOM[p][k] * self.sums[p - k - 2] * wa_pow[k];
            }
            acc += last_pow[p] * (1.0 - inv_na_pow[p - 1]);
            self.sums[p - 2] = acc;
        }
        self.mean += delta / n;
        self.count += 1;
    }

    /// Combines two accumulations so that the read-outs equal a single pass
    /// over the concatenated data. Commutative; merging with an empty set is
    /// the identity.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let wa = -nb * delta / n;
        let wb = na * delta / n;
        let mut wa_pow = [1.0; MAX_MOMENT_ORDER + 1];
        let mut wb_pow = [1.0; MAX_MOMENT_ORDER + 1];
        for k in 1..=MAX_MOMENT_ORDER {
            wa_pow[k] = wa_pow[k - 1] * wa;
            wb_pow[k] = wb_pow[k - 1] * wb;
        }
        // Powers are raised incrementally while walking p upward; the last
        // term for order p needs last^p, 1/nb^(p-1), (−1/na)^(p-1).
        let last = na * nb * delta / n;
        let inv_na = -1.0 / na;
        let inv_nb = 1.0 / nb;
        let mut sums = [0.0; N_SUMS];
        let mut last_p = last * last;
        let mut inv_na_p = inv_na;
        let mut inv_nb_p = inv_nb;
        for p in 2..=MAX_MOMENT_ORDER {
            let mut acc = self.sums[p - 2] + other.sums[p - 2];
            for k in 1..=(p - 2) {
                acc += BINOM[p][k]
                    * (self.sums[p - k - 2] * wa_pow[k] + other.sums[p - k - 2] * wb_pow[k]);
            }
            acc += last_p * (inv_nb_p - inv_na_p);
            sums[p - 2] = acc;
            last_p *= last;
            inv_na_p *= inv_na;
            inv_nb_p *= inv_nb;
        }
        Self {
            count: self.count + other.count,
            mean: self.mean + delta * nb / n,
            sums,
        }
    }
}

/// One-pass accumulation over a whole record.
///
/// Deterministic for a fixed input order; fails on empty records or
/// non-finite samples.
pub fn accumulate_moments(record: &QuadratureRecord) -> Result<MomentSet, HomodyneError> {
    record.validate()?;
    let mut m = MomentSet::new();
    for &x in &record.samples {
        m.push(x);
    }
    Ok(m)
}

/// Merges two accumulations; see [`MomentSet::merge`].
pub fn merge_moments(a: &MomentSet, b: &MomentSet) -> MomentSet {
    a.merge(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn record(samples: Vec<f64>) -> QuadratureRecord {
        QuadratureRecord::new(samples, 1.0)
    }

    fn assert_close(a: f64, b: f64, rel: f64, abs: f64) {
        let tol = abs.max(rel * a.abs().max(b.abs()));
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn constant_sequence() {
        let m = accumulate_moments(&record(vec![1.0; 4])).unwrap();
        assert_eq!(m.count(), 4);
        assert_eq!(m.mean(), 1.0);
        assert_eq!(m.m2(), 0.0);
        assert_eq!(m.m4(), 0.0);
    }

    #[test]
    fn symmetric_two_point() {
        let m = accumulate_moments(&record(vec![-1.0, 1.0, -1.0, 1.0])).unwrap();
        assert_eq!(m.mean(), 0.0);
        assert_close(m.m2(), 1.0, 1e-12, 0.0);
        assert_close(m.m4(), 1.0, 1e-12, 0.0);
    }

    #[test]
    fn gaussian_moments() {
        // Estimator standard errors at n = 1e6: σ(m2) = √(2/n) ≈ 0.0014,
        // σ(m4) = √((μ8 − μ4²)/n) = √(96/n) ≈ 0.0098; tolerances are 3σ.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xA1);
        let samples: Vec<f64> = (0..1_000_000)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let m = accumulate_moments(&record(samples)).unwrap();
        assert_close(m.m2(), 1.0, 0.0, 0.005);
        assert_close(m.m4(), 3.0, 0.0, 0.03);
        assert_close(m.central_moment(6), 15.0, 0.0, 0.4);
        assert_close(m.central_moment(8), 105.0, 0.0, 8.0);
    }

    #[test]
    fn empty_record_rejected() {
        assert_eq!(
            accumulate_moments(&record(vec![])),
            Err(HomodyneError::EmptyRecord)
        );
    }

    #[test]
    fn non_finite_sample_indexed() {
        assert_eq!(
            accumulate_moments(&record(vec![0.0, 1.0, f64::NAN, 2.0])),
            Err(HomodyneError::NonFiniteSample(2))
        );
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let m = accumulate_moments(&record(vec![0.5, -0.25, 3.0])).unwrap();
        assert_eq!(merge_moments(&m, &MomentSet::new()), m);
        assert_eq!(merge_moments(&MomentSet::new(), &m), m);
    }

    #[test]
    fn merge_two_constant_pairs() {
        let a = accumulate_moments(&record(vec![1.0, 1.0])).unwrap();
        let b = accumulate_moments(&record(vec![3.0, 3.0])).unwrap();
        let m = merge_moments(&a, &b);
        assert_eq!(m.count(), 4);
        assert_close(m.mean(), 2.0, 1e-12, 0.0);
        assert_close(m.m2(), 1.0, 1e-12, 0.0);
    }

    #[test]
    fn split_merge_matches_single_pass() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xB2);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                2.0 * g + 0.3
            })
            .collect();
        let whole = accumulate_moments(&record(samples.clone())).unwrap();
        for split in [1, 17, 50_000, 99_999] {
            let a = accumulate_moments(&record(samples[..split].to_vec())).unwrap();
            let b = accumulate_moments(&record(samples[split..].to_vec())).unwrap();
            let m = merge_moments(&a, &b);
            assert_eq!(m.count(), whole.count());
            assert_close(m.mean(), whole.mean(), 1e-10, 1e-12);
            assert_close(m.m2(), whole.m2(), 1e-10, 0.0);
            assert_close(m.m4(), whole.m4(), 1e-10, 0.0);
            for p in [3, 5, 6, 7, 8] {
                assert_close(
                    m.central_moment(p),
                    whole.central_moment(p),
                    1e-9,
                    1e-10,
                );
            }
        }
    }

    #[test]
    fn from_normalized_round_trip() {
        let m = MomentSet::from_normalized(100, 0.5, [1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0]);
        assert_eq!(m.count(), 100);
        assert_eq!(m.m2(), 1.0);
        assert_eq!(m.m4(), 3.0);
        assert_eq!(m.central_moment(8), 105.0);
    }
}
