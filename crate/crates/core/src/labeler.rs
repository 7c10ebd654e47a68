//! Unsupervised Gaussian model of attended/unattended correlation scores
//! and the per-segment attention posteriors derived from it.
//!
//! Each segment contributes one attended and one unattended correlation,
//! in unknown order. Fitting runs a pairwise-permutation EM: the latent
//! variable per segment is which pair element is attended, the E-step is
//! the Bayes posterior, and the M-step re-estimates the two component
//! means/variances from posterior-weighted assignments of the 2K values.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scorer::ScorePair;

const VAR_FLOOR: f64 = 1e-8;
const EM_TOL: f64 = 1e-6;
const EM_MAX_ITERS: usize = 100;

/// Two-component Gaussian model of correlation scores, equal priors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel<F: Scalar> {
    mu_a: F,
    var_a: F,
    mu_u: F,
    var_u: F,
    prior: F,
}

impl<F: Scalar> CorrelationModel<F> {
    pub fn new(mu_a: f64, var_a: f64, mu_u: f64, var_u: f64) -> Result<Self> {
        if !(var_a > 0.0) || !(var_u > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "variances must be positive, got {var_a} / {var_u}"
            )));
        }
        Ok(Self {
            mu_a: F::cast(mu_a),
            var_a: F::cast(var_a.max(VAR_FLOOR)),
            mu_u: F::cast(mu_u),
            var_u: F::cast(var_u.max(VAR_FLOOR)),
            prior: F::cast(0.5),
        })
    }

    pub fn mu_a(&self) -> F {
        self.mu_a
    }

    pub fn var_a(&self) -> F {
        self.var_a
    }

    pub fn mu_u(&self) -> F {
        self.mu_u
    }

    pub fn var_u(&self) -> F {
        self.var_u
    }

    /// Fixed uninformative prior p(j=1) = p(j=2).
    pub fn prior(&self) -> F {
        self.prior
    }

    /// Log odds of "speaker 1 attended" for a score pair. The normalization
    /// constants of the two orderings cancel, leaving a form that is exact in
    /// the (rho1 - rho2) difference, so near-tied pairs keep full precision.
    pub fn log_odds(&self, pair: &ScorePair<F>) -> F {
        let two = F::cast(2.0);
        let sum = pair.rho1 + pair.rho2;
        let term_u = (sum - two * self.mu_u) / (two * self.var_u);
        let term_a = (sum - two * self.mu_a) / (two * self.var_a);
        (pair.rho1 - pair.rho2) * (term_u - term_a)
    }

    /// Bayes posterior (p1, p2) for the pair, computed in log space.
    pub fn posterior(&self, pair: &ScorePair<F>) -> (F, F) {
        let lo = self.log_odds(pair);
        let p1 = F::one() / (F::one() + (-lo).exp());
        let p2 = F::one() / (F::one() + lo.exp());
        (p1, p2)
    }
}

/// Per-segment attention probabilities plus the fitted score model.
#[derive(Debug, Clone)]
pub struct SoftLabels<F: Scalar> {
    p1: Vec<F>,
    p2: Vec<F>,
    model: CorrelationModel<F>,
}

impl<F: Scalar> SoftLabels<F> {
    pub fn from_parts(p1: Vec<F>, p2: Vec<F>, model: CorrelationModel<F>) -> Self {
        Self { p1, p2, model }
    }

    pub fn from_p1(p1: Vec<F>, model: CorrelationModel<F>) -> Self {
        let p2 = p1.iter().map(|&p| F::one() - p).collect();
        Self { p1, p2, model }
    }

    /// Uniform probabilities with a placeholder unit-variance model.
    pub fn uniform(k: usize) -> Self {
        let half = F::cast(0.5);
        Self {
            p1: vec![half; k],
            p2: vec![half; k],
            model: CorrelationModel::new(0.0, 1.0, 0.0, 1.0).expect("valid placeholder"),
        }
    }

    pub fn len(&self) -> usize {
        self.p1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p1.is_empty()
    }

    pub fn p1(&self) -> &[F] {
        &self.p1
    }

    pub fn p2(&self) -> &[F] {
        &self.p2
    }

    pub fn model(&self) -> &CorrelationModel<F> {
        &self.model
    }

    /// Hard labels by maximum probability; ties go to speaker 1.
    pub fn argmax_labels(&self) -> crate::signal::Assignment {
        let labels = self
            .p1
            .iter()
            .zip(&self.p2)
            .map(|(a, b)| if a >= b { 1 } else { 2 })
            .collect();
        crate::signal::Assignment::new(labels).expect("non-empty probabilities")
    }

    /// Largest |delta p1| against another probability vector.
    pub fn max_abs_delta(&self, other: &SoftLabels<F>) -> F {
        self.p1
            .iter()
            .zip(&other.p1)
            .map(|(a, b)| (*a - *b).abs())
            .fold(F::zero(), F::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p1.len() != self.p2.len() {
            return Err(Error::InvalidProbability("p1/p2 length mismatch".into()));
        }
        let tol = F::cast(1e-9);
        for (k, (a, b)) in self.p1.iter().zip(&self.p2).enumerate() {
            if *a < F::zero() || *a > F::one() || *b < F::zero() || *b > F::one() {
                return Err(Error::InvalidProbability(format!(
                    "probability outside [0,1] at segment {k}"
                )));
            }
            if (*a + *b - F::one()).abs() > tol {
                return Err(Error::InvalidProbability(format!(
                    "pair does not sum to 1 at segment {k}"
                )));
            }
        }
        Ok(())
    }
}

/// Fits the two-component correlation model from unlabeled score pairs.
pub fn fit_correlation_model<F: Scalar>(scores: &[ScorePair<F>]) -> Result<CorrelationModel<F>> {
    let k = scores.len();
    if k < 4 {
        return Err(Error::DimensionMismatch(format!(
            "need at least 4 score pairs to fit the correlation model, got {k}"
        )));
    }
    let kf = F::cast(k as f64);
    let floor = F::cast(VAR_FLOOR);

    // Initialize the attended component from per-pair maxima and the
    // unattended one from per-pair minima.
    let maxima: Vec<F> = scores.iter().map(|p| p.rho1.max(p.rho2)).collect();
    let minima: Vec<F> = scores.iter().map(|p| p.rho1.min(p.rho2)).collect();
    let mean = |v: &[F]| v.iter().copied().sum::<F>() / kf;
    let var = |v: &[F], m: F| v.iter().map(|&x| (x - m) * (x - m)).sum::<F>() / kf;
    let mut mu_a = mean(&maxima);
    let mut var_a = var(&maxima, mu_a).max(floor);
    let mut mu_u = mean(&minima);
    let mut var_u = var(&minima, mu_u).max(floor);

    for _ in 0..EM_MAX_ITERS {
        let model = CorrelationModel {
            mu_a,
            var_a,
            mu_u,
            var_u,
            prior: F::cast(0.5),
        };
        // E-step: posterior that rho1 is the attended draw.
        let gamma: Vec<F> = scores.iter().map(|p| model.posterior(p).0).collect();

        // M-step: posterior-weighted means and variances over the 2K values.
        let mut sum_a = F::zero();
        let mut sum_u = F::zero();
        for (g, p) in gamma.iter().zip(scores) {
            sum_a += *g * p.rho1 + (F::one() - *g) * p.rho2;
            sum_u += *g * p.rho2 + (F::one() - *g) * p.rho1;
        }
        let new_mu_a = sum_a / kf;
        let new_mu_u = sum_u / kf;
        let mut ss_a = F::zero();
        let mut ss_u = F::zero();
        for (g, p) in gamma.iter().zip(scores) {
            let d1a = p.rho1 - new_mu_a;
            let d2a = p.rho2 - new_mu_a;
            let d1u = p.rho1 - new_mu_u;
            let d2u = p.rho2 - new_mu_u;
            ss_a += *g * d1a * d1a + (F::one() - *g) * d2a * d2a;
            ss_u += *g * d2u * d2u + (F::one() - *g) * d1u * d1u;
        }
        let new_var_a = (ss_a / kf).max(floor);
        let new_var_u = (ss_u / kf).max(floor);

        let delta = (new_mu_a - mu_a)
            .abs()
            .max((new_mu_u - mu_u).abs())
            .max((new_var_a - var_a).abs())
            .max((new_var_u - var_u).abs());
        mu_a = new_mu_a;
        mu_u = new_mu_u;
        var_a = new_var_a;
        var_u = new_var_u;
        if delta < F::cast(EM_TOL) {
            break;
        }
    }

    // Identifiability: the attended component has the larger mean.
    if mu_a < mu_u {
        std::mem::swap(&mut mu_a, &mut mu_u);
        std::mem::swap(&mut var_a, &mut var_u);
    }
    Ok(CorrelationModel {
        mu_a,
        var_a,
        mu_u,
        var_u,
        prior: F::cast(0.5),
    })
}

/// Elementwise posterior over a score list.
pub fn soft_labels<F: Scalar>(
    model: &CorrelationModel<F>,
    scores: &[ScorePair<F>],
) -> SoftLabels<F> {
    let mut p1 = Vec::with_capacity(scores.len());
    let mut p2 = Vec::with_capacity(scores.len());
    for pair in scores {
        let (a, b) = model.posterior(pair);
        p1.push(a);
        p2.push(b);
    }
    SoftLabels { p1, p2, model: *model }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn pair(a: f64, b: f64) -> ScorePair<f64> {
        ScorePair { rho1: a, rho2: b }
    }

    #[test]
    fn constant_separable_pairs_recover_both_means() {
        let scores = vec![pair(0.4, 0.1); 10];
        let m = fit_correlation_model(&scores).unwrap();
        assert!((m.mu_a() - 0.4).abs() <= 1e-9);
        assert!((m.mu_u() - 0.1).abs() <= 1e-9);
        assert!(m.var_a() <= 1e-7);
        assert!(m.var_u() <= 1e-7);
    }

    #[test]
    fn indistinguishable_components_give_half_posteriors() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let n = Normal::new(0.2, 0.05).unwrap();
        let scores: Vec<_> = (0..100)
            .map(|_| pair(n.sample(&mut rng), n.sample(&mut rng)))
            .collect();
        let m = fit_correlation_model(&scores).unwrap();
        assert!((m.mu_a() - m.mu_u()).abs() <= 0.05);
        let labels = soft_labels(&m, &scores);
        let mean_p1: f64 = labels.p1().iter().sum::<f64>() / 100.0;
        assert!((mean_p1 - 0.5).abs() <= 0.15);
    }

    #[test]
    fn monte_carlo_recovery_of_planted_parameters() {
        let mut ok = 0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let na = Normal::new(0.30, 0.08).unwrap();
            let nu = Normal::new(0.05, 0.08).unwrap();
            let scores: Vec<_> = (0..200)
                .map(|_| {
                    let a = na.sample(&mut rng);
                    let u = nu.sample(&mut rng);
                    if rng.gen_bool(0.5) {
                        pair(a, u)
                    } else {
                        pair(u, a)
                    }
                })
                .collect();
            let m = fit_correlation_model(&scores).unwrap();
            let good = (m.mu_a() - 0.30).abs() <= 0.03
                && (m.mu_u() - 0.05).abs() <= 0.03
                && (m.var_a() - 0.0064).abs() <= 0.5 * 0.0064
                && (m.var_u() - 0.0064).abs() <= 0.5 * 0.0064;
            if good {
                ok += 1;
            }
        }
        assert!(ok >= 18, "recovered {ok}/20 planted fits");
    }

    #[test]
    fn symmetric_model_posterior_is_half() {
        let m = CorrelationModel::<f64>::new(0.2, 0.01, 0.2, 0.01).unwrap();
        let (p1, p2) = m.posterior(&pair(0.9, -0.3));
        assert!((p1 - 0.5).abs() <= 1e-15);
        assert!((p2 - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn exchangeable_evidence_posterior_is_half() {
        let m = CorrelationModel::<f64>::new(0.3, 0.02, 0.0, 0.05).unwrap();
        let (p1, _) = m.posterior(&pair(0.17, 0.17));
        assert!((p1 - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn log_odds_direct_value() {
        let m = CorrelationModel::<f64>::new(0.2, 0.0025, 0.0, 0.0025).unwrap();
        let lo = m.log_odds(&pair(0.2, 0.0));
        assert!((lo - 16.0).abs() <= 1e-12);
        let (p1, _) = m.posterior(&pair(0.2, 0.0));
        assert!((p1 - 1.0 / (1.0 + (-16.0f64).exp())).abs() <= 1e-15);
    }

    #[test]
    fn swapping_the_pair_swaps_posteriors_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..100 {
            let m = CorrelationModel::<f64>::new(
                rng.gen_range(-0.2..0.5),
                rng.gen_range(0.001..0.05),
                rng.gen_range(-0.5..0.2),
                rng.gen_range(0.001..0.05),
            )
            .unwrap();
            let p = pair(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let swapped = pair(p.rho2, p.rho1);
            let (p1, p2) = m.posterior(&p);
            let (q1, q2) = m.posterior(&swapped);
            assert_eq!(p1.to_bits(), q2.to_bits());
            assert_eq!(p2.to_bits(), q1.to_bits());
        }
    }

    #[test]
    fn posterior_monotone_in_rho1_for_equal_variances() {
        let m = CorrelationModel::<f64>::new(0.3, 0.01, 0.05, 0.01).unwrap();
        let mut prev = 0.0;
        for i in 0..50 {
            let rho1 = -0.5 + i as f64 * 0.02;
            let (p1, _) = m.posterior(&pair(rho1, 0.1));
            assert!(p1 >= prev - 1e-15);
            prev = p1;
        }
    }

    #[test]
    fn soft_labels_wrap_posterior_elementwise() {
        let m = CorrelationModel::<f64>::new(0.25, 0.01, 0.0, 0.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let scores: Vec<_> = (0..10)
            .map(|_| pair(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let labels = soft_labels(&m, &scores);
        for (k, p) in scores.iter().enumerate() {
            let (p1, p2) = m.posterior(p);
            assert_eq!(labels.p1()[k].to_bits(), p1.to_bits());
            assert_eq!(labels.p2()[k].to_bits(), p2.to_bits());
        }
        labels.validate().unwrap();
    }

    #[test]
    fn fit_then_posterior_mean_is_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let na = Normal::new(0.28, 0.07).unwrap();
        let nu = Normal::new(0.03, 0.07).unwrap();
        let scores: Vec<_> = (0..300)
            .map(|_| {
                let a = na.sample(&mut rng);
                let u = nu.sample(&mut rng);
                if rng.gen_bool(0.5) {
                    pair(a, u)
                } else {
                    pair(u, a)
                }
            })
            .collect();
        let m = fit_correlation_model(&scores).unwrap();
        let labels = soft_labels(&m, &scores);
        let mean_p1: f64 = labels.p1().iter().sum::<f64>() / 300.0;
        assert!((mean_p1 - 0.5).abs() <= 0.05);
    }

    #[test]
    fn too_few_pairs_rejected() {
        let scores = vec![pair(0.1, 0.2); 3];
        assert!(fit_correlation_model(&scores).is_err());
    }
}
