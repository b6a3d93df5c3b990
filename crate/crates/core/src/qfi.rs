//! Classical and quantum Fisher information for one-parameter families.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-12;
const DPROB_SUM_TOL: f64 = 1e-10;

/// Outcome probabilities `P(xi|eps)` of a fixed measurement and their
/// `eps`-derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
    dprobs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>, dprobs: Vec<f64>) -> Result<Self> {
        if probs.len() != dprobs.len() || probs.is_empty() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities vs {} derivatives",
                probs.len(),
                dprobs.len()
            )));
        }
        if let Some(i) = probs.iter().position(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidDistribution(format!(
                "probability {} at index {i} is outside [0, 1]",
                probs[i]
            )));
        }
        if dprobs.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite derivative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let dtotal: f64 = dprobs.iter().sum();
        if dtotal.abs() > DPROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "derivatives sum to {dtotal}"
            )));
        }
        Ok(Self { probs, dprobs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dprobs(&self) -> &[f64] {
        &self.dprobs
    }
}

/// `sum_xi (dP)^2 / P`. Outcomes with `P = dP = 0` contribute nothing.
pub fn classical_fisher(d: &OutcomeDistribution) -> Result<f64> {
    let mut total = 0.0;
    for (i, (&p, &dp)) in d.probs.iter().zip(&d.dprobs).enumerate() {
        if p > 0.0 {
            total += dp / p * dp;
        } else if dp != 0.0 {
            return Err(Error::SingularOutcome(i));
        }
    }
    Ok(total)
}

/// Spectral data of a state family: eigenvalues, their derivatives and the
/// eigenvector overlaps `|<psi_m | d psi_n>|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFamily {
    eigenvalues: Vec<f64>,
    deigenvalues: Vec<f64>,
    overlap_terms: Vec<Vec<f64>>,
}

impl SpectralFamily {
    pub fn new(
        eigenvalues: Vec<f64>,
        deigenvalues: Vec<f64>,
        overlap_terms: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || deigenvalues.len() != n {
            return Err(Error::InvalidDistribution(
                "eigenvalue and derivative lengths differ".into(),
            ));
        }
        if eigenvalues.iter().any(|&l| l.is_nan() || l < 0.0) {
            return Err(Error::InvalidDistribution("negative eigenvalue".into()));
        }
        let total: f64 = eigenvalues.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "eigenvalues sum to {total}"
            )));
        }
        if overlap_terms.len() != n || overlap_terms.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidDistribution(format!(
                "overlap matrix must be {n}x{n}"
            )));
        }
        for (m, row) in overlap_terms.iter().enumerate() {
            for (k, &w) in row.iter().enumerate() {
                if w.is_nan() || w < 0.0 || w != overlap_terms[k][m] {
                    return Err(Error::InvalidDistribution(format!(
                        "overlap matrix must be symmetric and non-negative (entry {m},{k})"
                    )));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            deigenvalues,
            overlap_terms,
        })
    }

    /// A family whose eigenvectors do not depend on the parameter.
    pub fn diagonal(eigenvalues: Vec<f64>, deigenvalues: Vec<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        Self::new(eigenvalues, deigenvalues, vec![vec![0.0; n]; n])
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn deigenvalues(&self) -> &[f64] {
        &self.deigenvalues
    }
}

/// QFI of a possibly rank-deficient state from its spectral decomposition:
///
/// ```text
/// F_Q = sum_{λ_i != 0} (∂λ_i)² / λ_i
///     + 2 sum_{m != n, λ_m + λ_n != 0} (λ_m - λ_n)² / (λ_m + λ_n) |<ψ_m|∂ψ_n>|²
/// ```
pub fn qfi_spectral(f: &SpectralFamily) -> f64 {
    let lam = &f.eigenvalues;
    let classical: f64 = lam
        .iter()
        .zip(&f.deigenvalues)
        .filter(|(&l, _)| l != 0.0)
        .map(|(&l, &dl)| dl / l * dl)
        .sum();
    let mut coherent = 0.0;
    for (m, row) in f.overlap_terms.iter().enumerate() {
        for (n, &w) in row.iter().enumerate() {
            let s = lam[m] + lam[n];
            if m != n && s != 0.0 {
                let d = lam[m] - lam[n];
                coherent += d * d / s * w;
            }
        }
    }
    classical + 2.0 * coherent
}

/// Diagonal SLD `L_i = dP_i / P_i` of a family diagonal in a fixed basis.
pub fn sld_diagonal(probs: &[f64], dprobs: &[f64]) -> Result<Vec<f64>> {
    if probs.len() != dprobs.len() {
        return Err(Error::InvalidDistribution("length mismatch".into()));
    }
    probs
        .iter()
        .zip(dprobs)
        .enumerate()
        .map(|(i, (&p, &dp))| {
            if p > 0.0 {
                Ok(dp / p)
            } else {
                Err(Error::ZeroSupport(i))
            }
        })
        .collect()
}

/// `Tr[rho L^2]` for diagonal `rho` and `L`.
pub fn trace_rho_sld_sq(probs: &[f64], sld: &[f64]) -> f64 {
    probs.iter().zip(sld).map(|(p, l)| p * l * l).sum()
}

/// `Tr[(d rho) L]` for diagonal `d rho` and `L`.
pub fn trace_drho_sld(dprobs: &[f64], sld: &[f64]) -> f64 {
    dprobs.iter().zip(sld).map(|(d, l)| d * l).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64], d: &[f64]) -> OutcomeDistribution {
        OutcomeDistribution::new(p.to_vec(), d.to_vec()).unwrap()
    }

    #[test]
    fn classical_fisher_examples() {
        let c = 0.3;
        assert!(
            (classical_fisher(&dist(&[0.5, 0.5], &[c, -c])).unwrap() - 4.0 * c * c).abs() < 1e-15
        );
        assert_eq!(
            classical_fisher(&dist(&[1.0, 0.0], &[0.0, 0.0])).unwrap(),
            0.0
        );
        let (p, dp) = (0.2_f64, 0.07_f64);
        let direct = p * (dp / p).powi(2) + (1.0 - p) * (-dp / (1.0 - p)).powi(2);
        let closed = dp * dp / (p * (1.0 - p));
        let got = classical_fisher(&dist(&[p, 1.0 - p], &[dp, -dp])).unwrap();
        assert!((got - direct).abs() < 1e-15 && (got - closed).abs() < 1e-15);
    }

    #[test]
    fn singular_outcome_is_an_error() {
        let d = OutcomeDistribution {
            probs: vec![1.0, 0.0],
            dprobs: vec![-0.1, 0.1],
        };
        assert_eq!(classical_fisher(&d), Err(Error::SingularOutcome(1)));
    }

    #[test]
    fn distribution_validation() {
        assert!(OutcomeDistribution::new(vec![0.5, 0.6], vec![0.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new(vec![0.5, 0.5], vec![0.1, 0.0]).is_err());
        assert!(OutcomeDistribution::new(vec![1.5, -0.5], vec![0.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new(vec![0.5], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn spectral_constant_and_diagonal_families() {
        let f = SpectralFamily::diagonal(vec![0.25, 0.75], vec![0.0, 0.0]).unwrap();
        assert_eq!(qfi_spectral(&f), 0.0);

        let p = [0.1, 0.3, 0.6];
        let d = [0.05, -0.02, -0.03];
        let f = SpectralFamily::diagonal(p.to_vec(), d.to_vec()).unwrap();
        assert_eq!(qfi_spectral(&f), classical_fisher(&dist(&p, &d)).unwrap());
    }

    #[test]
    fn spectral_two_level_with_coherence() {
        let (p, dp, w) = (0.3_f64, 0.1_f64, 0.05_f64);
        let f = SpectralFamily::new(
            vec![p, 1.0 - p],
            vec![dp, -dp],
            vec![vec![0.0, w], vec![w, 0.0]],
        )
        .unwrap();
        // both ordered pairs (0,1) and (1,0) contribute, each with weight 2
        let lam = [p, 1.0 - p];
        let mut want = dp * dp / p + dp * dp / (1.0 - p);
        for (m, n) in [(0, 1), (1, 0)] {
            want += 2.0 * (lam[m] - lam[n]).powi(2) / (lam[m] + lam[n]) * w;
        }
        assert!((qfi_spectral(&f) - want).abs() < 1e-15);
        assert!((want - 0.079_619_047_619_047_6).abs() < 1e-15);
    }

    #[test]
    fn spectral_skips_zero_eigenvalues() {
        let f = SpectralFamily::new(
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![vec![0.0, 0.2], vec![0.2, 0.0]],
        )
        .unwrap();
        // (1 - 0)^2 / 1 * 0.2 for both orderings, times 2
        assert!((qfi_spectral(&f) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn spectral_validation() {
        assert!(SpectralFamily::diagonal(vec![0.5, 0.6], vec![0.0, 0.0]).is_err());
        assert!(SpectralFamily::new(
            vec![0.5, 0.5],
            vec![0.0, 0.0],
            vec![vec![0.0, 0.1], vec![0.2, 0.0]]
        )
        .is_err());
        assert!(SpectralFamily::diagonal(vec![-0.1, 1.1], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn sld_examples() {
        let probs = [0.5, 0.5];
        let dprobs = [0.1, -0.1];
        let sld = sld_diagonal(&probs, &dprobs).unwrap();
        assert!((sld[0] - 0.2).abs() < 1e-15 && (sld[1] + 0.2).abs() < 1e-15);
        let tr = trace_drho_sld(&dprobs, &sld);
        assert!((tr - 0.04).abs() < 1e-15);
        assert!((tr - classical_fisher(&dist(&probs, &dprobs)).unwrap()).abs() < 1e-15);
        assert!((trace_rho_sld_sq(&probs, &sld) - tr).abs() < 1e-15);
        // d rho = (rho L + L rho) / 2 entrywise
        for i in 0..2 {
            assert!((dprobs[i] - probs[i] * sld[i]).abs() < 1e-15);
        }
        assert_eq!(
            sld_diagonal(&[1.0, 0.0], &[0.0, 0.0]),
            Err(Error::ZeroSupport(1))
        );
    }
}
