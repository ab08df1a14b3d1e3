//! Correlated classical and quantum nonlocal boxes.
//!
//! Inputs and outputs are bit pairs. A pair `(x, y)` is flattened to the
//! index `2x + y`, and the same convention is used for outputs `(a, b)` and
//! for the two-qubit computational basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, pauli, ComplexMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoxError {
    #[error("box parameter p must lie in [0, 1], got {0}")]
    OutOfRange(f64),
}

/// Odd-parity probability `p` of a correlated box on input 11.
///
/// The complementary probability is always derived as `1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BoxParam(f64);

impl BoxParam {
    pub fn new(p: f64) -> Result<Self, BoxError> {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(BoxError::OutOfRange(p))
        }
    }

    pub fn p(self) -> f64 {
        self.0
    }

    pub fn q(self) -> f64 {
        1.0 - self.0
    }

    /// `q − p`, the input-11 bias of one box.
    pub fn bias(self) -> f64 {
        self.q() - self.p()
    }
}

impl TryFrom<f64> for BoxParam {
    type Error = BoxError;

    fn try_from(p: f64) -> Result<Self, BoxError> {
        Self::new(p)
    }
}

impl From<BoxParam> for f64 {
    fn from(b: BoxParam) -> f64 {
        b.0
    }
}

/// Flattened index of a bit pair.
pub fn pair_index(first: u8, second: u8) -> usize {
    debug_assert!(first < 2 && second < 2);
    2 * first as usize + second as usize
}

/// Conditional output distributions `Pr[a, b | x, y]`, indexed
/// `[pair_index(x, y)][pair_index(a, b)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    probs: [[f64; 4]; 4],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("distribution for input {input} sums to {sum}")]
    NotNormalized { input: usize, sum: f64 },
    #[error("negative probability {value} at input {input}, output {output}")]
    Negative { input: usize, output: usize, value: f64 },
    #[error("signalling detected: marginal differs by {defect:e}")]
    Signalling { defect: f64 },
}

impl JointDistribution {
    pub fn new(probs: [[f64; 4]; 4]) -> Self {
        Self { probs }
    }

    pub fn prob(&self, x: u8, y: u8, a: u8, b: u8) -> f64 {
        self.probs[pair_index(x, y)][pair_index(a, b)]
    }

    /// Output distribution for one input pair.
    pub fn row(&self, x: u8, y: u8) -> [f64; 4] {
        self.probs[pair_index(x, y)]
    }

    pub fn alice_marginal(&self, x: u8, y: u8, a: u8) -> f64 {
        self.prob(x, y, a, 0) + self.prob(x, y, a, 1)
    }

    pub fn bob_marginal(&self, x: u8, y: u8, b: u8) -> f64 {
        self.prob(x, y, 0, b) + self.prob(x, y, 1, b)
    }

    /// Largest dependence of either party's marginal on the other's input.
    pub fn signalling_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for fixed in 0..2u8 {
            for out in 0..2u8 {
                let alice = (self.alice_marginal(fixed, 0, out) - self.alice_marginal(fixed, 1, out)).abs();
                let bob = (self.bob_marginal(0, fixed, out) - self.bob_marginal(1, fixed, out)).abs();
                worst = worst.max(alice).max(bob);
            }
        }
        worst
    }

    /// Checks normalization, positivity and non-signalling at `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), DistributionError> {
        for (input, row) in self.probs.iter().enumerate() {
            for (output, &value) in row.iter().enumerate() {
                if value < -tol {
                    return Err(DistributionError::Negative { input, output, value });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(DistributionError::NotNormalized { input, sum });
            }
        }
        let defect = self.signalling_defect();
        if defect > tol {
            return Err(DistributionError::Signalling { defect });
        }
        Ok(())
    }
}

/// Correlated NLB: inputs 00, 01, 10 give 00 or 11 with probability ½ each;
/// input 11 gives 01/10 with probability p/2 each and 00/11 with q/2 each.
pub fn correlated_nlb(param: BoxParam) -> JointDistribution {
    let correct = [0.5, 0.0, 0.0, 0.5];
    let (p, q) = (param.p(), param.q());
    JointDistribution::new([correct, correct, correct, [q / 2.0, p / 2.0, p / 2.0, q / 2.0]])
}

/// Sum over inputs of `Pr[a⊕b = x·y] − Pr[a⊕b ≠ x·y]`.
pub fn box_value(dist: &JointDistribution) -> f64 {
    let mut value = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            let target = x & y;
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let pr = dist.prob(x, y, a, b);
                    if a ^ b == target {
                        value += pr;
                    } else {
                        value -= pr;
                    }
                }
            }
        }
    }
    value
}

/// (|00⟩ + |11⟩)/√2
pub fn bell_psi() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::column(
        [s, 0.0, 0.0, s]
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
    )
}

/// (|01⟩ + |10⟩)/√2
pub fn bell_phi() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::column(
        [0.0, s, s, 0.0]
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
    )
}

/// ρ = p|φ⟩⟨φ| + q|ψ⟩⟨ψ|
pub fn rho(param: BoxParam) -> ComplexMatrix {
    let phi = bell_phi().outer_self().scale(param.p());
    let psi = bell_psi().outer_self().scale(param.q());
    &phi + &psi
}

/// Partial trace of a two-qubit operator over the first (Alice's) qubit.
pub fn trace_out_first(m: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(m.shape(), (4, 4));
    ComplexMatrix::from_fn(2, 2, |b, b2| m[(b, b2)] + m[(2 + b, 2 + b2)])
}

/// Partial trace of a two-qubit operator over the second (Bob's) qubit.
pub fn trace_out_second(m: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(m.shape(), (4, 4));
    ComplexMatrix::from_fn(2, 2, |a, a2| m[(2 * a, 2 * a2)] + m[(2 * a + 1, 2 * a2 + 1)])
}

/// Two-qubit output states of a quantum box, one per computational-basis input.
#[derive(Debug, Clone)]
pub struct QuantumBoxOutput {
    states: [ComplexMatrix; 4],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumBoxError {
    #[error("output for input {input} is not Hermitian (defect {defect:e})")]
    NotHermitian { input: usize, defect: f64 },
    #[error("output for input {input} has trace {trace}")]
    Trace { input: usize, trace: f64 },
    #[error("output for input {input} has eigenvalue {min_eig}")]
    NotPositive { input: usize, min_eig: f64 },
    #[error("reduced state depends on the other party's input (defect {defect:e})")]
    Signalling { defect: f64 },
}

impl QuantumBoxOutput {
    pub fn new(states: [ComplexMatrix; 4]) -> Self {
        Self { states }
    }

    pub fn state(&self, x: u8, y: u8) -> &ComplexMatrix {
        &self.states[pair_index(x, y)]
    }

    /// Largest change in a party's reduced state when only the other party's
    /// input bit flips.
    pub fn signalling_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for fixed in 0..2u8 {
            let alice0 = trace_out_second(self.state(fixed, 0));
            let alice1 = trace_out_second(self.state(fixed, 1));
            let bob0 = trace_out_first(self.state(0, fixed));
            let bob1 = trace_out_first(self.state(1, fixed));
            worst = worst.max(alice0.max_abs_diff(&alice1)).max(bob0.max_abs_diff(&bob1));
        }
        worst
    }

    /// Checks every output is a density matrix and that partial traces are
    /// independent of the other party's input.
    pub fn validate(&self, tol: f64, psd_tol: f64) -> Result<(), QuantumBoxError> {
        for (input, s) in self.states.iter().enumerate() {
            let defect = s.hermitian_defect();
            if defect > tol {
                return Err(QuantumBoxError::NotHermitian { input, defect });
            }
            let trace = s.trace().re;
            if (trace - 1.0).abs() > tol {
                return Err(QuantumBoxError::Trace { input, trace });
            }
            let min_eig = linalg::min_eigenvalue(s).map_err(|_| QuantumBoxError::NotHermitian { input, defect })?;
            if min_eig < -psd_tol {
                return Err(QuantumBoxError::NotPositive { input, min_eig });
            }
        }
        let defect = self.signalling_defect();
        if defect > tol {
            return Err(QuantumBoxError::Signalling { defect });
        }
        Ok(())
    }

    /// Outcome statistics when both qubits are measured in the computational basis.
    pub fn measure_computational(&self) -> JointDistribution {
        let mut probs = [[0.0; 4]; 4];
        for (row, s) in probs.iter_mut().zip(&self.states) {
            for (k, v) in row.iter_mut().enumerate() {
                *v = s.re(k, k);
            }
        }
        JointDistribution::new(probs)
    }
}

/// Correlated qNLB: |ψ⟩⟨ψ| on inputs 00, 01, 10 and ρ on input 11.
pub fn correlated_qnlb(param: BoxParam) -> QuantumBoxOutput {
    let psi = bell_psi().outer_self();
    QuantumBoxOutput::new([psi.clone(), psi.clone(), psi, rho(param)])
}

/// (𝟙 ⊗ σ_x), the local map taking |φ⟩ to |ψ⟩.
pub fn bob_flip() -> ComplexMatrix {
    linalg::kron(&pauli::identity(), &pauli::x()).expect("4x4")
}
