//! Protocol P for correlated qNLBs and the parity protocol for correlated NLBs.
//!
//! Both protocols have a closed-form value and an independent evaluation
//! path (dense tensor simulation for protocol P, convolution of parity
//! distributions for the parity protocol) used to cross-check it.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::{self, BoxParam};
use crate::linalg::{self, pauli, ComplexMatrix, LinalgError};

/// Largest copy count for the dense simulation path (ρ^{⊗5} is 1024×1024).
pub const MAX_DENSE_COPIES: usize = 5;

/// Largest copy count for which observables are materialized (2^6 = 64).
pub const MAX_OBSERVABLE_COPIES: usize = 6;

/// Largest copy count accepted by [`parity_value_bruteforce`].
pub const MAX_BRUTEFORCE_COPIES: usize = 20;

const TWO_THIRDS: f64 = 2.0 / 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("p = 0 is outside the protocol's range 0 < p <= 1")]
    ZeroParam,
    #[error("copy count must be at least 1")]
    NoCopies,
    #[error("{what} supports at most {max} copies, got {n}")]
    TooManyCopies { what: &'static str, n: usize, max: usize },
    #[error("l must satisfy 0 <= l < 1, got {0}")]
    SeparationRange(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Which closed-form range a parameter falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolBranch {
    /// 0 < p < ½: all copies are measured jointly.
    Distilling,
    /// ½ ≤ p < ⅔: one copy, rotated measurement.
    SingleCopyRotated,
    /// ⅔ ≤ p ≤ 1: one copy, computational-basis measurement.
    SingleCopyAligned,
}

impl ProtocolBranch {
    pub fn of(param: BoxParam) -> Self {
        let p = param.p();
        if p < 0.5 {
            Self::Distilling
        } else if p < TWO_THIRDS {
            Self::SingleCopyRotated
        } else {
            Self::SingleCopyAligned
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Distilling => "0<p<1/2",
            Self::SingleCopyRotated => "1/2<=p<2/3",
            Self::SingleCopyAligned => "2/3<=p<=1",
        }
    }
}

/// Which parity-protocol formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParityBranch {
    /// 0 ≤ p < ½: parity of all n outputs.
    AllCopies,
    /// ½ ≤ p ≤ 1: a single box.
    SingleBox,
}

impl ParityBranch {
    pub fn of(param: BoxParam) -> Self {
        if param.p() < 0.5 {
            Self::AllCopies
        } else {
            Self::SingleBox
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::AllCopies => "0<=p<1/2",
            Self::SingleBox => "1/2<=p<=1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// How the rotation generators are built from Pauli matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorMode {
    /// σ_z^{⊗n} and σ_x^{⊗n}, used for 0 < p < ½.
    FullTensor,
    /// σ ⊗ 𝟙^{⊗(n−1)}, used for ½ ≤ p ≤ 1.
    SingleCopy,
}

impl OperatorMode {
    pub fn of(param: BoxParam) -> Self {
        if param.p() < 0.5 {
            Self::FullTensor
        } else {
            Self::SingleCopy
        }
    }

    /// Number of copies the generators act on non-trivially.
    pub fn active_copies(self, n: usize) -> usize {
        match self {
            Self::FullTensor => n,
            Self::SingleCopy => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliAxis {
    Z,
    X,
}

impl PauliAxis {
    fn matrix(self) -> ComplexMatrix {
        match self {
            Self::Z => pauli::z(),
            Self::X => pauli::x(),
        }
    }
}

/// One of the four ±1-valued observables of protocol P.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSpec {
    pub party: Party,
    pub input_bit: u8,
    pub copies: usize,
    pub param: BoxParam,
}

impl ObservableSpec {
    pub fn new(party: Party, input_bit: u8, copies: usize, param: BoxParam) -> Self {
        Self {
            party,
            input_bit,
            copies,
            param,
        }
    }

    pub fn angle(&self) -> Result<f64> {
        phi_angle(self.param, self.copies)
    }

    pub fn mode(&self) -> OperatorMode {
        OperatorMode::of(self.param)
    }

    /// Coefficients `(c_z, c_x)` with the observable equal to `c_z·Z + c_x·X`.
    pub fn coefficients(&self) -> Result<(f64, f64)> {
        let phi = self.angle()?;
        let theta = phi / 2.0 + f64::from(self.input_bit) * phi;
        let sign = if self.input_bit == 0 { 1.0 } else { -1.0 };
        let sx = match self.party {
            Party::Alice => sign * theta.sin(),
            Party::Bob => -sign * theta.sin(),
        };
        Ok((theta.cos(), sx))
    }
}

fn check_copies(n: usize) -> Result<()> {
    if n == 0 {
        Err(ProtocolError::NoCopies)
    } else {
        Ok(())
    }
}

fn check_positive(param: BoxParam) -> Result<()> {
    if param.p() == 0.0 {
        Err(ProtocolError::ZeroParam)
    } else {
        Ok(())
    }
}

/// cos²φ for the measurement angle.
pub fn cos_sq_phi(param: BoxParam, n: usize) -> Result<f64> {
    check_positive(param)?;
    check_copies(n)?;
    let q = param.q();
    Ok(match ProtocolBranch::of(param) {
        ProtocolBranch::Distilling => {
            let l = param.bias().powi(n as i32);
            0.25 * (3.0 + l) / (1.0 + l)
        }
        ProtocolBranch::SingleCopyRotated => (1.0 + q) / (4.0 * q),
        ProtocolBranch::SingleCopyAligned => 1.0,
    })
}

/// Measurement angle φ ∈ [0, π/2] for `n` copies.
pub fn phi_angle(param: BoxParam, n: usize) -> Result<f64> {
    let c2 = cos_sq_phi(param, n)?;
    Ok(c2.sqrt().min(1.0).acos())
}

/// Dense matrix of a protocol-P observable on `copies` qubits.
pub fn observable(spec: &ObservableSpec) -> Result<ComplexMatrix> {
    check_copies(spec.copies)?;
    if spec.copies > MAX_OBSERVABLE_COPIES {
        return Err(ProtocolError::TooManyCopies {
            what: "observable",
            n: spec.copies,
            max: MAX_OBSERVABLE_COPIES,
        });
    }
    let (cz, cx) = spec.coefficients()?;
    let (z, x) = generators(spec.mode(), spec.copies)?;
    Ok(&z.scale(cz) + &x.scale(cx))
}

/// The generator pair (Z, X) for a mode on `n` copies.
pub fn generators(mode: OperatorMode, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let build = |axis: PauliAxis| -> Result<ComplexMatrix> {
        let m = axis.matrix();
        Ok(match mode {
            OperatorMode::FullTensor => linalg::kron_power(&m, n)?,
            OperatorMode::SingleCopy => linalg::kron(&m, &linalg::kron_power(&pauli::identity(), n - 1)?)?,
        })
    };
    Ok((build(PauliAxis::Z)?, build(PauliAxis::X)?))
}

/// Basis permutation from copy-interleaved order (A₁B₁A₂B₂…) to party order
/// (A₁…AₙB₁…Bₙ): entry `i` is the interleaved index of party-ordered index `i`.
pub fn party_order_permutation(n: usize) -> Vec<usize> {
    (0..1usize << (2 * n))
        .map(|i| {
            let mut old = 0usize;
            for k in 0..n {
                let a = (i >> (2 * n - 1 - k)) & 1;
                let b = (i >> (n - 1 - k)) & 1;
                old |= a << (2 * n - 1 - 2 * k);
                old |= b << (2 * n - 2 - 2 * k);
            }
            old
        })
        .collect()
}

/// |ψ⟩^{⊗n} in party order.
pub fn psi_tensor_power(n: usize) -> Result<ComplexMatrix> {
    let v = linalg::kron_power(&boxes::bell_psi(), n)?;
    Ok(v.permute_basis(&party_order_permutation(n)))
}

/// ρ^{⊗n} in party order.
pub fn rho_tensor_power(param: BoxParam, n: usize) -> Result<ComplexMatrix> {
    let m = linalg::kron_power(&boxes::rho(param), n)?;
    Ok(m.permute_basis(&party_order_permutation(n)))
}

/// Tr(P_left^{⊗n} ⊗ P_right^{⊗n} · ρ^{⊗n}) from the single-copy values
/// (q−p, 1, 0, 0) raised to the n-th power.
pub fn trace_relation_closed(n: usize, param: BoxParam, left: PauliAxis, right: PauliAxis) -> f64 {
    match (left, right) {
        (PauliAxis::Z, PauliAxis::Z) => param.bias().powi(n as i32),
        (PauliAxis::X, PauliAxis::X) => 1.0,
        _ => 0.0,
    }
}

/// Same trace evaluated on dense 4^n-dimensional operators.
pub fn trace_relation_dense(n: usize, param: BoxParam, left: PauliAxis, right: PauliAxis) -> Result<f64> {
    check_copies(n)?;
    if n > MAX_DENSE_COPIES {
        return Err(ProtocolError::TooManyCopies {
            what: "dense trace",
            n,
            max: MAX_DENSE_COPIES,
        });
    }
    let op = linalg::kron(
        &linalg::kron_power(&left.matrix(), n)?,
        &linalg::kron_power(&right.matrix(), n)?,
    )?;
    let rho_n = rho_tensor_power(param, n)?;
    Ok(op.trace_product(&rho_n)?.re)
}

/// The four correlators of protocol P and the resulting value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueBreakdown {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
    pub total: f64,
}

impl ValueBreakdown {
    pub fn from_correlators(e00: f64, e01: f64, e10: f64, e11: f64) -> Self {
        Self {
            e00,
            e01,
            e10,
            e11,
            total: e00 + e01 + e10 - e11,
        }
    }
}

/// Closed-form value of protocol P on `n` copies.
pub fn protocol_p_value_closed(n: usize, param: BoxParam) -> Result<f64> {
    let cos_phi = cos_sq_phi(param, n)?.sqrt();
    let (p, q) = (param.p(), param.q());
    Ok(match ProtocolBranch::of(param) {
        ProtocolBranch::Distilling => {
            let l = param.bias().powi(n as i32);
            (3.0 + l) * cos_phi + 0.5 * (1.0 - l)
        }
        ProtocolBranch::SingleCopyRotated => 2.0 * (1.0 + q) * cos_phi + p,
        ProtocolBranch::SingleCopyAligned => 2.0 * (1.0 + p),
    })
}

/// Unsimplified value 3cosφ − ½((1+l)cos3φ − (1−l)), with `l` the bias
/// raised to the number of copies the observables actually touch.
pub fn protocol_p_value_raw(n: usize, param: BoxParam) -> Result<f64> {
    let phi = phi_angle(param, n)?;
    let active = OperatorMode::of(param).active_copies(n);
    let l = param.bias().powi(active as i32);
    Ok(3.0 * phi.cos() - 0.5 * ((1.0 + l) * (3.0 * phi).cos() - (1.0 - l)))
}

/// Literal evaluation of the CHSH-type value on dense states and observables.
pub fn protocol_p_value_dense(n: usize, param: BoxParam) -> Result<ValueBreakdown> {
    check_copies(n)?;
    if n > MAX_DENSE_COPIES {
        return Err(ProtocolError::TooManyCopies {
            what: "dense protocol evaluation",
            n,
            max: MAX_DENSE_COPIES,
        });
    }
    let obs = |party, bit| observable(&ObservableSpec::new(party, bit, n, param));
    let a = [obs(Party::Alice, 0)?, obs(Party::Alice, 1)?];
    let b = [obs(Party::Bob, 0)?, obs(Party::Bob, 1)?];
    let psi_n = psi_tensor_power(n)?;
    let rho_n = rho_tensor_power(param, n)?;
    let on_psi = |x: usize, y: usize| -> Result<f64> {
        Ok(linalg::kron(&a[x], &b[y])?.expectation(&psi_n)?.re)
    };
    let e11 = linalg::kron(&a[1], &b[1])?.trace_product(&rho_n)?.re;
    Ok(ValueBreakdown::from_correlators(on_psi(0, 0)?, on_psi(0, 1)?, on_psi(1, 0)?, e11))
}

/// Evaluation that expands each A_x ⊗ B_y into four Pauli products and
/// factorizes their traces copy by copy; valid for any `n`.
pub fn protocol_p_value_factored(n: usize, param: BoxParam) -> Result<ValueBreakdown> {
    check_copies(n)?;
    let active = OperatorMode::of(param).active_copies(n);
    let pure = BoxParam::new(0.0).expect("0 is a valid parameter");
    let coeffs = |party, bit| ObservableSpec::new(party, bit, n, param).coefficients();
    let correlator = |x: u8, y: u8, state: BoxParam| -> Result<f64> {
        let (az, ax) = coeffs(Party::Alice, x)?;
        let (bz, bx) = coeffs(Party::Bob, y)?;
        let t = |l, r| trace_relation_closed(active, state, l, r);
        Ok(az * bz * t(PauliAxis::Z, PauliAxis::Z)
            + az * bx * t(PauliAxis::Z, PauliAxis::X)
            + ax * bz * t(PauliAxis::X, PauliAxis::Z)
            + ax * bx * t(PauliAxis::X, PauliAxis::X))
    };
    Ok(ValueBreakdown::from_correlators(
        correlator(0, 0, pure)?,
        correlator(0, 1, pure)?,
        correlator(1, 0, pure)?,
        correlator(1, 1, param)?,
    ))
}

/// Optimal non-adaptive value for `n` correlated NLBs, attained by the
/// parity protocol.
pub fn parity_value_closed(n: usize, param: BoxParam) -> Result<f64> {
    check_copies(n)?;
    Ok(match ParityBranch::of(param) {
        ParityBranch::AllCopies => 3.0 - param.bias().powi(n as i32),
        ParityBranch::SingleBox => 2.0 * (1.0 + param.p()),
    })
}

/// Value of the parity protocol on exactly `k` boxes, computed by iterated
/// convolution of the per-box output-parity distribution.
pub fn parity_k_value(k: usize, param: BoxParam) -> f64 {
    let single = boxes::correlated_nlb(param);
    let mut value = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            let row = single.row(x, y);
            let odd = row[1] + row[2];
            let even = row[0] + row[3];
            // [Pr[xor even], Pr[xor odd]] over the boxes combined so far.
            let mut acc = [1.0, 0.0];
            for _ in 0..k {
                acc = [acc[0] * even + acc[1] * odd, acc[0] * odd + acc[1] * even];
            }
            let target = usize::from(x & y);
            value += acc[target] - acc[1 - target];
        }
    }
    value
}

/// Brute-force optimum over parity protocols on k = 1..=n boxes.
pub fn parity_value_bruteforce(n: usize, param: BoxParam) -> Result<f64> {
    check_copies(n)?;
    if n > MAX_BRUTEFORCE_COPIES {
        return Err(ProtocolError::TooManyCopies {
            what: "parity brute force",
            n,
            max: MAX_BRUTEFORCE_COPIES,
        });
    }
    Ok((1..=n).map(|k| parity_k_value(k, param)).fold(f64::NEG_INFINITY, f64::max))
}

/// (3√3 + 1)/2, the large-n value of protocol P for 0 < p < ½.
pub fn qnlb_asymptote() -> f64 {
    0.5 * (3.0 * 3f64.sqrt() + 1.0)
}

/// Large-n limits of both protocols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValues {
    pub qnlb_limit: f64,
    pub nlb_limit: f64,
    /// False outside 0 < p < ½, where the values are the fixed,
    /// copy-independent ones.
    pub distillable: bool,
}

pub fn asymptotic_values(param: BoxParam) -> AsymptoticValues {
    let p = param.p();
    if p > 0.0 && p < 0.5 {
        AsymptoticValues {
            qnlb_limit: qnlb_asymptote(),
            nlb_limit: 3.0,
            distillable: true,
        }
    } else if p == 0.0 {
        // Tabulated value of the p = 0 row for both box types.
        AsymptoticValues {
            qnlb_limit: 2.0,
            nlb_limit: 2.0,
            distillable: false,
        }
    } else {
        AsymptoticValues {
            qnlb_limit: protocol_p_value_closed(1, param).expect("p > 0"),
            nlb_limit: 2.0 * (1.0 + p),
            distillable: false,
        }
    }
}

/// Limit of the closed form as p → 0⁺ (cos²φ → ½): 2√2.
pub fn protocol_p_limit_at_zero() -> f64 {
    4.0 * FRAC_1_SQRT_2
}

/// Checks 4(1+l) < (3+l)√(3+l), the strict gap between the two protocols
/// at bias power `l`, and its equivalent form 4k − k√k − 8 < 0 with k = 3+l.
pub fn separation_inequality_check(l: f64) -> Result<bool> {
    if !(0.0..1.0).contains(&l) {
        return Err(ProtocolError::SeparationRange(l));
    }
    let k = 3.0 + l;
    let direct = 4.0 * (1.0 + l) < k * k.sqrt();
    let substituted = separation_polynomial(k) < 0.0;
    Ok(direct && substituted)
}

/// 4k − k√k − 8
pub fn separation_polynomial(k: f64) -> f64 {
    4.0 * k - k * k.sqrt() - 8.0
}
