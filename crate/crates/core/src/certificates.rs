//! Explicit dual certificates proving protocol P optimal for n ≤ 3.
//!
//! For n = 1 the certificate is a diagonal dual vector. For n = 2, 3 the dual
//! matrix K splits as a 4×4 head on (x0, x1, y0, z_{0…0}) plus a tail on x1
//! and the z block; the cut-off `x` moves weight between the two. The dual
//! value of every block is half its trace.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::BoxParam;
use crate::linalg::{self, ComplexMatrix, LinalgError, PSD_TOL};
use crate::protocols::{self, ProtocolBranch, ProtocolError};
use crate::sdp::{self, DualCertificate, IndexMap, SdpError};

/// Largest |dual − primal| accepted as a zero gap.
pub const GAP_TOL: f64 = 1e-9;

/// Largest deviation of an assembled K from the dual-constraint shape.
pub const STRUCTURE_TOL: f64 = 1e-9;

/// Relative zero threshold for the characteristic-polynomial test.
pub const HORN_TOL: f64 = 1e-9;

const TWO_THIRDS: f64 = 2.0 / 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("certificates exist for n = 1, 2, 3 only, got n = {0}")]
    UnsupportedCopies(usize),
    #[error("p = {p} outside the certificate range {range}")]
    ParamOutOfRange { p: f64, range: &'static str },
    #[error("assembled K deviates from a dual constraint matrix by {0:e}")]
    Structure(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

pub type Result<T> = std::result::Result<T, CertError>;

fn require_open(param: BoxParam, allow_one: bool) -> Result<()> {
    let p = param.p();
    let ok = p > 0.0 && (p < 1.0 || (allow_one && p == 1.0));
    if ok {
        Ok(())
    } else {
        Err(CertError::ParamOutOfRange {
            p,
            range: if allow_one { "0 < p <= 1" } else { "0 < p < 1" },
        })
    }
}

fn require_multi(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(CertError::UnsupportedCopies(n))
    }
}

/// Cut-off between head and tail: ½(1+(q−p)^n) for p ≤ ½, 1−p above.
pub fn cutoff_x(n: usize, param: BoxParam) -> f64 {
    if param.p() <= 0.5 {
        0.5 * (1.0 + param.bias().powi(n as i32))
    } else {
        param.q()
    }
}

/// Dual vector for one copy.
pub fn cert_n1_mu(param: BoxParam) -> Result<Vec<f64>> {
    require_open(param, true)?;
    let (p, q) = (param.p(), param.q());
    if p >= TWO_THIRDS {
        Ok(vec![1.0, p, 1.0, p / 2.0, p / 2.0])
    } else {
        let c = protocols::phi_angle(param, 1)?.cos();
        Ok(vec![c, c * q + p / 2.0, c, c * q, p / 2.0])
    }
}

pub fn cert_n1(param: BoxParam) -> Result<DualCertificate> {
    let mu = cert_n1_mu(param)?;
    let program = sdp::build_program(1, param)?;
    Ok(sdp::assemble_dual(&program, &mu, &[])?)
}

/// The two PSD summands K = K₁ + K₂ used in the single-copy argument.
pub fn cert_n1_split(param: BoxParam) -> Result<(ComplexMatrix, ComplexMatrix)> {
    require_open(param, true)?;
    let (p, q) = (param.p(), param.q());
    let k1 = if p >= TWO_THIRDS {
        ComplexMatrix::from_real_rows(&[
            [2.0, 0.0, -1.0, -1.0, 0.0],
            [0.0, p, -1.0, 1.0 - p, 0.0],
            [-1.0, -1.0, 2.0, 0.0, 0.0],
            [-1.0, 1.0 - p, 0.0, p, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
        ])
    } else {
        let c = protocols::phi_angle(param, 1)?.cos();
        ComplexMatrix::from_real_rows(&[
            [2.0 * c, 0.0, -1.0, -1.0, 0.0],
            [0.0, 2.0 * q * c, -1.0, q, 0.0],
            [-1.0, -1.0, 2.0 * c, 0.0, 0.0],
            [-1.0, q, 0.0, 2.0 * q * c, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
        ])
    };
    let mut k2 = ComplexMatrix::zeros(5, 5);
    for (i, j) in [(1, 1), (1, 4), (4, 1), (4, 4)] {
        k2.set_re(i, j, p);
    }
    Ok((k1, k2))
}

/// The 4×4 head block for n = 2, 3.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadBlock {
    pub x: f64,
    pub lambda1: f64,
    pub l1: f64,
    pub matrix: ComplexMatrix,
    pub value: f64,
}

impl HeadBlock {
    /// (λ₁−1)(l₁+x) and (λ₁+1)(l₁−x); the head is PSD when both are ≥ 1.
    pub fn conjugation_products(&self) -> (f64, f64) {
        (
            (self.lambda1 - 1.0) * (self.l1 + self.x),
            (self.lambda1 + 1.0) * (self.l1 - self.x),
        )
    }

    /// √((1+x)³/x) or 3−x, the closed form of λ₁ + l₁.
    pub fn closed_value(&self, param: BoxParam) -> f64 {
        if param.p() < TWO_THIRDS {
            ((1.0 + self.x).powi(3) / self.x).sqrt()
        } else {
            3.0 - self.x
        }
    }
}

fn head_block(n: usize, param: BoxParam) -> HeadBlock {
    let x = cutoff_x(n, param);
    let (lambda1, l1) = if param.p() < TWO_THIRDS {
        let lambda1 = (1.0 + 1.0 / x).sqrt();
        (lambda1, x * lambda1)
    } else {
        (2.0, 1.0 - x)
    };
    let matrix = ComplexMatrix::from_real_rows(&[
        [lambda1, 0.0, -1.0, -1.0],
        [0.0, l1, -1.0, x],
        [-1.0, -1.0, lambda1, 0.0],
        [-1.0, x, 0.0, l1],
    ]);
    HeadBlock {
        x,
        lambda1,
        l1,
        value: 0.5 * matrix.trace().re,
        matrix,
    }
}

pub fn cert_head(n: usize, param: BoxParam) -> Result<HeadBlock> {
    require_multi(n)?;
    require_open(param, false)?;
    Ok(head_block(n, param))
}

/// Tail block: for n = 2 the 5×5 matrix on (x1, z00, z01, z10, z11); for
/// n = 3 the 3×3 rank-3 reduction over (x1, weight-1 z, weight-2 z).
#[derive(Debug, Clone, PartialEq)]
pub struct TailBlock {
    pub matrix: ComplexMatrix,
    pub value: f64,
}

/// The two summands of the n = 2 tail, W_tail = W₁ − W₂.
pub fn tail_n2_parts(param: BoxParam) -> (ComplexMatrix, ComplexMatrix) {
    let (p, q) = (param.p(), param.q());
    let h = 0.5 * q;
    let (w1, first) = if p >= 0.5 {
        (
            [
                [1.0, 0.0, 0.0, 0.0, 0.0],
                [0.0, h, -h, -h, -h],
                [0.0, -h, h, h, h],
                [0.0, -h, h, h, h],
                [0.0, -h, h, h, p - h],
            ],
            [0.0, q, -q, -q, -p],
        )
    } else {
        let g = 0.5 * p;
        (
            [
                [2.0 * q, 0.0, 0.0, 0.0, 0.0],
                [0.0, h, -g, -g, -h],
                [0.0, -g, h, h, g],
                [0.0, -g, h, h, g],
                [0.0, -h, g, g, h],
            ],
            [0.0, p, -q, -q, -p],
        )
    };
    let w1 = ComplexMatrix::from_real_rows(&w1).scale(p);
    let mut w2 = ComplexMatrix::zeros(5, 5);
    for (j, &v) in first.iter().enumerate() {
        w2.set_re(0, j, p * v);
        w2.set_re(j, 0, p * v);
    }
    (w1, w2)
}

/// Weight-class symmetrized 5×5 tail for n = 3 over
/// (x1, z000, weight-1 z, weight-2 z, z111).
pub fn tail_n3_symmetrized(param: BoxParam) -> ComplexMatrix {
    let (p, q) = (param.p(), param.q());
    let s = q * q + p * p;
    let rows = if p <= 0.5 {
        let r22 = 4.5 * q * q * p.powi(3) / s;
        let r24 = -1.5 * q * q * p.powi(3) / s;
        let r33 = 0.5 * q.powi(4) * p / s;
        let r35 = 0.5 * q * q * p * (2.0 * p * p - q * q) / s;
        let r44 = 0.5 * q * q * p.powi(3) / s;
        let r55 = 0.5 * p * (3.0 * q.powi(4) - 4.0 * q * q * p * p + 2.0 * p.powi(4)) / s;
        let a = 0.75 * q * p * p;
        let b = 0.25 * q * p * p;
        [
            [p * (3.0 * q * q + p * p), -3.0 * q * p * p, q * q * p, q * p * p, p.powi(3)],
            [-3.0 * q * p * p, r22, -a, r24, -a],
            [q * q * p, -a, r33, b, r35],
            [q * p * p, r24, b, r44, b],
            [p.powi(3), -a, r35, b, r55],
        ]
    } else {
        let r12 = q.powi(3) - q;
        let r22 = 0.5 * q * p * (p.powi(3) - 2.0 * p + 2.0) / s;
        let r23 = -0.25 * q * q * p * (q * q + 4.0 * q * p + p * p) / s;
        let r24 = -0.5 * q * p * (q.powi(3) + q * p * p + p.powi(3)) / s;
        let r25 = -0.75 * q * q * p;
        let r33 = 0.5 * q.powi(3) * p * p / s;
        let r34 = 0.25 * q * q * p;
        let r35 = 0.5 * q * q * p * (q * q - q * p + p * p) / s;
        let r44 = 0.5 * q * p.powi(4) / s;
        let r45 = -0.25 * q * q * p * (q * q - 4.0 * q * p + p * p) / s;
        let r55 = 0.5 * p * p * (7.0 * p.powi(3) - 13.0 * p * p + 11.0 * p - 3.0) / s;
        [
            [p, r12, q * q * p, q * p * p, p.powi(3)],
            [r12, r22, r23, r24, r25],
            [q * q * p, r23, r33, r34, r35],
            [q * p * p, r24, r34, r44, r45],
            [p.powi(3), r25, r35, r45, r55],
        ]
    };
    ComplexMatrix::from_real_rows(&rows)
}

/// The rank-3 reduction of the n = 3 tail over (x1, weight-1, weight-2).
pub fn tail_n3_reduced(param: BoxParam) -> ComplexMatrix {
    let (p, q) = (param.p(), param.q());
    let s = q * q + p * p;
    let rows = if p <= 0.5 {
        [
            [p * (3.0 * q * q + p * p), q * q * p, q * p * p],
            [q * q * p, 0.5 * q.powi(4) * p / s, 0.25 * q * p * p],
            [q * p * p, 0.25 * q * p * p, 0.5 * q * q * p.powi(3) / s],
        ]
    } else {
        [
            [p, q * q * p, q * p * p],
            [q * q * p, 0.5 * q.powi(3) * p / s, 0.25 * q * q * p],
            [q * p * p, 0.25 * q * q * p, 0.5 * q * p.powi(4) / s],
        ]
    };
    ComplexMatrix::from_real_rows(&rows)
}

fn tail_block(n: usize, param: BoxParam) -> TailBlock {
    if n == 2 {
        let (w1, w2) = tail_n2_parts(param);
        let matrix = &w1 - &w2;
        TailBlock {
            value: 0.5 * matrix.trace().re,
            matrix,
        }
    } else {
        let matrix = tail_n3_reduced(param);
        TailBlock {
            value: matrix.re(0, 0),
            matrix,
        }
    }
}

pub fn cert_tail(n: usize, param: BoxParam) -> Result<TailBlock> {
    require_multi(n)?;
    require_open(param, false)?;
    Ok(tail_block(n, param))
}

/// Head and tail together with their values.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadTailCertificate {
    pub n: usize,
    pub param: BoxParam,
    pub x: f64,
    pub head: HeadBlock,
    pub tail: TailBlock,
    pub total_value: f64,
}

/// Builds the head/tail pair; `p = 1` is accepted as the continuity limit.
pub fn head_tail_certificate(n: usize, param: BoxParam) -> Result<HeadTailCertificate> {
    require_multi(n)?;
    require_open(param, true)?;
    let head = head_block(n, param);
    let tail = tail_block(n, param);
    Ok(HeadTailCertificate {
        n,
        param,
        x: head.x,
        total_value: head.value + tail.value,
        head,
        tail,
    })
}

/// Weight class of a tail row: 0 for x1, 1 + |s| for z_s.
fn tail_class(index: &IndexMap, row: usize) -> usize {
    match index.z_string(row) {
        Some(s) => 1 + s.count_ones() as usize,
        None => 0,
    }
}

/// The full N×N dual matrix K: head on (x0, x1, y0, z_{0…0}) plus the tail
/// spread over x1 and the z block. For n = 3 each tail entry is the
/// symmetrized entry of its pair of weight classes. Returns μ, τ read off K
/// and checks that K has the shape 2(diag μ − Σ τ_k H_k) − W.
pub fn full_certificate(n: usize, param: BoxParam) -> Result<DualCertificate> {
    if n == 1 {
        return cert_n1(param);
    }
    let ht = head_tail_certificate(n, param)?;
    let program = sdp::build_program(n, param)?;
    let index = program.index;
    let dim = program.dim();
    let mut k = ComplexMatrix::zeros(dim, dim);

    let head_rows = [IndexMap::X0, IndexMap::X1, IndexMap::Y0, index.z(0)];
    for (a, &i) in head_rows.iter().enumerate() {
        for (b, &j) in head_rows.iter().enumerate() {
            k.set_re(i, j, ht.head.matrix.re(a, b));
        }
    }

    let tail_rows: Vec<usize> = std::iter::once(IndexMap::X1)
        .chain((0..index.z_count()).map(|s| index.z(s)))
        .collect();
    let spread = if n == 2 {
        ht.tail.matrix.clone()
    } else {
        tail_n3_symmetrized(param)
    };
    for (a, &i) in tail_rows.iter().enumerate() {
        for (b, &j) in tail_rows.iter().enumerate() {
            let v = if n == 2 {
                spread.re(a, b)
            } else {
                spread.re(tail_class(&index, i), tail_class(&index, j))
            };
            k.set_re(i, j, k.re(i, j) + v);
        }
    }

    let (cert, deviation) = sdp::dual_from_matrix(&program, &k)?;
    if deviation > STRUCTURE_TOL {
        return Err(CertError::Structure(deviation));
    }
    Ok(cert)
}

/// Outcome of checking one certificate against protocol P.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub p: f64,
    pub range_branch: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_eig_head: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_eig_tail: Option<f64>,
    #[serde(rename = "min_eig_K", skip_serializing_if = "Option::is_none", default)]
    pub min_eig_k: Option<f64>,
    #[serde(rename = "min_eig_full_K", skip_serializing_if = "Option::is_none", default)]
    pub min_eig_full_k: Option<f64>,
    pub dual_value: f64,
    pub primal_value: f64,
    pub gap: f64,
    /// True for n ≥ 2 at p = 1, which is certified by continuity only.
    #[serde(default)]
    pub boundary: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub pass: bool,
}

impl VerificationReport {
    fn failed(n: usize, param: BoxParam, err: impl ToString) -> Self {
        Self {
            n,
            p: param.p(),
            range_branch: String::new(),
            min_eig_head: None,
            min_eig_tail: None,
            min_eig_k: None,
            min_eig_full_k: None,
            dual_value: f64::NAN,
            primal_value: f64::NAN,
            gap: f64::NAN,
            boundary: false,
            error: Some(err.to_string()),
            pass: false,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        [self.min_eig_head, self.min_eig_tail, self.min_eig_k, self.min_eig_full_k]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Assembles the certificate for `(n, p)`, checks every block PSD and
/// compares its dual value with the protocol value. Failures are reported,
/// not returned as errors.
pub fn verify_optimality(n: usize, param: BoxParam) -> VerificationReport {
    match try_verify(n, param) {
        Ok(report) => report,
        Err(e) => VerificationReport::failed(n, param, e),
    }
}

fn try_verify(n: usize, param: BoxParam) -> Result<VerificationReport> {
    if !(1..=3).contains(&n) {
        return Err(CertError::UnsupportedCopies(n));
    }
    let primal_value = protocols::protocol_p_value_closed(n, param)?;
    let range_branch = ProtocolBranch::of(param).label().to_string();
    let mut report = VerificationReport {
        n,
        p: param.p(),
        range_branch,
        min_eig_head: None,
        min_eig_tail: None,
        min_eig_k: None,
        min_eig_full_k: None,
        dual_value: 0.0,
        primal_value,
        gap: 0.0,
        boundary: n >= 2 && param.p() == 1.0,
        error: None,
        pass: false,
    };

    if n == 1 {
        let cert = cert_n1(param)?;
        report.min_eig_k = Some(cert.min_eigenvalue()?);
        report.dual_value = cert.value();
    } else {
        let ht = head_tail_certificate(n, param)?;
        report.min_eig_head = Some(linalg::min_eigenvalue(&ht.head.matrix)?);
        let mut tail_min = linalg::min_eigenvalue(&ht.tail.matrix)?;
        if n == 3 {
            tail_min = tail_min.min(linalg::min_eigenvalue(&tail_n3_symmetrized(param))?);
        }
        report.min_eig_tail = Some(tail_min);
        let full = full_certificate(n, param)?;
        report.min_eig_full_k = Some(full.min_eigenvalue()?);
        report.dual_value = ht.total_value;
        let assembled = full.value();
        if (assembled - ht.total_value).abs() > GAP_TOL {
            report.error = Some(format!(
                "head+tail value {} differs from assembled K value {assembled}",
                ht.total_value
            ));
        }
    }

    report.gap = report.dual_value - report.primal_value;
    report.pass = report.error.is_none() && report.min_eigenvalue() >= -PSD_TOL && report.gap.abs() <= GAP_TOL;
    Ok(report)
}

/// Characteristic-polynomial and spectral PSD verdicts on the n = 3 tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HornCheck {
    pub horn: bool,
    pub spectral: bool,
}

impl HornCheck {
    pub fn passes(&self) -> bool {
        self.horn && self.spectral
    }

    pub fn agree(&self) -> bool {
        self.horn == self.spectral
    }
}

/// Runs both PSD tests on the rank-3 n = 3 tail matrix.
pub fn horn_verify_tail_n3(param: BoxParam) -> Result<HornCheck> {
    require_open(param, false)?;
    horn_check(&tail_n3_reduced(param))
}

pub fn horn_check(m: &ComplexMatrix) -> Result<HornCheck> {
    let coeffs = linalg::char_poly_coeffs(m)?;
    Ok(HornCheck {
        horn: linalg::horn_psd_test(&coeffs, HORN_TOL),
        spectral: linalg::is_psd(m, PSD_TOL)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(p: f64) -> BoxParam {
        BoxParam::new(p).unwrap()
    }

    #[test]
    fn cutoff_branches() {
        assert!((cutoff_x(2, bp(0.25)) - 0.625).abs() < 1e-15);
        assert!((cutoff_x(3, bp(0.8)) - 0.2).abs() < 1e-15);
        assert_eq!(cutoff_x(2, bp(0.5)), 0.5);
        assert!((cutoff_x(3, bp(0.5 + 1e-12)) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn n1_values() {
        let cert = cert_n1(bp(0.8)).unwrap();
        assert!((cert.value() - 3.6).abs() < 1e-12);
        assert!(cert.min_eigenvalue().unwrap() >= -1e-9);

        let a = cert_n1(bp(TWO_THIRDS)).unwrap().value();
        assert!((a - 10.0 / 3.0).abs() < 1e-12);
        let (p, q) = (TWO_THIRDS, 1.0 - TWO_THIRDS);
        let lower = 2.0 * (1.0 + q) * ((1.0 + q) / (4.0 * q)).sqrt() + p;
        assert!((lower - 10.0 / 3.0).abs() < 1e-12);

        let (p, q): (f64, f64) = (0.4, 0.6);
        let c = ((1.0 + q) / (4.0 * q)).sqrt();
        let cert = cert_n1(bp(p)).unwrap();
        assert!((cert.value() - (2.0 * (1.0 + q) * c + p)).abs() < 1e-12);
        assert!(cert.min_eigenvalue().unwrap() >= -1e-9);
        assert!(cert_n1(bp(0.0)).is_err());
    }

    #[test]
    fn n1_split_sums_to_k() {
        for &p in &[0.1, 0.4, 0.6, 0.7, 0.9, 1.0] {
            let cert = cert_n1(bp(p)).unwrap();
            let (k1, k2) = cert_n1_split(bp(p)).unwrap();
            assert!((&k1 + &k2).max_abs_diff(&cert.k) < 1e-12, "p={p}");
            assert!(linalg::min_eigenvalue(&k1).unwrap() >= -1e-9);
            assert!(linalg::min_eigenvalue(&k2).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn head_examples() {
        let h = cert_head(2, bp(0.8)).unwrap();
        assert!((h.value - 2.8).abs() < 1e-12);
        let h = cert_head(3, bp(0.6)).unwrap();
        assert!((h.value - 6.86f64.sqrt()).abs() < 1e-12);
        assert!((h.value - 2.619_160_170_741_759).abs() < 1e-12);
        assert!(linalg::min_eigenvalue(&h.matrix).unwrap() >= -1e-9);
        let (a, b) = h.conjugation_products();
        assert!(a >= 1.0 - 1e-12 && b >= 1.0 - 1e-12);
        assert!(cert_head(2, bp(1.0)).is_err());
        assert!(cert_head(4, bp(0.5)).is_err());
    }

    #[test]
    fn tail_examples() {
        assert!((cert_tail(2, bp(0.6)).unwrap().value - 0.6).abs() < 1e-12);
        assert!((cert_tail(2, bp(0.25)).unwrap().value - 0.375).abs() < 1e-12);
        let t = cert_tail(3, bp(0.2)).unwrap();
        assert!((t.value - 0.392).abs() < 1e-12);
        assert!((t.value - (1.0 - cutoff_x(3, bp(0.2)))).abs() < 1e-12);
        assert!(cert_tail(3, bp(0.0)).is_err());
    }

    #[test]
    fn n2_tail_has_rank_two() {
        for &p in &[0.1, 0.3, 0.5, 0.7, 0.95] {
            let t = cert_tail(2, bp(p)).unwrap();
            let eig = linalg::hermitian_eigen(&t.matrix).unwrap();
            assert!(eig.eigenvalues[2].abs() <= 1e-9, "p={p}");
            assert!(eig.min() >= -1e-9);
            // The leading 2×2 block is singular at p = ½, dropping the rank to 1.
            let expected = if p == 0.5 { 1 } else { 2 };
            assert_eq!(linalg::numerical_rank(&t.matrix, 1e-9).unwrap(), expected);
        }
    }

    #[test]
    fn n3_symmetrized_column_relations() {
        for &p in &[0.2, 0.45, 0.6, 0.85] {
            let m = tail_n3_symmetrized(bp(p));
            for i in 0..5 {
                if p <= 0.5 {
                    assert!((m.re(i, 0) - 3.0 * m.re(i, 2) - m.re(i, 4)).abs() < 1e-12);
                    assert!((m.re(i, 1) + 3.0 * m.re(i, 3)).abs() < 1e-12);
                } else {
                    assert!((m.re(i, 1) + 2.0 * m.re(i, 2) + m.re(i, 3)).abs() < 1e-12, "p={p} row {i}");
                }
            }
            assert_eq!(linalg::numerical_rank(&m, 1e-9).unwrap(), 3);
        }
    }

    #[test]
    fn reduced_tail_is_principal_block_of_symmetrized() {
        for &p in &[0.2, 0.45] {
            let five = tail_n3_symmetrized(bp(p));
            let three = tail_n3_reduced(bp(p));
            assert!(five.principal(&[0, 2, 3]).max_abs_diff(&three) < 1e-15);
        }
        // Above ½ the printed 3×3 has q³p/(2(q²+p²)) where the 5×5 has
        // q³p²/(2(q²+p²)); every other entry agrees.
        for &p in &[0.6, 0.85] {
            let (q, s) = (1.0 - p, (1.0 - p) * (1.0 - p) + p * p);
            let five = tail_n3_symmetrized(bp(p)).principal(&[0, 2, 3]);
            let three = tail_n3_reduced(bp(p));
            assert!((three.re(1, 1) - 0.5 * q.powi(3) * p / s).abs() < 1e-15);
            assert!((five.re(1, 1) - 0.5 * q.powi(3) * p * p / s).abs() < 1e-15);
            let mut patched = three.clone();
            patched.set_re(1, 1, five.re(1, 1));
            assert!(patched.max_abs_diff(&five) < 1e-15);
            assert!(linalg::is_psd(&three, PSD_TOL).unwrap());
        }
    }

    #[test]
    fn horn_examples() {
        for p in [0.3, 0.7] {
            let check = horn_verify_tail_n3(bp(p)).unwrap();
            assert!(check.passes());
        }
        let five = tail_n3_symmetrized(bp(0.3));
        let coeffs = linalg::char_poly_coeffs(&five).unwrap();
        assert_eq!(linalg::trailing_zero_count(&coeffs, HORN_TOL), 2);
        assert!(horn_check(&five).unwrap().passes());
    }

    #[test]
    fn verification_examples() {
        let r = verify_optimality(3, bp(0.25));
        let l: f64 = 0.125;
        let c = (0.25 * (3.0 + l) / (1.0 + l)).sqrt();
        assert!((r.dual_value - ((3.0 + l) * c + 0.5 * (1.0 - l))).abs() < 1e-9);
        assert!(r.pass, "{r:?}");

        let r = verify_optimality(2, bp(0.6));
        assert!((r.dual_value - ((1.4f64).powi(3) / 0.4).sqrt() - 0.6).abs() < 1e-12);
        assert!(r.pass);

        let r = verify_optimality(2, bp(0.75));
        assert!((r.dual_value - 3.5).abs() < 1e-12);
        assert!(r.pass);

        let r = verify_optimality(4, bp(0.5));
        assert!(!r.pass && r.error.is_some());
        let r = verify_optimality(2, bp(0.0));
        assert!(!r.pass);
    }

    #[test]
    fn boundary_at_one() {
        for n in 1..=3 {
            let r = verify_optimality(n, bp(1.0));
            assert!(r.pass, "{r:?}");
            assert_eq!(r.boundary, n >= 2);
            assert!((r.dual_value - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_k_matches_printed_entries() {
        // x1 row of K carries q^{n-|s|} p^{|s|}; the x0 row is (λ1, 0, -1, -1, 0, ...).
        let (p, q): (f64, f64) = (0.3, 0.7);
        let cert = full_certificate(3, bp(p)).unwrap();
        let k = &cert.k;
        for s in 0..8usize {
            let w = s.count_ones() as i32;
            assert!((k.re(1, 3 + s) - q.powi(3 - w) * p.powi(w)).abs() < 1e-12);
        }
        assert_eq!(k.re(0, 2), -1.0);
        assert_eq!(k.re(0, 3), -1.0);
        assert_eq!(k.re(0, 4), 0.0);
        assert_eq!(k.re(2, 5), 0.0);
    }

    #[test]
    fn report_json_shape() {
        let r = verify_optimality(1, bp(0.5));
        let v = serde_json::to_value(&r).unwrap();
        assert!(v.get("min_eig_K").is_some());
        assert!(v.get("min_eig_head").is_none());
        let r = verify_optimality(2, bp(0.5));
        let v = serde_json::to_value(&r).unwrap();
        assert!(v.get("min_eig_head").is_some());
        assert!(v.get("min_eig_full_K").is_some());
        let back: VerificationReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
