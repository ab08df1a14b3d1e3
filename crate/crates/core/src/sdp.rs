//! The n-copy Gram-matrix program and its dual.
//!
//! Rows and columns are 0-based: `x0 = 0`, `x1 = 1`, `y0 = 2`, and
//! `z_s = 3 + s` where `s` is read as a big-endian integer (so `z_{0…0}`
//! comes first and `z_{1…1}` last).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::BoxParam;
use crate::linalg::{self, pauli, ComplexMatrix, LinalgError};
use crate::protocols::{self, ObservableSpec, Party, ProtocolError};

/// Largest copy count for [`build_program`].
pub const MAX_PROGRAM_COPIES: usize = 5;

/// Largest copy count for [`gram_from_protocol`] (vectors of length 4^n).
pub const MAX_GRAM_COPIES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("copy count {n} outside 1..={max}")]
    CopiesOutOfRange { n: usize, max: usize },
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("p = {0} outside [0, 1]")]
    BadParam(f64),
    #[error("exported weights differ from the rebuilt program by {0:e}")]
    InconsistentExport(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub type Result<T> = std::result::Result<T, SdpError>;

/// Row/column identities of the Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexMap {
    n: usize,
}

impl IndexMap {
    pub const X0: usize = 0;
    pub const X1: usize = 1;
    pub const Y0: usize = 2;

    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn copies(&self) -> usize {
        self.n
    }

    pub fn z_count(&self) -> usize {
        1 << self.n
    }

    pub fn dim(&self) -> usize {
        self.z_count() + 3
    }

    pub fn z(&self, s: usize) -> usize {
        debug_assert!(s < self.z_count());
        3 + s
    }

    /// Inverse of [`IndexMap::z`].
    pub fn z_string(&self, index: usize) -> Option<usize> {
        (index >= 3 && index < self.dim()).then(|| index - 3)
    }

    pub fn bits(&self, s: usize) -> String {
        (0..self.n).map(|k| if (s >> (self.n - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn label(&self, index: usize) -> String {
        match index {
            Self::X0 => "x0".into(),
            Self::X1 => "x1".into(),
            Self::Y0 => "y0".into(),
            _ => format!("z{}", self.bits(index - 3)),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }
}

/// All unordered pairs {z_s, z_{s⊕d}} for one nonzero `d`; the first pair is
/// the representative {z_0, z_d}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintClass {
    pub xor: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl ConstraintClass {
    pub fn representative(&self) -> (usize, usize) {
        self.pairs[0]
    }
}

/// One equality g_rep = g_other, the support of a single H_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraint {
    pub class: usize,
    pub representative: (usize, usize),
    pub other: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramProgram {
    pub n: usize,
    pub param: BoxParam,
    pub index: IndexMap,
    pub weights: ComplexMatrix,
    pub classes: Vec<ConstraintClass>,
    pub constraints: Vec<Constraint>,
}

impl GramProgram {
    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    /// Number of dual variables, diagonal plus equality multipliers.
    pub fn dual_variable_count(&self) -> usize {
        self.dim() + self.constraints.len()
    }

    /// Symmetric H_k: +1 on the representative pair, −1 on the other pair.
    pub fn constraint_matrix(&self, k: usize) -> ComplexMatrix {
        let c = self.constraints[k];
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        let (a, b) = c.representative;
        h.set_re(a, b, 1.0);
        h.set_re(b, a, 1.0);
        let (a, b) = c.other;
        h.set_re(a, b, -1.0);
        h.set_re(b, a, -1.0);
        h
    }

    pub fn export(&self) -> ProgramExport {
        ProgramExport {
            n: self.n,
            p: self.param.p(),
            dimension: self.dim(),
            dual_variables: self.dual_variable_count(),
            labels: self.index.labels(),
            weights: self.weights.to_real_rows(),
            constraint_classes: self
                .classes
                .iter()
                .map(|c| ClassExport {
                    xor: self.index.bits(c.xor),
                    pairs: c.pairs.iter().map(|&(a, b)| [a, b]).collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds a program from its export, checking the weights agree with
    /// the ones implied by `(n, p)` to within `tol`.
    pub fn from_export(export: &ProgramExport, tol: f64) -> Result<Self> {
        let param = BoxParam::new(export.p).map_err(|_| SdpError::BadParam(export.p))?;
        let program = build_program(export.n, param)?;
        if export.weights.len() != program.dim() {
            return Err(SdpError::LengthMismatch {
                what: "weight rows",
                expected: program.dim(),
                got: export.weights.len(),
            });
        }
        let mut diff: f64 = 0.0;
        for (i, row) in export.weights.iter().enumerate() {
            if row.len() != program.dim() {
                return Err(SdpError::LengthMismatch {
                    what: "weight columns",
                    expected: program.dim(),
                    got: row.len(),
                });
            }
            for (j, &w) in row.iter().enumerate() {
                diff = diff.max((w - program.weights.re(i, j)).abs());
            }
        }
        if diff > tol {
            return Err(SdpError::InconsistentExport(diff));
        }
        Ok(program)
    }
}

/// Serialized form of a [`GramProgram`]; indices are 0-based and follow
/// `labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramExport {
    pub n: usize,
    pub p: f64,
    pub dimension: usize,
    pub dual_variables: usize,
    pub labels: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub constraint_classes: Vec<ClassExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassExport {
    pub xor: String,
    pub pairs: Vec<[usize; 2]>,
}

fn check_range(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        Err(SdpError::CopiesOutOfRange { n, max })
    } else {
        Ok(())
    }
}

/// Weight matrix and XOR-class equalities for `n` copies.
pub fn build_program(n: usize, param: BoxParam) -> Result<GramProgram> {
    check_range(n, MAX_PROGRAM_COPIES)?;
    let index = IndexMap::new(n);
    let dim = index.dim();
    let (p, q) = (param.p(), param.q());

    let mut w = ComplexMatrix::zeros(dim, dim);
    let put = |w: &mut ComplexMatrix, a: usize, b: usize, v: f64| {
        w.set_re(a, b, v);
        w.set_re(b, a, v);
    };
    put(&mut w, IndexMap::X0, IndexMap::Y0, 1.0);
    put(&mut w, IndexMap::X0, index.z(0), 1.0);
    put(&mut w, IndexMap::X1, IndexMap::Y0, 1.0);
    for s in 0..index.z_count() {
        let ones = s.count_ones() as i32;
        put(&mut w, IndexMap::X1, index.z(s), -q.powi(n as i32 - ones) * p.powi(ones));
    }

    let mut classes = Vec::new();
    let mut constraints = Vec::new();
    for d in 1..index.z_count() {
        let pairs: Vec<(usize, usize)> = (0..index.z_count())
            .filter(|&s| s < s ^ d)
            .map(|s| (index.z(s), index.z(s ^ d)))
            .collect();
        if pairs.len() < 2 {
            continue;
        }
        let class = classes.len();
        for &other in &pairs[1..] {
            constraints.push(Constraint {
                class,
                representative: pairs[0],
                other,
            });
        }
        classes.push(ConstraintClass { xor: d, pairs });
    }

    Ok(GramProgram {
        n,
        param,
        index,
        weights: w,
        classes,
        constraints,
    })
}

/// Gram matrix of the vectors x_a = (A_a ⊗ 𝟙)|ψ⟩^{⊗n}, y_0 = (𝟙 ⊗ B_0)|ψ⟩^{⊗n}
/// and z_s = (𝟙 ⊗ X_s B_1 X_s)|ψ⟩^{⊗n} built from protocol P's observables.
pub fn gram_from_protocol(n: usize, param: BoxParam) -> Result<ComplexMatrix> {
    check_range(n, MAX_GRAM_COPIES)?;
    let index = IndexMap::new(n);
    let obs = |party, bit| protocols::observable(&ObservableSpec::new(party, bit, n, param));
    let local = ComplexMatrix::identity(1 << n);
    let psi = protocols::psi_tensor_power(n)?;
    let alice = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok(linalg::kron(m, &local)?.matmul(&psi)?)
    };
    let bob = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok(linalg::kron(&local, m)?.matmul(&psi)?)
    };

    let mut vectors = vec![
        alice(&obs(Party::Alice, 0)?)?,
        alice(&obs(Party::Alice, 1)?)?,
        bob(&obs(Party::Bob, 0)?)?,
    ];
    let b1 = obs(Party::Bob, 1)?;
    for s in 0..index.z_count() {
        let flips: Vec<ComplexMatrix> = (0..n)
            .map(|k| {
                if (s >> (n - 1 - k)) & 1 == 1 {
                    pauli::x()
                } else {
                    pauli::identity()
                }
            })
            .collect();
        let xs = linalg::kron_all(&flips)?;
        vectors.push(bob(&xs.matmul(&b1)?.matmul(&xs)?)?);
    }

    let dim = index.dim();
    let mut g = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = vectors[i].inner(&vectors[j])?.re;
            g.set_re(i, j, v);
            g.set_re(j, i, v);
        }
    }
    Ok(g)
}

/// ½·Tr(G·W).
pub fn primal_objective(g: &ComplexMatrix, w: &ComplexMatrix) -> Result<f64> {
    Ok(0.5 * g.trace_product(w)?.re)
}

/// Dual variables and the assembled K = 2(diag μ − Σ τ_k H_k) − W.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub mu: Vec<f64>,
    pub tau: Vec<f64>,
    pub k: ComplexMatrix,
}

impl DualCertificate {
    /// Σ μ_i, equal to half the trace of K.
    pub fn value(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn half_trace(&self) -> f64 {
        0.5 * self.k.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::min_eigenvalue(&self.k)?)
    }

    /// dual − primal for a feasible G, which equals ½·Tr(K·G).
    pub fn gap_against(&self, program: &GramProgram, g: &ComplexMatrix) -> Result<f64> {
        Ok(self.value() - primal_objective(g, &program.weights)?)
    }
}

pub fn assemble_dual(program: &GramProgram, mu: &[f64], tau: &[f64]) -> Result<DualCertificate> {
    if mu.len() != program.dim() {
        return Err(SdpError::LengthMismatch {
            what: "mu",
            expected: program.dim(),
            got: mu.len(),
        });
    }
    if tau.len() != program.constraints.len() {
        return Err(SdpError::LengthMismatch {
            what: "tau",
            expected: program.constraints.len(),
            got: tau.len(),
        });
    }
    let mut inner = ComplexMatrix::diag_real(mu);
    for (k, &t) in tau.iter().enumerate() {
        if t != 0.0 {
            inner = &inner - &program.constraint_matrix(k).scale(t);
        }
    }
    let k = &inner.scale(2.0) - &program.weights;
    Ok(DualCertificate {
        mu: mu.to_vec(),
        tau: tau.to_vec(),
        k,
    })
}

/// Reads μ and τ off a candidate K (μ_i = K_ii/2, τ_k = K_other/2) and
/// returns the certificate re-assembled from them together with the largest
/// entrywise deviation from `k`. A deviation near zero means `k` has the
/// shape of a dual constraint matrix.
pub fn dual_from_matrix(program: &GramProgram, k: &ComplexMatrix) -> Result<(DualCertificate, f64)> {
    if k.shape() != (program.dim(), program.dim()) {
        return Err(SdpError::LengthMismatch {
            what: "K rows",
            expected: program.dim(),
            got: k.rows(),
        });
    }
    let mu: Vec<f64> = (0..program.dim()).map(|i| 0.5 * k.re(i, i)).collect();
    let tau: Vec<f64> = program
        .constraints
        .iter()
        .map(|c| 0.5 * k.re(c.other.0, c.other.1))
        .collect();
    let cert = assemble_dual(program, &mu, &tau)?;
    let deviation = cert.k.max_abs_diff(k);
    Ok((cert, deviation))
}

/// Orthogonal projection onto symmetric matrices with unit diagonal and
/// equal entries within each XOR class.
pub fn project_affine(program: &GramProgram, g: &ComplexMatrix) -> ComplexMatrix {
    let dim = program.dim();
    let mut out = ComplexMatrix::from_fn(dim, dim, |i, j| {
        num_complex::Complex64::new(0.5 * (g.re(i, j) + g.re(j, i)), 0.0)
    });
    for i in 0..dim {
        out.set_re(i, i, 1.0);
    }
    for class in &program.classes {
        let mean = class.pairs.iter().map(|&(a, b)| out.re(a, b)).sum::<f64>() / class.pairs.len() as f64;
        for &(a, b) in &class.pairs {
            out.set_re(a, b, mean);
            out.set_re(b, a, mean);
        }
    }
    out
}

/// Largest violation among symmetry, unit diagonal, XOR-class equalities
/// and (negated) minimum eigenvalue.
pub fn feasibility_residual(program: &GramProgram, g: &ComplexMatrix) -> Result<f64> {
    let dim = program.dim();
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        worst = worst.max((g.re(i, i) - 1.0).abs());
        for j in 0..dim {
            worst = worst.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
    }
    for class in &program.classes {
        let (a, b) = class.representative();
        let rep = g.re(a, b);
        for &(c, d) in &class.pairs[1..] {
            worst = worst.max((g.re(c, d) - rep).abs());
        }
    }
    let sym = ComplexMatrix::from_fn(dim, dim, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    worst = worst.max(-linalg::min_eigenvalue(&sym)?);
    Ok(worst)
}
