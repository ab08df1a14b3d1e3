//! First-order solver for the Gram-matrix program.
//!
//! Alternating direction method of multipliers on the split X = Z with
//! X in the affine set (unit diagonal, equal XOR classes) and Z in the PSD
//! cone, for the objective max ½Tr(GW):
//!
//! ```text
//! X ← Π_affine(Z − U + W/(2ρ))
//! Z ← Π_psd(X + U)
//! U ← U + X − Z
//! ```
//!
//! The penalty ρ is fixed, so a run is a pure function of the program, the
//! settings and the starting point. It stops once ‖X − Z‖_F is below the
//! feasibility tolerance and ρ‖Z − Z_prev‖_F is below the objective
//! tolerance, and returns X, the affine iterate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::BoxParam;
use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::sdp::{self, GramProgram, SdpError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver settings: {0}")]
    InvalidSettings(&'static str),
    #[error("initial iterate has shape {got:?}, expected {expected}x{expected}")]
    BadStart { got: (usize, usize), expected: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

pub type Result<T> = std::result::Result<T, SolverError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub max_iterations: usize,
    pub objective_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub seed: u64,
    /// ADMM penalty ρ.
    pub penalty: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            objective_tolerance: 1e-5,
            feasibility_tolerance: 1e-6,
            seed: 0,
            penalty: 1.0,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        if self.objective_tolerance.is_nan() || self.objective_tolerance <= 0.0 {
            return Err(SolverError::InvalidSettings("objective_tolerance must be positive"));
        }
        if self.feasibility_tolerance.is_nan() || self.feasibility_tolerance <= 0.0 {
            return Err(SolverError::InvalidSettings("feasibility_tolerance must be positive"));
        }
        if !self.penalty.is_finite() || self.penalty <= 0.0 {
            return Err(SolverError::InvalidSettings("penalty must be positive and finite"));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidSettings("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(rename = "G_star")]
    pub g_star: Vec<Vec<f64>>,
    pub value: f64,
    pub iterations: usize,
    pub feasibility_residual: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

impl SolveResult {
    pub fn g_star_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&self.g_star)
    }
}

/// Gram matrix of `dim` random unit vectors in R^dim.
pub fn random_start(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            v.into_iter().map(|a| a / norm).collect()
        })
        .collect();
    let mut g = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            g.set_re(i, j, dot);
        }
    }
    g
}

/// The protocol's own Gram matrix, a feasible starting point.
pub fn warm_start_from_protocol(program: &GramProgram, param: BoxParam) -> Result<ComplexMatrix> {
    Ok(sdp::gram_from_protocol(program.n, param)?)
}

fn project_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let sym = ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)]) * 0.5);
    Ok(linalg::hermitian_eigen(&sym)?.reconstruct_with(|l| l.max(0.0)))
}

/// Solves from a seeded random Gram matrix.
pub fn solve_primal(program: &GramProgram, settings: &SolveSettings) -> Result<SolveResult> {
    let start = random_start(program.dim(), settings.seed);
    solve_primal_from(program, settings, &start)
}

pub fn solve_primal_from(
    program: &GramProgram,
    settings: &SolveSettings,
    start: &ComplexMatrix,
) -> Result<SolveResult> {
    settings.validate()?;
    let dim = program.dim();
    if start.shape() != (dim, dim) {
        return Err(SolverError::BadStart {
            got: start.shape(),
            expected: dim,
        });
    }
    let rho = settings.penalty;
    let shift = program.weights.scale(0.5 / rho);

    let mut z = project_psd(start)?;
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut x = sdp::project_affine(program, &z);
    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < settings.max_iterations {
        iterations += 1;
        x = sdp::project_affine(program, &(&(&z - &u) + &shift));
        let z_prev = z;
        z = project_psd(&(&x + &u))?;
        let diff = &x - &z;
        u = &u + &diff;
        primal_residual = diff.norm_frobenius();
        dual_residual = rho * (&z - &z_prev).norm_frobenius();
        if primal_residual <= settings.feasibility_tolerance && dual_residual <= settings.objective_tolerance {
            converged = true;
            break;
        }
    }

    let value = sdp::primal_objective(&x, &program.weights)?;
    let feasibility_residual = sdp::feasibility_residual(program, &x)?;
    Ok(SolveResult {
        g_star: x.to_real_rows(),
        value,
        iterations,
        feasibility_residual,
        primal_residual,
        dual_residual,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols;

    fn bp(p: f64) -> BoxParam {
        BoxParam::new(p).unwrap()
    }

    #[test]
    fn settings_defaults_and_validation() {
        let s = SolveSettings::default();
        assert_eq!(s.max_iterations, 200_000);
        assert_eq!(s.objective_tolerance, 1e-5);
        assert_eq!(s.feasibility_tolerance, 1e-6);
        assert!(s.validate().is_ok());
        let bad = SolveSettings {
            feasibility_tolerance: 0.0,
            ..s
        };
        assert!(bad.validate().is_err());
        let bad = SolveSettings { penalty: -1.0, ..s };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn random_start_is_unit_gram() {
        let g = random_start(7, 3);
        for i in 0..7 {
            assert!((g.re(i, i) - 1.0).abs() < 1e-12);
        }
        assert!(linalg::min_eigenvalue(&g).unwrap() >= -1e-12);
        assert_eq!(g, random_start(7, 3));
        assert_ne!(g, random_start(7, 4));
    }

    #[test]
    fn single_copy_values() {
        for (p, expected) in [(0.5, 0.5 * (3.0 * 3f64.sqrt() + 1.0)), (0.9, 3.8)] {
            let program = sdp::build_program(1, bp(p)).unwrap();
            let res = solve_primal(&program, &SolveSettings::default()).unwrap();
            assert!(res.converged);
            assert!((res.value - expected).abs() < 1e-4, "p={p}: {}", res.value);
            assert!(res.feasibility_residual <= 1e-6 * 10.0);
        }
    }

    #[test]
    fn warm_start_is_already_optimal() {
        let program = sdp::build_program(1, bp(0.5)).unwrap();
        let start = warm_start_from_protocol(&program, bp(0.5)).unwrap();
        let start_value = sdp::primal_objective(&start, &program.weights).unwrap();
        let closed = protocols::protocol_p_value_closed(1, bp(0.5)).unwrap();
        assert!((start_value - closed).abs() < 1e-9);
        let res = solve_primal_from(&program, &SolveSettings::default(), &start).unwrap();
        assert!(res.value >= start_value - 1e-5);
        assert!(res.value - start_value <= 1e-4);
    }

    #[test]
    fn deterministic() {
        let program = sdp::build_program(2, bp(0.3)).unwrap();
        let settings = SolveSettings {
            max_iterations: 300,
            seed: 11,
            ..SolveSettings::default()
        };
        let a = solve_primal(&program, &settings).unwrap();
        let b = solve_primal(&program, &settings).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_start_rejected() {
        let program = sdp::build_program(1, bp(0.5)).unwrap();
        let err = solve_primal_from(&program, &SolveSettings::default(), &ComplexMatrix::identity(4));
        assert!(matches!(err, Err(SolverError::BadStart { .. })));
    }
}
