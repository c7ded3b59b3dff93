//! Local filtering `F_A ⊗ F_B` that takes a two-qubit state, with some
//! probability, to Bell-diagonal form.
//!
//! The construction alternates local whitening steps
//! `ρ ← (G ⊗ 1) ρ (G ⊗ 1)† / tr` with `G = (2 ρ_A)^{-1/2}` (and the same on B)
//! until both marginals are maximally mixed. The state is then
//! `(1 + Σ Tᵢⱼ σᵢ⊗σⱼ)/4` and a signed singular value decomposition of the real
//! correlation matrix `T` gives the local rotations that make it
//! Bell-diagonal. A final Bob-side Pauli puts the largest weight on `Φ+`.

use thiserror::Error;

use crate::qlin::{
    herm_eig, partial_trace, paulis, psd_sqrt_inv, tensor, CMatrix, LinalgError, Subsystem, C64,
};
use crate::states::{bell_diagonal_state, BellDiagonal, StateError, TwoQubitState};

pub const MAX_ITERATIONS: usize = 1000;
/// Marginals within this distance of `I/2` count as whitened.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Marginal eigenvalues below this make whitening ill-posed.
pub const SINGULAR_TOL: f64 = 1e-9;
/// Largest accepted off-Bell-diagonal residual of the filtered state.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("filter did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("marginal of subsystem {subsystem:?} is singular (eigenvalue {eigenvalue:e}); whitening undefined")]
    SingularMarginal { subsystem: Subsystem, eigenvalue: f64 },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Local filters and alignment unitaries. The full local operation is
/// `(u_a f_a) ⊗ (u_b f_b)`.
#[derive(Debug, Clone)]
pub struct FilterResult {
    pub f_a: CMatrix,
    pub f_b: CMatrix,
    pub u_a: CMatrix,
    pub u_b: CMatrix,
    pub lambdas: BellDiagonal,
    pub p_success: f64,
    pub iterations: usize,
    /// Off-Bell-diagonal residual of the normalized filtered state.
    pub residual: f64,
}

impl FilterResult {
    pub fn operation_a(&self) -> CMatrix {
        &self.u_a * &self.f_a
    }

    pub fn operation_b(&self) -> CMatrix {
        &self.u_b * &self.f_b
    }

    /// Normalized state after filtering and alignment.
    pub fn apply(&self, s: &TwoQubitState) -> Result<TwoQubitState, StateError> {
        let op = tensor(&self.operation_a(), &self.operation_b());
        let out = op.sandwich(s.rho());
        let tr = out.trace().re;
        TwoQubitState::new(out.scale_real(1.0 / tr).hermitian_part())
    }
}

fn whitening(marginal: &CMatrix, subsystem: Subsystem) -> Result<CMatrix, FilterError> {
    let eig = herm_eig(marginal)?;
    let min = eig.min();
    if min < SINGULAR_TOL {
        return Err(FilterError::SingularMarginal {
            subsystem,
            eigenvalue: min,
        });
    }
    Ok(psd_sqrt_inv(&marginal.scale_real(2.0), 0.0)?)
}

fn normalize_trace(rho: &CMatrix) -> CMatrix {
    rho.scale_real(1.0 / rho.trace().re).hermitian_part()
}

fn normalize_filter(f: &CMatrix) -> CMatrix {
    f.scale_real(1.0 / f.spectral_norm())
}

/// `Tᵢⱼ = tr(ρ σᵢ ⊗ σⱼ)`.
pub fn correlation_matrix(rho: &CMatrix) -> [[f64; 3]; 3] {
    let p = paulis();
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = (rho * &tensor(&p[i], &p[j])).trace().re;
        }
    }
    t
}

type Mat3 = [[f64; 3]; 3];

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn column(m: &Mat3, j: usize) -> [f64; 3] {
    [m[0][j], m[1][j], m[2][j]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// `T = U diag(σ) Vᵀ` with `U, V ∈ SO(3)`; the sign of the smallest
/// singular value absorbs the orientation. One-sided Jacobi.
pub fn signed_svd3(t: &Mat3) -> (Mat3, [f64; 3], Mat3) {
    let mut a = *t;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..3 {
            for q in (p + 1)..3 {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for row in &a {
                    alpha += row[p] * row[p];
                    beta += row[q] * row[q];
                    gamma += row[p] * row[q];
                }
                if gamma.abs() <= 1e-16 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..3 {
                    let (x, y) = (a[k][p], a[k][q]);
                    a[k][p] = c * x - s * y;
                    a[k][q] = s * x + c * y;
                    let (x, y) = (v[k][p], v[k][q]);
                    v[k][p] = c * x - s * y;
                    v[k][q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order = [0usize, 1, 2];
    let sig: Vec<f64> = (0..3).map(|j| norm3(column(&a, j))).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
    let scale = sig[order[0]].max(1.0);

    let mut u = [[0.0; 3]; 3];
    let mut vs = [[0.0; 3]; 3];
    let mut sigma = [0.0; 3];
    let mut filled = [false; 3];
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = sig[src];
        for k in 0..3 {
            vs[k][dst] = v[k][src];
        }
        if sig[src] > 1e-14 * scale {
            for k in 0..3 {
                u[k][dst] = a[k][src] / sig[src];
            }
            filled[dst] = true;
        }
    }
    complete_basis(&mut u, &filled);

    if det3(&u) < 0.0 {
        for row in u.iter_mut() {
            row[2] = -row[2];
        }
        sigma[2] = -sigma[2];
    }
    if det3(&vs) < 0.0 {
        for row in vs.iter_mut() {
            row[2] = -row[2];
        }
        sigma[2] = -sigma[2];
    }
    (u, sigma, vs)
}

fn complete_basis(u: &mut Mat3, filled: &[bool; 3]) {
    let set = |u: &mut Mat3, j: usize, c: [f64; 3]| {
        for k in 0..3 {
            u[k][j] = c[k];
        }
    };
    match filled.iter().filter(|f| **f).count() {
        3 => {}
        2 => {
            // σ sorted descending, so the missing one is the last
            let c = cross(column(u, 0), column(u, 1));
            let n = norm3(c);
            set(u, 2, [c[0] / n, c[1] / n, c[2] / n]);
        }
        1 => {
            let a = column(u, 0);
            let pick = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let b = cross(a, pick);
            let nb = norm3(b);
            let b = [b[0] / nb, b[1] / nb, b[2] / nb];
            set(u, 1, b);
            set(u, 2, cross(a, b));
        }
        _ => *u = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    }
}

/// `U ∈ SU(2)` with `U σⱼ U† = Σᵢ Rᵢⱼ σᵢ`.
pub fn su2_from_rotation(r: &Mat3) -> CMatrix {
    let tr = r[0][0] + r[1][1] + r[2][2];
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (r[2][1] - r[1][2]) / s;
        y = (r[0][2] - r[2][0]) / s;
        z = (r[1][0] - r[0][1]) / s;
    } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
        let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt() * 2.0;
        w = (r[2][1] - r[1][2]) / s;
        x = 0.25 * s;
        y = (r[0][1] + r[1][0]) / s;
        z = (r[0][2] + r[2][0]) / s;
    } else if r[1][1] > r[2][2] {
        let s = (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt() * 2.0;
        w = (r[0][2] - r[2][0]) / s;
        x = (r[0][1] + r[1][0]) / s;
        y = 0.25 * s;
        z = (r[1][2] + r[2][1]) / s;
    } else {
        let s = (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt() * 2.0;
        w = (r[1][0] - r[0][1]) / s;
        x = (r[0][2] + r[2][0]) / s;
        y = (r[1][2] + r[2][1]) / s;
        z = 0.25 * s;
    }
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    CMatrix::from_rows(&[
        &[C64::new(w, -z), C64::new(-y, -x)],
        &[C64::new(y, -x), C64::new(w, z)],
    ])
}

fn transpose3(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

fn canonical_weights(s: &TwoQubitState) -> Result<BellDiagonal, StateError> {
    let mut w = s.bell_weights().map(|x| x.max(0.0));
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    // re-close the simplex exactly enough for the 1e-12 constructor check
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    BellDiagonal::new(w)
}

/// Brings `s` to Bell-diagonal form by local filtering; the largest Bell
/// weight ends up on `Φ+`.
pub fn bell_diagonalize(s: &TwoQubitState) -> Result<FilterResult, FilterError> {
    let i2 = CMatrix::identity(2);
    let half = i2.scale_real(0.5);

    // Already Bell-diagonal: nothing to filter, at most a relabelling Pauli.
    if s.bell_residual() <= RESIDUAL_TOL {
        let lambdas = canonical_weights(s)?;
        let u_b = lambdas.applied_pauli().matrix();
        let out = tensor(&i2, &u_b).sandwich(s.rho());
        let residual = out.max_abs_diff(bell_diagonal_state(&lambdas).rho());
        return Ok(FilterResult {
            f_a: i2.clone(),
            f_b: i2.clone(),
            u_a: i2,
            u_b,
            lambdas,
            p_success: s.rho().trace().re,
            iterations: 0,
            residual,
        });
    }

    let mut rho = s.rho().clone();
    let mut f_a = i2.clone();
    let mut f_b = i2.clone();
    let mut iterations = 0;
    loop {
        let ra = partial_trace(&rho, (2, 2), Subsystem::A)?;
        let rb = partial_trace(&rho, (2, 2), Subsystem::B)?;
        let dev = ra.max_abs_diff(&half).max(rb.max_abs_diff(&half));
        if dev <= MARGINAL_TOL {
            break;
        }
        if iterations == MAX_ITERATIONS {
            return Err(FilterError::NonConvergence {
                iterations,
                residual: dev,
            });
        }
        let ga = whitening(&ra, Subsystem::A)?;
        rho = normalize_trace(&tensor(&ga, &i2).sandwich(&rho));
        f_a = normalize_filter(&(&ga * &f_a));

        let rb = partial_trace(&rho, (2, 2), Subsystem::B)?;
        let gb = whitening(&rb, Subsystem::B)?;
        rho = normalize_trace(&tensor(&i2, &gb).sandwich(&rho));
        f_b = normalize_filter(&(&gb * &f_b));
        iterations += 1;
    }

    let t = correlation_matrix(&rho);
    let off_diag = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| t[i][j].abs())
        .fold(0.0, f64::max);
    let (mut u_a, mut u_b) = (i2.clone(), i2.clone());
    if off_diag > 1e-13 {
        let (u, _sigma, v) = signed_svd3(&t);
        u_a = su2_from_rotation(&transpose3(&u));
        u_b = su2_from_rotation(&transpose3(&v));
    }
    let aligned = TwoQubitState::new(tensor(&u_a, &u_b).sandwich(&rho).hermitian_part())?;
    let lambdas = canonical_weights(&aligned)?;
    u_b = &lambdas.applied_pauli().matrix() * &u_b;

    let out = normalize_trace(&tensor(&u_a, &u_b).sandwich(&rho));
    let residual = out.max_abs_diff(bell_diagonal_state(&lambdas).rho());
    if residual > RESIDUAL_TOL {
        return Err(FilterError::NonConvergence {
            iterations,
            residual,
        });
    }
    let p_success = tensor(&f_a, &f_b).sandwich(s.rho()).trace().re;
    Ok(FilterResult {
        f_a,
        f_b,
        u_a,
        u_b,
        lambdas,
        p_success,
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::CVector;
    use crate::random::{random_state, random_unitary, stream_rng};
    use crate::states::{bell_state, BellIndex};
    use approx::assert_abs_diff_eq;

    #[test]
    fn rotation_to_su2_conjugates_paulis() {
        let mut rng = stream_rng(21, 0);
        let p = paulis();
        for _ in 0..50 {
            let u = random_unitary(2, &mut rng);
            // R from U via Rᵢⱼ = tr(σᵢ U σⱼ U†)/2, then back
            let mut r = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    r[i][j] = 0.5 * (&p[i] * &u.sandwich(&p[j])).trace().re;
                }
            }
            let back = su2_from_rotation(&r);
            for j in 0..3 {
                let mut expect = CMatrix::zeros(2, 2);
                for i in 0..3 {
                    expect = &expect + &p[i].scale_real(r[i][j]);
                }
                assert!(back.sandwich(&p[j]).max_abs_diff(&expect) < 1e-12);
            }
        }
    }

    #[test]
    fn signed_svd_reconstructs() {
        let cases: [Mat3; 4] = [
            [[0.3, -0.2, 0.1], [0.05, 0.4, -0.3], [0.2, 0.1, -0.5]],
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.7]],
            [[0.2, 0.2, 0.0], [0.2, 0.2, 0.0], [0.0, 0.0, 0.0]],
        ];
        for t in cases {
            let (u, s, v) = signed_svd3(&t);
            assert_abs_diff_eq!(det3(&u), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(det3(&v), 1.0, epsilon = 1e-12);
            for i in 0..3 {
                for j in 0..3 {
                    let r: f64 = (0..3).map(|k| u[i][k] * s[k] * v[j][k]).sum();
                    assert_abs_diff_eq!(r, t[i][j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn bell_diagonal_input_is_a_fixed_point() {
        let b = BellDiagonal::new([0.7, 0.1, 0.1, 0.1]).unwrap();
        let r = bell_diagonalize(&b.state()).unwrap();
        assert_eq!(r.f_a, CMatrix::identity(2));
        assert_eq!(r.f_b, CMatrix::identity(2));
        assert_eq!(r.operation_b(), CMatrix::identity(2));
        assert_abs_diff_eq!(r.p_success, 1.0, epsilon = 1e-12);
        for (x, y) in r.lambdas.lambdas().iter().zip([0.7, 0.1, 0.1, 0.1]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_canonical_bell_input_gets_relabelled() {
        let raw = [0.1, 0.1, 0.1, 0.7];
        let mut rho = CMatrix::zeros(4, 4);
        for (b, w) in BellIndex::ALL.iter().zip(raw) {
            rho = &rho + &bell_state(*b).projector().scale_real(w);
        }
        let s = TwoQubitState::new(rho).unwrap();
        let r = bell_diagonalize(&s).unwrap();
        assert_eq!(r.lambdas.lambdas()[0], 0.7);
        let out = r.apply(&s).unwrap();
        assert!(out.rho().max_abs_diff(r.lambdas.state().rho()) < 1e-12);
    }

    #[test]
    fn pure_schmidt_state_filters_to_phi_plus() {
        let theta = std::f64::consts::PI / 6.0;
        let psi = CVector::from_real(&[theta.cos(), 0.0, 0.0, theta.sin()]);
        let s = TwoQubitState::from_pure(&psi).unwrap();
        let r = bell_diagonalize(&s).unwrap();
        let l = r.lambdas.lambdas();
        assert_abs_diff_eq!(l[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.p_success, 2.0 * theta.sin().powi(2), epsilon = 1e-10);
        // closed form: diag(tan θ, 1) on Alice, nothing on Bob
        let expected = CMatrix::diag_real(&[theta.tan(), 1.0]);
        assert!(r.operation_a().max_abs_diff(&expected) < 1e-10);
        let out = r.apply(&s).unwrap();
        let phi = bell_state(BellIndex::PhiPlus);
        assert_abs_diff_eq!(phi.inner(&out.rho().matvec(&phi)).re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn product_pure_state_reports_singular_marginal() {
        let psi = CVector::from_real(&[1.0, 0.0, 0.0, 0.0]);
        let s = TwoQubitState::from_pure(&psi).unwrap();
        assert!(matches!(
            bell_diagonalize(&s),
            Err(FilterError::SingularMarginal { .. })
        ));
    }

    #[test]
    fn random_states_satisfy_filter_invariants() {
        for i in 0..300 {
            let mut rng = stream_rng(77, i);
            let s = random_state(&mut rng);
            let r = bell_diagonalize(&s).unwrap();
            assert!(r.residual <= RESIDUAL_TOL);
            assert_abs_diff_eq!(r.f_a.spectral_norm(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(r.f_b.spectral_norm(), 1.0, epsilon = 1e-10);
            let p = tensor(&r.f_a, &r.f_b).sandwich(s.rho()).trace().re;
            assert_abs_diff_eq!(p, r.p_success, epsilon = 1e-12);
            assert!(r.p_success > 0.0 && r.p_success <= 1.0 + 1e-12);
            let out = r.apply(&s).unwrap();
            assert!(out.rho().max_abs_diff(r.lambdas.state().rho()) <= RESIDUAL_TOL);
            // idempotence
            let again = bell_diagonalize(&out).unwrap();
            assert!(again.operation_a().max_abs_diff(&CMatrix::identity(2)) <= 1e-8);
            assert!(again.operation_b().max_abs_diff(&CMatrix::identity(2)) <= 1e-8);
        }
    }
}
