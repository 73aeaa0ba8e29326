//! Dense complex linear algebra and state types for systems of at most four levels.
//!
//! Everything here is stack allocated: an [`Operator`] is a 4×4 array plus the
//! logical dimension it uses, so the integrators never touch the heap inside
//! their inner loops.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported Hilbert-space dimension (qutrit plus one leakage level).
pub const MAX_DIM: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A d×d complex matrix, d ≤ 4. Hamiltonians are in rad/ns (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    m: [[C64; MAX_DIM]; MAX_DIM],
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "operator dimension {dim} unsupported");
        Self { dim, m: [[ZERO; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            out.m[i][i] = ONE;
        }
        out
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut out = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            out.m[i][i] = C64::new(v, 0.0);
        }
        out
    }

    /// |i⟩⟨j|
    pub fn ket_bra(dim: usize, i: usize, j: usize) -> Self {
        let mut out = Self::zeros(dim);
        out.m[i][j] = ONE;
        out
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut out = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            out.m[i][..dim].copy_from_slice(row);
        }
        Ok(out)
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &PureState, b: &PureState) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
        }
        let mut out = Self::zeros(a.dim());
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                out.m[i][j] = a.amps[i] * b.amps[j].conj();
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] = self.m[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.m[i][i]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut().take(self.dim) {
            for v in row.iter_mut().take(self.dim) {
                *v *= s;
            }
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// [a, b] = ab − ba
    pub fn commutator(a: &Self, b: &Self) -> Self {
        *a * *b - *b * *a
    }

    /// Largest elementwise deviation from Hermiticity, max |a_ij − conj(a_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Maximum absolute row sum; bounds the spectral radius from above.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.m[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part (A + A†)/2, ascending.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        hermitian_eigenvalues(self)
    }

    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi.dim() });
        }
        let mut amps = [ZERO; MAX_DIM];
        for (i, a) in amps.iter_mut().enumerate().take(self.dim) {
            *a = (0..self.dim).map(|j| self.m[i][j] * psi.amps[j]).sum();
        }
        Ok(PureState { dim: self.dim, amps })
    }

    pub(crate) fn raw(&self) -> &[[C64; MAX_DIM]; MAX_DIM] {
        &self.m
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        &mut self.m[i][j]
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let mut out = Operator::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.m[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..self.dim {
                    out.m[i][j] += a * rhs.m[k][j];
                }
            }
        }
        out
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(mut self, rhs: Operator) -> Operator {
        self += rhs;
        self
    }
}

impl AddAssign for Operator {
    fn add_assign(&mut self, rhs: Operator) {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.m[i][j] += rhs.m[i][j];
            }
        }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        self + (-rhs)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Normalized state vector of a 3- or 4-level system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState {
    dim: usize,
    amps: [C64; MAX_DIM],
}

impl PureState {
    /// Builds a state from raw amplitudes without normalizing.
    pub fn new(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        if !(3..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut amps = [ZERO; MAX_DIM];
        amps[..dim].copy_from_slice(amplitudes);
        Ok(Self { dim, amps })
    }

    /// Builds and normalizes.
    pub fn normalized(amplitudes: &[C64]) -> Result<Self> {
        Self::new(amplitudes)?.normalize()
    }

    pub fn basis(dim: usize, level: usize) -> Result<Self> {
        if !(3..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if level >= dim {
            return Err(Error::LevelOutOfRange { level, dim });
        }
        let mut amps = [ZERO; MAX_DIM];
        amps[level] = ONE;
        Ok(Self { dim, amps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps[..self.dim]
    }

    pub fn amplitude(&self, level: usize) -> Result<C64> {
        self.amplitudes()
            .get(level)
            .copied()
            .ok_or(Error::LevelOutOfRange { level, dim: self.dim })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite state".into()));
        }
        // Already unit norm to the last ulp: leave the amplitudes untouched so
        // repeated normalization is a fixed point.
        if (n - 1.0).abs() <= f64::EPSILON {
            return Ok(*self);
        }
        let mut out = *self;
        for a in out.amps.iter_mut().take(self.dim) {
            *a /= n;
        }
        Ok(out)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(self.amplitudes().iter().zip(other.amplitudes()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Embeds a 3-level state into the 4-level space (or returns it unchanged).
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim || dim > MAX_DIM {
            return Err(Error::DimensionMismatch { expected: self.dim, found: dim });
        }
        Ok(Self { dim, amps: self.amps })
    }
}

/// Density matrix of a 3- or 4-level system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity (tolerances 1e-9, 1e-9, -1e-8).
    pub fn new(op: Operator) -> Result<Self> {
        if !(3..=MAX_DIM).contains(&op.dim()) {
            return Err(Error::UnsupportedDimension(op.dim()));
        }
        let diag = check_density(&op);
        if diag.hermiticity_defect > 1e-9 {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (defect {:.3e})",
                diag.hermiticity_defect
            )));
        }
        if diag.trace_defect > 1e-9 {
            return Err(Error::InvalidDensity(format!("trace defect {:.3e}", diag.trace_defect)));
        }
        if diag.min_eigenvalue < -1e-8 {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:.3e}",
                diag.min_eigenvalue
            )));
        }
        Ok(Self(op))
    }

    /// Wraps an integrator state without validation.
    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self(op)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(Operator::outer(psi, psi).expect("same state"))
    }

    pub fn ground(dim: usize) -> Result<Self> {
        Ok(Self::from_pure(&PureState::basis(dim, 0)?))
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn diagnostics(&self) -> DensityDiagnostics {
        check_density(&self.0)
    }
}

/// |⟨a|b⟩|²
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Level populations of pure and mixed states.
pub trait Populations {
    fn level_count(&self) -> usize;
    fn population_unchecked(&self, level: usize) -> f64;

    fn population(&self, level: usize) -> Result<f64> {
        if level >= self.level_count() {
            return Err(Error::LevelOutOfRange { level, dim: self.level_count() });
        }
        Ok(self.population_unchecked(level))
    }

    fn populations(&self) -> Vec<f64> {
        (0..self.level_count()).map(|k| self.population_unchecked(k)).collect()
    }
}

impl Populations for PureState {
    fn level_count(&self) -> usize {
        self.dim
    }
    fn population_unchecked(&self, level: usize) -> f64 {
        self.amps[level].norm_sqr()
    }
}

impl Populations for DensityMatrix {
    fn level_count(&self) -> usize {
        self.dim()
    }
    fn population_unchecked(&self, level: usize) -> f64 {
        self.0.m[level][level].re
    }
}

pub fn population<S: Populations + ?Sized>(state: &S, level: usize) -> Result<f64> {
    state.population(level)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityDiagnostics {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

pub fn check_density(rho: &Operator) -> DensityDiagnostics {
    DensityDiagnostics {
        hermiticity_defect: rho.hermiticity_defect(),
        trace_defect: (rho.trace() - ONE).norm(),
        min_eigenvalue: hermitian_eigenvalues(rho).first().copied().unwrap_or(0.0),
    }
}

/// Eigenvalues of the Hermitian part of `op`, ascending.
///
/// A d×d Hermitian H = X + iY is embedded as the real symmetric 2d×2d block
/// matrix [[X, −Y], [Y, X]], whose spectrum is that of H with every eigenvalue
/// doubled; cyclic Jacobi on the real matrix then recovers them.
fn hermitian_eigenvalues(op: &Operator) -> Vec<f64> {
    let d = op.dim();
    let n = 2 * d;
    let mut a = [[0.0_f64; 2 * MAX_DIM]; 2 * MAX_DIM];
    for i in 0..d {
        for j in 0..d {
            let h = 0.5 * (op.m[i][j] + op.m[j][i].conj());
            a[i][j] = h.re;
            a[i + d][j + d] = h.re;
            a[i][j + d] = -h.im;
            a[i + d][j] = h.im;
        }
    }
    jacobi_symmetric(&mut a, n);
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

fn jacobi_symmetric(a: &mut [[f64; 2 * MAX_DIM]; 2 * MAX_DIM], n: usize) {
    let scale: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[i][j].abs()).sum();
    if scale == 0.0 {
        return;
    }
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn fidelity_examples() {
        let k0 = PureState::basis(3, 0).unwrap();
        let k2 = PureState::basis(3, 2).unwrap();
        let plus = PureState::new(&[c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        assert_abs_diff_eq!(fidelity(&k0, &k0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&k0, &k2).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&plus, &k2).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = PureState::basis(3, 0).unwrap();
        let b = PureState::basis(4, 0).unwrap();
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn population_examples() {
        let k2 = PureState::basis(3, 2).unwrap();
        assert_eq!(population(&k2, 2).unwrap(), 1.0);

        let rho = DensityMatrix::new(Operator::diagonal(&[0.5, 0.3, 0.2])).unwrap();
        assert_abs_diff_eq!(population(&rho, 1).unwrap(), 0.3, epsilon = 1e-15);

        let b = PI / 8.0;
        let psi = PureState::new(&[c(b.cos(), 0.0), c(0.0, 0.0), c(-b.sin(), 0.0)]).unwrap();
        assert_abs_diff_eq!(population(&psi, 2).unwrap(), 0.146_446_609_406_726_2, epsilon = 1e-12);
    }

    #[test]
    fn population_out_of_range() {
        let k0 = PureState::basis(3, 0).unwrap();
        assert!(matches!(population(&k0, 3), Err(Error::LevelOutOfRange { level: 3, dim: 3 })));
        assert!(PureState::basis(3, 5).is_err());
    }

    #[test]
    fn unsupported_dimensions() {
        assert!(PureState::new(&[ONE, ZERO]).is_err());
        assert!(PureState::new(&[ONE; 5]).is_err());
    }

    #[test]
    fn check_density_examples() {
        let d = check_density(&Operator::identity(3).scale_real(1.0 / 3.0));
        assert_abs_diff_eq!(d.hermiticity_defect, 0.0);
        assert_abs_diff_eq!(d.trace_defect, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.min_eigenvalue, 1.0 / 3.0, epsilon = 1e-14);

        let d = check_density(&Operator::diagonal(&[1.0, 0.0, 0.0]));
        assert_eq!(d.hermiticity_defect, 0.0);
        assert_eq!(d.trace_defect, 0.0);
        assert_abs_diff_eq!(d.min_eigenvalue, 0.0, epsilon = 1e-15);

        let mut rho = Operator::diagonal(&[0.5, 0.3, 0.2]);
        rho[(0, 1)] = c(1e-3, 0.0);
        let d = check_density(&rho);
        assert_abs_diff_eq!(d.hermiticity_defect, 1e-3, epsilon = 1e-15);
    }

    #[test]
    fn density_rejects_invalid() {
        assert!(DensityMatrix::new(Operator::diagonal(&[0.5, 0.3, 0.3])).is_err());
        assert!(DensityMatrix::new(Operator::diagonal(&[1.2, -0.2, 0.0])).is_err());
        let mut op = Operator::diagonal(&[0.5, 0.5, 0.0]);
        op[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(op).is_err());
    }

    #[test]
    fn eigenvalues_of_pauli_like_block() {
        // [[0, -i], [i, 0]] ⊕ [2] has eigenvalues -1, 1, 2.
        let op = Operator::from_rows(&[
            vec![ZERO, c(0.0, -1.0), ZERO],
            vec![c(0.0, 1.0), ZERO, ZERO],
            vec![ZERO, ZERO, c(2.0, 0.0)],
        ])
        .unwrap();
        let e = op.eigenvalues_hermitian();
        assert_abs_diff_eq!(e[0], -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e[1], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e[2], 2.0, epsilon = 1e-13);
    }

    fn hermitian_strategy(dim: usize) -> impl Strategy<Value = Operator> {
        proptest::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
            let mut op = Operator::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    op[(i, j)] = c(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1]);
                }
            }
            (op + op.adjoint()).scale_real(0.5)
        })
    }

    fn state_strategy(dim: usize) -> impl Strategy<Value = PureState> {
        proptest::collection::vec(-1.0f64..1.0, 2 * dim)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(move |v| {
                let amps: Vec<C64> = v.chunks(2).map(|p| c(p[0], p[1])).collect();
                PureState::normalized(&amps).unwrap()
            })
    }

    proptest! {
        #[test]
        fn jacobi_matches_nalgebra(op in (3usize..=4).prop_flat_map(hermitian_strategy)) {
            let d = op.dim();
            let m = nalgebra::DMatrix::from_fn(d, d, |i, j| op[(i, j)]);
            let mut reference: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            let ours = op.eigenvalues_hermitian();
            for (a, b) in ours.iter().zip(&reference) {
                prop_assert!((a - b).abs() < 1e-10, "{ours:?} vs {reference:?}");
            }
        }

        #[test]
        fn normalize_is_idempotent(psi in (3usize..=4).prop_flat_map(state_strategy)) {
            let once = psi.normalize().unwrap();
            let twice = once.normalize().unwrap();
            for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
                prop_assert!((a - b).norm() <= 1e-15);
            }
            prop_assert!((once.norm_sqr() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn fidelity_symmetric_and_bounded(
            (a, b) in (3usize..=4).prop_flat_map(|d| (state_strategy(d), state_strategy(d)))
        ) {
            let ab = fidelity(&a, &b).unwrap();
            let ba = fidelity(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn populations_sum_to_one(psi in (3usize..=4).prop_flat_map(state_strategy)) {
            let total: f64 = psi.populations().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            let rho = DensityMatrix::from_pure(&psi);
            let total: f64 = rho.populations().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(DensityMatrix::new(*rho.operator()).is_ok());
        }
    }
}
