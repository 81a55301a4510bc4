//! Dense complex linear algebra for one to four polarization qubits.
//!
//! Qubit ordering: qubit 0 is the first photon and maps to the most
//! significant bit of an amplitude index, so index `0b0101` is the string
//! `"0101"`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 4;
/// Tolerance for exact algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for quantities built from accumulated products.
pub const ACCUMULATED_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmathError {
    #[error("qubit count {0} is outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("length {0} is not 2^n for n in 1..={MAX_QUBITS}")]
    BadLength(usize),
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("matrix is not unitary: max |U†U - I| = {0:e}")]
    NotUnitary(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid qubit selection {selection:?} for {n_qubits} qubits")]
    InvalidSelection { selection: Vec<usize>, n_qubits: usize },
    #[error("invalid outcome string {0:?}")]
    InvalidOutcome(String),
}

fn qubits_for_len(len: usize) -> Result<usize, QmathError> {
    if !len.is_power_of_two() || len < 2 {
        return Err(QmathError::BadLength(len));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(QmathError::QubitCount(n));
    }
    Ok(n)
}

fn check_qubits(n: usize) -> Result<(), QmathError> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(QmathError::QubitCount(n))
    }
}

/// A normalized pure state of 1 to 4 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self, QmathError> {
        let n_qubits = qubits_for_len(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QmathError::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self, QmathError> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QmathError::NotNormalized(norm));
        }
        Self::new(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self, QmathError> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(QmathError::BadLength(index));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state from a string such as `"0101"`.
    pub fn from_bits(bits: &str) -> Result<Self, QmathError> {
        let outcome: Outcome = bits.parse()?;
        Self::basis_state(outcome.len(), outcome.value())
    }

    /// `Σ cₖ |vₖ⟩`, which must already be normalized.
    pub fn combination(terms: &[(C64, &StateVector)]) -> Result<Self, QmathError> {
        let first = terms.first().ok_or(QmathError::BadLength(0))?.1;
        let mut amps = vec![ZERO; first.dim()];
        for (coeff, v) in terms {
            if v.n_qubits != first.n_qubits {
                return Err(QmathError::DimensionMismatch {
                    left: first.n_qubits,
                    right: v.n_qubits,
                });
            }
            for (acc, a) in amps.iter_mut().zip(&v.amps) {
                *acc += coeff * a;
            }
        }
        Self::new(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64, QmathError> {
        if self.n_qubits != other.n_qubits {
            return Err(QmathError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, QmathError> {
        self.inner(other).map(|z| z.norm())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.dim();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            data,
        }
    }
}

/// Kronecker product, `lhs` qubits first.
pub fn tensor(lhs: &StateVector, rhs: &StateVector) -> Result<StateVector, QmathError> {
    let n = lhs.n_qubits + rhs.n_qubits;
    check_qubits(n)?;
    let amps = lhs
        .amps
        .iter()
        .flat_map(|a| rhs.amps.iter().map(move |b| a * b))
        .collect();
    Ok(StateVector { n_qubits: n, amps })
}

/// `⟨u|v⟩`.
pub fn overlap(u: &StateVector, v: &StateVector) -> Result<C64, QmathError> {
    u.inner(v)
}

/// A Hermitian, unit-trace, positive semidefinite matrix over 1 to 4 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    /// Row-major.
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, data: Vec<C64>) -> Result<Self, QmathError> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        if data.len() != dim * dim {
            return Err(QmathError::BadLength(data.len()));
        }
        let dm = Self { n_qubits, data };
        let herm = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| (dm.get(r, c) - dm.get(c, r).conj()).norm())
            .fold(0.0, f64::max);
        if herm > ALGEBRAIC_TOL {
            return Err(QmathError::InvalidDensity(format!("not Hermitian ({herm:e})")));
        }
        let tr = dm.trace();
        if (tr.re - 1.0).abs() > ALGEBRAIC_TOL || tr.im.abs() > ALGEBRAIC_TOL {
            return Err(QmathError::InvalidDensity(format!("trace {tr}")));
        }
        let min = dm.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(QmathError::InvalidDensity(format!("eigenvalue {min:e}")));
        }
        Ok(dm)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self, QmathError> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix, QmathError> {
        let n = self.n_qubits + other.n_qubits;
        check_qubits(n)?;
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut data = vec![ZERO; dim * dim];
        for r1 in 0..da {
            for c1 in 0..da {
                let a = self.get(r1, c1);
                for r2 in 0..db {
                    for c2 in 0..db {
                        data[(r1 * db + r2) * dim + c1 * db + c2] = a * other.get(r2, c2);
                    }
                }
            }
        }
        Ok(DensityMatrix { n_qubits: n, data })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dim(), &self.data)
    }

    /// `½‖self − other‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, QmathError> {
        if self.n_qubits != other.n_qubits {
            return Err(QmathError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let diff: Vec<C64> = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(0.5 * hermitian_eigenvalues(self.dim(), &diff).iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Largest absolute element-wise difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64, QmathError> {
        if self.n_qubits != other.n_qubits {
            return Err(QmathError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64, QmathError> {
        if self.n_qubits != psi.n_qubits {
            return Err(QmathError::DimensionMismatch {
                left: self.n_qubits,
                right: psi.n_qubits,
            });
        }
        let dim = self.dim();
        let mut acc = ZERO;
        for r in 0..dim {
            for c in 0..dim {
                acc += psi.amps[r].conj() * self.get(r, c) * psi.amps[c];
            }
        }
        Ok(acc.re)
    }
}

fn hermitian_eigenvalues(dim: usize, data: &[C64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(dim, dim, data);
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Reduced state on `keep` (0-based qubit indices, strictly increasing).
pub fn partial_trace(dm: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QmathError> {
    let n = dm.n_qubits;
    let valid = !keep.is_empty()
        && keep.iter().all(|&q| q < n)
        && keep.windows(2).all(|w| w[0] < w[1]);
    if !valid {
        return Err(QmathError::InvalidSelection {
            selection: keep.to_vec(),
            n_qubits: n,
        });
    }
    if keep.len() == n {
        return Ok(dm.clone());
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let kdim = 1 << k;
    let bit_of = |q: usize| n - 1 - q;
    // Embeds a kept-subsystem index and a traced-subsystem index into a full index.
    let embed = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut full = 0;
        for (j, &q) in keep.iter().enumerate() {
            if (kept_idx >> (k - 1 - j)) & 1 == 1 {
                full |= 1 << bit_of(q);
            }
        }
        for (j, &q) in traced.iter().enumerate() {
            if (traced_idx >> (traced.len() - 1 - j)) & 1 == 1 {
                full |= 1 << bit_of(q);
            }
        }
        full
    };
    let mut data = vec![ZERO; kdim * kdim];
    for r in 0..kdim {
        for c in 0..kdim {
            data[r * kdim + c] = (0..1usize << traced.len())
                .map(|t| dm.get(embed(r, t), embed(c, t)))
                .sum();
        }
    }
    Ok(DensityMatrix { n_qubits: k, data })
}

/// A 2×2 unitary acting on one polarization qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitUnitary {
    m: [[C64; 2]; 2],
}

impl QubitUnitary {
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self, QmathError> {
        let u = Self { m };
        let dev = u.unitarity_defect();
        if dev > ALGEBRAIC_TOL {
            return Err(QmathError::NotUnitary(dev));
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { m: [[h, h], [h, -h]] }
    }

    pub fn pauli_x() -> Self {
        Self {
            m: [[ZERO, ONE], [ONE, ZERO]],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    /// SU(2) element `[[α, −β̄], [β, ᾱ]]` with `α = w + iz`, `β = y + ix`,
    /// from a unit quaternion `(w, x, y, z)`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let alpha = C64::new(w, z);
        let beta = C64::new(y, x);
        Self {
            m: [[alpha, -beta.conj()], [beta, alpha.conj()]],
        }
    }

    /// `exp(−i θ/2 n̂·σ)` for a unit axis `n̂`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        let [nx, ny, nz] = axis;
        Self {
            m: [
                [C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
                [C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
            ],
        }
    }

    pub fn matrix(&self) -> &[[C64; 2]; 2] {
        &self.m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.m[r][c]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn compose(&self, rhs: &QubitUnitary) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self { m }
    }

    pub fn determinant(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `max |U†U − I|` over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().compose(self);
        let id = Self::identity();
        (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (p.m[r][c] - id.m[r][c]).norm())
            .fold(0.0, f64::max)
    }
}

/// Haar-random SU(2) element from a uniform point on the 3-sphere.
pub fn haar_su2<R: Rng + ?Sized>(rng: &mut R) -> QubitUnitary {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return QubitUnitary::from_quaternion(q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
        }
    }
}

/// Applies `m` to bit `shift` of every index of `amps`.
fn apply_on_bit(amps: &mut [C64], shift: usize, m: &[[C64; 2]; 2]) {
    let mask = 1usize << shift;
    for i in 0..amps.len() {
        if i & mask == 0 {
            let (a, b) = (amps[i], amps[i | mask]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[i | mask] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Common behavior of pure and mixed polarization states.
pub trait QuantumState: Clone {
    fn n_qubits(&self) -> usize;

    /// Applies `ops[k]` to qubit `k`.
    fn apply_local(&self, ops: &[QubitUnitary]) -> Result<Self, QmathError>;

    /// Born probabilities in the computational basis, indexed by outcome value.
    fn computational_probabilities(&self) -> Vec<f64>;
}

impl QuantumState for StateVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_local(&self, ops: &[QubitUnitary]) -> Result<Self, QmathError> {
        if ops.len() != self.n_qubits {
            return Err(QmathError::DimensionMismatch {
                left: self.n_qubits,
                right: ops.len(),
            });
        }
        let n = self.n_qubits;
        let mut amps = self.amps.clone();
        for (k, op) in ops.iter().enumerate() {
            apply_on_bit(&mut amps, n - 1 - k, &op.m);
        }
        Ok(Self { n_qubits: n, amps })
    }

    fn computational_probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

impl QuantumState for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_local(&self, ops: &[QubitUnitary]) -> Result<Self, QmathError> {
        if ops.len() != self.n_qubits {
            return Err(QmathError::DimensionMismatch {
                left: self.n_qubits,
                right: ops.len(),
            });
        }
        // Row-major data indexed as `row << n | col`: rows take U, columns U*.
        let n = self.n_qubits;
        let mut data = self.data.clone();
        for (k, op) in ops.iter().enumerate() {
            let conj = op.m.map(|row| row.map(|z| z.conj()));
            apply_on_bit(&mut data, 2 * n - 1 - k, &op.m);
            apply_on_bit(&mut data, n - 1 - k, &conj);
        }
        Ok(Self { n_qubits: n, data })
    }

    fn computational_probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re.max(0.0)).collect()
    }
}

/// Either representation, as carried by a channel payload.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(v) => v.to_density(),
            State::Mixed(m) => m.clone(),
        }
    }

    /// Reduced state on `keep`; pure states become density matrices unless
    /// every qubit is kept.
    pub fn reduce(&self, keep: &[usize]) -> Result<State, QmathError> {
        if keep.len() == self.n_qubits() {
            partial_trace(&self.to_density(), keep)?;
            return Ok(self.clone());
        }
        partial_trace(&self.to_density(), keep).map(State::Mixed)
    }

    /// Trace distance between the two states as density matrices.
    pub fn distance(&self, other: &State) -> Result<f64, QmathError> {
        self.to_density().trace_distance(&other.to_density())
    }
}

impl From<StateVector> for State {
    fn from(v: StateVector) -> Self {
        State::Pure(v)
    }
}

impl From<DensityMatrix> for State {
    fn from(m: DensityMatrix) -> Self {
        State::Mixed(m)
    }
}

impl QuantumState for State {
    fn n_qubits(&self) -> usize {
        match self {
            State::Pure(v) => v.n_qubits(),
            State::Mixed(m) => m.n_qubits(),
        }
    }

    fn apply_local(&self, ops: &[QubitUnitary]) -> Result<Self, QmathError> {
        Ok(match self {
            State::Pure(v) => State::Pure(v.apply_local(ops)?),
            State::Mixed(m) => State::Mixed(m.apply_local(ops)?),
        })
    }

    fn computational_probabilities(&self) -> Vec<f64> {
        match self {
            State::Pure(v) => v.computational_probabilities(),
            State::Mixed(m) => m.computational_probabilities(),
        }
    }
}

/// `U^{⊗N}` applied to every qubit of `state`.
pub fn apply_collective<S: QuantumState>(u: &QubitUnitary, state: &S) -> Result<S, QmathError> {
    let defect = u.unitarity_defect();
    if defect > ALGEBRAIC_TOL {
        return Err(QmathError::NotUnitary(defect));
    }
    state.apply_local(&vec![*u; state.n_qubits()])
}

/// A measured bit string; bit 0 is the first basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    value: u8,
    len: u8,
}

impl Outcome {
    pub fn new(value: usize, len: usize) -> Result<Self, QmathError> {
        check_qubits(len)?;
        if value >= 1 << len {
            return Err(QmathError::InvalidOutcome(format!("{value} in {len} bits")));
        }
        Ok(Self {
            value: value as u8,
            len: len as u8,
        })
    }

    pub fn value(&self) -> usize {
        self.value as usize
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit of photon `pos` (0-based).
    pub fn bit(&self, pos: usize) -> u8 {
        (self.value >> (self.len as usize - 1 - pos)) & 1
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(|p| self.bit(p))
    }

    pub fn weight(&self) -> u32 {
        self.value.count_ones()
    }

    /// All outcomes of `len` bits in increasing order.
    pub fn all(len: usize) -> impl Iterator<Item = Outcome> {
        (0..1usize << len).map(move |v| Outcome {
            value: v as u8,
            len: len as u8,
        })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Outcome {
    type Err = QmathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QmathError::InvalidOutcome(s.to_string());
        let mut value = 0usize;
        for ch in s.chars() {
            value = (value << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(bad()),
                };
        }
        Outcome::new(value, s.len()).map_err(|_| bad())
    }
}

impl serde::Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn rotated_probabilities<S: QuantumState>(state: &S, basis: &QubitUnitary) -> Vec<f64> {
    let rot = basis.adjoint();
    state
        .apply_local(&vec![rot; state.n_qubits()])
        .expect("operator count matches qubit count")
        .computational_probabilities()
}

/// Exact Born distribution when every photon is measured in the basis whose
/// vectors are the columns of `basis`.
pub fn outcome_distribution<S: QuantumState>(state: &S, basis: &QubitUnitary) -> BTreeMap<Outcome, f64> {
    let n = state.n_qubits();
    Outcome::all(n).zip(rotated_probabilities(state, basis)).collect()
}

/// Samples one outcome from [`outcome_distribution`].
pub fn measure_product_basis<S: QuantumState, R: Rng + ?Sized>(
    state: &S,
    basis: &QubitUnitary,
    rng: &mut R,
) -> Outcome {
    let n = state.n_qubits();
    let probs = rotated_probabilities(state, basis);
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last_nonzero = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = i;
            if u < *p {
                return Outcome::new(i, n).expect("index in range");
            }
            u -= p;
        }
    }
    Outcome::new(last_nonzero, n).expect("index in range")
}
