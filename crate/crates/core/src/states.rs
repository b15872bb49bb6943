//! The three-qubit register and the canonical states of the protocol.
//!
//! Qubit ordering is fixed globally: `A` is the most significant bit and the
//! carrier `C` the least significant, so `|a b c⟩` lives at index
//! `4a + 2b + c`. Reduced states keep the same relative order.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{c, herm_eigenvalues, kron, CMatrix};

/// Tolerances checked by [`DensityMatrix::new`].
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_MIN_EIGENVALUE: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitId {
    A,
    B,
    /// The carrier.
    C,
}

impl QubitId {
    pub const ALL: [QubitId; 3] = [QubitId::A, QubitId::B, QubitId::C];

    #[inline]
    const fn mask(self) -> u8 {
        match self {
            QubitId::A => 0b100,
            QubitId::B => 0b010,
            QubitId::C => 0b001,
        }
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QubitId::A => "A",
            QubitId::B => "B",
            QubitId::C => "C",
        };
        f.write_str(s)
    }
}

/// A subset of `{A, B, C}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct QubitSet(u8);

impl QubitSet {
    pub const EMPTY: QubitSet = QubitSet(0);
    pub const ABC: QubitSet = QubitSet(0b111);
    pub const AB: QubitSet = QubitSet(0b110);

    pub(crate) const fn from_mask(mask: u8) -> Self {
        QubitSet(mask & 0b111)
    }

    pub fn of(qubits: &[QubitId]) -> Self {
        QubitSet(qubits.iter().fold(0, |m, q| m | q.mask()))
    }

    pub fn single(q: QubitId) -> Self {
        QubitSet(q.mask())
    }

    #[inline]
    pub fn contains(self, q: QubitId) -> bool {
        self.0 & q.mask() != 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: QubitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: QubitSet) -> QubitSet {
        QubitSet(self.0 | other.0)
    }

    pub fn intersection(self, other: QubitSet) -> QubitSet {
        QubitSet(self.0 & other.0)
    }

    /// `other \ self`.
    pub fn complement_in(self, other: QubitSet) -> QubitSet {
        QubitSet(other.0 & !self.0)
    }

    /// Members in register order (A, B, C).
    pub fn iter(self) -> impl Iterator<Item = QubitId> {
        QubitId::ALL.into_iter().filter(move |q| self.contains(*q))
    }

    /// Hilbert-space dimension `2^len`.
    pub fn dim(self) -> usize {
        1 << self.len()
    }

    /// Bit position of `q` inside the index of a state supported on `self`
    /// (0 = least significant). `None` if `q` is not a member.
    pub(crate) fn bit_of(self, q: QubitId) -> Option<u32> {
        if !self.contains(q) {
            return None;
        }
        Some((self.0 & (q.mask() - 1)).count_ones())
    }

    /// Index mask selecting the bits of `sub` inside a state supported on `self`.
    pub(crate) fn index_mask(self, sub: QubitSet) -> usize {
        sub.iter().filter_map(|q| self.bit_of(q)).fold(0, |m, b| m | (1 << b))
    }
}

impl fmt::Debug for QubitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QubitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        for q in self.iter() {
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

/// The mixing parameter `p` of the initial state family.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MixtureWeight(f64);

impl MixtureWeight {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::InvalidWeight(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A validated density matrix on a subset of the register.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    qubits: QubitSet,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix on {} {:?}", self.qubits, self.mat)
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: CMatrix, qubits: QubitSet) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::InvalidSubset("a state needs at least one qubit".into()));
        }
        let dim = qubits.dim();
        if mat.rows() != dim || mat.cols() != dim {
            return Err(Error::ShapeMismatch { expected: (dim, dim), found: (mat.rows(), mat.cols()) });
        }
        let defect = mat.hermiticity_defect();
        if defect > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {defect:.3e}")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let mat = mat.hermitize();
        let min_ev = herm_eigenvalues(&mat)?[0];
        if min_ev < STATE_MIN_EIGENVALUE {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min_ev:.3e}")));
        }
        Ok(Self { mat, qubits })
    }

    /// Validated state on the full register.
    pub fn three_qubit(mat: CMatrix) -> Result<Self> {
        Self::new(mat, QubitSet::ABC)
    }

    /// Wraps a matrix whose invariants the caller has already established.
    pub(crate) fn from_parts_unchecked(mat: CMatrix, qubits: QubitSet) -> Self {
        debug_assert_eq!(mat.rows(), qubits.dim());
        Self { mat, qubits }
    }

    /// Pure state `|ψ⟩⟨ψ|`; the vector is normalized here.
    pub fn pure(amplitudes: &[Complex64], qubits: QubitSet) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
        Self::new(CMatrix::outer(&v, &v), qubits)
    }

    /// `self ⊗ other`; `other` must live on qubits that all come after `self`'s.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let last = self.qubits.iter().last().expect("non-empty");
        let first = other.qubits.iter().next().expect("non-empty");
        if !self.qubits.intersection(other.qubits).is_empty() || last >= first {
            return Err(Error::InvalidSubset(format!(
                "cannot place {} after {} in register order",
                other.qubits, self.qubits
            )));
        }
        Ok(Self { mat: kron(&self.mat, &other.mat), qubits: self.qubits.union(other.qubits) })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn qubits(&self) -> QubitSet {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// `U ρ U†`, revalidated.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        let out = &(u * &self.mat) * &u.adjoint();
        Self::new(out, self.qubits)
    }
}

/// `|a b c⟩⟨a b c|`.
pub fn basis_state(a: u8, b: u8, c_bit: u8) -> Result<DensityMatrix> {
    for bit in [a, b, c_bit] {
        if bit > 1 {
            return Err(Error::InvalidBit(bit));
        }
    }
    let idx = 4 * a as usize + 2 * b as usize + c_bit as usize;
    let mut m = CMatrix::zeros(8, 8);
    m[(idx, idx)] = c(1.0, 0.0);
    Ok(DensityMatrix::from_parts_unchecked(m, QubitSet::ABC))
}

/// `|φ⁺⟩⟨φ⁺|` on `AB`, with `|φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus_ab() -> DensityMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(i, j)] = c(0.5, 0.0);
    }
    DensityMatrix::from_parts_unchecked(m, QubitSet::AB)
}

/// `|GHZ⟩⟨GHZ|` with `|GHZ⟩ = (|000⟩ + |111⟩)/√2`.
pub fn ghz() -> DensityMatrix {
    let mut m = CMatrix::zeros(8, 8);
    for (i, j) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
        m[(i, j)] = c(0.5, 0.0);
    }
    DensityMatrix::from_parts_unchecked(m, QubitSet::ABC)
}

/// `I₈ / 8`.
pub fn maximally_mixed() -> DensityMatrix {
    DensityMatrix::from_parts_unchecked(CMatrix::identity(8).scale_real(0.125), QubitSet::ABC)
}

/// The separable component:
/// `[(2|φ⁺⟩⟨φ⁺| + |01⟩⟨01| + |10⟩⟨10|) ⊗ |0⟩⟨0| + (|00⟩⟨00| + |11⟩⟨11|) ⊗ |1⟩⟨1|] / 6`.
pub fn lambda_sep() -> DensityMatrix {
    let sixth = 1.0 / 6.0;
    let mut m = CMatrix::zeros(8, 8);
    // 2|φ⁺⟩⟨φ⁺| ⊗ |0⟩⟨0| touches |000⟩ and |110⟩ with weight 1 each.
    for (i, j) in [(0, 0), (0, 6), (6, 0), (6, 6)] {
        m[(i, j)] = c(sixth, 0.0);
    }
    // |010⟩, |100⟩, |001⟩, |111⟩
    for i in [2, 4, 1, 7] {
        m[(i, i)] = c(sixth, 0.0);
    }
    DensityMatrix::from_parts_unchecked(m, QubitSet::ABC)
}

/// The entangled component:
/// `[(|00⟩⟨00| + |11⟩⟨11|) ⊗ |1⟩⟨1| + |φ⁺⟩⟨φ⁺| ⊗ |0⟩⟨0|] / 3`.
pub fn lambda_ent() -> DensityMatrix {
    let third = 1.0 / 3.0;
    let sixth = 1.0 / 6.0;
    let mut m = CMatrix::zeros(8, 8);
    m[(1, 1)] = c(third, 0.0);
    m[(7, 7)] = c(third, 0.0);
    for (i, j) in [(0, 0), (0, 6), (6, 0), (6, 6)] {
        m[(i, j)] = c(sixth, 0.0);
    }
    DensityMatrix::from_parts_unchecked(m, QubitSet::ABC)
}

/// `p Λ_sep + (1 - p) Λ_ent`.
pub fn alpha(p: MixtureWeight) -> DensityMatrix {
    let p = p.value();
    let sep = lambda_sep();
    let ent = lambda_ent();
    let m = CMatrix::from_fn(8, 8, |i, j| sep.mat[(i, j)] * p + ent.mat[(i, j)] * (1.0 - p));
    DensityMatrix::from_parts_unchecked(m, QubitSet::ABC)
}
