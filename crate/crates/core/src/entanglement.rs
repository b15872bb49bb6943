//! Partial transpose, partial trace and negativity over bipartitions of the
//! register.
//!
//! Subsystem operations work directly on basis-index bits: under the global
//! ordering each qubit owns one bit of the row and column index, so a partial
//! transpose is a swap of those bits between the row and column index.

use std::fmt;

use crate::error::{Error, Result};
use crate::matcore::{c, herm_eigenvalues, hermitian_eigenvalues_unchecked, CMatrix};
use crate::states::{DensityMatrix, QubitId, QubitSet};

/// Default threshold under which a negativity counts as zero.
///
/// Entanglement across `C|AB` close to the feasibility boundary can grow like
/// a high power of the incoherent strength, so the reported boundaries depend
/// on this value; see the guide's chapter on feasibility.
pub const DEFAULT_EPS_SEP: f64 = 1e-10;

/// A split of a state's qubits into two non-empty, disjoint sides.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bipartition {
    side_one: QubitSet,
    side_two: QubitSet,
}

impl Bipartition {
    pub const A_BC: Bipartition = Bipartition::const_split(0b100, 0b011);
    pub const B_AC: Bipartition = Bipartition::const_split(0b010, 0b101);
    pub const C_AB: Bipartition = Bipartition::const_split(0b001, 0b110);
    /// For two-qubit states on `AB`.
    pub const A_B: Bipartition = Bipartition::const_split(0b100, 0b010);

    const fn const_split(one: u8, two: u8) -> Self {
        Bipartition { side_one: QubitSet::from_mask(one), side_two: QubitSet::from_mask(two) }
    }

    pub fn new(side_one: QubitSet, side_two: QubitSet) -> Result<Self> {
        if side_one.is_empty() || side_two.is_empty() {
            return Err(Error::InvalidSubset("both sides of a bipartition must be non-empty".into()));
        }
        if !side_one.intersection(side_two).is_empty() {
            return Err(Error::InvalidSubset(format!("{side_one} and {side_two} overlap")));
        }
        Ok(Self { side_one, side_two })
    }

    /// `side | support \ side`.
    pub fn split(side: QubitSet, support: QubitSet) -> Result<Self> {
        if !side.is_subset_of(support) {
            return Err(Error::InvalidSubset(format!("{side} is not inside {support}")));
        }
        Self::new(side, side.complement_in(support))
    }

    /// `{q} | rest of the register`.
    pub fn single_vs_rest(q: QubitId) -> Self {
        Self::split(QubitSet::single(q), QubitSet::ABC).expect("single qubit is a proper subset")
    }

    pub fn side_one(self) -> QubitSet {
        self.side_one
    }

    pub fn side_two(self) -> QubitSet {
        self.side_two
    }

    pub fn support(self) -> QubitSet {
        self.side_one.union(self.side_two)
    }

    pub fn swapped(self) -> Self {
        Self { side_one: self.side_two, side_two: self.side_one }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.side_one, self.side_two)
    }
}

impl fmt::Debug for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Negativity of a state across a bipartition.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NegativityValue(f64);

impl NegativityValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_proper_subset(side: QubitSet, support: QubitSet) -> Result<()> {
    if side.is_empty() || !side.is_subset_of(support) || side == support {
        return Err(Error::InvalidSubset(format!("{side} is not a non-empty proper subset of {support}")));
    }
    Ok(())
}

/// Partial transpose of a square matrix on `support`, transposing the qubits in `side`.
pub(crate) fn partial_transpose_raw(m: &CMatrix, support: QubitSet, side: QubitSet) -> CMatrix {
    let mask = support.index_mask(side);
    let n = m.rows();
    let mut out = CMatrix::zeros(n, n);
    pt_into(m, mask, &mut out);
    out
}

#[inline]
pub(crate) fn pt_into(m: &CMatrix, mask: usize, out: &mut CMatrix) {
    let n = m.rows();
    for i in 0..n {
        for j in 0..n {
            let ii = (i & !mask) | (j & mask);
            let jj = (j & !mask) | (i & mask);
            out[(ii, jj)] = m[(i, j)];
        }
    }
}

/// `ρ^{T_side}`.
pub fn partial_transpose(rho: &DensityMatrix, side: QubitSet) -> Result<CMatrix> {
    check_proper_subset(side, rho.qubits())?;
    Ok(partial_transpose_raw(rho.matrix(), rho.qubits(), side))
}

/// `Tr √(M† M)` for Hermitian `M`: the sum of absolute eigenvalues.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(herm_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

/// Sum of the magnitudes of the negative eigenvalues of an exactly Hermitian matrix.
///
/// For unit trace this equals `(‖M‖₁ − 1)/2`; unlike that form it does not
/// pick up the (tiny) trace drift of an integrated state.
pub(crate) fn negative_part(m: &CMatrix) -> f64 {
    hermitian_eigenvalues_unchecked(m).iter().filter(|&&l| l < 0.0).map(|l| -l).sum()
}

/// `E = (‖ρ^{T_1}‖₁ − 1) / 2`, evaluated as the magnitude of the negative
/// part of the partially transposed spectrum.
pub fn negativity(rho: &DensityMatrix, bip: Bipartition) -> Result<NegativityValue> {
    if bip.support() != rho.qubits() {
        return Err(Error::InvalidSubset(format!(
            "bipartition {bip} does not cover the state's qubits {}",
            rho.qubits()
        )));
    }
    let pt = partial_transpose_raw(rho.matrix(), rho.qubits(), bip.side_one());
    let norm = trace_norm(&pt)?;
    let value = (norm - rho.trace()) / 2.0;
    Ok(NegativityValue(value.max(0.0)))
}

/// `true` iff the negativity across `bip` is at most `eps`.
pub fn is_ppt_separable(rho: &DensityMatrix, bip: Bipartition, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
    }
    Ok(negativity(rho, bip)?.value() <= eps)
}

/// Reduced state after tracing out `discard`.
pub fn partial_trace(rho: &DensityMatrix, discard: QubitSet) -> Result<DensityMatrix> {
    let support = rho.qubits();
    check_proper_subset(discard, support)?;
    let keep = discard.complement_in(support);
    let out = partial_trace_raw(rho.matrix(), support, discard);
    debug_assert_eq!(out.rows(), keep.dim());
    DensityMatrix::new(out, keep)
}

pub(crate) fn partial_trace_raw(m: &CMatrix, support: QubitSet, discard: QubitSet) -> CMatrix {
    let keep = discard.complement_in(support);
    let keep_bits: Vec<u32> = keep.iter().filter_map(|q| support.bit_of(q)).collect();
    let drop_bits: Vec<u32> = discard.iter().filter_map(|q| support.bit_of(q)).collect();
    let scatter = |reduced: usize, bits: &[u32]| -> usize {
        // `bits` is in register order, i.e. most significant first.
        let k = bits.len();
        bits.iter().enumerate().fold(0, |acc, (pos, &b)| acc | (((reduced >> (k - 1 - pos)) & 1) << b))
    };
    let dk = 1 << keep_bits.len();
    let dd = 1 << drop_bits.len();
    let mut out = CMatrix::zeros(dk, dk);
    for r in 0..dk {
        let r_full = scatter(r, &keep_bits);
        for s in 0..dk {
            let s_full = scatter(s, &keep_bits);
            let mut acc = c(0.0, 0.0);
            for k in 0..dd {
                let k_full = scatter(k, &drop_bits);
                acc += m[(r_full | k_full, s_full | k_full)];
            }
            out[(r, s)] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        alpha, basis_state, bell_phi_plus_ab, ghz, lambda_ent, lambda_sep, maximally_mixed, MixtureWeight,
    };
    use approx::assert_abs_diff_eq;

    fn carrier_zero() -> DensityMatrix {
        DensityMatrix::new(CMatrix::diag(&[1.0, 0.0]), QubitSet::single(QubitId::C)).unwrap()
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(QubitSet::EMPTY, QubitSet::ABC).is_err());
        assert!(Bipartition::new(QubitSet::AB, QubitSet::single(QubitId::B)).is_err());
        assert_eq!(Bipartition::single_vs_rest(QubitId::C), Bipartition::C_AB);
        assert_eq!(Bipartition::C_AB.to_string(), "C|AB");
        assert_eq!(Bipartition::A_B.support(), QubitSet::AB);
    }

    #[test]
    fn diagonal_state_is_pt_fixed_point() {
        let rho = basis_state(0, 0, 0).unwrap();
        let pt = partial_transpose(&rho, QubitSet::single(QubitId::A)).unwrap();
        assert_eq!(&pt, rho.matrix());
    }

    #[test]
    fn bell_times_carrier_pt_min_eigenvalue() {
        let rho = bell_phi_plus_ab().tensor(&carrier_zero()).unwrap();
        let pt = partial_transpose(&rho, QubitSet::single(QubitId::A)).unwrap();
        let ev = herm_eigenvalues(&pt).unwrap();
        assert_abs_diff_eq!(ev[0], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn complementary_transposes_compose_to_full_transpose() {
        let rho = alpha(MixtureWeight::new(0.3).unwrap());
        let ab = partial_transpose(&rho, QubitSet::AB).unwrap();
        let c_only = partial_transpose(&rho, QubitSet::single(QubitId::C)).unwrap();
        assert_eq!(ab, c_only.transpose());
    }

    #[test]
    fn partial_transpose_rejects_improper_subsets() {
        let rho = maximally_mixed();
        assert!(partial_transpose(&rho, QubitSet::EMPTY).is_err());
        assert!(partial_transpose(&rho, QubitSet::ABC).is_err());
        let ab = bell_phi_plus_ab();
        assert!(partial_transpose(&ab, QubitSet::single(QubitId::C)).is_err());
    }

    #[test]
    fn trace_norms() {
        assert_abs_diff_eq!(trace_norm(&crate::matcore::pauli::z()).unwrap(), 2.0, epsilon = 1e-14);
        let bell = bell_phi_plus_ab();
        let pt = partial_transpose(&bell, QubitSet::single(QubitId::A)).unwrap();
        assert_abs_diff_eq!(trace_norm(&pt).unwrap(), 2.0, epsilon = 1e-14);
        for rho in [lambda_sep(), lambda_ent(), ghz()] {
            assert_abs_diff_eq!(trace_norm(rho.matrix()).unwrap(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn reference_negativities() {
        let bell_c = bell_phi_plus_ab().tensor(&carrier_zero()).unwrap();
        assert_abs_diff_eq!(negativity(&bell_c, Bipartition::A_BC).unwrap().value(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(negativity(&bell_phi_plus_ab(), Bipartition::A_B).unwrap().value(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(negativity(&lambda_ent(), Bipartition::A_BC).unwrap().value(), 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(negativity(&ghz(), Bipartition::C_AB).unwrap().value(), 0.5, epsilon = 1e-12);
        assert!(negativity(&bell_phi_plus_ab(), Bipartition::C_AB).is_err());
    }

    #[test]
    fn negativity_is_symmetric_under_swap() {
        let rho = alpha(MixtureWeight::new(0.25).unwrap());
        for bip in [Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB] {
            let a = negativity(&rho, bip).unwrap().value();
            let b = negativity(&rho, bip.swapped()).unwrap().value();
            assert!((a - b).abs() < 1e-12, "{bip}: {a} vs {b}");
        }
    }

    #[test]
    fn partial_traces() {
        let ab = partial_trace(&ghz(), QubitSet::single(QubitId::C)).unwrap();
        let expected = CMatrix::diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!(ab.matrix().max_abs_diff(&expected) < 1e-15);
        assert_eq!(negativity(&ab, Bipartition::A_B).unwrap().value(), 0.0);

        let ac = partial_trace(&basis_state(1, 0, 1).unwrap(), QubitSet::single(QubitId::B)).unwrap();
        assert_eq!(ac.qubits(), QubitSet::of(&[QubitId::A, QubitId::C]));
        assert!(ac.matrix().max_abs_diff(&CMatrix::diag(&[0.0, 0.0, 0.0, 1.0])) < 1e-15);

        let a_only = partial_trace(&bell_phi_plus_ab(), QubitSet::single(QubitId::B)).unwrap();
        assert!(a_only.matrix().max_abs_diff(&CMatrix::diag(&[0.5, 0.5])) < 1e-15);

        assert!(partial_trace(&ghz(), QubitSet::ABC).is_err());
    }

    #[test]
    fn alpha_marginal_entanglement() {
        let ab = partial_trace(&alpha(MixtureWeight::new(0.9).unwrap()), QubitSet::single(QubitId::C)).unwrap();
        assert_abs_diff_eq!(negativity(&ab, Bipartition::A_B).unwrap().value(), 1.0 / 60.0, epsilon = 1e-12);
    }

    #[test]
    fn ppt_checks() {
        assert!(is_ppt_separable(&lambda_sep(), Bipartition::C_AB, 1e-9).unwrap());
        assert!(!is_ppt_separable(&lambda_ent(), Bipartition::A_BC, 1e-9).unwrap());
        for bip in [Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB] {
            assert!(is_ppt_separable(&maximally_mixed(), bip, 1e-9).unwrap());
        }
        assert!(is_ppt_separable(&lambda_sep(), Bipartition::C_AB, 0.0).is_err());
    }
}
