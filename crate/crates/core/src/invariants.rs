//! Invariants `(a, b)` of a matrix, the `Δ`-invariant, `v(A)`, and the
//! strong-regularity criterion.
//!
//! `a_i` are the signed characteristic coefficients, so that
//! `det(t − A) = t^n + Σ (−1)^i a_i t^(n−i)`, and `b_i = e₀*·A^i·e₀` with `e₀`
//! the last standard basis vector. Indices follow the usual convention:
//! `a` is indexed `1..=n` and `b` is indexed `0..n` in messages.

use crate::algebra::{berkowitz, det, mat_mul, transpose, Matrix, Ring};
use crate::error::{Error, Result};
use crate::local_field::{valuation_and_eta, EElem, ExtKind, ExtRing, FieldDesc, TruncSeries};

/// An `n × n` matrix over `E` acting on `V = W ⊕ O_F·e₀`, with `e₀` last.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixE {
    pub entries: Matrix<EElem>,
}

impl MatrixE {
    pub fn new(entries: Matrix<EElem>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension("matrix must be square and nonempty".into()));
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// `j · M` for a matrix over `F`; lands in `s_n`.
    pub fn imaginary(ring: &ExtRing, m: &Matrix<TruncSeries>) -> Self {
        let j = ring.j();
        Self {
            entries: m
                .iter()
                .map(|row| row.iter().map(|x| ring.mul_base(&j, x)).collect())
                .collect(),
        }
    }

    pub fn prec(&self) -> i64 {
        self.entries
            .iter()
            .flatten()
            .map(EElem::prec)
            .min()
            .unwrap_or(i64::MAX)
    }

    pub fn lift(&self, prec: i64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|x| x.lift(prec)).collect())
                .collect(),
        }
    }
}

/// Invariants with the parity constraints `a_i, b_i ∈ E^{σ = (−1)^i}`.
#[derive(Clone, Debug)]
pub struct InvariantPair {
    pub desc: FieldDesc,
    /// `a_1, .., a_n`.
    pub a: Vec<EElem>,
    /// `b_0, .., b_{n−1}`.
    pub b: Vec<EElem>,
}

impl InvariantPair {
    pub fn new(desc: FieldDesc, a: Vec<EElem>, b: Vec<EElem>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Dimension(format!(
                "need n ≥ 1 values of a and of b, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { desc, a, b })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn prec(&self) -> i64 {
        self.a.iter().chain(&self.b).map(EElem::prec).min().unwrap_or(0)
    }

    pub fn ring(&self) -> ExtRing {
        self.desc.ext_ring(self.prec())
    }

    /// Pad every entry with zeros to precision `prec`, treating the known
    /// coefficients as exact.
    pub fn lift(&self, prec: i64) -> Self {
        Self {
            desc: self.desc.clone(),
            a: self.a.iter().map(|x| x.lift(prec)).collect(),
            b: self.b.iter().map(|x| x.lift(prec)).collect(),
        }
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Self {
            desc: self.desc.clone(),
            a: self.a.iter().map(|x| x.truncate(prec)).collect(),
            b: self.b.iter().map(|x| x.truncate(prec)).collect(),
        }
    }

    /// Checks integrality and the parity constraints.
    pub fn validate(&self) -> Result<()> {
        let ring = self.ring();
        for (i, x) in self.a.iter().enumerate() {
            let idx = i + 1;
            check_entry(&ring, x, idx, &format!("a[{idx}]"))?;
        }
        for (i, x) in self.b.iter().enumerate() {
            check_entry(&ring, x, i, &format!("b[{i}]"))?;
        }
        Ok(())
    }

    /// Largest polynomial degree among the entries (as exact polynomials).
    pub fn max_degree(&self) -> i64 {
        self.a
            .iter()
            .chain(&self.b)
            .filter_map(EElem::degree)
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// A precision at which the discriminant and `Δ` of the exact polynomial
    /// entries are determined: both are polynomials in `ϖ` of degree at most
    /// this bound minus one.
    pub fn exact_precision_bound(&self) -> i64 {
        let n = self.n() as i64;
        let d = self.max_degree();
        ((2 * n - 1) * d).max(n * n * d) + 1
    }

    /// The same invariants with `a_i, b_i` multiplied by `j^i`, the coordinates
    /// of `R_a` in the basis `(jt)^i`. Entries land in `O_F`.
    pub fn real_coordinates(&self) -> Result<(Vec<TruncSeries>, Vec<TruncSeries>)> {
        let ring = self.ring();
        let mut jp = ring.one();
        let mut c = Vec::with_capacity(self.n());
        let mut beta = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let bi = ring.mul(&jp, &self.b[i]);
            jp = ring.mul(&jp, &ring.j());
            let ai = ring.mul(&jp, &self.a[i]);
            if !ai.im.is_zero() {
                return Err(Error::Parity {
                    field: format!("a[{}]", i + 1),
                    expected: parity(i + 1),
                });
            }
            if !bi.im.is_zero() {
                return Err(Error::Parity {
                    field: format!("b[{i}]"),
                    expected: parity(i),
                });
            }
            c.push(ai.re);
            beta.push(bi.re);
        }
        Ok((c, beta))
    }
}

fn parity(i: usize) -> i8 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

fn check_entry(ring: &ExtRing, x: &EElem, idx: usize, name: &str) -> Result<()> {
    if !x.is_integral() {
        return Err(Error::NotIntegral { field: name.into() });
    }
    let sign = parity(idx);
    if !ring.has_parity(x, sign) {
        return Err(Error::Parity {
            field: name.into(),
            expected: sign,
        });
    }
    Ok(())
}

/// `a_1, .., a_n` of `A`, division-free.
pub fn char_poly_coeffs(ring: &ExtRing, a: &MatrixE) -> Vec<EElem> {
    berkowitz(ring, &a.entries)
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| if i % 2 == 0 { c } else { ring.neg(&c) })
        .collect()
}

/// `b_i = e₀*·A^i·e₀` for `i = 0..n`.
pub fn moment_vector(ring: &ExtRing, a: &MatrixE) -> Vec<EElem> {
    let n = a.n();
    let mut v: Vec<EElem> = (0..n)
        .map(|i| if i == n - 1 { ring.one() } else { ring.zero() })
        .collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(v[n - 1].clone());
        v = crate::algebra::mat_vec(ring, &a.entries, &v);
    }
    out
}

pub fn invariants_of(desc: &FieldDesc, a: &MatrixE) -> InvariantPair {
    let ring = desc.ext_ring(a.prec());
    InvariantPair {
        desc: desc.clone(),
        a: char_poly_coeffs(&ring, a),
        b: moment_vector(&ring, a),
    }
}

/// Low coefficients of `P_a = t^n − a_1 t^(n−1) + .. + (−1)^n a_n`, so that
/// `P_a = t^n + Σ low[i] t^i`.
pub fn monic_low<R: Ring>(ring: &R, a: &[R::Elem]) -> Vec<R::Elem> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let ai = &a[n - i - 1];
            if (n - i) % 2 == 0 {
                ai.clone()
            } else {
                ring.neg(ai)
            }
        })
        .collect()
}

/// `b'(t^m)` for `m = 0..count`, extending `b` through `t^n = −Σ low[i] t^i`.
pub fn extended_moments<R: Ring>(ring: &R, a: &[R::Elem], b: &[R::Elem], count: usize) -> Vec<R::Elem> {
    let n = a.len();
    let low = monic_low(ring, a);
    let mut mu: Vec<R::Elem> = b.to_vec();
    while mu.len() < count {
        let m = mu.len();
        let next = (0..n).fold(ring.zero(), |acc, i| {
            ring.sub(&acc, &ring.mul(&low[i], &mu[m - n + i]))
        });
        mu.push(next);
    }
    mu.truncate(count);
    mu
}

/// `Δ_{a,b}`: determinant of `(b'(t^{i+j}))_{0 ≤ i,j < n}`.
pub fn delta_invariant(pair: &InvariantPair) -> EElem {
    let ring = pair.ring();
    delta_of(&ring, &pair.a, &pair.b)
}

pub fn delta_of<R: Ring>(ring: &R, a: &[R::Elem], b: &[R::Elem]) -> R::Elem {
    let n = a.len();
    let mu = extended_moments(ring, a, b, 2 * n - 1);
    let hankel: Matrix<R::Elem> = (0..n)
        .map(|i| (0..n).map(|j| mu[i + j].clone()).collect())
        .collect();
    det(ring, &hankel)
}

/// Resultant of `P_a` and `P_a'` (the discriminant up to sign), as a
/// Sylvester determinant. Zero exactly when `P_a` has a repeated root.
pub fn discriminant<R: Ring>(ring: &R, a: &[R::Elem]) -> R::Elem {
    let n = a.len();
    if n == 1 {
        return ring.one();
    }
    // Coefficients highest first.
    let mut p = vec![ring.one()];
    p.extend(monic_low(ring, a).into_iter().rev());
    let dp: Vec<R::Elem> = (0..n)
        .map(|i| {
            let deg = (n - i) as i64;
            let mut acc = ring.zero();
            for _ in 0..deg {
                acc = ring.add(&acc, &p[i]);
            }
            acc
        })
        .collect();
    let size = 2 * n - 1;
    let mut syl: Matrix<R::Elem> = vec![vec![ring.zero(); size]; size];
    for r in 0..n - 1 {
        for (i, c) in p.iter().enumerate() {
            syl[r][r + i] = c.clone();
        }
    }
    for r in 0..n {
        for (i, c) in dp.iter().enumerate() {
            syl[n - 1 + r][r + i] = c.clone();
        }
    }
    det(ring, &syl)
}

/// Result of [`v_invariant`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VInvariant {
    pub val: i64,
    /// False when the determinant lies in `E \ F`; the valuation is then
    /// taken in `E`.
    pub real: bool,
}

/// `v(A)`: valuation of the determinant whose rows are `e₀*·A^i` in the
/// standard dual basis.
pub fn v_invariant(ring: &ExtRing, a: &MatrixE) -> Result<VInvariant> {
    let rows = dual_cyclic_rows(ring, a);
    let d = det(ring, &rows);
    match d.val() {
        None => Err(Error::NotStronglyRegular),
        Some(val) => Ok(VInvariant {
            val,
            real: d.im.is_zero(),
        }),
    }
}

/// Rows `e₀*, e₀*A, .., e₀*A^(n−1)`.
pub fn dual_cyclic_rows(ring: &ExtRing, a: &MatrixE) -> Matrix<EElem> {
    let n = a.n();
    let mut row: Vec<EElem> = (0..n)
        .map(|i| if i == n - 1 { ring.one() } else { ring.zero() })
        .collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(row.clone());
        row = (0..n)
            .map(|j| {
                (0..n).fold(ring.zero(), |acc, l| {
                    ring.add(&acc, &ring.mul(&row[l], &a.entries[l][j]))
                })
            })
            .collect();
    }
    out
}

/// Columns `e₀, Ae₀, .., A^(n−1)e₀`.
pub fn cyclic_columns(ring: &ExtRing, a: &MatrixE) -> Matrix<EElem> {
    let n = a.n();
    let mut col: Vec<EElem> = (0..n)
        .map(|i| if i == n - 1 { ring.one() } else { ring.zero() })
        .collect();
    let mut cols = Vec::with_capacity(n);
    for _ in 0..n {
        cols.push(col.clone());
        col = crate::algebra::mat_vec(ring, &a.entries, &col);
    }
    transpose(&cols)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegularityReport {
    pub val_disc: Option<i64>,
    pub val_delta: Option<i64>,
    pub strongly_regular: bool,
    pub eta_delta: Option<i8>,
}

/// Strong regularity at the pair's own precision. A discriminant or `Δ`
/// vanishing to precision is reported as [`Error::Indeterminate`].
pub fn strong_regularity(pair: &InvariantPair) -> Result<RegularityReport> {
    let ring = pair.ring();
    let disc = discriminant(&ring, &pair.a);
    let delta = delta_invariant(pair);
    let prec = pair.prec();
    if disc.is_zero() || delta.is_zero() {
        let required = pair.exact_precision_bound().max(prec + 1);
        return Err(Error::Indeterminate {
            precision: prec,
            required,
        });
    }
    let (_, eta) = valuation_and_eta(&delta.re, pair.desc.kind());
    Ok(RegularityReport {
        val_disc: disc.val(),
        val_delta: delta.val(),
        strongly_regular: true,
        eta_delta: eta.ok(),
    })
}

/// Strong regularity treating the entries as exact polynomials: the
/// precision is raised far enough that a vanishing discriminant or `Δ` is
/// genuinely zero.
pub fn strong_regularity_exact(pair: &InvariantPair) -> Result<RegularityReport> {
    let lifted = pair.lift(pair.exact_precision_bound().max(pair.prec()));
    match strong_regularity(&lifted) {
        Err(Error::Indeterminate { .. }) => {
            let ring = lifted.ring();
            let disc = discriminant(&ring, &lifted.a);
            let delta = delta_invariant(&lifted);
            Ok(RegularityReport {
                val_disc: disc.val(),
                val_delta: delta.val(),
                strongly_regular: false,
                eta_delta: None,
            })
        }
        other => other,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// `A + σ(A) = 0`.
    LieS,
    /// `A + A^# = 0` for the identity Hermitian form.
    LieU,
    /// `A·σ(A) = 1`.
    GroupS,
    /// `A·A^# = 1`.
    GroupU,
}

/// Membership of an integral matrix in `s_n`, `u_n`, `S_n` or `U_n` over `O_F`.
pub fn membership_check(ring: &ExtRing, a: &MatrixE, which: Membership) -> bool {
    if !a.entries.iter().flatten().all(EElem::is_integral) {
        return false;
    }
    let n = a.n();
    let sigma: Matrix<EElem> = a
        .entries
        .iter()
        .map(|row| row.iter().map(|x| ring.sigma(x)).collect())
        .collect();
    let all_zero = |m: &Matrix<EElem>| m.iter().flatten().all(EElem::is_zero);
    let minus_identity = |m: &Matrix<EElem>| -> Matrix<EElem> {
        m.iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, x)| if i == j { ring.sub(x, &ring.one()) } else { x.clone() })
                    .collect()
            })
            .collect()
    };
    match which {
        Membership::LieS => all_zero(&crate::algebra::mat_add(ring, &a.entries, &sigma)),
        Membership::LieU => {
            all_zero(&crate::algebra::mat_add(ring, &a.entries, &transpose(&sigma)))
        }
        Membership::GroupS => {
            n > 0 && all_zero(&minus_identity(&mat_mul(ring, &a.entries, &sigma)))
        }
        Membership::GroupU => {
            all_zero(&minus_identity(&mat_mul(ring, &a.entries, &transpose(&sigma))))
        }
    }
}

/// Same invariants at the shared precision.
pub fn matching_check(x: &InvariantPair, y: &InvariantPair) -> bool {
    if x.n() != y.n() || !x.desc.same_field(&y.desc) {
        return false;
    }
    let prec = x.prec().min(y.prec());
    let ring = x.desc.ext_ring(prec);
    x.a.iter()
        .chain(&x.b)
        .zip(y.a.iter().chain(&y.b))
        .all(|(u, v)| ring.sub(&u.truncate(prec), &v.truncate(prec)).is_zero())
}

/// Invariants of the `gl_n` / `h_n` variant: everything in `O_F`.
#[derive(Clone, Debug)]
pub struct RealInvariants {
    pub desc: FieldDesc,
    pub a: Vec<TruncSeries>,
    pub b: Vec<TruncSeries>,
}

impl RealInvariants {
    pub fn delta(&self) -> TruncSeries {
        let prec = self.a.iter().chain(&self.b).map(TruncSeries::prec).min().unwrap_or(0);
        let ring = self.desc.series_ring(prec);
        delta_of(&ring, &self.a, &self.b)
    }
}

/// `ã_i = j^i a_i`, `b̃_i = j^i b_i`: moves real invariants to the `s_n` / `u_n`
/// parity convention.
pub fn variant_transport(real: &RealInvariants) -> Result<InvariantPair> {
    let prec = real.a.iter().chain(&real.b).map(TruncSeries::prec).min().unwrap_or(0);
    let ring = real.desc.ext_ring(prec);
    let mut jp = ring.one();
    let mut a = Vec::with_capacity(real.a.len());
    let mut b = Vec::with_capacity(real.b.len());
    for i in 0..real.a.len() {
        b.push(ring.mul_base(&jp, &real.b[i]));
        jp = ring.mul(&jp, &ring.j());
        a.push(ring.mul_base(&jp, &real.a[i]));
    }
    InvariantPair::new(real.desc.clone(), a, b)
}

/// `η(Δ)` from a valuation.
pub fn eta_of_valuation(kind: ExtKind, val: i64) -> i8 {
    match kind {
        ExtKind::Split => 1,
        ExtKind::Inert if val % 2 == 0 => 1,
        ExtKind::Inert => -1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::tests::det_cofactor;
    use crate::local_field::{ExtKind, Fq};

    fn desc(kind: ExtKind) -> FieldDesc {
        FieldDesc::new(3, 1, kind).unwrap()
    }

    fn real(ring: &ExtRing, c: &[Fq]) -> EElem {
        ring.from_base(&ring.base().from_coeffs(c))
    }

    fn imag(ring: &ExtRing, c: &[Fq]) -> EElem {
        ring.mul_base(&ring.j(), &ring.base().from_coeffs(c))
    }

    /// The worked example `n = 2, a = (0, −ϖ²), b = (1, 0)`.
    fn worked_pair(kind: ExtKind, prec: i64) -> InvariantPair {
        let d = desc(kind);
        let ring = d.ext_ring(prec);
        let a = vec![ring.zero(), real(&ring, &[0, 0, 2])];
        let b = vec![ring.one(), ring.zero()];
        InvariantPair::new(d, a, b).unwrap()
    }

    #[test]
    fn diagonal_matrix_gives_elementary_symmetric() {
        let d = FieldDesc::new(7, 1, ExtKind::Inert).unwrap();
        let ring = d.ext_ring(6);
        let z = ring.zero();
        let m = MatrixE::new(vec![
            vec![real(&ring, &[2]), z.clone(), z.clone()],
            vec![z.clone(), real(&ring, &[3]), z.clone()],
            vec![z.clone(), z.clone(), real(&ring, &[5])],
        ])
        .unwrap();
        let a = char_poly_coeffs(&ring, &m);
        // e1 = 10, e2 = 31, e3 = 30 in F_7.
        assert_eq!(a, vec![real(&ring, &[3]), real(&ring, &[3]), real(&ring, &[2])]);
    }

    #[test]
    fn zero_matrix_invariants() {
        let d = desc(ExtKind::Inert);
        let ring = d.ext_ring(5);
        let m = MatrixE::new(vec![vec![ring.zero(); 3]; 3]).unwrap();
        assert!(char_poly_coeffs(&ring, &m).iter().all(EElem::is_zero));
        let b = moment_vector(&ring, &m);
        assert_eq!(b[0], ring.one());
        assert!(b[1..].iter().all(EElem::is_zero));
    }

    #[test]
    fn char_poly_matches_cofactor_oracle() {
        // det(tI − A) evaluated at t = c for several residues c, against the
        // cofactor expansion of the evaluated matrix.
        let d = FieldDesc::new(3, 1, ExtKind::Inert).unwrap();
        let ring = d.ext_ring(6);
        let m = MatrixE::new(vec![
            vec![imag(&ring, &[1, 2]), imag(&ring, &[0, 1]), imag(&ring, &[2])],
            vec![imag(&ring, &[0, 0, 1]), imag(&ring, &[1]), imag(&ring, &[1, 1])],
            vec![imag(&ring, &[2, 1]), imag(&ring, &[]), imag(&ring, &[0, 2, 1])],
        ])
        .unwrap();
        let a = char_poly_coeffs(&ring, &m);
        for c in 0..3u32 {
            let t = real(&ring, &[c, 1]);
            let shifted: Matrix<EElem> = m
                .entries
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(jj, x)| {
                            let diag = if i == jj { t.clone() } else { ring.zero() };
                            ring.sub(&diag, x)
                        })
                        .collect()
                })
                .collect();
            let oracle = det_cofactor(&ring, &shifted);
            let mut via_coeffs = ring.pow(&t, 3);
            for (i, ai) in a.iter().enumerate() {
                let term = ring.mul(ai, &ring.pow(&t, (2 - i) as u32));
                via_coeffs = if i % 2 == 0 {
                    ring.sub(&via_coeffs, &term)
                } else {
                    ring.add(&via_coeffs, &term)
                };
            }
            assert_eq!(via_coeffs, oracle);
        }
        // Parity of s_n invariants.
        let pair = invariants_of(&d, &m);
        pair.validate().unwrap();
    }

    #[test]
    fn worked_example_regularity() {
        let pair = worked_pair(ExtKind::Inert, 8);
        let report = strong_regularity(&pair).unwrap();
        assert_eq!(report.val_disc, Some(2));
        assert_eq!(report.val_delta, Some(2));
        assert!(report.strongly_regular);
        assert_eq!(report.eta_delta, Some(1));
        // Δ = det [[1, 0], [0, ϖ²]] by reducing t² = ϖ² by hand.
        assert_eq!(delta_invariant(&pair).re, TruncSeries::from_coeffs(&[0, 0, 1], 8));
    }

    #[test]
    fn n1_delta_is_b0() {
        let d = desc(ExtKind::Split);
        let ring = d.ext_ring(6);
        let pair = InvariantPair::new(d, vec![imag(&ring, &[1])], vec![real(&ring, &[0, 2, 1])]).unwrap();
        assert_eq!(delta_invariant(&pair), real(&ring, &[0, 2, 1]));
    }

    #[test]
    fn repeated_root_is_not_regular() {
        let d = desc(ExtKind::Inert);
        let ring = d.ext_ring(8);
        let pair = InvariantPair::new(d, vec![ring.zero(), ring.zero()], vec![ring.one(), ring.zero()]).unwrap();
        let report = strong_regularity_exact(&pair).unwrap();
        assert!(!report.strongly_regular);
        assert!(matches!(strong_regularity(&pair), Err(Error::Indeterminate { .. })));
    }

    #[test]
    fn low_precision_is_indeterminate() {
        let d = desc(ExtKind::Inert);
        let ring = d.ext_ring(2);
        // n = 1 with b_0 = ϖ³ known only modulo ϖ².
        let b0 = ring.from_base(&TruncSeries::from_coeffs(&[0, 0, 0, 1], 2));
        let pair = InvariantPair::new(d, vec![imag(&ring, &[1])], vec![b0]).unwrap();
        assert!(matches!(
            strong_regularity(&pair),
            Err(Error::Indeterminate { precision: 2, .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let d = desc(ExtKind::Inert);
        let ring = d.ext_ring(6);
        let (o, z) = (ring.one(), ring.zero());
        let id = MatrixE::new(vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()]]).unwrap();
        assert!(membership_check(&ring, &id, Membership::GroupU));
        assert!(membership_check(&ring, &id, Membership::GroupS));
        assert!(!membership_check(&ring, &id, Membership::LieS));
        let base = ring.base();
        let m = vec![
            vec![base.from_coeffs(&[1, 2]), base.from_coeffs(&[0, 1])],
            vec![base.from_coeffs(&[2]), base.from_coeffs(&[1, 1, 1])],
        ];
        assert!(membership_check(&ring, &MatrixE::imaginary(&ring, &m), Membership::LieS));
        let swap = vec![
            vec![base.zero(), base.one()],
            vec![base.one(), base.zero()],
        ];
        let a = MatrixE::imaginary(&ring, &swap);
        // A + σ(A)ᵀ vanishes entry by entry.
        assert!(membership_check(&ring, &a, Membership::LieU));
    }

    #[test]
    fn matching_detects_perturbation() {
        let pair = worked_pair(ExtKind::Inert, 6);
        assert!(matching_check(&pair, &pair.clone()));
        let mut other = pair.clone();
        let ring = pair.ring();
        other.b[1] = ring.add(&other.b[1], &imag(&ring, &[0, 0, 0, 0, 0, 1]));
        assert!(!matching_check(&pair, &other));
    }

    #[test]
    fn conjugation_invariance() {
        let d = FieldDesc::new(5, 1, ExtKind::Split).unwrap();
        let ring = d.ext_ring(8);
        let base = ring.base().clone();
        let m = vec![
            vec![base.from_coeffs(&[1, 2]), base.from_coeffs(&[0, 1]), base.from_coeffs(&[3])],
            vec![base.from_coeffs(&[2]), base.from_coeffs(&[1, 1, 1]), base.from_coeffs(&[0, 4])],
            vec![base.from_coeffs(&[0, 0, 1]), base.from_coeffs(&[4]), base.from_coeffs(&[2, 3])],
        ];
        let a = MatrixE::imaginary(&ring, &m);
        // g ∈ GL_2(O_F) in the W block, inverse via adjugate (unit determinant 1).
        let g = vec![
            vec![base.from_coeffs(&[1, 1]), base.from_coeffs(&[2]), base.zero()],
            vec![base.from_coeffs(&[0, 3]), base.from_coeffs(&[1, 0, 2]), base.zero()],
            vec![base.zero(), base.zero(), base.one()],
        ];
        let gdet = det(&base, &g);
        let ginv = crate::algebra::mat_scale(&base, &base.inv(&gdet).unwrap(), &crate::algebra::adjugate(&base, &g));
        let lift = |m: &Matrix<TruncSeries>| -> Matrix<EElem> {
            m.iter().map(|r| r.iter().map(|x| ring.from_base(x)).collect()).collect()
        };
        let conj = mat_mul(&ring, &mat_mul(&ring, &lift(&ginv), &a.entries), &lift(&g));
        let b = MatrixE::new(conj).unwrap();
        let (pa, pb) = (invariants_of(&d, &a), invariants_of(&d, &b));
        assert!(matching_check(&pa, &pb));
        let (va, vb) = (v_invariant(&ring, &a).unwrap(), v_invariant(&ring, &b).unwrap());
        assert_eq!(va.val, vb.val);
    }

    #[test]
    fn transport_preserves_delta_valuation() {
        for kind in [ExtKind::Inert, ExtKind::Split] {
            let d = FieldDesc::new(5, 1, kind).unwrap();
            let base = d.series_ring(10);
            let realinv = RealInvariants {
                desc: d.clone(),
                a: vec![base.from_coeffs(&[0, 1]), base.from_coeffs(&[0, 0, 3])],
                b: vec![base.from_coeffs(&[1]), base.from_coeffs(&[0, 2])],
            };
            let t = variant_transport(&realinv).unwrap();
            t.validate().unwrap();
            assert_eq!(realinv.delta().val(), delta_invariant(&t).val());
        }
    }

    #[test]
    fn delta_factorization_through_cyclic_bases() {
        let d = FieldDesc::new(5, 1, ExtKind::Inert).unwrap();
        let ring = d.ext_ring(12);
        let base = ring.base().clone();
        let m = vec![
            vec![base.from_coeffs(&[0, 2]), base.from_coeffs(&[1, 1])],
            vec![base.from_coeffs(&[0, 0, 1]), base.from_coeffs(&[3])],
        ];
        let a = MatrixE::imaginary(&ring, &m);
        let pair = invariants_of(&d, &a);
        let delta = delta_invariant(&pair);
        let v = v_invariant(&ring, &a).unwrap();
        let cols = det(&ring, &cyclic_columns(&ring, &a));
        assert_eq!(delta.val().unwrap(), v.val + cols.val().unwrap());
        assert_eq!(v.val, 2);
        // Hankel of moments equals the product of the two cyclic matrices.
        let prod = det(&ring, &mat_mul(&ring, &dual_cyclic_rows(&ring, &a), &cyclic_columns(&ring, &a)));
        assert_eq!(prod, delta);
    }
}
