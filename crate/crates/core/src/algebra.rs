//! Division-free linear algebra over the series rings.

use std::fmt::Debug;

use crate::local_field::{EElem, ExtRing, SeriesRing, TruncSeries};

/// The ring operations the generic kernels need.
pub trait Ring {
    type Elem: Clone + Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
}

impl Ring for SeriesRing {
    type Elem = TruncSeries;

    fn zero(&self) -> TruncSeries {
        SeriesRing::zero(self)
    }
    fn one(&self) -> TruncSeries {
        SeriesRing::one(self)
    }
    fn add(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        SeriesRing::add(self, a, b)
    }
    fn sub(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        SeriesRing::sub(self, a, b)
    }
    fn neg(&self, a: &TruncSeries) -> TruncSeries {
        SeriesRing::neg(self, a)
    }
    fn mul(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        SeriesRing::mul(self, a, b)
    }
    fn is_zero(&self, a: &TruncSeries) -> bool {
        a.is_zero()
    }
}

impl Ring for ExtRing {
    type Elem = EElem;

    fn zero(&self) -> EElem {
        ExtRing::zero(self)
    }
    fn one(&self) -> EElem {
        ExtRing::one(self)
    }
    fn add(&self, a: &EElem, b: &EElem) -> EElem {
        ExtRing::add(self, a, b)
    }
    fn sub(&self, a: &EElem, b: &EElem) -> EElem {
        ExtRing::sub(self, a, b)
    }
    fn neg(&self, a: &EElem) -> EElem {
        ExtRing::neg(self, a)
    }
    fn mul(&self, a: &EElem, b: &EElem) -> EElem {
        ExtRing::mul(self, a, b)
    }
    fn is_zero(&self, a: &EElem) -> bool {
        a.is_zero()
    }
}

/// Row-major dense matrix.
pub type Matrix<T> = Vec<Vec<T>>;

pub fn identity<R: Ring>(ring: &R, n: usize) -> Matrix<R::Elem> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ring.one() } else { ring.zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &Matrix<T>) -> Matrix<T> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j].clone()).collect())
        .collect()
}

pub fn mat_mul<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(ring.zero(), |acc, l| {
                        ring.add(&acc, &ring.mul(&row[l], &b[l][j]))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<R: Ring>(ring: &R, a: &Matrix<R::Elem>, x: &[R::Elem]) -> Vec<R::Elem> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(ring.zero(), |acc, (r, v)| ring.add(&acc, &ring.mul(r, v)))
        })
        .collect()
}

pub fn mat_add<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| ring.add(u, v)).collect())
        .collect()
}

pub fn mat_scale<R: Ring>(ring: &R, c: &R::Elem, a: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    a.iter()
        .map(|row| row.iter().map(|x| ring.mul(c, x)).collect())
        .collect()
}

/// Coefficients `[1, c_1, .., c_n]` of `det(λ·I − A) = Σ c_i λ^(n−i)`,
/// by Berkowitz's algorithm. Uses only ring operations, so it is valid in
/// every characteristic.
pub fn berkowitz<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> Vec<R::Elem> {
    let n = a.len();
    if n == 0 {
        return vec![ring.one()];
    }
    let mut poly = vec![ring.one(), ring.neg(&a[0][0])];
    for r in 1..n {
        // Leading principal (r+1)×(r+1) block split as [[M, C], [R, a_rr]].
        let row: Vec<_> = a[r][..r].to_vec();
        let mut col: Vec<_> = (0..r).map(|i| a[i][r].clone()).collect();
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(ring.one());
        toeplitz.push(ring.neg(&a[r][r]));
        for _ in 0..r {
            let dot = row
                .iter()
                .zip(&col)
                .fold(ring.zero(), |acc, (x, y)| ring.add(&acc, &ring.mul(x, y)));
            toeplitz.push(ring.neg(&dot));
            col = (0..r)
                .map(|i| {
                    (0..r).fold(ring.zero(), |acc, l| {
                        ring.add(&acc, &ring.mul(&a[i][l], &col[l]))
                    })
                })
                .collect();
        }
        let next: Vec<_> = (0..r + 2)
            .map(|i| {
                (0..=i.min(r)).fold(ring.zero(), |acc, j| {
                    ring.add(&acc, &ring.mul(&toeplitz[i - j], &poly[j]))
                })
            })
            .collect();
        poly = next;
    }
    poly
}

pub fn det<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> R::Elem {
    let n = a.len();
    let c = berkowitz(ring, a);
    if n % 2 == 0 {
        c[n].clone()
    } else {
        ring.neg(&c[n])
    }
}

/// Adjugate via Cayley–Hamilton: `adj(A) = (−1)^(n−1) Σ_{i<n} c_i A^(n−1−i)`.
pub fn adjugate<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    let n = a.len();
    let c = berkowitz(ring, a);
    let mut acc = identity(ring, n);
    for ci in c.iter().take(n).skip(1) {
        acc = mat_add(ring, &mat_mul(ring, &acc, a), &mat_scale(ring, ci, &identity(ring, n)));
    }
    if n % 2 == 0 {
        acc.iter().map(|row| row.iter().map(|x| ring.neg(x)).collect()).collect()
    } else {
        acc
    }
}

/// `poly mod (t^n + Σ low[i] t^i)`, coefficients lowest first.
pub fn reduce_mod_monic<R: Ring>(ring: &R, poly: &[R::Elem], low: &[R::Elem]) -> Vec<R::Elem> {
    let n = low.len();
    let mut work = poly.to_vec();
    while work.len() > n {
        let top = work.pop().expect("nonempty");
        let base = work.len() - n;
        for (i, c) in low.iter().enumerate() {
            work[base + i] = ring.sub(&work[base + i], &ring.mul(&top, c));
        }
    }
    work.resize(n, ring.zero());
    work
}

pub fn mul_mod_monic<R: Ring>(
    ring: &R,
    a: &[R::Elem],
    b: &[R::Elem],
    low: &[R::Elem],
) -> Vec<R::Elem> {
    if a.is_empty() || b.is_empty() {
        return vec![ring.zero(); low.len()];
    }
    let mut prod = vec![ring.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            prod[i + j] = ring.add(&prod[i + j], &ring.mul(x, y));
        }
    }
    reduce_mod_monic(ring, &prod, low)
}

#[cfg(test)]
pub(crate) mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::local_field::{ExtKind, FieldDesc, ResidueField};

    /// Laplace expansion along the first row; the independent determinant oracle.
    pub(crate) fn det_cofactor<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> R::Elem {
        let n = a.len();
        if n == 0 {
            return ring.one();
        }
        let mut acc = ring.zero();
        for j in 0..n {
            let minor: Matrix<R::Elem> = a[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let term = ring.mul(&a[0][j], &det_cofactor(ring, &minor));
            acc = if j % 2 == 0 {
                ring.add(&acc, &term)
            } else {
                ring.sub(&acc, &term)
            };
        }
        acc
    }

    fn series_matrix(ring: &SeriesRing, entries: &[Vec<Vec<u32>>]) -> Matrix<TruncSeries> {
        entries
            .iter()
            .map(|row| row.iter().map(|c| ring.from_coeffs(c)).collect())
            .collect()
    }

    #[test]
    fn diagonal_char_poly_is_elementary_symmetric() {
        let ring = SeriesRing::new(Arc::new(ResidueField::new(7, 1).unwrap()), 6);
        let a = series_matrix(
            &ring,
            &[
                vec![vec![2], vec![], vec![]],
                vec![vec![], vec![3], vec![]],
                vec![vec![], vec![], vec![5]],
            ],
        );
        let c = berkowitz(&ring, &a);
        // λ³ − 10λ² + 31λ − 30 over F_7.
        let expect = [1, 7 - 3, 3, 7 - 2];
        for (x, e) in c.iter().zip(expect) {
            assert_eq!(*x, ring.constant(e));
        }
    }

    #[test]
    fn adjugate_times_matrix_is_determinant() {
        let desc = FieldDesc::new(5, 1, ExtKind::Inert).unwrap();
        let ring = desc.ext_ring(8);
        let base = ring.base().clone();
        let e = |re: &[u32], im: &[u32]| EElem::new(base.from_coeffs(re), base.from_coeffs(im));
        let a = vec![
            vec![e(&[1, 2], &[0, 1]), e(&[0, 3], &[2]), e(&[4], &[])],
            vec![e(&[], &[1]), e(&[2, 2, 1], &[0, 0, 1]), e(&[1], &[1])],
            vec![e(&[3], &[4, 1]), e(&[0, 1], &[]), e(&[2], &[3])],
        ];
        let adj = adjugate(&ring, &a);
        let d = det(&ring, &a);
        let prod = mat_mul(&ring, &adj, &a);
        for (i, row) in prod.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let expect = if i == j { d.clone() } else { ring.zero() };
                assert_eq!(*x, expect);
            }
        }
        assert_eq!(d, det_cofactor(&ring, &a));
    }

    #[test]
    fn reduction_mod_monic() {
        let ring = SeriesRing::new(Arc::new(ResidueField::new(5, 1).unwrap()), 4);
        // t² mod (t² − ϖ²) = ϖ².
        let low = vec![ring.neg(&ring.from_coeffs(&[0, 0, 1])), ring.zero()];
        let t2 = vec![ring.zero(), ring.zero(), ring.one()];
        let r = reduce_mod_monic(&ring, &t2, &low);
        assert_eq!(r, vec![ring.from_coeffs(&[0, 0, 1]), ring.zero()]);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<Vec<u32>>>> {
        prop::collection::vec(
            prop::collection::vec(prop::collection::vec(0u32..3, 0..4), n),
            n,
        )
    }

    proptest! {
        #[test]
        fn berkowitz_det_matches_cofactor_expansion(entries in (1usize..5).prop_flat_map(arb_matrix)) {
            let ring = SeriesRing::new(Arc::new(ResidueField::new(3, 1).unwrap()), 6);
            let a = series_matrix(&ring, &entries);
            prop_assert_eq!(det(&ring, &a), det_cofactor(&ring, &a));
        }
    }
}
