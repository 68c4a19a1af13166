//! Linear algebra over the residue field `k`: matrices, canonical subspaces
//! in reduced row echelon form, closures under operators.

use crate::local_field::{Fq, ResidueField};

/// A dense matrix over `k`, row-major. Acts on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KMat {
    rows: usize,
    cols: usize,
    data: Vec<Fq>,
}

impl KMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fq>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fq) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, k: &ResidueField, v: &[Fq]) -> Vec<Fq> {
        (0..self.rows)
            .map(|i| dot(k, self.row(i), v))
            .collect()
    }

    pub fn mul(&self, k: &ResidueField, other: &KMat) -> KMat {
        assert_eq!(self.cols, other.rows);
        let mut out = KMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = k.add(out.get(i, j), k.mul(a, other.get(l, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, k: &ResidueField, other: &KMat) -> KMat {
        let mut out = self.clone();
        for (x, &y) in out.data.iter_mut().zip(&other.data) {
            *x = k.add(*x, y);
        }
        out
    }

    pub fn scale(&self, k: &ResidueField, c: Fq) -> KMat {
        let mut out = self.clone();
        for x in &mut out.data {
            *x = k.mul(c, *x);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// `[[a, b], [c, d]]` from four square blocks.
    pub fn blocks(a: &KMat, b: &KMat, c: &KMat, d: &KMat) -> KMat {
        let n = a.rows;
        let mut out = KMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, a.get(i, j));
                out.set(i, n + j, b.get(i, j));
                out.set(n + i, j, c.get(i, j));
                out.set(n + i, n + j, d.get(i, j));
            }
        }
        out
    }

    /// `x^T M y`.
    pub fn bilinear(&self, k: &ResidueField, x: &[Fq], y: &[Fq]) -> Fq {
        dot(k, x, &self.mul_vec(k, y))
    }

    pub fn rank(&self, k: &ResidueField) -> usize {
        let rows: Vec<Vec<Fq>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        rref(k, rows).len()
    }
}

pub fn dot(k: &ResidueField, a: &[Fq], b: &[Fq]) -> Fq {
    a.iter()
        .zip(b)
        .fold(0, |acc, (&x, &y)| if x == 0 || y == 0 { acc } else { k.add(acc, k.mul(x, y)) })
}

fn axpy(k: &ResidueField, c: Fq, x: &[Fq], y: &mut [Fq]) {
    if c == 0 {
        return;
    }
    for (yi, &xi) in y.iter_mut().zip(x) {
        if xi != 0 {
            *yi = k.add(*yi, k.mul(c, xi));
        }
    }
}

/// Reduced row echelon form of the span of `rows`, zero rows dropped.
pub fn rref(k: &ResidueField, mut rows: Vec<Vec<Fq>>) -> Vec<Vec<Fq>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = k.inv(rows[rank][col]).expect("nonzero pivot");
        for x in rows[rank].iter_mut() {
            *x = k.mul(inv, *x);
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let c = k.neg(row[col]);
                axpy(k, c, &pivot, row);
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// A subspace of `k^ambient`, stored by its canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Fq>>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: (0..ambient)
                .map(|i| (0..ambient).map(|j| Fq::from(i == j)).collect())
                .collect(),
        }
    }

    pub fn span(k: &ResidueField, ambient: usize, vectors: Vec<Vec<Fq>>) -> Self {
        debug_assert!(vectors.iter().all(|v| v.len() == ambient));
        Self {
            ambient,
            basis: rref(k, vectors),
        }
    }

    /// Wraps a basis already in canonical RREF.
    pub fn from_rref(ambient: usize, basis: Vec<Vec<Fq>>) -> Self {
        Self { ambient, basis }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Fq>] {
        &self.basis
    }

    fn pivot(row: &[Fq]) -> usize {
        row.iter().position(|&x| x != 0).expect("nonzero basis row")
    }

    /// `v` minus its projection along the pivots; zero iff `v` lies in the span.
    pub fn reduce(&self, k: &ResidueField, v: &[Fq]) -> Vec<Fq> {
        let mut v = v.to_vec();
        for row in &self.basis {
            let c = v[Self::pivot(row)];
            if c != 0 {
                axpy(k, k.neg(c), row, &mut v);
            }
        }
        v
    }

    pub fn contains(&self, k: &ResidueField, v: &[Fq]) -> bool {
        self.reduce(k, v).iter().all(|&x| x == 0)
    }

    pub fn contains_space(&self, k: &ResidueField, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(k, v))
    }

    /// Insert `v`; returns false if it was already in the span.
    pub fn insert(&mut self, k: &ResidueField, v: &[Fq]) -> bool {
        let r = self.reduce(k, v);
        if r.iter().all(|&x| x == 0) {
            return false;
        }
        let mut rows = std::mem::take(&mut self.basis);
        rows.push(r);
        self.basis = rref(k, rows);
        true
    }

    pub fn sum(&self, k: &ResidueField, other: &Subspace) -> Subspace {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(k, self.ambient, rows)
    }

    /// `{x : rows · x = 0}`.
    pub fn nullspace(k: &ResidueField, ambient: usize, rows: Vec<Vec<Fq>>) -> Subspace {
        let r = rref(k, rows);
        let pivots: Vec<usize> = r.iter().map(|row| Self::pivot(row)).collect();
        let mut basis = Vec::new();
        for free in (0..ambient).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0; ambient];
            v[free] = 1;
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = k.neg(row[free]);
            }
            basis.push(v);
        }
        Subspace::span(k, ambient, basis)
    }

    /// Annihilator under the standard dot product.
    pub fn annihilator(&self, k: &ResidueField) -> Subspace {
        Subspace::nullspace(k, self.ambient, self.basis.clone())
    }

    /// `{x : form(x, s) = 0 for all s ∈ self}`.
    pub fn orthogonal(&self, k: &ResidueField, form: &KMat) -> Subspace {
        let rows = self.basis.iter().map(|s| form.mul_vec(k, s)).collect();
        Subspace::nullspace(k, self.ambient, rows)
    }

    pub fn intersect(&self, k: &ResidueField, other: &Subspace) -> Subspace {
        let mut rows = self.annihilator(k).basis;
        rows.extend(other.annihilator(k).basis);
        Subspace::nullspace(k, self.ambient, rows)
    }

    /// `{x : op·x ∈ self}`.
    pub fn preimage(&self, k: &ResidueField, op: &KMat) -> Subspace {
        let opt = op.transpose();
        let rows = self
            .annihilator(k)
            .basis
            .iter()
            .map(|a| opt.mul_vec(k, a))
            .collect();
        Subspace::nullspace(k, self.ambient, rows)
    }

    pub fn is_stable(&self, k: &ResidueField, op: &KMat) -> bool {
        self.basis.iter().all(|v| self.contains(k, &op.mul_vec(k, v)))
    }

    pub fn is_isotropic(&self, k: &ResidueField, form: &KMat) -> bool {
        self.basis
            .iter()
            .all(|x| self.basis.iter().all(|y| form.bilinear(k, x, y) == 0))
    }

    /// Smallest subspace containing `self` and `extra` stable under every op.
    /// `self` must already be stable.
    pub fn closure(&self, k: &ResidueField, extra: &[Vec<Fq>], ops: &[&KMat]) -> Subspace {
        let mut out = self.clone();
        let mut queue: Vec<Vec<Fq>> = extra.to_vec();
        while let Some(v) = queue.pop() {
            if out.insert(k, &v) {
                for op in ops {
                    queue.push(op.mul_vec(k, &v));
                }
            }
        }
        out
    }

    /// A basis of a complement of `self` inside `larger` (which contains it).
    pub fn complement_in(&self, k: &ResidueField, larger: &Subspace) -> Vec<Vec<Fq>> {
        let residues = larger.basis.iter().map(|v| self.reduce(k, v)).collect();
        rref(k, residues)
    }
}

/// Every nonzero vector of `span(basis)` up to scalars: coefficient vectors
/// whose first nonzero entry is 1.
pub fn projective_points(k: &ResidueField, basis: &[Vec<Fq>], ambient: usize) -> Vec<Vec<Fq>> {
    let q = k.q();
    let c = basis.len();
    let mut out = Vec::new();
    for lead in 0..c {
        let free = c - lead - 1;
        let total = (q as u64).pow(free as u32);
        for code in 0..total {
            let mut v = basis[lead].clone();
            let mut rest = code;
            for b in &basis[lead + 1..] {
                let coef = (rest % q as u64) as Fq;
                rest /= q as u64;
                axpy(k, coef, b, &mut v);
            }
            debug_assert_eq!(v.len(), ambient);
            out.push(v);
        }
    }
    out
}

/// Number of subspaces of dimension `r` in `k^n`: the Gaussian binomial.
pub fn gaussian_binomial(q: u64, n: u32, r: u32) -> u128 {
    if r > n {
        return 0;
    }
    let q = q as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..r {
        num = num.saturating_mul(q.saturating_pow(n - i).saturating_sub(1));
        den = den.saturating_mul(q.saturating_pow(i + 1) - 1);
    }
    if num == u128::MAX {
        return u128::MAX;
    }
    num / den
}

/// Every subspace of `k^n` of dimension `r`, by enumerating RREF shapes.
pub fn all_subspaces(k: &ResidueField, n: usize, r: usize) -> impl Iterator<Item = Subspace> + '_ {
    pivot_sets(n, r).into_iter().flat_map(move |pivots| {
        // Free slots: entries right of each pivot in non-pivot columns.
        let slots: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| {
                let pivots = pivots.clone();
                ((p + 1)..n)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (i, c))
            })
            .collect();
        let q = k.q() as u64;
        let total = q.pow(slots.len() as u32);
        (0..total).map(move |code| {
            let mut rows = vec![vec![0; n]; r];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = 1;
            }
            let mut rest = code;
            for &(i, c) in &slots {
                rows[i][c] = (rest % q) as Fq;
                rest /= q;
            }
            Subspace::from_rref(n, rows)
        })
    })
}

fn pivot_sets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for p in start..n {
            cur.push(p);
            go(p + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> ResidueField {
        ResidueField::new(p, 1).unwrap()
    }

    #[test]
    fn rref_is_canonical() {
        let k = f(5);
        let a = Subspace::span(&k, 3, vec![vec![1, 2, 3], vec![2, 4, 2]]);
        let b = Subspace::span(&k, 3, vec![vec![3, 1, 4], vec![0, 0, 2]]);
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
    }

    #[test]
    fn subspace_counts_match_gaussian_binomials() {
        let k = f(3);
        for n in 0..=4 {
            for r in 0..=n {
                let count = all_subspaces(&k, n, r).count() as u128;
                assert_eq!(count, gaussian_binomial(3, n as u32, r as u32), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn nullspace_and_preimage() {
        let k = f(7);
        let n = Subspace::nullspace(&k, 3, vec![vec![1, 1, 0]]);
        assert_eq!(n.dim(), 2);
        assert!(n.contains(&k, &[1, 6, 5]));
        // Shift operator e0 -> e1 -> e2 -> 0.
        let mut shift = KMat::zeros(3, 3);
        shift.set(1, 0, 1);
        shift.set(2, 1, 1);
        let target = Subspace::span(&k, 3, vec![vec![0, 0, 1]]);
        let pre = target.preimage(&k, &shift);
        assert_eq!(pre, Subspace::span(&k, 3, vec![vec![0, 1, 0], vec![0, 0, 1]]));
        let cl = Subspace::zero(3).closure(&k, &[vec![1, 0, 0]], &[&shift]);
        assert_eq!(cl.dim(), 3);
    }

    #[test]
    fn projective_point_count() {
        let k = f(5);
        let basis = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(projective_points(&k, &basis, 3).len(), 31);
    }
}
