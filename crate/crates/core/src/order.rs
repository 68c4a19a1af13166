//! The order `R_a`, its bilinear form, and the finite quotient
//! `Q = R^∨ / R` on which the orbital counts live.
//!
//! With `c_i = j^i a_i` and `β_i = j^i b_i` (both in `O_F`), `R_a` is
//! `O_F[s] / (s^n − c_1 s^(n−1) + .. )` where `s = jt`, and `b'` in the basis
//! `s^i` has Gram matrix `G_{ij} = b'(s^(i+j))`. Identifying `R^∨` with
//! `O_F^n` through the dual basis, `R` sits inside as `G·O_F^n` and
//! multiplication by `x` on `R^∨` is `L_x^T`.

use std::sync::Arc;

use crate::algebra::{det, identity, mat_mul, transpose, Matrix};
use crate::error::{Error, Result};
use crate::invariants::{extended_moments, InvariantPair};
use crate::kspace::{KMat, Subspace};
use crate::local_field::{ExtKind, FieldDesc, Fq, ResidueField, SeriesRing, TruncSeries};
use crate::submodules::{stable_subspaces, Budget, ModuleSpec};

/// A rank-`n` order over `O_F` with a symmetric `O_F`-valued form.
#[derive(Clone, Debug)]
pub struct OrderData {
    pub desc: FieldDesc,
    pub n: usize,
    /// Multiplication operators generating the order, column convention.
    pub ops: Vec<Matrix<TruncSeries>>,
    pub gram: Matrix<TruncSeries>,
    /// `val det G`, which is the length of `Q`.
    pub val_delta: i64,
    pub prec: i64,
}

impl OrderData {
    pub fn ring(&self) -> SeriesRing {
        self.desc.series_ring(self.prec)
    }

    /// Symmetry of `G`, self-adjointness `G L = L^T G` of every operator,
    /// and `val det G`. Returns the violated relations.
    pub fn check_structure(&self) -> Vec<String> {
        let ring = self.ring();
        let mut bad = Vec::new();
        let eq = |a: &Matrix<TruncSeries>, b: &Matrix<TruncSeries>| {
            a.iter()
                .flatten()
                .zip(b.iter().flatten())
                .all(|(x, y)| ring.sub(x, y).is_zero())
        };
        if !eq(&self.gram, &transpose(&self.gram)) {
            bad.push("gram matrix is not symmetric".to_string());
        }
        for (i, op) in self.ops.iter().enumerate() {
            let left = mat_mul(&ring, &self.gram, op);
            let right = mat_mul(&ring, &transpose(op), &self.gram);
            if !eq(&left, &right) {
                bad.push(format!("operator {i} is not self-adjoint for the form"));
            }
        }
        if det(&ring, &self.gram).val() != Some(self.val_delta) {
            bad.push("val det G differs from val Δ".to_string());
        }
        bad
    }
}

/// Companion matrix of multiplication by `s` in the basis `1, s, .., s^(n−1)`.
pub fn companion(ring: &SeriesRing, c: &[TruncSeries]) -> Matrix<TruncSeries> {
    let n = c.len();
    let mut t = vec![vec![ring.zero(); n]; n];
    for col in 0..n - 1 {
        t[col + 1][col] = ring.one();
    }
    for i in 1..=n {
        t[n - i][n - 1] = if i % 2 == 1 {
            c[i - 1].clone()
        } else {
            ring.neg(&c[i - 1])
        };
    }
    t
}

/// `(R_a, b')` for Lie-algebra invariants.
pub fn build_order(pair: &InvariantPair) -> Result<OrderData> {
    let n = pair.n();
    let prec = pair.prec();
    let (c, beta) = pair.real_coordinates()?;
    let ring = pair.desc.series_ring(prec);
    let t = companion(&ring, &c);
    let mu = extended_moments(&ring, &c, &beta, 2 * n - 1);
    let gram: Matrix<TruncSeries> = (0..n)
        .map(|i| (0..n).map(|j| mu[i + j].clone()).collect())
        .collect();
    order_from_parts(pair.desc.clone(), vec![t], gram, prec)
}

pub(crate) fn order_from_parts(
    desc: FieldDesc,
    ops: Vec<Matrix<TruncSeries>>,
    gram: Matrix<TruncSeries>,
    prec: i64,
) -> Result<OrderData> {
    let ring = desc.series_ring(prec);
    let d = det(&ring, &gram);
    let Some(val_delta) = d.val() else {
        return Err(Error::Indeterminate {
            precision: prec,
            required: 2 * prec.max(1),
        });
    };
    Ok(OrderData {
        desc,
        n: gram.len(),
        ops,
        gram,
        val_delta,
        prec,
    })
}

/// The finite module `Q = R^∨/R` as a `k`-vector space with basis
/// `ϖ^r ε_i` (`0 ≤ r < e_i`) after diagonalizing the form.
#[derive(Clone, Debug)]
pub struct FiniteQuotient {
    k: Arc<ResidueField>,
    /// Elementary divisor exponents `e_i > 0`, one per cyclic block.
    pub exponents: Vec<usize>,
    /// Multiplication by `ϖ`.
    pub p_op: KMat,
    /// The order's generators acting on `Q`.
    pub ops: Vec<KMat>,
    /// Principal part of the torsion pairing on basis pairs, `ϖ^-1` first.
    pub pairing: Vec<Vec<Vec<Fq>>>,
    /// Residue of the pairing: the `k`-bilinear form whose orthogonals give
    /// torsion duals of `ϖ`-stable subspaces.
    pub form: KMat,
}

impl FiniteQuotient {
    pub fn k(&self) -> &ResidueField {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.p_op.rows()
    }

    pub fn spec(&self) -> ModuleSpec<'_> {
        ModuleSpec {
            k: &self.k,
            dim: self.dim(),
            nilpotent: &self.p_op,
            ops: self.ops.iter().collect(),
        }
    }

    /// Torsion dual `S^⊥` of a `ϖ`-stable subspace.
    pub fn torsion_dual(&self, s: &Subspace) -> Subspace {
        s.orthogonal(&self.k, &self.form)
    }

    /// Principal part of `⟨x, y⟩` for arbitrary vectors.
    pub fn pair_vectors(&self, x: &[Fq], y: &[Fq]) -> Vec<Fq> {
        let k = &self.k;
        let len = self.exponents.iter().copied().max().unwrap_or(0);
        let mut out = vec![0; len];
        for (a, &xa) in x.iter().enumerate() {
            if xa == 0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate() {
                if yb == 0 {
                    continue;
                }
                let c = k.mul(xa, yb);
                for (o, &p) in out.iter_mut().zip(&self.pairing[a][b]) {
                    *o = k.add(*o, k.mul(c, p));
                }
            }
        }
        out
    }

    /// Violations of: `ϖ` and the operators commute, the pairing is
    /// symmetric and perfect, and the operators are self-adjoint.
    pub fn check_structure(&self) -> Vec<String> {
        let k = &self.k;
        let mut bad = Vec::new();
        let mut all = vec![&self.p_op];
        all.extend(&self.ops);
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if a.mul(k, b) != b.mul(k, a) {
                    bad.push("operators on Q do not commute".to_string());
                }
            }
        }
        if self.form.rank(k) != self.dim() {
            bad.push("pairing on Q is degenerate".to_string());
        }
        let d = self.dim();
        let unit = |i: usize| -> Vec<Fq> { (0..d).map(|j| Fq::from(i == j)).collect() };
        for a in 0..d {
            for b in 0..d {
                if self.pairing[a][b] != self.pairing[b][a] {
                    bad.push("pairing on Q is not symmetric".to_string());
                }
                for (i, op) in all.iter().enumerate() {
                    let lhs = self.pair_vectors(&op.mul_vec(k, &unit(a)), &unit(b));
                    let rhs = self.pair_vectors(&unit(a), &op.mul_vec(k, &unit(b)));
                    if lhs != rhs {
                        bad.push(format!("operator {i} is not self-adjoint on Q"));
                    }
                }
            }
        }
        bad.sort();
        bad.dedup();
        bad
    }
}

/// Congruence diagonalization `U G U^T = D` over `O_F`, returning
/// `(D diagonal, U, U^{-1})`. Pivots are entries of least valuation; an
/// off-diagonal pivot is first moved to the diagonal by adding a row and
/// column, which works because 2 is a unit.
fn diagonalize(
    ring: &SeriesRing,
    gram: &Matrix<TruncSeries>,
) -> Result<(Vec<TruncSeries>, Matrix<TruncSeries>, Matrix<TruncSeries>)> {
    let n = gram.len();
    let mut g = gram.clone();
    let mut u = identity(ring, n);
    let mut uinv = identity(ring, n);

    // E = I + c·e_i e_j^T applied as G ← E G E^T.
    let add = |g: &mut Matrix<TruncSeries>,
               u: &mut Matrix<TruncSeries>,
               uinv: &mut Matrix<TruncSeries>,
               i: usize,
               j: usize,
               c: &TruncSeries| {
        for col in 0..n {
            let t = ring.mul(c, &g[j][col]);
            g[i][col] = ring.add(&g[i][col], &t);
        }
        for row in 0..n {
            let t = ring.mul(c, &g[row][j]);
            g[row][i] = ring.add(&g[row][i], &t);
        }
        for col in 0..n {
            let t = ring.mul(c, &u[j][col]);
            u[i][col] = ring.add(&u[i][col], &t);
        }
        for row in 0..n {
            let t = ring.mul(c, &uinv[row][i]);
            uinv[row][j] = ring.sub(&uinv[row][j], &t);
        }
    };
    let swap = |g: &mut Matrix<TruncSeries>,
                u: &mut Matrix<TruncSeries>,
                uinv: &mut Matrix<TruncSeries>,
                i: usize,
                j: usize| {
        if i == j {
            return;
        }
        g.swap(i, j);
        for row in g.iter_mut() {
            row.swap(i, j);
        }
        u.swap(i, j);
        for row in uinv.iter_mut() {
            row.swap(i, j);
        }
    };

    for step in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in step..n {
            for j in i..n {
                if let Some(v) = g[i][j].val() {
                    // Diagonal entries win ties.
                    let key = (v, usize::from(i != j), i, j);
                    if best.map_or(true, |(bv, bi, bj)| key < (bv, usize::from(bi != bj), bi, bj)) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((_, i, j)) = best else {
            return Err(Error::PrecisionExhausted);
        };
        let pivot = if i == j {
            i
        } else {
            let one = ring.one();
            add(&mut g, &mut u, &mut uinv, i, j, &one);
            i
        };
        swap(&mut g, &mut u, &mut uinv, step, pivot);
        let d = g[step][step].clone();
        for r in step + 1..n {
            if g[r][step].is_zero() {
                continue;
            }
            let c = ring.neg(&ring.div_exact(&g[r][step], &d)?);
            add(&mut g, &mut u, &mut uinv, r, step, &c);
        }
    }
    let diag = (0..n).map(|i| g[i][i].clone()).collect();
    Ok((diag, u, uinv))
}

/// Builds `Q` with its operators and pairing. Errors with
/// [`Error::PrecisionExhausted`] when the working precision is too small.
pub fn build_quotient(ord: &OrderData) -> Result<FiniteQuotient> {
    let ring = ord.ring();
    let k = ring.residue_field_arc().clone();
    let (diag, u, uinv) = diagonalize(&ring, &ord.gram)?;
    let mut blocks = Vec::new();
    for (i, d) in diag.iter().enumerate() {
        let e = d.val().ok_or(Error::PrecisionExhausted)?;
        if e > 0 {
            blocks.push((i, e as usize));
        }
    }
    let dim: usize = blocks.iter().map(|b| b.1).sum();
    if dim as i64 != ord.val_delta {
        return Err(Error::PrecisionExhausted);
    }
    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, b| {
            let o = *acc;
            *acc += b.1;
            Some(o)
        })
        .collect();

    let mut p_op = KMat::zeros(dim, dim);
    for (b, &(_, e)) in blocks.iter().enumerate() {
        for r in 0..e - 1 {
            p_op.set(offsets[b] + r + 1, offsets[b] + r, 1);
        }
    }

    let mut ops = Vec::with_capacity(ord.ops.len());
    for op in &ord.ops {
        let transformed = mat_mul(&ring, &mat_mul(&ring, &u, &transpose(op)), &uinv);
        let mut m = KMat::zeros(dim, dim);
        for (bc, &(ic, ec)) in blocks.iter().enumerate() {
            for (br, &(ir, er)) in blocks.iter().enumerate() {
                let entry = &transformed[ir][ic];
                for r in 0..ec {
                    for s in r..er {
                        let coef = entry.coeff((s - r) as i64).ok_or(Error::PrecisionExhausted)?;
                        m.set(offsets[br] + s, offsets[bc] + r, coef);
                    }
                }
            }
        }
        ops.push(m);
    }

    let len = blocks.iter().map(|b| b.1).max().unwrap_or(0);
    let mut pairing = vec![vec![vec![0; len]; dim]; dim];
    for (b, &(i, e)) in blocks.iter().enumerate() {
        let dinv = ring.inv_laurent(&diag[i])?;
        for r in 0..e {
            for s in 0..e {
                let x = ring.shift_by(&dinv, (r + s) as i64);
                if x.prec() < 0 {
                    return Err(Error::PrecisionExhausted);
                }
                pairing[offsets[b] + r][offsets[b] + s] = ring.principal_part(&x, len)?;
            }
        }
    }
    let mut form = KMat::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            form.set(a, b, pairing[a][b].first().copied().unwrap_or(0));
        }
    }
    Ok(FiniteQuotient {
        k,
        exponents: blocks.iter().map(|b| b.1).collect(),
        p_op,
        ops,
        pairing,
        form,
    })
}

/// `m_i`, the number of submodules of colength `i`, for `i = 0..=v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitalCounts {
    pub v: usize,
    pub m: Vec<u64>,
}

impl OrbitalCounts {
    pub fn signed_sum(&self, kind: ExtKind) -> i64 {
        signed_sum(&self.m, kind)
    }

    pub fn is_palindromic(&self) -> bool {
        self.m.iter().eq(self.m.iter().rev())
    }
}

/// `Σ η(ϖ)^i m_i`: alternating for inert `E`, the plain sum for split `E`.
pub fn signed_sum(m: &[u64], kind: ExtKind) -> i64 {
    m.iter()
        .enumerate()
        .map(|(i, &x)| match kind {
            ExtKind::Inert if i % 2 == 1 => -(x as i64),
            _ => x as i64,
        })
        .sum()
}

pub fn enumerate_stable_submodules(q: &FiniteQuotient, budget: &Budget) -> Result<OrbitalCounts> {
    let levels = stable_subspaces(&q.spec(), budget)?;
    let v = q.dim();
    Ok(OrbitalCounts {
        v,
        m: (0..=v).map(|i| levels[v - i].len() as u64).collect(),
    })
}
