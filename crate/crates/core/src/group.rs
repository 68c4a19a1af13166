//! The group version: `𝐑_a = (O_E[t, t⁻¹]/P_a)^θ` with `θ` the product of `σ`
//! on coefficients and `t ↦ t⁻¹`, its lattice counts, and the transport to
//! Lie-algebra invariants `(ã, b̃)` with `R_ã ≅ 𝐑_a`.
//!
//! Elements of `O_E[t]/P_a` are coefficient vectors in the basis `t^i`.
//! Writing `Θ` for the matrix of `t^i ↦ t^{−i}`, `θ(x) = Θ·σ(x)`. Splitting
//! `x = p + qj` and `Θ = Θ₀ + Θ₁j` over `O_F`, the fixed points are the kernel
//! of `[[Θ₀ − 1, −δΘ₁], [Θ₁, −(Θ₀ + 1)]]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{adjugate, berkowitz, det, identity, mat_mul, mat_vec, mul_mod_monic, Matrix};
use crate::error::{Error, Result};
use crate::invariants::{invariants_of, monic_low, strong_regularity_exact, InvariantPair, MatrixE};
use crate::local_field::{EElem, ExtRing, FieldDesc, Fq, SeriesRing, TruncSeries};
use crate::order::{build_order, order_from_parts, OrderData};
use crate::verify::{assemble, counts_for_order, with_precision, Verdict, VerifyOptions, SAMPLER_RETRIES};

/// Flag for group inputs whose `b₀` is not a unit.
pub const NONUNIT_B0: &str = "b0 is not a unit";

#[derive(Clone, Debug)]
pub struct GroupOrderData {
    /// `R`-data on the fixed ring: operators `L_{f_k}` and the Gram of `b'`.
    pub order: OrderData,
    /// Columns: the fixed basis `f_k` in the basis `t^i` of `O_E[t]/P_a`.
    pub fixed_basis: Matrix<EElem>,
    /// The unit `u` with `t^n σ(P_a)(1/t) = u·P_a(t)`.
    pub theta_unit: EElem,
    pub a: Vec<EElem>,
    pub b: Vec<EElem>,
}

impl GroupOrderData {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn prec(&self) -> i64 {
        self.order.prec
    }

    fn ext(&self) -> ExtRing {
        self.order.desc.ext_ring(self.prec())
    }

    /// Coordinates in the fixed basis of an element given in the `t^i` basis.
    pub fn coordinates(&self, x: &[EElem]) -> Result<Vec<EElem>> {
        let ring = self.ext();
        let dinv = ring.inv(&det(&ring, &self.fixed_basis))?;
        let adj = adjugate(&ring, &self.fixed_basis);
        Ok(mat_vec(&ring, &adj, x).iter().map(|y| ring.mul(y, &dinv)).collect())
    }

    /// Real coordinates in the fixed basis; errors if `x` is not `θ`-fixed.
    pub fn real_coordinates(&self, x: &[EElem]) -> Result<Vec<TruncSeries>> {
        self.coordinates(x)?
            .into_iter()
            .map(|y| {
                if y.im.is_zero() {
                    Ok(y.re)
                } else {
                    Err(Error::GroupConstraintViolated("element is not θ-fixed".into()))
                }
            })
            .collect()
    }

    /// `b'` on an element in fixed-basis coordinates.
    pub fn b_prime(&self, y: &[TruncSeries]) -> Result<TruncSeries> {
        let base = self.order.ring();
        let mut acc = base.zero();
        for (k, yk) in y.iter().enumerate() {
            let fk: Vec<EElem> = self.fixed_basis.iter().map(|row| row[k].clone()).collect();
            let bk = b_prime_t(&self.ext(), &fk, &self.b)?;
            acc = base.add(&acc, &base.mul(yk, &bk));
        }
        Ok(acc)
    }
}

/// `b'(x) = Σ x_i b_i`, required to land in `O_F`.
fn b_prime_t(ring: &ExtRing, x: &[EElem], b: &[EElem]) -> Result<TruncSeries> {
    let v = x
        .iter()
        .zip(b)
        .fold(ring.zero(), |acc, (xi, bi)| ring.add(&acc, &ring.mul(xi, bi)));
    if !v.im.is_zero() {
        return Err(Error::GroupConstraintViolated(
            "b' is not real on the fixed ring; b is not θ-compatible".into(),
        ));
    }
    Ok(v.re)
}

/// Checks `a_n` is a unit and `P_a` is `θ`-stable; returns the unit `u`.
pub fn theta_stability(pair: &InvariantPair) -> Result<EElem> {
    let ring = pair.ring();
    let n = pair.n();
    for (i, x) in pair.a.iter().enumerate() {
        if !x.is_integral() {
            return Err(Error::NotIntegral { field: format!("a[{}]", i + 1) });
        }
    }
    for (i, x) in pair.b.iter().enumerate() {
        if !x.is_integral() {
            return Err(Error::NotIntegral { field: format!("b[{i}]") });
        }
    }
    if !ring.is_unit(&pair.a[n - 1]) {
        return Err(Error::GroupConstraintViolated(format!("a[{n}] is not a unit")));
    }
    // p_i = (−1)^i a_i with p_0 = 1; need σ(p_i) = u·p_{n−i}.
    let p: Vec<EElem> = std::iter::once(ring.one())
        .chain(pair.a.iter().enumerate().map(|(i, x)| if i % 2 == 0 { ring.neg(x) } else { x.clone() }))
        .collect();
    let u = ring.sigma(&p[n]);
    for i in 0..=n {
        let diff = ring.sub(&ring.sigma(&p[i]), &ring.mul(&u, &p[n - i]));
        if !diff.is_zero() {
            return Err(Error::GroupConstraintViolated(format!(
                "P_a is not θ-stable at coefficient {i}"
            )));
        }
    }
    Ok(u)
}

/// `t⁻¹` in the basis `t^i`.
fn t_inverse(ring: &ExtRing, a: &[EElem]) -> Result<Vec<EElem>> {
    let n = a.len();
    let low = monic_low(ring, a);
    let c0 = ring.neg(&ring.inv(&low[0])?);
    Ok((0..n)
        .map(|i| {
            let coef = if i + 1 < n { low[i + 1].clone() } else { ring.one() };
            ring.mul(&c0, &coef)
        })
        .collect())
}

/// The matrix `Θ` of `t^i ↦ t^{−i}`.
pub fn theta_matrix(ring: &ExtRing, a: &[EElem]) -> Result<Matrix<EElem>> {
    let n = a.len();
    let low = monic_low(ring, a);
    let tinv = t_inverse(ring, a)?;
    let mut col: Vec<EElem> = (0..n).map(|i| if i == 0 { ring.one() } else { ring.zero() }).collect();
    let mut cols = Vec::with_capacity(n);
    for _ in 0..n {
        cols.push(col.clone());
        col = mul_mod_monic(ring, &col, &tinv, &low);
    }
    Ok(crate::algebra::transpose(&cols))
}

/// `Θ·σ(Θ) = 1`: `θ` is an involution.
pub fn theta_is_involution(ring: &ExtRing, theta: &Matrix<EElem>) -> bool {
    let sig: Matrix<EElem> = theta.iter().map(|r| r.iter().map(|x| ring.sigma(x)).collect()).collect();
    let prod = mat_mul(ring, theta, &sig);
    prod.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, x)| {
            let target = if i == j { ring.one() } else { ring.zero() };
            ring.sub(x, &target).is_zero()
        })
    })
}

/// Saturated kernel of `k` over `O_F`: full pivoting by least valuation with
/// column operations tracked, so the trailing columns of the transform span
/// the kernel.
fn kernel_basis(ring: &SeriesRing, k: &Matrix<TruncSeries>) -> Result<Vec<Vec<TruncSeries>>> {
    let rows = k.len();
    let cols = k[0].len();
    let mut m = k.clone();
    let mut v = identity(ring, cols);
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in rank..rows {
            for j in rank..cols {
                if let Some(val) = m[i][j].val() {
                    if best.is_none_or(|(b, _, _)| val < b) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        m.swap(rank, pi);
        for row in m.iter_mut() {
            row.swap(rank, pj);
        }
        for row in v.iter_mut() {
            row.swap(rank, pj);
        }
        let pivot = m[rank][rank].clone();
        for c in rank + 1..cols {
            if m[rank][c].is_zero() {
                continue;
            }
            let f = ring.div_exact(&m[rank][c], &pivot)?;
            for row in m.iter_mut() {
                let t = ring.mul(&f, &row[rank]);
                row[c] = ring.sub(&row[c], &t);
            }
            for row in v.iter_mut() {
                let t = ring.mul(&f, &row[rank]);
                row[c] = ring.sub(&row[c], &t);
            }
        }
        rank += 1;
    }
    Ok((rank..cols).map(|c| v.iter().map(|row| row[c].clone()).collect()).collect())
}

/// Builds `𝐑_a` with its operators and Gram matrix at the pair's precision.
pub fn build_group_order(pair: &InvariantPair) -> Result<GroupOrderData> {
    let n = pair.n();
    let prec = pair.prec();
    let theta_unit = theta_stability(pair)?;
    let ring = pair.ring();
    let base = ring.base().clone();
    let delta = pair.desc.delta();
    let theta = theta_matrix(&ring, &pair.a)?;
    if !theta_is_involution(&ring, &theta) {
        return Err(Error::GroupConstraintViolated("θ is not an involution".into()));
    }
    let mut sys = vec![vec![base.zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let (t0, t1) = (&theta[i][j].re, &theta[i][j].im);
            let id = if i == j { base.one() } else { base.zero() };
            sys[i][j] = base.sub(t0, &id);
            sys[i][n + j] = base.neg(&base.scale(delta, t1));
            sys[n + i][j] = t1.clone();
            sys[n + i][n + j] = base.neg(&base.add(t0, &id));
        }
    }
    let kernel = kernel_basis(&base, &sys)?;
    if kernel.len() != n {
        return Err(Error::PrecisionExhausted);
    }
    let fixed_basis: Matrix<EElem> = (0..n)
        .map(|i| kernel.iter().map(|v| EElem::new(v[i].clone(), v[n + i].clone())).collect())
        .collect();
    match det(&ring, &fixed_basis).val() {
        Some(0) => {}
        None => return Err(Error::PrecisionExhausted),
        Some(_) => {
            return Err(Error::GroupConstraintViolated(
                "fixed ring is not an O_F-form of O_E[t]/P_a".into(),
            ))
        }
    }
    let mut g = GroupOrderData {
        order: OrderData {
            desc: pair.desc.clone(),
            n,
            ops: Vec::new(),
            gram: Vec::new(),
            val_delta: 0,
            prec,
        },
        fixed_basis,
        theta_unit,
        a: pair.a.clone(),
        b: pair.b.clone(),
    };
    let low = monic_low(&ring, &pair.a);
    let f: Vec<Vec<EElem>> = (0..n)
        .map(|k| g.fixed_basis.iter().map(|row| row[k].clone()).collect())
        .collect();
    let mut ops = Vec::with_capacity(n);
    let mut gram = vec![vec![base.zero(); n]; n];
    for k in 0..n {
        let mut cols = Vec::with_capacity(n);
        for l in 0..n {
            let prod = mul_mod_monic(&ring, &f[k], &f[l], &low);
            cols.push(g.real_coordinates(&prod)?);
            gram[k][l] = b_prime_t(&ring, &prod, &pair.b)?;
        }
        ops.push(crate::algebra::transpose(&cols));
    }
    g.order = order_from_parts(pair.desc.clone(), ops, gram, prec)?;
    Ok(g)
}

/// Result of [`lie_transport`].
#[derive(Clone, Debug)]
pub struct Transport {
    pub pair: InvariantPair,
    /// The generator `s` in fixed-basis coordinates.
    pub generator: Vec<TruncSeries>,
    /// Candidates tried before `s` was accepted.
    pub attempts: usize,
}

/// Cap on generator candidates.
pub const GENERATOR_ATTEMPTS: usize = 256;

fn op_of(g: &GroupOrderData, s: &[TruncSeries]) -> Matrix<TruncSeries> {
    let base = g.order.ring();
    let n = g.n();
    let mut l = vec![vec![base.zero(); n]; n];
    for (k, sk) in s.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let t = base.mul(sk, &g.order.ops[k][i][j]);
                l[i][j] = base.add(&l[i][j], &t);
            }
        }
    }
    l
}

/// Powers `1, s, .., s^{n−1}` in fixed-basis coordinates.
fn powers(g: &GroupOrderData, ls: &Matrix<TruncSeries>, one: &[TruncSeries]) -> Vec<Vec<TruncSeries>> {
    let base = g.order.ring();
    let mut out = vec![one.to_vec()];
    for _ in 1..g.n() {
        let next = mat_vec(&base, ls, out.last().expect("nonempty"));
        out.push(next);
    }
    out
}

fn generates(g: &GroupOrderData, s: &[TruncSeries], one: &[TruncSeries]) -> bool {
    let ls = op_of(g, s);
    let cols = powers(g, &ls, one);
    let c = crate::algebra::transpose(&cols);
    det(&g.order.ring(), &c).val() == Some(0)
}

fn candidates(g: &GroupOrderData, seed: u64) -> Result<Vec<Vec<TruncSeries>>> {
    let ring = g.ext();
    let base = g.order.ring();
    let n = g.n();
    let k = base.residue_field();
    let mut out = Vec::new();
    // θ-fixed images of t: t + t⁻¹ and j(t − t⁻¹).
    let tinv = t_inverse(&ring, &g.a)?;
    let mut t: Vec<EElem> = vec![ring.zero(); n];
    if n > 1 {
        t[1] = ring.one();
    } else {
        t[0] = ring.neg(&monic_low(&ring, &g.a)[0]);
    }
    let plus: Vec<EElem> = t.iter().zip(&tinv).map(|(x, y)| ring.add(x, y)).collect();
    let minus: Vec<EElem> = t
        .iter()
        .zip(&tinv)
        .map(|(x, y)| ring.mul(&ring.j(), &ring.sub(x, y)))
        .collect();
    for x in [plus, minus] {
        if let Ok(c) = g.real_coordinates(&x) {
            out.push(c);
        }
    }
    let unit = |i: usize, c: Fq| -> Vec<TruncSeries> {
        (0..n).map(|j| if j == i { base.constant(c) } else { base.zero() }).collect()
    };
    for i in 0..n {
        out.push(unit(i, 1));
    }
    let small: Vec<Fq> = (1..k.q().min(4)).collect();
    for i in 0..n {
        for j in i + 1..n {
            for &c in &small {
                let mut v = unit(i, 1);
                v[j] = base.constant(c);
                out.push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < GENERATOR_ATTEMPTS {
        out.push((0..n).map(|_| base.constant(rng.gen_range(0..k.q()))).collect());
    }
    out.truncate(GENERATOR_ATTEMPTS);
    Ok(out)
}

/// Finds `s` generating `𝐑_a ⊗ k`, so `O_F[s] ≅ 𝐑_a`, and returns
/// `ã_i = j^i c_i` (with `c` the characteristic coefficients of `s`) and
/// `b̃_i = j^i b'(s^i)`. The isomorphism `R_ã → 𝐑_a` sends `t ↦ js`.
pub fn lie_transport(g: &GroupOrderData, seed: u64) -> Result<Transport> {
    let ring = g.ext();
    let base = g.order.ring();
    let n = g.n();
    let one_t: Vec<EElem> = (0..n).map(|i| if i == 0 { ring.one() } else { ring.zero() }).collect();
    let one = g.real_coordinates(&one_t)?;
    for (attempt, s) in candidates(g, seed)?.into_iter().enumerate() {
        if !generates(g, &s, &one) {
            continue;
        }
        let ls = op_of(g, &s);
        let char_poly = berkowitz(&base, &ls);
        let mut jp = ring.one();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (i, si) in powers(g, &ls, &one).iter().enumerate() {
            b.push(ring.mul_base(&jp, &g.b_prime(si)?));
            jp = ring.mul(&jp, &ring.j());
            let ci = if (i + 1) % 2 == 0 {
                char_poly[i + 1].clone()
            } else {
                base.neg(&char_poly[i + 1])
            };
            a.push(ring.mul_base(&jp, &ci));
        }
        return Ok(Transport {
            pair: InvariantPair::new(g.order.desc.clone(), a, b)?,
            generator: s,
            attempts: attempt + 1,
        });
    }
    Err(Error::GeneratorNotFound {
        attempts: GENERATOR_ATTEMPTS,
    })
}

/// The Gram of the transported pair equals `Cᵀ G C`, with `C` the columns
/// `(δs)^k` in the fixed basis.
pub fn transport_gram_check(g: &GroupOrderData, t: &Transport) -> Result<bool> {
    let ring = g.ext();
    let base = g.order.ring();
    let n = g.n();
    let one_t: Vec<EElem> = (0..n).map(|i| if i == 0 { ring.one() } else { ring.zero() }).collect();
    let one = g.real_coordinates(&one_t)?;
    let delta = base.constant(g.order.desc.delta());
    let ls = op_of(g, &t.generator);
    let lds: Matrix<TruncSeries> = ls.iter().map(|r| r.iter().map(|x| base.mul(&delta, x)).collect()).collect();
    let c = crate::algebra::transpose(&powers(g, &lds, &one));
    let congruent = mat_mul(&base, &mat_mul(&base, &crate::algebra::transpose(&c), &g.order.gram), &c);
    let lie = build_order(&t.pair)?;
    Ok(congruent
        .iter()
        .flatten()
        .zip(lie.gram.iter().flatten())
        .all(|(x, y)| base.sub(x, y).is_zero()))
}

/// Both sides of the counting identity for group invariants.
pub fn verify_group(pair: &InvariantPair, opts: &VerifyOptions) -> Result<Verdict> {
    let started = std::time::Instant::now();
    theta_stability(pair)?;
    let reg = strong_regularity_exact(pair)?;
    if !reg.strongly_regular {
        return Err(Error::NotStronglyRegular);
    }
    let val_delta = reg.val_delta.expect("regular pairs have finite Δ");
    let n = pair.n() as i64;
    let start = opts
        .precision
        .unwrap_or_else(|| pair.prec().max(2 * n + 4).max(2 * val_delta + 2));
    let ((counts, selfdual, violations), precision) =
        with_precision(start, opts.precision.is_some(), |prec| {
            let g = build_group_order(&pair.lift(prec).truncate(prec))?;
            counts_for_order(&g.order, &opts.budget)
        })?;
    let mut verdict = assemble(&pair.desc, pair.n(), counts, selfdual, violations, precision, started);
    if pair.b[0].val() != Some(0) {
        verdict.flags.push(NONUNIT_B0.to_string());
    }
    Ok(verdict)
}

/// A seeded `A = B σ(B)^{−1} ∈ S_n(O_F)` with `det B` a constant, so every
/// entry is a polynomial in `ϖ`. Returns `A` and its invariants, strongly
/// regular with `val Δ ≤ max_val`.
pub fn rand_group_instance(n: usize, desc: &FieldDesc, max_val: u32, seed: u64) -> Result<(MatrixE, InvariantPair)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6A09_E667_F3BC_C909);
    let q = desc.q();
    // Entries of A have degree below 12n², so nothing is truncated.
    let prec = 12 * (n * n) as i64 + 4 * max_val as i64 + 8;
    let ring = desc.ext_ring(prec);
    let rand_e = |rng: &mut ChaCha8Rng| -> EElem {
        let shift = [0, 0, 1, 2][rng.gen_range(0..4)];
        let re: Vec<Fq> = (0..2).map(|_| rng.gen_range(0..q)).collect();
        let im: Vec<Fq> = (0..2).map(|_| rng.gen_range(0..q)).collect();
        EElem::new(
            TruncSeries::from_laurent(shift, &re, prec),
            TruncSeries::from_laurent(shift, &im, prec),
        )
    };
    for _ in 0..SAMPLER_RETRIES {
        // B = D·U·L with D a constant unit diagonal, U/L unipotent.
        let mut b = identity(&ring, n);
        for i in 0..n {
            let unit = loop {
                let x = EElem::new(
                    TruncSeries::constant(rng.gen_range(0..q), prec),
                    TruncSeries::constant(rng.gen_range(0..q), prec),
                );
                if ring.is_unit(&x) {
                    break x;
                }
            };
            b[i][i] = unit;
        }
        let mut upper = identity(&ring, n);
        let mut lower = identity(&ring, n);
        for i in 0..n {
            for j in i + 1..n {
                upper[i][j] = rand_e(&mut rng);
                lower[j][i] = rand_e(&mut rng);
            }
        }
        let b = mat_mul(&ring, &mat_mul(&ring, &b, &upper), &lower);
        let sb: Matrix<EElem> = b.iter().map(|r| r.iter().map(|x| ring.sigma(x)).collect()).collect();
        let dinv = ring.inv(&det(&ring, &sb))?;
        let sb_inv: Matrix<EElem> = adjugate(&ring, &sb)
            .iter()
            .map(|r| r.iter().map(|x| ring.mul(x, &dinv)).collect())
            .collect();
        let a = MatrixE::new(mat_mul(&ring, &b, &sb_inv))?;
        let pair = invariants_of(desc, &a);
        if let Ok(r) = strong_regularity_exact(&pair) {
            if r.strongly_regular && r.val_delta.is_some_and(|v| v <= max_val as i64) {
                let tight = (pair.max_degree() + 1).max(2 * n as i64 + 4);
                return Ok((a, pair.truncate(tight)));
            }
        }
    }
    Err(Error::TargetUnreachable {
        target: max_val,
        retries: SAMPLER_RETRIES,
    })
}
