//! The counting identity end to end, its closed forms, independent oracles,
//! and seeded instance samplers.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{det, mul_mod_monic, Matrix};
use crate::error::{Error, Result};
use crate::hermitian::{build_hermitian_quotient, count_selfdual, HermQuotient};
use crate::invariants::{
    eta_of_valuation, invariants_of, monic_low, strong_regularity, strong_regularity_exact, v_invariant, InvariantPair,
    MatrixE,
};
use crate::kspace::{all_subspaces, gaussian_binomial};
use crate::local_field::{ExtKind, FieldDesc, Fq, SeriesRing, TruncSeries};
use crate::order::{build_order, build_quotient, enumerate_stable_submodules, OrbitalCounts, OrderData};
use crate::submodules::{subspace_estimate, Budget, ModuleSpec};

/// Largest working precision tried before giving up.
pub const MAX_PRECISION: i64 = 256;

/// Flag attached to verdicts computed with `p ≤ n`.
pub const OUTSIDE_PROVEN_RANGE: &str = "outside proven range";

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub budget: Budget,
    /// Fixed working precision. `None` picks one and doubles on demand.
    pub precision: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `η(Δ) = +1`: the signed sum equals `N`.
    Equal,
    /// `η(Δ) = −1`: both sides vanish.
    BothZero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub v: i64,
    pub eta_delta: i8,
    pub m: Vec<u64>,
    pub signed_sum: i64,
    #[serde(rename = "N")]
    pub selfdual: u64,
    pub expected_relation: Relation,
    pub pass: bool,
    pub flags: Vec<String>,
    /// Working precision the counts were computed at.
    pub precision: i64,
    pub wall_ms: u64,
}

impl Verdict {
    /// Structural violations recorded in the flags.
    pub fn violations(&self) -> impl Iterator<Item = &str> {
        self.flags
            .iter()
            .filter_map(|f| f.strip_prefix("structure: "))
    }
}

pub fn pass_rule(eta_delta: i8, signed_sum: i64, selfdual: u64) -> bool {
    (eta_delta == 1 && signed_sum == selfdual as i64)
        || (eta_delta == -1 && signed_sum == 0 && selfdual == 0)
}

/// Counts on both sides for an already built order.
pub fn counts_for_order(ord: &OrderData, budget: &Budget) -> Result<(OrbitalCounts, u64, Vec<String>)> {
    let mut violations = ord.check_structure();
    let q = build_quotient(ord)?;
    violations.extend(q.check_structure());
    let h = build_hermitian_quotient(&q, &ord.desc);
    violations.extend(check_hermitian(&h));
    let counts = enumerate_stable_submodules(&q, budget)?;
    let selfdual = count_selfdual(&h, budget)?;
    Ok((counts, selfdual, violations))
}

/// Hermitian symmetry, sesquilinearity and perfectness on `Q_E`.
pub fn check_hermitian(h: &HermQuotient) -> Vec<String> {
    let k = h.k();
    let d = h.dim();
    let mut bad = Vec::new();
    if h.form.rank(k) != d {
        bad.push("hermitian pairing is degenerate".to_string());
    }
    let unit = |i: usize| -> Vec<Fq> { (0..d).map(|j| Fq::from(i == j)).collect() };
    let neg = |v: &[Fq]| -> Vec<Fq> { v.iter().map(|&c| k.neg(c)).collect() };
    let times_delta = |v: &[Fq]| -> Vec<Fq> { v.iter().map(|&c| k.mul(h.delta, c)).collect() };
    for a in 0..d {
        for b in 0..d {
            let (x, y) = (unit(a), unit(b));
            let (re, im) = h.herm(&x, &y);
            let (re_t, im_t) = h.herm(&y, &x);
            if re != re_t || im != neg(&im_t) {
                bad.push("hermitian symmetry fails".to_string());
            }
            let jx = h.j_op.mul_vec(k, &x);
            let jy = h.j_op.mul_vec(k, &y);
            // j·(re + im j) = δ im + re j, and σ(j) = −j.
            if h.herm(&jx, &y) != (times_delta(&im), re.clone())
                || h.herm(&x, &jy) != (neg(&times_delta(&im)), neg(&re))
            {
                bad.push("hermitian pairing is not sesquilinear".to_string());
            }
        }
    }
    bad.sort();
    bad.dedup();
    bad
}

fn starting_precision(pair: &InvariantPair, val_delta: i64) -> i64 {
    let n = pair.n() as i64;
    pair.prec().max(2 * n + 4).max(2 * val_delta + 2)
}

/// Runs `build` at increasing precision until it stops running out.
pub(crate) fn with_precision<T>(
    start: i64,
    fixed: bool,
    mut build: impl FnMut(i64) -> Result<T>,
) -> Result<(T, i64)> {
    let mut prec = start;
    loop {
        match build(prec) {
            Err(Error::PrecisionExhausted | Error::Indeterminate { .. }) if !fixed && prec < MAX_PRECISION => {
                prec = (prec * 2).min(MAX_PRECISION);
            }
            Err(Error::Indeterminate { .. }) => return Err(Error::PrecisionExhausted),
            other => return other.map(|t| (t, prec)),
        }
    }
}

pub(crate) fn assemble(
    desc: &FieldDesc,
    n: usize,
    counts: OrbitalCounts,
    selfdual: u64,
    violations: Vec<String>,
    precision: i64,
    started: Instant,
) -> Verdict {
    let v = counts.v as i64;
    let eta_delta = eta_of_valuation(desc.kind(), v);
    let signed_sum = counts.signed_sum(desc.kind());
    let mut flags: Vec<String> = violations.iter().map(|s| format!("structure: {s}")).collect();
    if desc.p() as usize <= n {
        flags.push(OUTSIDE_PROVEN_RANGE.to_string());
    }
    let pass = violations.is_empty() && pass_rule(eta_delta, signed_sum, selfdual);
    Verdict {
        v,
        eta_delta,
        m: counts.m,
        signed_sum,
        selfdual,
        expected_relation: if eta_delta == 1 { Relation::Equal } else { Relation::BothZero },
        pass,
        flags,
        precision,
        wall_ms: started.elapsed().as_millis() as u64,
    }
}

/// Both sides of the counting identity for Lie-algebra invariants.
pub fn verify_count_identity(pair: &InvariantPair, opts: &VerifyOptions) -> Result<Verdict> {
    let started = Instant::now();
    pair.validate()?;
    let reg = strong_regularity_exact(pair)?;
    if !reg.strongly_regular {
        return Err(Error::NotStronglyRegular);
    }
    let val_delta = reg.val_delta.expect("regular pairs have finite Δ");
    let start = opts.precision.unwrap_or_else(|| starting_precision(pair, val_delta));
    let ((counts, selfdual, violations), precision) =
        with_precision(start, opts.precision.is_some(), |prec| {
            let ord = build_order(&pair.lift(prec).truncate(prec))?;
            counts_for_order(&ord, &opts.budget)
        })?;
    Ok(assemble(&pair.desc, pair.n(), counts, selfdual, violations, precision, started))
}

/// Both sides for a pair whose entries are truncated series rather than
/// exact polynomials, at the pair's own precision.
pub fn verify_truncated(pair: &InvariantPair, budget: &Budget) -> Result<Verdict> {
    let started = Instant::now();
    pair.validate()?;
    let reg = strong_regularity(pair)?;
    if !reg.strongly_regular {
        return Err(Error::NotStronglyRegular);
    }
    let ord = build_order(pair)?;
    let (counts, selfdual, violations) = counts_for_order(&ord, budget)?;
    Ok(assemble(&pair.desc, pair.n(), counts, selfdual, violations, pair.prec(), started))
}

/// Predicted common value of both sides when `R_a` is a DVR with
/// `leng_{R_a}(R_a^∨ : R_a) = d` and residue degree `residue_deg`.
pub fn dvr_closed_form(d: u32, residue_deg: u32, kind: ExtKind) -> u64 {
    match kind {
        ExtKind::Split => d as u64 + 1,
        ExtKind::Inert if residue_deg % 2 == 0 => d as u64 + 1,
        ExtKind::Inert if d % 2 == 0 => 1,
        ExtKind::Inert => 0,
    }
}

/// Largest dimension the naive scans accept.
pub const NAIVE_MAX_DIM: usize = 8;

fn naive_guard(k_q: u32, dim: usize, budget: &Budget) -> Result<()> {
    if dim > NAIVE_MAX_DIM {
        return Err(Error::BudgetExceeded {
            estimate: subspace_estimate(k_q as u64, dim),
        });
    }
    let _ = budget;
    Ok(())
}

/// `m_i` by scanning every subspace of `Q` and testing stability.
pub fn naive_subspace_oracle(spec: &ModuleSpec<'_>, budget: &Budget) -> Result<Vec<u64>> {
    naive_guard(spec.k.q(), spec.dim, budget)?;
    let v = spec.dim;
    Ok((0..=v)
        .map(|i| {
            all_subspaces(spec.k, v, v - i)
                .filter(|s| spec.is_submodule(s))
                .count() as u64
        })
        .collect())
}

/// `N` by scanning every half-dimensional subspace of `Q_E`.
pub fn naive_selfdual_oracle(h: &HermQuotient, budget: &Budget) -> Result<u64> {
    naive_guard(h.k().q(), h.dim(), budget)?;
    let spec = h.spec();
    Ok(all_subspaces(h.k(), h.dim(), h.dim() / 2)
        .filter(|s| h.is_self_dual(s) && spec.is_submodule(s))
        .count() as u64)
}

/// Number of subspaces the naive scans visit.
pub fn naive_cost(q: u32, dim: usize) -> u128 {
    (0..=dim as u32)
        .map(|r| gaussian_binomial(q as u64, dim as u32, r))
        .sum()
}

/// `#X_i`: lattices `L` in `W = O_F^{n−1}` with `L ⊕ O_F e₀` stable under
/// `A = jM`, bucketed by `i = leng(L : W)`. Lattices are enumerated in
/// Hermite normal form between `ϖ^{μ}W` and `ϖ^{−μ}W`, `μ = val Δ`.
pub fn matrix_orbit_oracle(desc: &FieldDesc, a: &MatrixE, budget: &Budget) -> Result<BTreeMap<i64, u64>> {
    let n = a.n();
    if n < 2 {
        return Err(Error::Dimension("matrix orbit oracle needs n ≥ 2".into()));
    }
    let pair = invariants_of(desc, &a.lift(a.prec().max(8)));
    let reg = strong_regularity_exact(&pair)?;
    if !reg.strongly_regular {
        return Err(Error::NotStronglyRegular);
    }
    let mu = reg.val_delta.expect("regular") ;
    let w = n - 1;
    let q = desc.q() as u128;
    let estimate = (2 * mu as u128 + 1).pow(w as u32) * q.saturating_pow((mu as u32) * 2 * (w * (w - 1) / 2) as u32);
    if estimate > budget.max_nodes as u128 {
        return Err(Error::BudgetExceeded { estimate });
    }
    let degree = a.entries.iter().flatten().filter_map(|x| x.degree()).max().unwrap_or(0);
    let prec = 8 * mu + 2 * degree + 16;
    let ring = desc.series_ring(prec);
    let m: Matrix<TruncSeries> = a
        .entries
        .iter()
        .map(|row| row.iter().map(|x| x.im.lift(prec)).collect())
        .collect();
    let mut out = BTreeMap::new();
    let mut diag = vec![-mu; w];
    loop {
        for_each_hnf(&ring, &diag, mu, |h| {
            if lattice_stable(&ring, &m, h, &diag) {
                let i = -diag.iter().sum::<i64>();
                *out.entry(i).or_insert(0) += 1;
            }
        });
        // Next diagonal exponent vector.
        let mut pos = 0;
        loop {
            if pos == w {
                return Ok(out);
            }
            if diag[pos] < mu {
                diag[pos] += 1;
                break;
            }
            diag[pos] = -mu;
            pos += 1;
        }
    }
}

/// Upper triangular `H` with `H[r][r] = ϖ^{d_r}` and `H[r][c]` (`r < c`) a
/// Laurent polynomial with exponents in `[−μ, d_r)`.
fn for_each_hnf(ring: &SeriesRing, diag: &[i64], mu: i64, mut visit: impl FnMut(&Matrix<TruncSeries>)) {
    let w = diag.len();
    let k = ring.residue_field();
    let slots: Vec<(usize, usize)> = (0..w).flat_map(|r| (r + 1..w).map(move |c| (r, c))).collect();
    let widths: Vec<usize> = slots.iter().map(|&(r, _)| (diag[r] + mu) as usize).collect();
    let total_len: usize = widths.iter().sum();
    let q = k.q() as u64;
    let total = q.pow(total_len as u32);
    for code in 0..total {
        let mut h = vec![vec![ring.zero(); w]; w];
        for r in 0..w {
            h[r][r] = TruncSeries::monomial(1, diag[r], ring.prec());
        }
        let mut rest = code;
        for (&(r, c), &width) in slots.iter().zip(&widths) {
            let coeffs: Vec<Fq> = (0..width)
                .map(|_| {
                    let x = (rest % q) as Fq;
                    rest /= q;
                    x
                })
                .collect();
            h[r][c] = TruncSeries::from_laurent(-mu, &coeffs, ring.prec());
        }
        visit(&h);
    }
}

/// Solves `H t = x` by back substitution and checks `t` is integral.
fn in_lattice(ring: &SeriesRing, h: &Matrix<TruncSeries>, diag: &[i64], x: &[TruncSeries]) -> bool {
    let w = diag.len();
    let mut t = vec![ring.zero(); w];
    for r in (0..w).rev() {
        let mut rhs = x[r].clone();
        for c in r + 1..w {
            rhs = ring.sub(&rhs, &ring.mul(&h[r][c], &t[c]));
        }
        let tr = ring.shift_by(&rhs, -diag[r]);
        if !tr.is_zero() && tr.val().map_or(false, |v| v < 0) {
            return false;
        }
        t[r] = tr;
    }
    true
}

fn lattice_stable(ring: &SeriesRing, m: &Matrix<TruncSeries>, h: &Matrix<TruncSeries>, diag: &[i64]) -> bool {
    let w = diag.len();
    let n = w + 1;
    let mut gens: Vec<Vec<TruncSeries>> = (0..w)
        .map(|c| {
            let mut g: Vec<TruncSeries> = (0..w).map(|r| h[r][c].clone()).collect();
            g.push(ring.zero());
            g
        })
        .collect();
    let mut e0 = vec![ring.zero(); n];
    e0[w] = ring.one();
    gens.push(e0);
    gens.iter().all(|g| {
        let y = crate::algebra::mat_vec(ring, m, g);
        let e0_ok = y[w].is_zero() || y[w].val().map_or(true, |v| v >= 0);
        e0_ok && in_lattice(ring, h, diag, &y[..w])
    })
}

/// `#X_i = m_{v(A)−i}` for every `i`.
pub fn orbit_matches(x: &BTreeMap<i64, u64>, m: &[u64], v_a: i64) -> bool {
    let mut expected = BTreeMap::new();
    for (idx, &count) in m.iter().enumerate() {
        if count > 0 {
            expected.insert(v_a - idx as i64, count);
        }
    }
    let observed: BTreeMap<i64, u64> = x.iter().filter(|(_, &c)| c > 0).map(|(&i, &c)| (i, c)).collect();
    observed == expected
}

/// `v(A)` in the standard dual basis.
pub fn v_of_matrix(desc: &FieldDesc, a: &MatrixE) -> Result<i64> {
    let prec = a.prec().max(16);
    v_invariant(&desc.ext_ring(prec), &a.lift(prec)).map(|v| v.val)
}

/// Retries of every sampler before giving up.
pub const SAMPLER_RETRIES: usize = 64;

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_poly(rng: &mut ChaCha8Rng, q: u32, shift: i64, len: usize, prec: i64) -> TruncSeries {
    let coeffs: Vec<Fq> = (0..len).map(|_| rng.gen_range(0..q)).collect();
    TruncSeries::from_laurent(shift, &coeffs, prec)
}

fn random_unit(rng: &mut ChaCha8Rng, q: u32, len: usize, prec: i64) -> TruncSeries {
    let mut coeffs: Vec<Fq> = (0..len.max(1)).map(|_| rng.gen_range(0..q)).collect();
    coeffs[0] = rng.gen_range(1..q);
    TruncSeries::from_laurent(0, &coeffs, prec)
}

/// `x_i = j^{−i} y_i`: from `O_F`-coordinates to parity-correct invariants.
fn from_real_coordinates(desc: &FieldDesc, c: &[TruncSeries], beta: &[TruncSeries], prec: i64) -> Result<InvariantPair> {
    let ring = desc.ext_ring(prec);
    let jinv = ring.inv(&ring.j())?;
    let mut jp = ring.one();
    let mut a = Vec::with_capacity(c.len());
    let mut b = Vec::with_capacity(beta.len());
    for i in 0..c.len() {
        b.push(ring.mul_base(&jp, &beta[i]));
        jp = ring.mul(&jp, &jinv);
        a.push(ring.mul_base(&jp, &c[i]));
    }
    InvariantPair::new(desc.clone(), a, b)
}

fn regular_with_target(pair: &InvariantPair, target: u32) -> bool {
    matches!(
        strong_regularity_exact(pair),
        Ok(r) if r.strongly_regular && r.val_delta == Some(target as i64)
    )
}

/// A seeded strongly regular pair with `val Δ = target`.
pub fn rand_invariants(n: usize, desc: &FieldDesc, target: u32, seed: u64) -> Result<InvariantPair> {
    let mut rng = rng_for(seed, n as u64 * 1000 + target as u64);
    let q = desc.q();
    let prec = 2 * target as i64 + 8;
    for _ in 0..SAMPLER_RETRIES {
        let c: Vec<TruncSeries> = (0..n)
            .map(|_| {
                let shift = [0, 0, 0, 1, 2][rng.gen_range(0..5)];
                random_poly(&mut rng, q, shift, 3, prec)
            })
            .collect();
        let beta: Vec<TruncSeries> = (0..n)
            .map(|i| {
                let shift = rng.gen_range(0..=target as i64);
                if i == 0 && n == 1 {
                    let u = random_unit(&mut rng, q, 3, prec);
                    desc.series_ring(prec).shift_by(&u, target as i64)
                } else {
                    random_poly(&mut rng, q, shift, 3, prec)
                }
            })
            .collect();
        let pair = from_real_coordinates(desc, &c, &beta, prec)?;
        if regular_with_target(&pair, target) {
            return Ok(pair);
        }
    }
    Err(Error::TargetUnreachable {
        target,
        retries: SAMPLER_RETRIES,
    })
}

/// A seeded strongly regular pair with `val Δ ≤ max_val`. The first target
/// tried is `seed mod (max_val + 1)`; unreachable targets move on to the next.
pub fn sample_pair(n: usize, desc: &FieldDesc, max_val: u32, seed: u64) -> Result<InvariantPair> {
    let first = (seed % (max_val as u64 + 1)) as u32;
    let mut last = None;
    for step in 0..=max_val {
        let target = (first + step) % (max_val + 1);
        match rand_invariants(n, desc, target, seed) {
            Ok(pair) => return Ok(pair),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one target"))
}

/// A pair whose order `R_a` is a DVR, with the data the closed form needs.
#[derive(Clone, Debug)]
pub struct DvrInstance {
    pub pair: InvariantPair,
    /// `leng_{R_a}(R_a^∨ : R_a)`.
    pub d: u32,
    pub residue_deg: u32,
}

/// `β_m = φ(u·w·s^m)` where `φ` reads the coefficient of `s^{n−1}` modulo
/// `P_c`. `φ` generates the dual of `O_F[s]/P_c`, so `R^∨ = (uw)^{−1}R`.
fn twisted_moments(ring: &SeriesRing, c: &[TruncSeries], uw: &[TruncSeries]) -> Vec<TruncSeries> {
    let n = c.len();
    let low = monic_low(ring, c);
    let mut x = uw.to_vec();
    x.resize(n, ring.zero());
    let mut s = vec![ring.zero(); n];
    if n > 1 {
        s[1] = ring.one();
    } else {
        s[0] = c[0].clone();
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x[n - 1].clone());
        x = mul_mod_monic(ring, &x, &s, &low);
    }
    out
}

/// Totally ramified family: `P_c` Eisenstein, `R_a` a DVR of residue degree 1
/// with uniformizer `s`, and `b' = φ(u s^d ·)`, so `val Δ = d`.
pub fn eisenstein_family(n: usize, desc: &FieldDesc, d: u32, seed: u64) -> Result<DvrInstance> {
    let mut rng = rng_for(seed, 0xE15E + n as u64 * 31 + d as u64);
    let q = desc.q();
    let prec = (2 * d as i64 + 8) * n as i64;
    let ring = desc.series_ring(prec);
    for _ in 0..SAMPLER_RETRIES {
        let c: Vec<TruncSeries> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    ring.shift_by(&random_unit(&mut rng, q, 2, prec), 1)
                } else {
                    random_poly(&mut rng, q, 1, 2, prec)
                }
            })
            .collect();
        let low = monic_low(&ring, &c);
        let mut u: Vec<TruncSeries> = (0..n).map(|_| random_poly(&mut rng, q, 0, 2, prec)).collect();
        u[0] = random_unit(&mut rng, q, 2, prec);
        // u·s^d reduced modulo P_c.
        let mut sd = vec![ring.one()];
        let s = if n > 1 {
            let mut v = vec![ring.zero(); n];
            v[1] = ring.one();
            v
        } else {
            vec![c[0].clone()]
        };
        for _ in 0..d {
            sd = mul_mod_monic(&ring, &sd, &s, &low);
        }
        let uw = mul_mod_monic(&ring, &u, &sd, &low);
        let beta = twisted_moments(&ring, &c, &uw);
        let pair = from_real_coordinates(desc, &c, &beta, prec)?;
        if regular_with_target(&pair, d) {
            return Ok(DvrInstance { pair, d, residue_deg: 1 });
        }
    }
    Err(Error::TargetUnreachable {
        target: d,
        retries: SAMPLER_RETRIES,
    })
}

/// Unramified family, `n = 2`: `P_c` irreducible modulo `ϖ`, so `R_a` is the
/// unramified quadratic extension of `O_F`, and `b' = φ(u ϖ^d ·)`, giving
/// `val Δ = 2d`.
pub fn unramified_family(desc: &FieldDesc, d: u32, seed: u64) -> Result<DvrInstance> {
    let mut rng = rng_for(seed, 0xC0DE + d as u64);
    let k = desc.residue_field();
    let q = desc.q();
    let prec = 4 * d as i64 + 12;
    let ring = desc.series_ring(prec);
    for _ in 0..SAMPLER_RETRIES {
        let (c1, c2) = (rng.gen_range(0..q), rng.gen_range(0..q));
        // s² − c1 s + c2 is irreducible iff c1² − 4c2 is a nonsquare.
        let disc = k.sub(k.mul(c1, c1), k.mul(k.from_int(4), c2));
        if k.legendre(disc) != -1 {
            continue;
        }
        let mut c = vec![random_poly(&mut rng, q, 1, 2, prec), random_poly(&mut rng, q, 1, 2, prec)];
        c[0] = ring.add(&c[0], &ring.constant(c1));
        c[1] = ring.add(&c[1], &ring.constant(c2));
        let u = loop {
            let u = vec![random_poly(&mut rng, q, 0, 2, prec), random_poly(&mut rng, q, 0, 2, prec)];
            if u[0].val() == Some(0) || u[1].val() == Some(0) {
                break u;
            }
        };
        let pd = ring.pow(&ring.uniformizer(), d);
        let uw: Vec<TruncSeries> = u.iter().map(|x| ring.mul(x, &pd)).collect();
        let beta = twisted_moments(&ring, &c, &uw);
        let pair = from_real_coordinates(desc, &c, &beta, prec)?;
        if regular_with_target(&pair, 2 * d) {
            return Ok(DvrInstance { pair, d, residue_deg: 2 });
        }
    }
    Err(Error::TargetUnreachable {
        target: 2 * d,
        retries: SAMPLER_RETRIES,
    })
}

/// A seeded strongly regular `A = jM ∈ s_n(O_F)` with `val Δ ≤ max_val`.
pub fn rand_s_n_matrix(n: usize, desc: &FieldDesc, max_val: u32, seed: u64) -> Result<MatrixE> {
    let mut rng = rng_for(seed, 0x5A + n as u64);
    let q = desc.q();
    let prec = 2 * max_val as i64 + 12;
    let ring = desc.ext_ring(prec);
    for _ in 0..SAMPLER_RETRIES {
        let m: Matrix<TruncSeries> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let shift = [0, 0, 1, 2, 3][rng.gen_range(0..5)];
                        random_poly(&mut rng, q, shift, 3, prec)
                    })
                    .collect()
            })
            .collect();
        let a = MatrixE::imaginary(&ring, &m);
        let pair = invariants_of(desc, &a);
        if let Ok(r) = strong_regularity_exact(&pair) {
            if r.strongly_regular && r.val_delta.map_or(false, |v| v <= max_val as i64) {
                return Ok(a);
            }
        }
    }
    Err(Error::TargetUnreachable {
        target: max_val,
        retries: SAMPLER_RETRIES,
    })
}

/// `det` of a matrix over `F`; re-exported for oracles built on the order.
pub fn gram_det(ord: &OrderData) -> TruncSeries {
    det(&ord.ring(), &ord.gram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::build_hermitian_quotient;
    use crate::local_field::ExtRing;

    fn desc(p: u32, kind: ExtKind) -> FieldDesc {
        FieldDesc::new(p, 1, kind).unwrap()
    }

    fn n1(kind: ExtKind, val: usize) -> InvariantPair {
        let d = desc(3, kind);
        let ring = d.ext_ring(10);
        let mut c = vec![0; val + 1];
        c[val] = 1;
        let b0 = ring.from_base(&ring.base().from_coeffs(&c));
        InvariantPair::new(d, vec![ring.mul_base(&ring.j(), &ring.base().one())], vec![b0]).unwrap()
    }

    #[test]
    fn n1_examples() {
        let opts = VerifyOptions::default();
        let v = verify_count_identity(&n1(ExtKind::Inert, 2), &opts).unwrap();
        assert_eq!((v.signed_sum, v.selfdual, v.pass), (1, 1, true));
        let v = verify_count_identity(&n1(ExtKind::Inert, 1), &opts).unwrap();
        assert_eq!((v.signed_sum, v.selfdual, v.pass), (0, 0, true));
        assert_eq!(v.expected_relation, Relation::BothZero);
        let v = verify_count_identity(&n1(ExtKind::Split, 3), &opts).unwrap();
        assert_eq!(v.m, vec![1, 1, 1, 1]);
        assert_eq!((v.signed_sum, v.selfdual, v.pass), (4, 4, true));
    }

    #[test]
    fn n1_hermitian_quotient_has_dimension_four() {
        let pair = n1(ExtKind::Inert, 2);
        let ord = build_order(&pair).unwrap();
        let q = build_quotient(&ord).unwrap();
        let h = build_hermitian_quotient(&q, &pair.desc);
        assert_eq!(h.dim(), 4);
        assert!(check_hermitian(&h).is_empty());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(dvr_closed_form(2, 1, ExtKind::Inert), 1);
        assert_eq!(dvr_closed_form(3, 2, ExtKind::Inert), 4);
        assert_eq!(dvr_closed_form(3, 1, ExtKind::Split), 4);
    }

    #[test]
    fn pass_rule_cases() {
        assert!(pass_rule(1, 3, 3));
        assert!(!pass_rule(1, 2, 3));
        assert!(pass_rule(-1, 0, 0));
        assert!(!pass_rule(-1, 1, 1));
    }

    #[test]
    fn sampler_is_deterministic_and_parity_correct() {
        let d = desc(5, ExtKind::Inert);
        let a = rand_invariants(2, &d, 3, 11).unwrap();
        let b = rand_invariants(2, &d, 3, 11).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.b, b.b);
        a.validate().unwrap();
    }

    #[test]
    fn eisenstein_family_matches_closed_form() {
        let d = desc(5, ExtKind::Inert);
        for (n, dd) in [(2, 2), (2, 4), (3, 2)] {
            let inst = eisenstein_family(n, &d, dd, 3).unwrap();
            let v = verify_count_identity(&inst.pair, &VerifyOptions::default()).unwrap();
            assert_eq!(v.v, dd as i64);
            assert!(v.pass);
            assert_eq!(v.selfdual, dvr_closed_form(dd, 1, ExtKind::Inert));
        }
    }

    #[test]
    fn unramified_family_matches_closed_form() {
        let d = desc(3, ExtKind::Inert);
        for dd in 1..=3 {
            let inst = unramified_family(&d, dd, 5).unwrap();
            let v = verify_count_identity(&inst.pair, &VerifyOptions::default()).unwrap();
            assert_eq!(v.v, 2 * dd as i64);
            assert_eq!(v.selfdual, dvr_closed_form(dd, 2, ExtKind::Inert));
            assert_eq!(v.signed_sum, v.selfdual as i64);
        }
    }

    #[test]
    fn naive_oracles_agree_on_worked_example() {
        let d = desc(3, ExtKind::Inert);
        let ring: ExtRing = d.ext_ring(10);
        let a2 = ring.from_base(&ring.base().from_coeffs(&[0, 0, 2]));
        let pair = InvariantPair::new(d.clone(), vec![ring.zero(), a2], vec![ring.one(), ring.zero()]).unwrap();
        let q = build_quotient(&build_order(&pair).unwrap()).unwrap();
        let budget = Budget::default();
        assert_eq!(naive_subspace_oracle(&q.spec(), &budget).unwrap(), vec![1, 1, 1]);
        let h = build_hermitian_quotient(&q, &d);
        assert_eq!(naive_selfdual_oracle(&h, &budget).unwrap(), 1);
    }

    #[test]
    fn orbit_oracle_on_hand_matrix() {
        // M = [[1, ϖ], [ϖ², 0]]: v(A) = 2, val Δ = 3, one lattice per bucket.
        let d = desc(5, ExtKind::Inert);
        let ring = d.ext_ring(12);
        let b = ring.base().clone();
        let m = vec![
            vec![b.one(), b.from_coeffs(&[0, 1])],
            vec![b.from_coeffs(&[0, 0, 1]), b.zero()],
        ];
        let a = MatrixE::imaginary(&ring, &m);
        let x = matrix_orbit_oracle(&d, &a, &Budget::default()).unwrap();
        assert_eq!(x, BTreeMap::from([(-1, 1), (0, 1), (1, 1), (2, 1)]));
        let v = verify_count_identity(&invariants_of(&d, &a), &VerifyOptions::default()).unwrap();
        assert!(orbit_matches(&x, &v.m, v_of_matrix(&d, &a).unwrap()));
    }
}
