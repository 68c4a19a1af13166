//! The Hermitian side: `Q_E = Q ⊗_{O_F} O_E = Q ⊕ Q·j` with the Hermitian
//! pairing `⟨x, y⟩_E`, and the count of self-dual `R_E`-submodules.
//!
//! Vectors of `Q_E` are `(x₀, x₁)` meaning `x₀ + x₁ j`. The Hermitian pairing is
//! `⟨x₀, y₀⟩ − δ⟨x₁, y₁⟩ + (⟨x₁, y₀⟩ − ⟨x₀, y₁⟩)·j`. Orthogonals of
//! `ϖ`- and `j`-stable subspaces are computed with the `k`-bilinear residue of
//! the real part, `diag(B, −δB)`; for such subspaces the two notions agree.

use crate::error::Result;
use crate::kspace::{KMat, Subspace};
use crate::local_field::{ExtKind, FieldDesc, Fq, ResidueField};
use crate::order::FiniteQuotient;
use crate::submodules::{isotropic_stable_subspaces, stable_subspaces, Budget, ModuleSpec};

#[derive(Clone, Debug)]
pub struct HermQuotient {
    pub base: FiniteQuotient,
    pub kind: ExtKind,
    pub delta: Fq,
    pub p_op: KMat,
    pub ops: Vec<KMat>,
    /// Multiplication by `j`: `(x₀, x₁) ↦ (δx₁, x₀)`.
    pub j_op: KMat,
    pub form: KMat,
}

pub fn build_hermitian_quotient(q: &FiniteQuotient, desc: &FieldDesc) -> HermQuotient {
    let k = q.k();
    let v = q.dim();
    let z = KMat::zeros(v, v);
    let diag = |m: &KMat| KMat::blocks(m, &z, &z, m);
    let id = KMat::identity(v);
    let delta = desc.delta();
    HermQuotient {
        base: q.clone(),
        kind: desc.kind(),
        delta,
        p_op: diag(&q.p_op),
        ops: q.ops.iter().map(diag).collect(),
        j_op: KMat::blocks(&z, &id.scale(k, delta), &id, &z),
        form: KMat::blocks(&q.form, &z, &z, &q.form.scale(k, k.neg(delta))),
    }
}

impl HermQuotient {
    pub fn k(&self) -> &ResidueField {
        self.base.k()
    }

    pub fn dim(&self) -> usize {
        self.p_op.rows()
    }

    pub fn spec(&self) -> ModuleSpec<'_> {
        let mut ops: Vec<&KMat> = self.ops.iter().collect();
        ops.push(&self.j_op);
        ModuleSpec {
            k: self.k(),
            dim: self.dim(),
            nilpotent: &self.p_op,
            ops,
        }
    }

    /// Principal parts `(real, imaginary)` of `⟨x, y⟩_E`.
    pub fn herm(&self, x: &[Fq], y: &[Fq]) -> (Vec<Fq>, Vec<Fq>) {
        let k = self.k();
        let v = self.base.dim();
        let (x0, x1) = x.split_at(v);
        let (y0, y1) = y.split_at(v);
        let p = |a: &[Fq], b: &[Fq]| self.base.pair_vectors(a, b);
        let sub = |a: Vec<Fq>, b: Vec<Fq>| -> Vec<Fq> {
            a.iter().zip(&b).map(|(&s, &t)| k.sub(s, t)).collect()
        };
        let scaled = |a: Vec<Fq>| -> Vec<Fq> { a.iter().map(|&s| k.mul(self.delta, s)).collect() };
        let re = sub(p(x0, y0), scaled(p(x1, y1)));
        let im = sub(p(x1, y0), p(x0, y1));
        (re, im)
    }

    pub fn orthogonal(&self, s: &Subspace) -> Subspace {
        s.orthogonal(self.k(), &self.form)
    }

    pub fn is_self_dual(&self, s: &Subspace) -> bool {
        s.dim() * 2 == self.dim() && s.is_isotropic(self.k(), &self.form)
    }

    /// Embeds `x ∈ Q` as `x·e` for the idempotents `e = (1 ± j)/2` of the
    /// split algebra `O_E = O_F × O_F`.
    pub fn idempotent_image(&self, x: &[Fq], plus: bool) -> Vec<Fq> {
        let k = self.k();
        let half = k.inv(k.from_int(2)).expect("odd characteristic");
        let a: Vec<Fq> = x.iter().map(|&c| k.mul(half, c)).collect();
        let b: Vec<Fq> = if plus { a.clone() } else { a.iter().map(|&c| k.neg(c)).collect() };
        [a, b].concat()
    }
}

/// Self-dual `R_E`-submodules of `Q_E`.
pub fn selfdual_submodules(h: &HermQuotient, budget: &Budget) -> Result<Vec<Subspace>> {
    let half = h.dim() / 2;
    let mut levels = isotropic_stable_subspaces(&h.spec(), &h.form, half, budget)?;
    Ok(std::mem::take(&mut levels[half]))
}

/// `N`, the number of self-dual `R_E`-submodules.
pub fn count_selfdual(h: &HermQuotient, budget: &Budget) -> Result<u64> {
    Ok(selfdual_submodules(h, budget)?.len() as u64)
}

/// For split `E`: checks that `S ↦ S·e₁ ⊕ S^⊥·e₂` maps the submodules of `Q`
/// onto the self-dual submodules of `Q_E`.
pub fn split_factor_check(h: &HermQuotient, budget: &Budget) -> Result<bool> {
    let k = h.k();
    let q = &h.base;
    let mut images: Vec<Subspace> = stable_subspaces(&q.spec(), budget)?
        .into_iter()
        .flatten()
        .map(|s| {
            let dual = q.torsion_dual(&s);
            let mut vecs: Vec<Vec<Fq>> = s.basis().iter().map(|x| h.idempotent_image(x, true)).collect();
            vecs.extend(dual.basis().iter().map(|x| h.idempotent_image(x, false)));
            Subspace::span(k, h.dim(), vecs)
        })
        .collect();
    images.sort();
    let selfdual = selfdual_submodules(h, budget)?;
    Ok(images.len() == selfdual.len()
        && images.iter().all(|s| h.spec().is_submodule(s) && h.is_self_dual(s))
        && images == selfdual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::InvariantPair;
    use crate::order::{build_order, build_quotient};

    fn worked(kind: ExtKind) -> (FieldDesc, FiniteQuotient) {
        let d = FieldDesc::new(3, 1, kind).unwrap();
        let ring = d.ext_ring(10);
        let a2 = ring.from_base(&ring.base().from_coeffs(&[0, 0, 2]));
        let pair = InvariantPair::new(d.clone(), vec![ring.zero(), a2], vec![ring.one(), ring.zero()]).unwrap();
        let q = build_quotient(&build_order(&pair).unwrap()).unwrap();
        (d, q)
    }

    #[test]
    fn worked_example_counts_one() {
        for kind in [ExtKind::Inert, ExtKind::Split] {
            let (d, q) = worked(kind);
            let h = build_hermitian_quotient(&q, &d);
            let expected = if kind == ExtKind::Inert { 1 } else { 3 };
            assert_eq!(count_selfdual(&h, &Budget::default()).unwrap(), expected, "{kind}");
        }
    }

    #[test]
    fn hermitian_symmetry_and_sesquilinearity() {
        let (d, q) = worked(ExtKind::Inert);
        let h = build_hermitian_quotient(&q, &d);
        let k = h.k();
        let n = h.dim();
        let unit = |i: usize| -> Vec<Fq> { (0..n).map(|j| Fq::from(i == j)).collect() };
        let delta = h.delta;
        for a in 0..n {
            for b in 0..n {
                let (x, y) = (unit(a), unit(b));
                let (re, im) = h.herm(&x, &y);
                let (re2, im2) = h.herm(&y, &x);
                assert_eq!(re, re2);
                assert_eq!(im, im2.iter().map(|&c| k.neg(c)).collect::<Vec<_>>());
                // ⟨jx, y⟩ = j⟨x, y⟩ = δ·im + re·j.
                let (jre, jim) = h.herm(&h.j_op.mul_vec(k, &x), &y);
                assert_eq!(jre, im.iter().map(|&c| k.mul(delta, c)).collect::<Vec<_>>());
                assert_eq!(jim, re);
            }
        }
    }

    #[test]
    fn split_factorization() {
        let (d, q) = worked(ExtKind::Split);
        let h = build_hermitian_quotient(&q, &d);
        assert!(split_factor_check(&h, &Budget::default()).unwrap());
    }
}
