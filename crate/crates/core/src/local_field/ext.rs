//! The quadratic étale extension `E/F`, split or inert.
//!
//! Both cases are written uniformly as `O_E = O_F ⊕ O_F·j` with `j² = δ` for a
//! constant `δ ∈ k^×`: inert takes `δ` a nonsquare (so the residue algebra is
//! `k' = k[x]/(x² − δ)`), split takes `δ = 1` with `j = (1, −1)` under the
//! idempotent decomposition. The Galois involution is `σ(x + yj) = x − yj`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::residue::{Fq, ResidueField};
use super::series::{SeriesRing, TruncSeries};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtKind {
    Split,
    Inert,
}

impl fmt::Display for ExtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtKind::Split => "split",
            ExtKind::Inert => "inert",
        })
    }
}

impl std::str::FromStr for ExtKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(ExtKind::Split),
            "inert" => Ok(ExtKind::Inert),
            other => Err(Error::Schema(format!("unknown extension kind {other:?}"))),
        }
    }
}

/// Residue field plus the choice of quadratic extension.
#[derive(Clone, Debug)]
pub struct FieldDesc {
    k: Arc<ResidueField>,
    kind: ExtKind,
    delta: Fq,
}

impl FieldDesc {
    pub fn new(p: u32, m: u32, kind: ExtKind) -> Result<Self> {
        let k = ResidueField::new(p, m)?;
        let delta = match kind {
            ExtKind::Inert => k.nonresidue(),
            ExtKind::Split => 1,
        };
        Ok(Self {
            k: Arc::new(k),
            kind,
            delta,
        })
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.k
    }

    pub fn p(&self) -> u32 {
        self.k.p()
    }

    pub fn m(&self) -> u32 {
        self.k.m()
    }

    pub fn q(&self) -> u32 {
        self.k.q()
    }

    pub fn kind(&self) -> ExtKind {
        self.kind
    }

    /// The residue constant `δ = j²`.
    pub fn delta(&self) -> Fq {
        self.delta
    }

    /// `η(ϖ)`: `−1` for the inert extension, `+1` when split.
    pub fn eta_uniformizer(&self) -> i8 {
        match self.kind {
            ExtKind::Inert => -1,
            ExtKind::Split => 1,
        }
    }

    pub fn series_ring(&self, prec: i64) -> SeriesRing {
        SeriesRing::new(self.k.clone(), prec)
    }

    pub fn ext_ring(&self, prec: i64) -> ExtRing {
        ExtRing {
            base: self.series_ring(prec),
            kind: self.kind,
            delta: self.delta,
        }
    }

    pub fn same_field(&self, other: &FieldDesc) -> bool {
        self.q() == other.q() && self.kind == other.kind
    }
}

/// Element `re + im·j` of `E`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EElem {
    pub re: TruncSeries,
    pub im: TruncSeries,
}

impl fmt::Debug for EElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) + ({:?})·j", self.re, self.im)
    }
}

impl EElem {
    pub fn new(re: TruncSeries, im: TruncSeries) -> Self {
        Self { re, im }
    }

    pub fn real(re: TruncSeries) -> Self {
        let prec = re.prec();
        Self {
            re,
            im: TruncSeries::zero(prec),
        }
    }

    pub fn prec(&self) -> i64 {
        self.re.prec().min(self.im.prec())
    }

    /// `min(val re, val im)`; this is the valuation of `O_E` in the inert
    /// case and the smaller component valuation in the split case.
    pub fn val(&self) -> Option<i64> {
        match (self.re.val(), self.im.val()) {
            (None, None) => None,
            (Some(a), None) => Some(a.min(self.im.prec())),
            (None, Some(b)) => Some(b.min(self.re.prec())),
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.re.is_integral() && self.im.is_integral()
    }

    pub fn lift(&self, prec: i64) -> Self {
        Self::new(self.re.lift(prec), self.im.lift(prec))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Self::new(self.re.truncate(prec), self.im.truncate(prec))
    }

    pub fn with_prec(&self, prec: i64) -> Self {
        Self::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn degree(&self) -> Option<i64> {
        match (self.re.degree(), self.im.degree()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Arithmetic context for [`EElem`].
#[derive(Clone, Debug)]
pub struct ExtRing {
    base: SeriesRing,
    kind: ExtKind,
    delta: Fq,
}

impl ExtRing {
    pub fn base(&self) -> &SeriesRing {
        &self.base
    }

    pub fn kind(&self) -> ExtKind {
        self.kind
    }

    pub fn delta(&self) -> Fq {
        self.delta
    }

    pub fn prec(&self) -> i64 {
        self.base.prec()
    }

    pub fn with_prec(&self, prec: i64) -> Self {
        Self {
            base: self.base.with_prec(prec),
            kind: self.kind,
            delta: self.delta,
        }
    }

    pub fn zero(&self) -> EElem {
        EElem::real(self.base.zero())
    }

    pub fn one(&self) -> EElem {
        EElem::real(self.base.one())
    }

    pub fn from_base(&self, x: &TruncSeries) -> EElem {
        EElem::new(x.clone(), TruncSeries::zero(x.prec()))
    }

    /// The purely imaginary unit `j`.
    pub fn j(&self) -> EElem {
        EElem::new(self.base.zero(), self.base.one())
    }

    pub fn add(&self, a: &EElem, b: &EElem) -> EElem {
        EElem::new(self.base.add(&a.re, &b.re), self.base.add(&a.im, &b.im))
    }

    pub fn sub(&self, a: &EElem, b: &EElem) -> EElem {
        EElem::new(self.base.sub(&a.re, &b.re), self.base.sub(&a.im, &b.im))
    }

    pub fn neg(&self, a: &EElem) -> EElem {
        EElem::new(self.base.neg(&a.re), self.base.neg(&a.im))
    }

    pub fn mul(&self, a: &EElem, b: &EElem) -> EElem {
        let r = &self.base;
        let re = r.add(
            &r.mul(&a.re, &b.re),
            &r.scale(self.delta, &r.mul(&a.im, &b.im)),
        );
        let im = r.add(&r.mul(&a.re, &b.im), &r.mul(&a.im, &b.re));
        EElem::new(re, im)
    }

    pub fn mul_base(&self, a: &EElem, x: &TruncSeries) -> EElem {
        EElem::new(self.base.mul(&a.re, x), self.base.mul(&a.im, x))
    }

    pub fn scale(&self, c: Fq, a: &EElem) -> EElem {
        EElem::new(self.base.scale(c, &a.re), self.base.scale(c, &a.im))
    }

    pub fn pow(&self, a: &EElem, e: u32) -> EElem {
        let mut out = self.one().with_prec(a.prec().max(self.prec()));
        for _ in 0..e {
            out = self.mul(&out, a);
        }
        out
    }

    pub fn sigma(&self, a: &EElem) -> EElem {
        EElem::new(a.re.clone(), self.base.neg(&a.im))
    }

    /// `x·σ(x) = re² − δ·im²`.
    pub fn norm(&self, a: &EElem) -> TruncSeries {
        let r = &self.base;
        r.sub(
            &r.mul(&a.re, &a.re),
            &r.scale(self.delta, &r.mul(&a.im, &a.im)),
        )
    }

    pub fn is_unit(&self, a: &EElem) -> bool {
        self.norm(a).is_unit()
    }

    pub fn inv(&self, a: &EElem) -> Result<EElem> {
        let n = self.norm(a);
        match n.val() {
            None if n.prec() <= 0 => Err(Error::PrecisionExhausted),
            None => Err(Error::NotAUnit),
            Some(0) => {
                let ninv = self.base.inv(&n)?;
                Ok(self.mul_base(&self.sigma(a), &ninv))
            }
            Some(_) => Err(Error::NotAUnit),
        }
    }

    /// `(x + σx)/2`, as an element of `F`.
    pub fn real_part(&self, a: &EElem) -> EElem {
        EElem::real(a.re.clone())
    }

    /// `(x − σx)/2`, the `E⁻` component.
    pub fn imaginary_part(&self, a: &EElem) -> EElem {
        EElem::new(TruncSeries::zero(a.im.prec()), a.im.clone())
    }

    /// True when `σ(a) = sign·a` to precision.
    pub fn has_parity(&self, a: &EElem, sign: i8) -> bool {
        if sign > 0 {
            a.im.is_zero()
        } else {
            a.re.is_zero()
        }
    }

    /// Components `(u, v)` under `E ≅ F × F` (split case): `u = re + im`,
    /// `v = re − im`.
    pub fn split_components(&self, a: &EElem) -> (TruncSeries, TruncSeries) {
        let r = &self.base;
        (r.add(&a.re, &a.im), r.sub(&a.re, &a.im))
    }

    pub fn from_split_components(&self, u: &TruncSeries, v: &TruncSeries) -> EElem {
        let r = &self.base;
        let half = r.residue_field().inv(2).expect("odd characteristic");
        EElem::new(
            r.scale(half, &r.add(u, v)),
            r.scale(half, &r.sub(u, v)),
        )
    }
}

/// Valuation and `η` of an element of `F`.
pub fn valuation_and_eta(
    x: &TruncSeries,
    kind: ExtKind,
) -> (super::series::Valuation, Result<i8>) {
    let valuation = x.valuation();
    let eta = match x.val() {
        None => Err(Error::EtaUndefined(x.prec())),
        Some(v) => Ok(match kind {
            ExtKind::Split => 1,
            ExtKind::Inert if v.rem_euclid(2) == 0 => 1,
            ExtKind::Inert => -1,
        }),
    };
    (valuation, eta)
}

/// A purely imaginary unit together with the involution it is adapted to.
#[derive(Clone, Debug)]
pub struct ImaginaryUnit {
    pub j: EElem,
}

impl ImaginaryUnit {
    pub fn j_squared(&self, ring: &ExtRing) -> TruncSeries {
        ring.mul(&self.j, &self.j).re
    }
}

/// The Galois involution of `E` and its purely imaginary unit `j`.
pub fn sigma_and_imaginary(desc: &FieldDesc, prec: i64) -> (impl Fn(&EElem) -> EElem, ImaginaryUnit) {
    let ring = desc.ext_ring(prec);
    let j = ring.j();
    (move |x: &EElem| ring.sigma(x), ImaginaryUnit { j })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(desc: &FieldDesc, c: &[Fq], prec: i64) -> TruncSeries {
        let _ = desc;
        TruncSeries::from_coeffs(c, prec)
    }

    #[test]
    fn sigma_negates_j() {
        for kind in [ExtKind::Inert, ExtKind::Split] {
            let desc = FieldDesc::new(5, 1, kind).unwrap();
            let (sigma, j) = sigma_and_imaginary(&desc, 6);
            let ring = desc.ext_ring(6);
            assert_eq!(sigma(&j.j), ring.neg(&j.j));
            assert!(ring.is_unit(&j.j));
            assert!(j.j_squared(&ring).is_unit());
        }
    }

    #[test]
    fn inert_j_is_residue_frobenius_antifixed() {
        // j^q = −j in k' = k[x]/(x² − d): compute by repeated multiplication.
        for p in [3u32, 5, 7, 11] {
            let desc = FieldDesc::new(p, 1, ExtKind::Inert).unwrap();
            let ring = desc.ext_ring(1);
            let jq = ring.pow(&ring.j(), p);
            assert_eq!(jq, ring.neg(&ring.j()));
            let k = desc.residue_field();
            let squares: Vec<Fq> = (1..p).map(|x| k.mul(x, x)).collect();
            assert!(!squares.contains(&desc.delta()));
        }
    }

    #[test]
    fn split_sigma_swaps_components() {
        let desc = FieldDesc::new(7, 1, ExtKind::Split).unwrap();
        let ring = desc.ext_ring(5);
        let u = series(&desc, &[1, 1], 5);
        let v = series(&desc, &[5], 5);
        let x = ring.from_split_components(&u, &v);
        let (su, sv) = ring.split_components(&ring.sigma(&x));
        assert_eq!((su, sv), (v, u));
        let j = ring.split_components(&ring.j());
        assert_eq!(j, (series(&desc, &[1], 5), series(&desc, &[6], 5)));
    }

    #[test]
    fn eta_examples() {
        let x = TruncSeries::from_coeffs(&[0, 0, 0, 1, 0, 1], 8);
        let (v, eta) = valuation_and_eta(&x, ExtKind::Inert);
        assert_eq!(v.finite(), Some(3));
        assert_eq!(eta, Ok(-1));
        assert_eq!(valuation_and_eta(&x, ExtKind::Split).1, Ok(1));
        let z = TruncSeries::zero(4);
        assert_eq!(valuation_and_eta(&z, ExtKind::Inert).1, Err(Error::EtaUndefined(4)));
    }

    #[test]
    fn unit_inverse() {
        for kind in [ExtKind::Inert, ExtKind::Split] {
            let desc = FieldDesc::new(3, 1, kind).unwrap();
            let ring = desc.ext_ring(6);
            let x = EElem::new(series(&desc, &[1, 2, 1], 6), series(&desc, &[0, 1], 6));
            let y = ring.inv(&x).unwrap();
            assert_eq!(ring.mul(&x, &y), ring.one());
            let not_unit = EElem::new(series(&desc, &[1], 6), series(&desc, &[1], 6));
            if kind == ExtKind::Split {
                // (1 + j) = (2, 0) in components.
                assert_eq!(ring.inv(&not_unit), Err(Error::NotAUnit));
            } else {
                assert!(ring.inv(&not_unit).is_ok());
            }
        }
    }
}
