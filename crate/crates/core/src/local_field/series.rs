//! Truncated Laurent series over the residue field.
//!
//! A [`TruncSeries`] is `ϖ^shift · (c_0 + c_1 ϖ + ..)`, known modulo
//! `ϖ^prec` with `prec = shift + coeffs.len()`. The representation is kept
//! canonical: either `coeffs` is empty (the value vanishes to precision and
//! `shift == prec`) or `coeffs[0] != 0`, so `shift` is the valuation.
//!
//! Precision propagates the usual way for relative-precision arithmetic:
//! sums keep the smaller absolute precision, products keep the smaller
//! relative precision.

use std::fmt;
use std::sync::Arc;

use super::residue::{Fq, ResidueField};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncSeries {
    shift: i64,
    coeffs: Vec<Fq>,
}

/// Valuation of a truncated element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// The element vanishes modulo `ϖ^N`.
    AtLeast(i64),
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl TruncSeries {
    /// Zero known modulo `ϖ^prec`.
    pub fn zero(prec: i64) -> Self {
        Self {
            shift: prec,
            coeffs: Vec::new(),
        }
    }

    /// `Σ coeffs[i] ϖ^(shift + i)` known modulo `ϖ^prec`; coefficients at or
    /// beyond the precision are dropped.
    pub fn from_laurent(shift: i64, coeffs: &[Fq], prec: i64) -> Self {
        let keep = (prec - shift).clamp(0, coeffs.len() as i64) as usize;
        let mut out = Self {
            shift,
            coeffs: coeffs[..keep].to_vec(),
        };
        out.coeffs.resize((prec - shift).max(0) as usize, 0);
        if prec < shift {
            out.shift = prec;
        }
        out.normalize();
        out
    }

    /// Power series `Σ coeffs[i] ϖ^i` known modulo `ϖ^prec`.
    pub fn from_coeffs(coeffs: &[Fq], prec: i64) -> Self {
        Self::from_laurent(0, coeffs, prec)
    }

    pub fn constant(c: Fq, prec: i64) -> Self {
        Self::from_coeffs(&[c], prec)
    }

    /// `c · ϖ^e` modulo `ϖ^prec`.
    pub fn monomial(c: Fq, e: i64, prec: i64) -> Self {
        Self::from_laurent(e, &[c], prec)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().take_while(|&&c| c == 0).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.shift += lead as i64;
        }
    }

    /// Absolute precision `N`: the value is known modulo `ϖ^N`.
    pub fn prec(&self) -> i64 {
        self.shift + self.coeffs.len() as i64
    }

    /// Number of known coefficients starting at the valuation.
    pub fn relative_prec(&self) -> i64 {
        self.coeffs.len() as i64
    }

    /// The `shift` field: the valuation, or the precision for a vanishing value.
    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Known coefficients starting at `ϖ^shift`.
    pub fn raw_coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    pub fn val(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.shift)
    }

    pub fn valuation(&self) -> Valuation {
        match self.val() {
            Some(v) => Valuation::Finite(v),
            None => Valuation::AtLeast(self.prec()),
        }
    }

    /// Coefficient of `ϖ^i`, or `None` past the precision.
    pub fn coeff(&self, i: i64) -> Option<Fq> {
        if i >= self.prec() {
            None
        } else if i < self.shift {
            Some(0)
        } else {
            Some(self.coeffs[(i - self.shift) as usize])
        }
    }

    /// True when the value vanishes modulo its precision.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.val() == Some(0)
    }

    pub fn is_integral(&self) -> bool {
        self.shift >= 0
    }

    /// Leading coefficient, if the value is nonzero.
    pub fn leading(&self) -> Option<Fq> {
        self.coeffs.first().copied()
    }

    /// Forget everything at or beyond `ϖ^prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec() {
            return self.clone();
        }
        Self::from_laurent(self.shift, &self.coeffs, prec)
    }

    /// Treat the known coefficients as an exact Laurent polynomial and pad
    /// with zeros up to `prec`. Never lowers the precision.
    pub fn lift(&self, prec: i64) -> Self {
        if prec <= self.prec() {
            return self.clone();
        }
        let mut out = self.clone();
        if out.coeffs.is_empty() {
            out.shift = prec;
        } else {
            out.coeffs.resize((prec - out.shift) as usize, 0);
        }
        out
    }

    /// Truncate or pad to exactly precision `prec`.
    pub fn with_prec(&self, prec: i64) -> Self {
        if prec <= self.prec() {
            self.truncate(prec)
        } else {
            self.lift(prec)
        }
    }

    /// Degree of the known part viewed as a Laurent polynomial.
    pub fn degree(&self) -> Option<i64> {
        let last = self.coeffs.iter().rposition(|&c| c != 0)?;
        Some(self.shift + last as i64)
    }

    /// Coefficients of `ϖ^from .. ϖ^(to-1)`; errors if any lies past the precision.
    pub fn coeff_range(&self, from: i64, to: i64) -> Result<Vec<Fq>> {
        (from..to)
            .map(|i| self.coeff(i).ok_or(Error::PrecisionExhausted))
            .collect()
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}·ϖ^{}", self.shift + i as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(ϖ^{})", self.prec())
    }
}

/// Arithmetic context for [`TruncSeries`]: the residue field plus the default
/// precision of constants it creates.
#[derive(Clone, Debug)]
pub struct SeriesRing {
    k: Arc<ResidueField>,
    prec: i64,
}

impl SeriesRing {
    pub fn new(k: Arc<ResidueField>, prec: i64) -> Self {
        Self { k, prec }
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.k
    }

    pub fn residue_field_arc(&self) -> &Arc<ResidueField> {
        &self.k
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn with_prec(&self, prec: i64) -> Self {
        Self {
            k: self.k.clone(),
            prec,
        }
    }

    pub fn zero(&self) -> TruncSeries {
        TruncSeries::zero(self.prec)
    }

    pub fn one(&self) -> TruncSeries {
        TruncSeries::constant(1, self.prec)
    }

    pub fn constant(&self, c: Fq) -> TruncSeries {
        TruncSeries::constant(c, self.prec)
    }

    pub fn from_int(&self, n: i64) -> TruncSeries {
        self.constant(self.k.from_int(n))
    }

    /// The uniformizer `ϖ`.
    pub fn uniformizer(&self) -> TruncSeries {
        TruncSeries::monomial(1, 1, self.prec)
    }

    pub fn from_coeffs(&self, coeffs: &[Fq]) -> TruncSeries {
        TruncSeries::from_coeffs(coeffs, self.prec)
    }

    pub fn add(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        let prec = a.prec().min(b.prec());
        let lo = a.shift.min(b.shift).min(prec);
        let len = (prec - lo) as usize;
        let mut coeffs = vec![0; len];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let e = lo + i as i64;
            *c = self.k.add(a.coeff(e).unwrap(), b.coeff(e).unwrap());
        }
        let mut out = TruncSeries { shift: lo, coeffs };
        out.normalize();
        out
    }

    pub fn neg(&self, a: &TruncSeries) -> TruncSeries {
        TruncSeries {
            shift: a.shift,
            coeffs: a.coeffs.iter().map(|&c| self.k.neg(c)).collect(),
        }
    }

    pub fn sub(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        let shift = a.shift + b.shift;
        let len = a.coeffs.len().min(b.coeffs.len());
        let mut coeffs = vec![0; len];
        for (i, &x) in a.coeffs.iter().take(len).enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().take(len - i).enumerate() {
                let t = self.k.mul(x, y);
                coeffs[i + j] = self.k.add(coeffs[i + j], t);
            }
        }
        if len == 0 {
            // One factor vanishes to precision: the product is known modulo
            // the smaller of the two absolute bounds.
            return TruncSeries::zero((a.prec() + b.shift).min(b.prec() + a.shift));
        }
        // Leading coefficients are nonzero, so the product stays canonical.
        TruncSeries { shift, coeffs }
    }

    pub fn scale(&self, c: Fq, a: &TruncSeries) -> TruncSeries {
        if c == 0 {
            return TruncSeries::zero(a.prec());
        }
        TruncSeries {
            shift: a.shift,
            coeffs: a.coeffs.iter().map(|&x| self.k.mul(c, x)).collect(),
        }
    }

    /// Multiply by `ϖ^e`.
    pub fn shift_by(&self, a: &TruncSeries, e: i64) -> TruncSeries {
        TruncSeries {
            shift: a.shift + e,
            coeffs: a.coeffs.clone(),
        }
    }

    pub fn pow(&self, a: &TruncSeries, e: u32) -> TruncSeries {
        let mut out = self.one().with_prec(a.prec().max(self.prec));
        for _ in 0..e {
            out = self.mul(&out, a);
        }
        out
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: &TruncSeries) -> Result<TruncSeries> {
        match a.val() {
            None => Err(Error::PrecisionExhausted),
            Some(0) => self.inv_laurent(a),
            Some(_) => Err(Error::NotAUnit),
        }
    }

    /// Inverse in the fraction field: `ϖ^-v` times the inverse unit part.
    pub fn inv_laurent(&self, a: &TruncSeries) -> Result<TruncSeries> {
        let c = &a.coeffs;
        if c.is_empty() {
            return Err(Error::PrecisionExhausted);
        }
        let c0 = self.k.inv(c[0]).expect("canonical leading coefficient");
        let mut b = vec![0; c.len()];
        b[0] = c0;
        for n in 1..c.len() {
            let mut acc = 0;
            for i in 1..=n {
                acc = self.k.add(acc, self.k.mul(c[i], b[n - i]));
            }
            b[n] = self.k.neg(self.k.mul(c0, acc));
        }
        Ok(TruncSeries {
            shift: -a.shift,
            coeffs: b,
        })
    }

    /// `a / b` in the fraction field.
    pub fn div(&self, a: &TruncSeries, b: &TruncSeries) -> Result<TruncSeries> {
        Ok(self.mul(a, &self.inv_laurent(b)?))
    }

    /// `a / b` when the quotient is integral.
    pub fn div_exact(&self, a: &TruncSeries, b: &TruncSeries) -> Result<TruncSeries> {
        let q = self.div(a, b)?;
        if q.shift < 0 {
            return Err(Error::NotAUnit);
        }
        Ok(q)
    }

    /// Principal part coefficients of `ϖ^-1, .., ϖ^-len` (index 0 is `ϖ^-1`).
    pub fn principal_part(&self, a: &TruncSeries, len: usize) -> Result<Vec<Fq>> {
        if a.prec() < 0 {
            return Err(Error::PrecisionExhausted);
        }
        Ok((1..=len as i64).map(|r| a.coeff(-r).unwrap_or(0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u32, prec: i64) -> SeriesRing {
        SeriesRing::new(Arc::new(ResidueField::new(p, 1).unwrap()), prec)
    }

    #[test]
    fn difference_of_squares() {
        let r = ring(5, 6);
        let a = r.from_coeffs(&[1, 1]);
        let b = r.from_coeffs(&[1, 4]);
        assert_eq!(r.mul(&a, &b), r.from_coeffs(&[1, 0, 4]));
    }

    #[test]
    fn geometric_inverse() {
        let r = ring(3, 4);
        let inv = r.inv(&r.from_coeffs(&[1, 1])).unwrap();
        assert_eq!(inv, TruncSeries::from_coeffs(&[1, 2, 1, 2], 4));
    }

    #[test]
    fn uniformizer_is_not_a_unit() {
        let r = ring(3, 4);
        assert_eq!(r.inv(&r.uniformizer()), Err(Error::NotAUnit));
        let laurent = r.inv_laurent(&r.uniformizer()).unwrap();
        assert_eq!(laurent.val(), Some(-1));
        assert_eq!(r.mul(&laurent, &r.uniformizer()), TruncSeries::constant(1, 3));
    }

    #[test]
    fn precision_propagation() {
        let r = ring(5, 8);
        let a = TruncSeries::from_coeffs(&[0, 0, 3, 1], 6); // val 2, prec 6
        let b = TruncSeries::from_coeffs(&[2, 1], 4); // unit, prec 4
        let p = r.mul(&a, &b);
        assert_eq!(p.prec(), 6); // min(6 + 0, 4 + 2)
        assert_eq!(r.add(&a, &b).prec(), 4);
        let z = TruncSeries::zero(3);
        assert_eq!(r.mul(&z, &a).prec(), 5); // 3 + 2
        assert!(r.mul(&z, &a).is_zero());
    }

    #[test]
    fn canonical_form_moves_zeros_into_shift() {
        let s = TruncSeries::from_coeffs(&[0, 0, 0, 1, 0, 1], 8);
        assert_eq!(s.shift(), 3);
        assert_eq!(s.val(), Some(3));
        assert_eq!(s.prec(), 8);
        assert_eq!(s.coeff(5), Some(1));
        assert_eq!(s.coeff(8), None);
        assert_eq!(TruncSeries::from_coeffs(&[0, 0], 2).valuation(), Valuation::AtLeast(2));
    }

    #[test]
    fn principal_parts() {
        let r = ring(5, 6);
        let x = TruncSeries::from_laurent(-2, &[3, 1, 4], 4);
        assert_eq!(r.principal_part(&x, 3).unwrap(), vec![1, 3, 0]);
    }

    #[test]
    fn exact_division_tracks_precision() {
        let r = ring(3, 10);
        let b = r.from_coeffs(&[0, 0, 1, 1]); // ϖ² (1 + ϖ)
        let a = r.mul(&b, &r.from_coeffs(&[2, 1]));
        let q = r.div_exact(&a, &b).unwrap();
        assert_eq!(q.truncate(8), TruncSeries::from_coeffs(&[2, 1], 8));
        assert_eq!(q.prec(), 8);
        assert_eq!(r.div_exact(&r.one(), &b), Err(Error::NotAUnit));
    }
}
