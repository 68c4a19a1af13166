//! Exact arithmetic in `F = F_q((ϖ))` and its unramified quadratic
//! extension `E`, at tracked finite precision.

mod ext;
mod residue;
mod series;

pub use ext::{
    sigma_and_imaginary, valuation_and_eta, EElem, ExtKind, ExtRing, FieldDesc, ImaginaryUnit,
};
pub use residue::{prime_power, Fq, ResidueField};
pub use series::{SeriesRing, TruncSeries, Valuation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A residue-field coefficient on the wire: the integer code, or its base-`p`
/// digit vector in the tower basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Code(u32),
    Digits(Vec<u32>),
}

/// `{"shift": s, "coeffs": [[c_0, c_1, ..], ..]}`, one inner array per
/// component: one for elements of `F`, two for elements of `E` (inert: the
/// coordinates in the basis `1, j`; split: the ordered pair of factors).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    #[serde(default)]
    pub shift: i64,
    pub coeffs: Vec<Vec<CoeffJson>>,
}

fn coeff_to_json(k: &ResidueField, c: Fq) -> CoeffJson {
    if k.m() == 1 {
        CoeffJson::Code(c)
    } else {
        CoeffJson::Digits(k.digits(c))
    }
}

fn coeff_from_json(k: &ResidueField, c: &CoeffJson) -> Result<Fq> {
    match c {
        CoeffJson::Code(x) if k.contains(*x) => Ok(*x),
        CoeffJson::Code(x) => Err(Error::Schema(format!("coefficient {x} is not in F_{}", k.q()))),
        CoeffJson::Digits(d) => k.from_digits(d),
    }
}

fn components_to_json(k: &ResidueField, parts: &[&TruncSeries]) -> SeriesJson {
    let nonzero: Vec<i64> = parts.iter().filter_map(|s| s.val()).collect();
    let prec = parts.iter().map(|s| s.prec()).min().unwrap_or(0);
    let shift = nonzero.iter().copied().min().unwrap_or(0).min(prec);
    let coeffs = parts
        .iter()
        .map(|s| {
            let last = s.degree().unwrap_or(shift - 1);
            (shift..=last)
                .map(|i| coeff_to_json(k, s.coeff(i).unwrap_or(0)))
                .collect()
        })
        .collect();
    SeriesJson { shift, coeffs }
}

fn component_from_json(k: &ResidueField, shift: i64, c: &[CoeffJson], prec: i64) -> Result<TruncSeries> {
    let coeffs = c
        .iter()
        .map(|x| coeff_from_json(k, x))
        .collect::<Result<Vec<_>>>()?;
    let prec = prec.max(shift + coeffs.len() as i64);
    Ok(TruncSeries::from_laurent(shift, &coeffs, prec))
}

impl SeriesJson {
    pub fn from_series(k: &ResidueField, s: &TruncSeries) -> Self {
        components_to_json(k, &[s])
    }

    pub fn from_eelem(desc: &FieldDesc, x: &EElem) -> Self {
        let k = desc.residue_field();
        match desc.kind() {
            ExtKind::Inert => components_to_json(k, &[&x.re, &x.im]),
            ExtKind::Split => {
                let (u, v) = desc.ext_ring(x.prec()).split_components(x);
                components_to_json(k, &[&u, &v])
            }
        }
    }

    /// Reads an element of `F`. Listed coefficients are exact; the value is
    /// known to at least `prec`.
    pub fn to_series(&self, k: &ResidueField, prec: i64) -> Result<TruncSeries> {
        match self.coeffs.as_slice() {
            [] => Ok(TruncSeries::zero(prec)),
            [c] => component_from_json(k, self.shift, c, prec),
            _ => Err(Error::Schema("element of F must have one component".into())),
        }
    }

    pub fn to_eelem(&self, desc: &FieldDesc, prec: i64) -> Result<EElem> {
        let k = desc.residue_field();
        let (a, b) = match self.coeffs.as_slice() {
            [] => (TruncSeries::zero(prec), TruncSeries::zero(prec)),
            [c] => (component_from_json(k, self.shift, c, prec)?, TruncSeries::zero(prec)),
            [c, d] => (
                component_from_json(k, self.shift, c, prec)?,
                component_from_json(k, self.shift, d, prec)?,
            ),
            _ => return Err(Error::Schema("element of E has at most two components".into())),
        };
        let p = a.prec().max(b.prec());
        let (a, b) = (a.lift(p), b.lift(p));
        Ok(match desc.kind() {
            ExtKind::Inert => EElem::new(a, b),
            ExtKind::Split => desc.ext_ring(p).from_split_components(&a, &b),
        })
    }
}
