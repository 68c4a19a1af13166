//! Instance files and machine-readable reports.
//!
//! Every document carries `"schema_version"`. Field elements use the series
//! schema of [`SeriesJson`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{build_group_order, lie_transport, transport_gram_check, verify_group};
use crate::hermitian::build_hermitian_quotient;
use crate::invariants::{invariants_of, InvariantPair, MatrixE};
use crate::local_field::{prime_power, ExtKind, FieldDesc, SeriesJson};
use crate::order::{build_order, build_quotient, enumerate_stable_submodules, OrderData};
use crate::verify::{
    matrix_orbit_oracle, naive_cost, naive_selfdual_oracle, naive_subspace_oracle, orbit_matches,
    v_of_matrix, verify_count_identity, verify_truncated, Verdict, VerifyOptions, NAIVE_MAX_DIM,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Naive scans visiting more subspaces than this are skipped by [`run_oracles`].
pub const NAIVE_SCAN_CAP: u128 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lie,
    Group,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Lie => "lie",
            Mode::Group => "group",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<SeriesJson>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub q: u32,
    pub p: u32,
    pub m: u32,
    pub ext: ExtKind,
    pub n: usize,
    /// Starting precision; the listed coefficients are exact.
    pub precision: i64,
    pub mode: Mode,
    pub a: Vec<SeriesJson>,
    pub b: Vec<SeriesJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A loaded and checked instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub mode: Mode,
    pub pair: InvariantPair,
    pub matrix: Option<MatrixE>,
    pub seed: Option<u64>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn desc(&self) -> Result<FieldDesc> {
        if prime_power(self.q as u64) != Some((self.p, self.m)) {
            return Err(Error::Schema(format!(
                "q = {} is not p^m for p = {}, m = {}",
                self.q, self.p, self.m
            )));
        }
        FieldDesc::new(self.p, self.m, self.ext)
    }

    /// Parses field elements and re-checks the constraints of the mode.
    pub fn load(&self) -> Result<Instance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported schema_version {}", self.schema_version)));
        }
        let desc = self.desc()?;
        let n = self.n;
        if n == 0 {
            return Err(Error::Schema("n must be positive".into()));
        }
        if self.a.len() != n || self.b.len() != n {
            return Err(Error::Dimension(format!(
                "a and b must have {n} entries, got {} and {}",
                self.a.len(),
                self.b.len()
            )));
        }
        if self.precision < 1 {
            return Err(Error::Schema("precision must be positive".into()));
        }
        let prec = self.precision;
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(i, x)| x.to_eelem(&desc, prec).map_err(|e| field_error(&format!("a[{}]", i + 1), e)))
            .collect::<Result<Vec<_>>>()?;
        let b = self
            .b
            .iter()
            .enumerate()
            .map(|(i, x)| x.to_eelem(&desc, prec).map_err(|e| field_error(&format!("b[{i}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        let pair = InvariantPair::new(desc.clone(), a, b)?;
        match self.mode {
            Mode::Lie => pair.validate()?,
            Mode::Group => {
                crate::group::theta_stability(&pair)?;
            }
        }
        let matrix = match &self.matrix {
            None => None,
            Some(m) => {
                if m.n != n || m.entries.len() != n || m.entries.iter().any(|r| r.len() != n) {
                    return Err(Error::Dimension(format!("matrix must be {n}×{n}")));
                }
                let entries = m
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, x)| {
                                x.to_eelem(&desc, prec)
                                    .map_err(|e| field_error(&format!("matrix[{i}][{j}]"), e))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(MatrixE::new(entries)?)
            }
        };
        Ok(Instance {
            mode: self.mode,
            pair,
            matrix,
            seed: self.seed,
        })
    }
}

fn field_error(field: &str, e: Error) -> Error {
    Error::Schema(format!("{field}: {e}"))
}

impl Instance {
    pub fn to_file(&self) -> InstanceFile {
        let desc = &self.pair.desc;
        let k = desc.residue_field();
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            q: k.q(),
            p: k.p(),
            m: k.m(),
            ext: desc.kind(),
            n: self.pair.n(),
            precision: self.pair.prec(),
            mode: self.mode,
            a: self.pair.a.iter().map(|x| SeriesJson::from_eelem(desc, x)).collect(),
            b: self.pair.b.iter().map(|x| SeriesJson::from_eelem(desc, x)).collect(),
            matrix: self.matrix.as_ref().map(|m| MatrixJson {
                n: m.n(),
                entries: m
                    .entries
                    .iter()
                    .map(|row| row.iter().map(|x| SeriesJson::from_eelem(desc, x)).collect())
                    .collect(),
            }),
            seed: self.seed,
        }
    }

    /// A Lie instance from a matrix in `s_n`; the matrix is kept for the
    /// orbit oracle.
    pub fn from_matrix(desc: &FieldDesc, a: MatrixE, mode: Mode, seed: Option<u64>) -> Self {
        Self {
            mode,
            pair: invariants_of(desc, &a),
            matrix: Some(a),
            seed,
        }
    }

    pub fn verify(&self, opts: &VerifyOptions) -> Result<Verdict> {
        match self.mode {
            Mode::Lie => verify_count_identity(&self.pair, opts),
            Mode::Group => verify_group(&self.pair, opts),
        }
    }

    /// The order the counts were computed from, at `prec`.
    fn order_at(&self, prec: i64) -> Result<OrderData> {
        let pair = self.pair.lift(prec).truncate(prec);
        match self.mode {
            Mode::Lie => build_order(&pair),
            Mode::Group => Ok(build_group_order(&pair)?.order),
        }
    }
}

/// A verdict document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictReport {
    pub schema_version: u32,
    pub mode: Mode,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl VerdictReport {
    pub fn new(mode: Mode, verdict: Verdict) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            mode,
            verdict,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleStatus {
    Agree,
    Disagree,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub status: OracleStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub verdict: Verdict,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_agree(&self) -> bool {
        self.checks.iter().all(|c| c.status != OracleStatus::Disagree)
    }
}

fn check(name: &str, agree: bool, detail: String) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        status: if agree { OracleStatus::Agree } else { OracleStatus::Disagree },
        detail,
    }
}

fn skipped(name: &str, detail: String) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        status: OracleStatus::Skipped,
        detail,
    }
}

/// Runs every oracle applicable to the instance against its verdict.
pub fn run_oracles(inst: &Instance, opts: &VerifyOptions) -> Result<OracleReport> {
    let budget = &opts.budget;
    let verdict = inst.verify(opts)?;
    let ord = inst.order_at(verdict.precision)?;
    let q = build_quotient(&ord)?;
    let mut checks = Vec::new();

    let counts = enumerate_stable_submodules(&q, budget)?;
    let k_q = q.k().q();
    if q.dim() <= NAIVE_MAX_DIM && naive_cost(k_q, q.dim()) <= NAIVE_SCAN_CAP {
        let naive = naive_subspace_oracle(&q.spec(), budget)?;
        checks.push(check(
            "naive_subspace_scan",
            naive == counts.m,
            format!("naive {naive:?}, enumerator {:?}", counts.m),
        ));
    } else {
        checks.push(skipped("naive_subspace_scan", format!("dim Q = {} too large", q.dim())));
    }

    let h = build_hermitian_quotient(&q, &ord.desc);
    if h.dim() <= NAIVE_MAX_DIM && naive_cost(k_q, h.dim()) <= NAIVE_SCAN_CAP {
        let naive = naive_selfdual_oracle(&h, budget)?;
        checks.push(check(
            "naive_selfdual_scan",
            naive == verdict.selfdual,
            format!("naive {naive}, enumerator {}", verdict.selfdual),
        ));
    } else {
        checks.push(skipped("naive_selfdual_scan", format!("dim Q_E = {} too large", h.dim())));
    }

    match (&inst.matrix, inst.mode) {
        (Some(a), Mode::Lie) if a.n() >= 2 => {
            let prec = a.prec();
            let same = invariants_of(&inst.pair.desc, a).truncate(prec);
            let given = inst.pair.lift(prec).truncate(prec);
            let matching = same.a == given.a && same.b == given.b;
            checks.push(check("matrix_invariants", matching, "invariants of the matrix vs a, b".into()));
            let x = matrix_orbit_oracle(&inst.pair.desc, a, budget)?;
            let v_a = v_of_matrix(&inst.pair.desc, a)?;
            checks.push(check(
                "matrix_orbit",
                orbit_matches(&x, &verdict.m, v_a),
                format!("X {x:?}, v(A) = {v_a}"),
            ));
        }
        (Some(_), Mode::Lie) => checks.push(skipped("matrix_orbit", "needs n ≥ 2".into())),
        _ => checks.push(skipped("matrix_orbit", "no matrix in the instance".into())),
    }

    if inst.mode == Mode::Group {
        let g = build_group_order(&inst.pair.lift(verdict.precision).truncate(verdict.precision))?;
        let t = lie_transport(&g, inst.seed.unwrap_or(0))?;
        let gram = transport_gram_check(&g, &t)?;
        checks.push(check("transport_gram", gram, "Cᵀ G C against the Lie Gram".into()));
        let lv = verify_truncated(&t.pair, budget)?;
        checks.push(check(
            "lie_transport",
            lv.m == verdict.m && lv.signed_sum == verdict.signed_sum && lv.selfdual == verdict.selfdual,
            format!("lie m {:?} N {}, group m {:?} N {}", lv.m, lv.selfdual, verdict.m, verdict.selfdual),
        ));
    }
    Ok(OracleReport {
        schema_version: SCHEMA_VERSION,
        verdict,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD_N1: &str = r#"{
        "schema_version": 1, "q": 3, "p": 3, "m": 1, "ext": "inert", "n": 1,
        "precision": 8, "mode": "lie",
        "a": [{"shift": 0, "coeffs": [[0], [1]]}],
        "b": [{"shift": 2, "coeffs": [[1]]}]
    }"#;

    fn with_real_a1(text: &str) -> String {
        text.replace(r#"[[0], [1]]"#, "[[1]]")
    }

    #[test]
    fn good_n1_passes() {
        let inst = InstanceFile::from_json(GOOD_N1).unwrap().load().unwrap();
        let v = inst.verify(&VerifyOptions::default()).unwrap();
        assert!(v.pass);
        assert_eq!(v.m, vec![1, 1, 1]);
    }

    #[test]
    fn round_trip() {
        let file = InstanceFile::from_json(GOOD_N1).unwrap();
        let inst = file.load().unwrap();
        let again = InstanceFile::from_json(&inst.to_file().to_json()).unwrap();
        let back = again.load().unwrap();
        assert_eq!(back.pair.a, inst.pair.a);
        assert_eq!(back.pair.b, inst.pair.b);
    }

    #[test]
    fn parity_violation_names_the_field() {
        // a_1 = 1 is real, but a_1 must be imaginary.
        let bad = with_real_a1(GOOD_N1);
        let err = InstanceFile::from_json(&bad).unwrap().load().unwrap_err();
        assert!(err.to_string().contains("a[1] parity"), "{err}");
    }

    #[test]
    fn q_must_match_p_and_m() {
        let bad = GOOD_N1.replace(r#""q": 3"#, r#""q": 9"#);
        let err = InstanceFile::from_json(&bad).unwrap().load().unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn group_n1_oracles() {
        // a_1 = 1 satisfies a_1 σ(a_1) = 1, so P_a = t − 1 is θ-stable.
        let text = with_real_a1(GOOD_N1).replace(r#""mode": "lie""#, r#""mode": "group""#);
        let inst = InstanceFile::from_json(&text).unwrap().load().unwrap();
        let report = run_oracles(&inst, &VerifyOptions::default()).unwrap();
        assert!(report.all_agree(), "{report:?}");
        assert!(report.verdict.pass);
    }
}
