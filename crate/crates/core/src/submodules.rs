//! Enumeration of the submodules of a finite module `Q` presented as a
//! `k`-vector space with a nilpotent `ϖ` and further commuting operators.
//!
//! Search is breadth-first by dimension. From a stable `S`, every stable
//! `S' ⊋ S` that is minimal over `S` is `closure(S + x)` for some `x ∉ S` with
//! `ϖx ∈ S`, so adding one such line at a time reaches every submodule.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::kspace::{gaussian_binomial, projective_points, KMat, Subspace};
use crate::local_field::ResidueField;

/// Environment variable overriding the node cap.
pub const BUDGET_ENV: &str = "ORBITAL_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest `dim_k Q` the enumerator accepts.
    pub max_dim: usize,
    /// Candidate closures computed before giving up.
    pub max_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_dim: 12,
            max_nodes: 1_000_000,
        }
    }
}

impl Budget {
    /// The default budget, with the node cap taken from `ORBITAL_BUDGET` if set.
    pub fn from_env() -> Self {
        let mut b = Self::default();
        if let Some(n) = std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            b.max_nodes = n;
        }
        b
    }
}

/// A finite module: the ambient space, `ϖ`, and the other operators.
pub struct ModuleSpec<'a> {
    pub k: &'a ResidueField,
    pub dim: usize,
    pub nilpotent: &'a KMat,
    pub ops: Vec<&'a KMat>,
}

impl ModuleSpec<'_> {
    fn all_ops(&self) -> Vec<&KMat> {
        let mut v = vec![self.nilpotent];
        v.extend(self.ops.iter().copied());
        v
    }

    pub fn is_submodule(&self, s: &Subspace) -> bool {
        self.all_ops().iter().all(|op| s.is_stable(self.k, op))
    }

    fn over_budget(&self, budget: &Budget) -> Result<()> {
        if self.dim > budget.max_dim {
            return Err(Error::BudgetExceeded {
                estimate: subspace_estimate(self.k.q() as u64, self.dim),
            });
        }
        Ok(())
    }
}

/// Total number of subspaces of `k^dim`, an upper bound on the submodules.
pub fn subspace_estimate(q: u64, dim: usize) -> u128 {
    (0..=dim as u32)
        .map(|r| gaussian_binomial(q, dim as u32, r))
        .fold(0u128, u128::saturating_add)
}

fn search(
    spec: &ModuleSpec<'_>,
    form: Option<&KMat>,
    max_dim: usize,
    budget: &Budget,
) -> Result<Vec<Vec<Subspace>>> {
    spec.over_budget(budget)?;
    let k = spec.k;
    let ops = spec.all_ops();
    let mut levels: Vec<HashSet<Subspace>> = vec![HashSet::new(); spec.dim + 1];
    levels[0].insert(Subspace::zero(spec.dim));
    let mut nodes = 0usize;
    for d in 0..=max_dim.min(spec.dim) {
        let mut current: Vec<Subspace> = levels[d].iter().cloned().collect();
        current.sort();
        for s in current {
            let mut room = s.preimage(k, spec.nilpotent);
            if let Some(form) = form {
                room = room.intersect(k, &s.orthogonal(k, form));
            }
            let complement = s.complement_in(k, &room);
            for x in projective_points(k, &complement, spec.dim) {
                nodes += 1;
                if nodes > budget.max_nodes {
                    return Err(Error::BudgetExceeded {
                        estimate: subspace_estimate(k.q() as u64, spec.dim),
                    });
                }
                let next = s.closure(k, &[x], &ops);
                if next.dim() > max_dim {
                    continue;
                }
                if let Some(form) = form {
                    if !next.is_isotropic(k, form) {
                        continue;
                    }
                }
                levels[next.dim()].insert(next);
            }
        }
    }
    Ok(levels
        .into_iter()
        .map(|set| {
            let mut v: Vec<Subspace> = set.into_iter().collect();
            v.sort();
            v
        })
        .collect())
}

/// All submodules, grouped by dimension.
pub fn stable_subspaces(spec: &ModuleSpec<'_>, budget: &Budget) -> Result<Vec<Vec<Subspace>>> {
    search(spec, None, spec.dim, budget)
}

/// All submodules isotropic for `form`, up to dimension `max_dim`, grouped by
/// dimension.
pub fn isotropic_stable_subspaces(
    spec: &ModuleSpec<'_>,
    form: &KMat,
    max_dim: usize,
    budget: &Budget,
) -> Result<Vec<Vec<Subspace>>> {
    search(spec, Some(form), max_dim, budget)
}
