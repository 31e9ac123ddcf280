// SPDX-License-Identifier: Apache-2.0

//! Exact search over convex combinations of the incidence lemma's inputs.
//!
//! The pinned derivation picks its weights by hand. This module asks the
//! converse question: among all convex combinations of the three multiplicity
//! bounds the lemma combines, with the ρ power removable and the mass power
//! fixed at 1/10, how large can the δ power be while the λ power stays at or
//! above −101/100? The feasible set is a polytope in the weight simplex, so the
//! optimum sits at a vertex; vertices are enumerated exactly.

use serde::{Deserialize, Serialize};

use super::{derive_lemma_incidence, DerivationError};
use crate::calculus::{drop_bounded, interpolate_many, Bound, Symbol};
use crate::rational::{rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpReport {
    /// Candidate bounds by name, in weight order.
    pub candidates: Vec<(String, Bound)>,
    pub weights: Vec<Rational>,
    pub combined: Bound,
    pub delta_exponent: Rational,
    /// Constraints active at the optimum.
    pub tight: Vec<String>,
    pub vertices_examined: usize,
    /// The optimum equals the δ power the pinned derivation reaches.
    pub matches_lemma: bool,
}

/// One linear constraint `coeffs · w (≥ or =) rhs`.
struct Row {
    name: String,
    coeffs: Vec<Rational>,
    rhs: Rational,
}

/// Solves a square system exactly; `None` when singular.
fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &a[col][c] * &f;
                a[r][c] = &a[r][c] - &v;
            }
            b[r] = &b[r] - &(&b[col] * &f);
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn dot(c: &[Rational], w: &[Rational]) -> Rational {
    c.iter().zip(w).map(|(x, y)| x * y).sum()
}

/// Picks `k` of `n` indices, in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Maximises `objective · w` over `eq` (equalities) and `ineq` (≥) by vertex enumeration.
/// Ties keep the first vertex found, so the result is deterministic.
fn maximise(objective: &[Rational], eq: &[Row], ineq: &[Row]) -> Option<(Vec<Rational>, Vec<String>, usize)> {
    let n = objective.len();
    let free = n.checked_sub(eq.len())?;
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    let mut examined = 0;
    for pick in subsets(ineq.len(), free) {
        let rows: Vec<&Row> = eq.iter().chain(pick.iter().map(|&i| &ineq[i])).collect();
        let Some(w) = solve(rows.iter().map(|r| r.coeffs.clone()).collect(), rows.iter().map(|r| r.rhs.clone()).collect())
        else {
            continue;
        };
        examined += 1;
        if ineq.iter().any(|r| dot(&r.coeffs, &w) < r.rhs) {
            continue;
        }
        let value = dot(objective, &w);
        if best.as_ref().map_or(true, |(v, _)| value > *v) {
            best = Some((value, w));
        }
    }
    let (_, w) = best?;
    let tight = ineq.iter().filter(|r| dot(&r.coeffs, &w) == r.rhs).map(|r| r.name.clone()).collect();
    Some((w, tight, examined))
}

/// Searches convex weights over the lemma's two routes (the second with its `A`
/// power dropped) and the trilinear bound.
pub fn optimise_delta_exponent() -> Result<LpReport, DerivationError> {
    let lemma = derive_lemma_incidence()?;
    let d = &lemma.derivation;
    let table = crate::calculus::SymbolTable::standard();
    let get = |id: &str| d.output(id).cloned().ok_or_else(|| DerivationError::UnknownInput(id.into()));
    let route2 = drop_bounded(&get("eq2")?, &Symbol::new("A"), &table)
        .map_err(|source| DerivationError::Calculus { step: "eq2".into(), source })?;
    let candidates = vec![("eq1".to_string(), get("eq1")?), ("eq2".to_string(), route2), ("gz".to_string(), get("gz")?)];
    let col = |s: &str| candidates.iter().map(|(_, b)| b.exponent(s)).collect::<Vec<_>>();
    let n = candidates.len();

    let eq = vec![
        Row { name: "weights sum to 1".into(), coeffs: vec![Rational::one(); n], rhs: Rational::one() },
        Row { name: "mass power 1/10".into(), coeffs: col("mass"), rhs: rat(1, 10) },
    ];
    let mut ineq: Vec<Row> = (0..n)
        .map(|i| {
            let mut c = vec![Rational::zero(); n];
            c[i] = Rational::one();
            Row { name: format!("w_{} >= 0", candidates[i].0), coeffs: c, rhs: Rational::zero() }
        })
        .collect();
    // a nonnegative ρ power can be dropped since ρ ≤ 1
    ineq.push(Row { name: "rho power >= 0".into(), coeffs: col("rho"), rhs: Rational::zero() });
    ineq.push(Row { name: "lambda power >= -101/100".into(), coeffs: col("lambda"), rhs: rat(-101, 100) });

    let (weights, tight, vertices_examined) =
        maximise(&col("delta"), &eq, &ineq).ok_or_else(|| DerivationError::Domain("infeasible weight polytope".into()))?;
    let bounds: Vec<Bound> = candidates.iter().map(|(_, b)| b.clone()).collect();
    let mut combined = interpolate_many(&bounds, &weights)
        .map_err(|source| DerivationError::Calculus { step: "lp".into(), source })?;
    if combined.exponent("rho").is_positive() {
        combined = drop_bounded(&combined, &Symbol::new("rho"), &table)
            .map_err(|source| DerivationError::Calculus { step: "lp".into(), source })?;
    }
    let delta_exponent = combined.exponent("delta");
    let matches_lemma = delta_exponent == lemma.multiplicity.exponent("delta");
    Ok(LpReport { candidates, weights, combined, delta_exponent, tight, vertices_examined, matches_lemma })
}
