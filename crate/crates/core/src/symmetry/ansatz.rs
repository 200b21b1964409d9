//! Finite-dimensional symmetry search: expand the field coefficients over
//! all monomials `x1^i x2^j u^k` up to a degree cap, turn the symmetry
//! condition into an exact homogeneous linear system over the unknown
//! rational coefficients, and return a verified nullspace basis.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::{Atom, Expression, Monomial};
use crate::jet::{JetSpace, VectorField};
use crate::linalg;
use crate::symmetry::{PdeProblem, SymmetryError};

const DEGREE_CAP: u32 = 4;

/// A rational basis of the polynomial symmetry algebra found at a given
/// ansatz degree. Every basis field has zero residual and the basis is
/// linearly independent over the rationals.
#[derive(Clone, Debug)]
pub struct AnsatzSolution {
    pub degree: u32,
    pub basis: Vec<VectorField>,
}

impl AnsatzSolution {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Exponent triples `(i, j, k)` with `i + j + k <= degree`, in a fixed
/// deterministic order.
fn exponent_triples(degree: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for i in 0..=total {
            for j in 0..=(total - i) {
                out.push((i, j, total - i - j));
            }
        }
    }
    out
}

fn ansatz_monomial(space: &JetSpace, (i, j, k): (u32, u32, u32)) -> Expression {
    let x1 = Expression::symbol(space.var_name(0));
    let x2 = Expression::symbol(space.var_name(1));
    let u = Expression::symbol(space.dependent_name());
    &(&x1.pow(i) * &x2.pow(j)) * &u.pow(k)
}

pub(super) fn solve(problem: &PdeProblem, degree: u32) -> Result<AnsatzSolution, SymmetryError> {
    if degree > DEGREE_CAP {
        return Err(SymmetryError::DegreeCap(degree));
    }
    if !problem.params().is_empty() {
        let names: Vec<_> = problem.params().iter().map(|p| p.name.clone()).collect();
        return Err(SymmetryError::ParamNotConcrete(names.join(", ")));
    }

    let space = problem.space();
    let triples = exponent_triples(degree);
    let per_component = triples.len();
    let total_unknowns = 3 * per_component;

    // Unknown coefficient symbols c0..c(3N-1); parameters are gone from the
    // equation, so the names cannot collide with anything in scope.
    let unknown_name = |idx: usize| format!("c{idx}");
    let mut components = Vec::with_capacity(3);
    for comp in 0..3 {
        let mut sum = Expression::zero();
        for (slot, &triple) in triples.iter().enumerate() {
            let c = Expression::symbol(unknown_name(comp * per_component + slot));
            sum = &sum + &(&c * &ansatz_monomial(space, triple));
        }
        components.push(sum);
    }
    let field = VectorField::new(
        space,
        components[0].clone(),
        components[1].clone(),
        components[2].clone(),
    )?;

    let condition = problem.symmetry_condition(&field)?;

    // Collect rows: each monomial in the non-unknown atoms yields one linear
    // equation over the unknowns. The condition is linear homogeneous in the
    // field, so every term carries exactly one unknown to the first power.
    let mut rows: BTreeMap<Monomial, Vec<BigRational>> = BTreeMap::new();
    for (monomial, coeff) in condition.terms() {
        let mut unknown: Option<usize> = None;
        let mut key = Monomial::one();
        for (atom, exp) in monomial.factors() {
            let slot = atom
                .as_symbol()
                .and_then(|name| name.strip_prefix('c'))
                .and_then(|digits| digits.parse::<usize>().ok())
                .filter(|&idx| idx < total_unknowns);
            match slot {
                Some(idx) => {
                    if exp != 1 || unknown.is_some() {
                        return Err(SymmetryError::Internal(
                            "symmetry condition is not linear in the ansatz coefficients"
                                .to_string(),
                        ));
                    }
                    unknown = Some(idx);
                }
                None => key.insert(atom.clone(), exp),
            }
        }
        let Some(idx) = unknown else {
            return Err(SymmetryError::Internal(
                "symmetry condition has a term free of ansatz coefficients".to_string(),
            ));
        };
        let row = rows
            .entry(key)
            .or_insert_with(|| vec![BigRational::zero(); total_unknowns]);
        row[idx] += coeff;
    }

    let matrix: Vec<Vec<BigRational>> = rows.into_values().collect();
    let kernel = linalg::nullspace(&matrix, total_unknowns);

    let mut basis = Vec::with_capacity(kernel.len());
    for vector in kernel {
        let mut parts = Vec::with_capacity(3);
        for comp in 0..3 {
            let mut sum = Expression::zero();
            for (slot, &triple) in triples.iter().enumerate() {
                let c = &vector[comp * per_component + slot];
                if !c.is_zero() {
                    sum = &sum + &ansatz_monomial(space, triple).scale(c);
                }
            }
            parts.push(sum);
        }
        let candidate =
            VectorField::new(space, parts[0].clone(), parts[1].clone(), parts[2].clone())?;
        let check = problem.verify_generator(&candidate)?;
        if !check.is_symmetry {
            return Err(SymmetryError::Internal(format!(
                "nullspace vector failed re-verification with residual {}",
                check.residual
            )));
        }
        basis.push(candidate);
    }
    Ok(AnsatzSolution { degree, basis })
}

/// Coordinates of a polynomial vector field in the ansatz monomial basis of
/// a given degree, or `None` if a component is not a rational polynomial of
/// that degree. Used for exact rank and span comparisons between symmetry
/// algebras.
pub fn polynomial_coordinates(
    space: &JetSpace,
    field: &VectorField,
    degree: u32,
) -> Option<Vec<BigRational>> {
    let triples = exponent_triples(degree);
    let mut coords = Vec::with_capacity(3 * triples.len());
    for component in [&field.xi, &field.tau, &field.eta] {
        let mut by_monomial: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (monomial, coeff) in component.terms() {
            by_monomial.insert(monomial.clone(), coeff.clone());
        }
        let mut consumed = 0;
        for &triple in &triples {
            let mono_expr = ansatz_monomial(space, triple);
            let monomial = match mono_expr.terms().next() {
                Some((m, _)) => m.clone(),
                None => Monomial::one(),
            };
            match by_monomial.get(&monomial) {
                Some(c) => {
                    coords.push(c.clone());
                    consumed += 1;
                }
                None => coords.push(BigRational::zero()),
            }
        }
        if consumed != by_monomial.len() {
            return None; // component has monomials outside the ansatz basis
        }
    }
    Some(coords)
}

/// Exact span equality of two families of polynomial fields.
pub fn spans_match(
    space: &JetSpace,
    a: &[VectorField],
    b: &[VectorField],
    degree: u32,
) -> Option<bool> {
    let to_rows = |fields: &[VectorField]| -> Option<Vec<Vec<BigRational>>> {
        fields
            .iter()
            .map(|f| polynomial_coordinates(space, f, degree))
            .collect()
    };
    Some(linalg::same_span(&to_rows(a)?, &to_rows(b)?))
}
