//! The determining-equation system: the raw coefficient list extracted
//! from the symmetry condition, a syntactic reduction pass, and an exact
//! solution-set equivalence check between reduced systems.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Signed;

use crate::expr::{Atom, Expression, Monomial};
use crate::jet::JetSpace;
use crate::linalg;

/// One extracted equation: the jet monomial and the coefficient that must
/// vanish identically in the base variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminingEquation {
    pub monomial: Monomial,
    pub coefficient: Expression,
}

/// The raw determining system, ordered by jet monomial. Coefficients are
/// expressions in the base variables and the opaque derivatives of the
/// generic field; none mentions a jet of order >= 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminingSystem {
    entries: Vec<DeterminingEquation>,
}

impl DeterminingSystem {
    pub(crate) fn from_collected(collected: BTreeMap<Monomial, Expression>) -> Self {
        let entries = collected
            .into_iter()
            .map(|(monomial, coefficient)| DeterminingEquation { monomial, coefficient })
            .collect();
        DeterminingSystem { entries }
    }

    pub fn equations(&self) -> &[DeterminingEquation] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coefficient_of(&self, monomial: &Monomial) -> Option<&Expression> {
        self.entries
            .iter()
            .find(|e| &e.monomial == monomial)
            .map(|e| &e.coefficient)
    }

    /// Apply the syntactic consequences: any equation that is a lone opaque
    /// derivative symbol forces that derivative (and every higher derivative
    /// of it) to zero, propagated through the remaining equations until no
    /// new forcing appears.
    pub fn reduce(&self, space: &JetSpace) -> ReducedSystem {
        let exprs: Vec<Expression> =
            self.entries.iter().map(|e| e.coefficient.clone()).collect();
        ReducedSystem::from_equations(space, exprs)
    }
}

/// A reduced system: a set of opaque derivatives forced to vanish plus the
/// surviving equations with those zeros substituted.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    space: JetSpace,
    zero_generators: Vec<(String, [u32; 3])>,
    equations: Vec<Expression>,
}

impl ReducedSystem {
    /// Build a reduced system directly from a list of equations (each of
    /// which must vanish identically).
    pub fn from_equations(space: &JetSpace, equations: Vec<Expression>) -> Self {
        let space = crate::jet::VectorField::generic_space(space);
        let mut zeros: Vec<(String, [u32; 3])> = Vec::new();
        let mut eqs = equations;
        loop {
            eqs = eqs
                .iter()
                .map(|e| zero_out(e, &zeros, &space))
                .filter(|e| !e.is_zero())
                .map(|e| normalize_sign(&e))
                .collect();
            eqs.sort();
            eqs.dedup();
            let forced = eqs.iter().find_map(|e| single_derivative(e, &space));
            match forced {
                Some(gen) if !implied_zero(&gen, &zeros) => zeros.push(gen),
                _ => break,
            }
        }
        zeros.sort();
        ReducedSystem { space, zero_generators: zeros, equations: eqs }
    }

    /// The minimal derivative symbols forced to zero, by name.
    pub fn forced_zero_names(&self) -> Vec<String> {
        self.zero_generators
            .iter()
            .map(|(base, counts)| self.space.unknown_name(base, *counts))
            .collect()
    }

    pub fn equations(&self) -> &[Expression] {
        &self.equations
    }

    /// Exact back-substitution check that two reduced systems cut out the
    /// same solution set: every constraint of each is a consequence of the
    /// other (zero propagation plus rational linear combination).
    pub fn equivalent_to(&self, other: &ReducedSystem) -> bool {
        self.implies(other) && other.implies(self)
    }

    /// Whether every constraint of `other` follows from this system.
    fn implies(&self, other: &ReducedSystem) -> bool {
        let mut targets: Vec<Expression> = other
            .zero_generators
            .iter()
            .map(|(base, counts)| Expression::symbol(self.space.unknown_name(base, *counts)))
            .collect();
        targets.extend(other.equations.iter().cloned());

        let own: Vec<Expression> = self
            .equations
            .iter()
            .map(|e| zero_out(e, &self.zero_generators, &self.space))
            .filter(|e| !e.is_zero())
            .collect();

        for target in targets {
            let reduced = zero_out(&target, &self.zero_generators, &self.space);
            if reduced.is_zero() {
                continue;
            }
            if !in_linear_span(&own, &reduced) {
                return false;
            }
        }
        true
    }
}

/// Substitute zero for every opaque derivative implied by the generators
/// (same base, componentwise greater-or-equal differentiation counts).
fn zero_out(e: &Expression, zeros: &[(String, [u32; 3])], space: &JetSpace) -> Expression {
    let mut out = e.clone();
    for sym in e.symbols() {
        if let Some((base, counts)) = space.parse_unknown(&sym) {
            if implied_zero(&(base, counts), zeros) {
                out = out.substitute_symbol(&sym, &Expression::zero());
            }
        }
    }
    out
}

fn implied_zero(candidate: &(String, [u32; 3]), zeros: &[(String, [u32; 3])]) -> bool {
    zeros.iter().any(|(base, counts)| {
        *base == candidate.0 && candidate.1.iter().zip(counts).all(|(c, z)| c >= z)
    })
}

/// Recognize an equation of the form `c * d` for a rational `c` and a lone
/// opaque derivative symbol `d`.
fn single_derivative(e: &Expression, space: &JetSpace) -> Option<(String, [u32; 3])> {
    let mut terms = e.terms();
    let (monomial, _) = terms.next()?;
    if terms.next().is_some() {
        return None;
    }
    let mut factors = monomial.factors();
    let (atom, exp) = factors.next()?;
    if factors.next().is_some() || exp != 1 {
        return None;
    }
    space.parse_unknown(atom.as_symbol()?)
}

/// Make the leading coefficient +1 for a deterministic presentation.
fn normalize_sign(e: &Expression) -> Expression {
    match e.terms().next() {
        Some((_, c)) => e.div_rational(&c.abs()).scale(&BigRational::from_integer(
            if c.is_negative() { (-1).into() } else { 1.into() },
        )),
        None => e.clone(),
    }
}

/// Exact membership of `target` in the rational row span of `rows`.
fn in_linear_span(rows: &[Expression], target: &Expression) -> bool {
    let mut monomials: Vec<Monomial> = Vec::new();
    for e in rows.iter().chain(std::iter::once(target)) {
        for (m, _) in e.terms() {
            if !monomials.contains(m) {
                monomials.push(m.clone());
            }
        }
    }
    let vectorize = |e: &Expression| -> Vec<BigRational> {
        monomials.iter().map(|m| e.coefficient(m)).collect()
    };
    let basis: Vec<Vec<BigRational>> = rows.iter().map(vectorize).collect();
    linalg::in_span(&basis, &vectorize(target))
}

/// Convenience wrapper over [`ReducedSystem::equivalent_to`] for two raw
/// equation lists.
pub fn systems_equivalent(space: &JetSpace, a: Vec<Expression>, b: Vec<Expression>) -> bool {
    ReducedSystem::from_equations(space, a).equivalent_to(&ReducedSystem::from_equations(space, b))
}

/// Substitute the actual derivatives of a concrete field for the opaque
/// derivative symbols of the generic one, so raw determining coefficients
/// can be evaluated at a candidate generator.
pub fn instantiate_at(
    space: &JetSpace,
    e: &Expression,
    field: &crate::jet::VectorField,
) -> Expression {
    let generic_space = crate::jet::VectorField::generic_space(space);
    let component = |base: &str| match base {
        "xi" => &field.xi,
        "tau" => &field.tau,
        _ => &field.eta,
    };
    let mut out = e.clone();
    for sym in e.symbols() {
        if let Some((base, counts)) = generic_space.parse_unknown(&sym) {
            let mut value = component(&base).clone();
            let letters =
                [space.var_name(0), space.var_name(1), space.dependent_name()];
            for (slot, letter) in letters.iter().enumerate() {
                for _ in 0..counts[slot] {
                    value = value.differentiate(letter);
                }
            }
            out = out.substitute_symbol(&sym, &value);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{JetSpace, VectorField};
    use crate::symmetry::PdeProblem;

    fn sym(name: &str) -> Expression {
        Expression::symbol(name)
    }

    fn sine_gordon() -> PdeProblem {
        let phi = &sym("u_st") + &(&sym("K") * &Expression::sin(sym("u")));
        PdeProblem::from_phi(JetSpace::st(), phi, None, &["K".to_string()]).unwrap()
    }

    fn jet_monomial(pairs: &[(&str, u32)]) -> Monomial {
        let mut m = Monomial::one();
        for (name, exp) in pairs {
            m.insert(Atom::symbol(*name), *exp);
        }
        m
    }

    #[test]
    fn raw_system_has_twelve_equations_with_known_monomials() {
        let p = sine_gordon();
        let system = p.determining_system(&VectorField::generic()).unwrap();
        assert_eq!(system.len(), 12);
        let monomials: Vec<Monomial> =
            system.equations().iter().map(|e| e.monomial.clone()).collect();
        for expected in [
            jet_monomial(&[("u_s", 2), ("u_t", 1)]),
            jet_monomial(&[("u_s", 2)]),
            jet_monomial(&[("u_ss", 1)]),
            jet_monomial(&[("u_ss", 1), ("u_t", 1)]),
            jet_monomial(&[("u_s", 1), ("u_t", 2)]),
            jet_monomial(&[("u_s", 1), ("u_tt", 1)]),
            jet_monomial(&[("u_tt", 1)]),
            jet_monomial(&[("u_t", 2)]),
            jet_monomial(&[("u_s", 1), ("u_t", 1)]),
            jet_monomial(&[("u_s", 1)]),
            jet_monomial(&[("u_t", 1)]),
            Monomial::one(),
        ] {
            assert!(monomials.contains(&expected), "missing monomial {expected}");
        }
    }

    #[test]
    fn simple_raw_coefficients_match_hand_derivation() {
        let p = sine_gordon();
        let system = p.determining_system(&VectorField::generic()).unwrap();
        let coeff = |pairs: &[(&str, u32)]| {
            system.coefficient_of(&jet_monomial(pairs)).cloned().unwrap()
        };
        assert_eq!(coeff(&[("u_ss", 1)]), -sym("xi_t"));
        assert_eq!(coeff(&[("u_ss", 1), ("u_t", 1)]), -sym("xi_u"));
        assert_eq!(coeff(&[("u_tt", 1)]), -sym("tau_s"));
        assert_eq!(coeff(&[("u_s", 1), ("u_tt", 1)]), -sym("tau_u"));
        assert_eq!(coeff(&[("u_s", 2), ("u_t", 1)]), -sym("xi_uu"));
        let expected = &(&sym("eta_uu") - &sym("xi_su")) - &sym("tau_tu");
        assert_eq!(coeff(&[("u_s", 1), ("u_t", 1)]), expected);
    }

    #[test]
    fn constant_coefficient_has_corrected_signs() {
        // eta_st - K eta_u sin u + K eta cos u + K xi_s sin u + K tau_t sin u
        let p = sine_gordon();
        let system = p.determining_system(&VectorField::generic()).unwrap();
        let sinu = Expression::sin(sym("u"));
        let cosu = Expression::cos(sym("u"));
        let k = sym("K");
        let expected = &(&sym("eta_st") - &(&(&k * &sym("eta_u")) * &sinu))
            + &(&(&(&k * &sym("eta")) * &cosu)
                + &(&(&(&k * &sym("xi_s")) * &sinu) + &(&(&k * &sym("tau_t")) * &sinu)));
        assert_eq!(system.coefficient_of(&Monomial::one()).unwrap(), &expected);
    }

    #[test]
    fn reduction_forces_the_function_dependencies() {
        let p = sine_gordon();
        let system = p.determining_system(&VectorField::generic()).unwrap();
        let reduced = system.reduce(p.space());
        assert_eq!(
            reduced.forced_zero_names(),
            vec!["eta_uu", "tau_s", "tau_u", "xi_t", "xi_u"]
        );
        assert_eq!(reduced.equations().len(), 3);
    }

    #[test]
    fn k_zero_specialization_drops_trigonometric_terms() {
        let p = sine_gordon()
            .bind_param("K", &BigRational::from_integer(0.into()))
            .unwrap();
        let system = p.determining_system(&VectorField::generic()).unwrap();
        assert_eq!(system.len(), 12);
        // spot-check three coefficients against the hand computation
        assert_eq!(
            system.coefficient_of(&jet_monomial(&[("u_s", 1)])).unwrap(),
            &(&sym("eta_tu") - &sym("xi_st"))
        );
        assert_eq!(
            system.coefficient_of(&jet_monomial(&[("u_t", 1)])).unwrap(),
            &(&sym("eta_su") - &sym("tau_st"))
        );
        assert_eq!(system.coefficient_of(&Monomial::one()).unwrap(), &sym("eta_st"));
    }

    #[test]
    fn instantiation_matches_direct_condition() {
        let p = sine_gordon();
        let system = p.determining_system(&VectorField::generic()).unwrap();
        let v = VectorField::new(p.space(), sym("s"), -sym("t"), Expression::zero()).unwrap();
        // reassemble sum(monomial * instantiated coefficient) and compare with
        // the directly computed condition
        let mut total = Expression::zero();
        for eq in system.equations() {
            let inst = instantiate_at(p.space(), &eq.coefficient, &v);
            let mono = Expression::from_terms([(
                eq.monomial.clone(),
                BigRational::from_integer(1.into()),
            )]);
            total = &total + &(&mono * &inst);
        }
        assert_eq!(total, p.symmetry_condition(&v).unwrap());
    }

    #[test]
    fn equivalence_is_a_congruence_not_syntactic_identity() {
        let space = JetSpace::st();
        // {xi_t, xi_u, eta_uu - xi_su} is equivalent to {xi_t, xi_u, eta_uu}
        let a = vec![sym("xi_t"), sym("xi_u"), &sym("eta_uu") - &sym("xi_su")];
        let b = vec![sym("xi_t"), sym("xi_u"), sym("eta_uu")];
        assert!(systems_equivalent(&space, a, b));
        // but not to a system missing the eta constraint
        let a = vec![sym("xi_t"), sym("xi_u"), sym("eta_uu")];
        let b = vec![sym("xi_t"), sym("xi_u")];
        assert!(!systems_equivalent(&space, a, b));
    }
}
