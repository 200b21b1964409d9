//! Differentiation, substitution, coefficient extraction, and numeric
//! evaluation on canonical expressions.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Atom, Expression, Func, Monomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CollectError {
    /// A basis atom occurs inside a function argument, so the expression is
    /// not polynomial in that atom (e.g. `sin(u_s)` with `u_s` in the basis).
    #[error("non-polynomial dependence on basis atom `{atom}` inside `{context}`")]
    NonPolynomial { atom: String, context: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
}

impl Expression {
    /// Partial derivative with respect to the symbol `name`, treating every
    /// other symbol (jet symbols included) as independent.
    pub fn differentiate(&self, name: &str) -> Expression {
        self.differentiate_with(&|sym| {
            if sym == name {
                Expression::one()
            } else {
                Expression::zero()
            }
        })
    }

    /// Chain-rule differentiation driven by a symbol-derivative rule: the
    /// derivative of each symbol atom is whatever `rule` returns, and
    /// `sin`/`cos` atoms differentiate through their arguments. The jet
    /// machinery builds total derivatives and derivatives of opaque
    /// coefficient functions on top of this.
    pub fn differentiate_with<F>(&self, rule: &F) -> Expression
    where
        F: Fn(&str) -> Expression,
    {
        let mut out = Expression::zero();
        for (monomial, coeff) in self.terms() {
            for (atom, exp) in monomial.factors() {
                let datom = atom_derivative(atom, rule);
                if datom.is_zero() {
                    continue;
                }
                // d(a^k * rest) = k a^(k-1) (da) * rest
                let mut rest = Monomial::one();
                for (other, oexp) in monomial.factors() {
                    if other == atom {
                        rest.insert(other.clone(), oexp - 1);
                    } else {
                        rest.insert(other.clone(), oexp);
                    }
                }
                let k = BigRational::from_integer((exp as i64).into());
                let term = Expression::from_terms([(rest, coeff * k)]);
                out = &out + &(&term * &datom);
            }
        }
        out
    }

    /// Replace every occurrence of `target` (a symbol or function atom) by
    /// `replacement`, descending into function arguments, and re-canonicalize.
    pub fn substitute(&self, target: &Atom, replacement: &Expression) -> Expression {
        let mut out = Expression::zero();
        for (monomial, coeff) in self.terms() {
            let mut term = Expression::from_rational(coeff.clone());
            for (atom, exp) in monomial.factors() {
                let factor = if atom == target {
                    replacement.clone()
                } else {
                    match atom {
                        Atom::Apply(func, arg) if arg.contains_atom(target) => {
                            Expression::apply(*func, arg.substitute(target, replacement))
                        }
                        _ => Expression::from_atom(atom.clone()),
                    }
                };
                term = &term * &factor.pow(exp);
            }
            out = &out + &term;
        }
        out
    }

    pub fn substitute_symbol(&self, name: &str, replacement: &Expression) -> Expression {
        self.substitute(&Atom::symbol(name), replacement)
    }

    /// Split the expression into (basis monomial, coefficient) pairs over the
    /// given atoms. The expression equals the sum of `monomial * coefficient`
    /// over the returned map, and no coefficient mentions a basis atom.
    ///
    /// Fails if a basis atom occurs inside a function argument, since the
    /// dependence is then not polynomial.
    pub fn collect_monomials(
        &self,
        basis: &BTreeSet<Atom>,
    ) -> Result<BTreeMap<Monomial, Expression>, CollectError> {
        let mut out: BTreeMap<Monomial, Expression> = BTreeMap::new();
        for (monomial, coeff) in self.terms() {
            let mut key = Monomial::one();
            let mut rest = Monomial::one();
            for (atom, exp) in monomial.factors() {
                if basis.contains(atom) {
                    key.insert(atom.clone(), exp);
                } else {
                    if let Atom::Apply(_, arg) = atom {
                        for b in basis {
                            if arg.contains_atom(b) {
                                return Err(CollectError::NonPolynomial {
                                    atom: b.to_string(),
                                    context: atom.to_string(),
                                });
                            }
                        }
                    }
                    rest.insert(atom.clone(), exp);
                }
            }
            let entry = out.entry(key).or_insert_with(Expression::zero);
            *entry = &*entry + &Expression::from_terms([(rest, coeff.clone())]);
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Floating-point evaluation with every symbol bound.
    pub fn evaluate_numeric(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for (monomial, coeff) in self.terms() {
            let mut value = coeff
                .to_f64()
                .expect("rational coefficient representable as f64");
            for (atom, exp) in monomial.factors() {
                let base = match atom {
                    Atom::Symbol(name) => *bindings
                        .get(name)
                        .ok_or_else(|| EvalError::UnboundSymbol(name.clone()))?,
                    Atom::Apply(func, arg) => func.eval(arg.evaluate_numeric(bindings)?),
                };
                value *= base.powi(exp as i32);
            }
            total += value;
        }
        Ok(total)
    }
}

fn atom_derivative<F>(atom: &Atom, rule: &F) -> Expression
where
    F: Fn(&str) -> Expression,
{
    match atom {
        Atom::Symbol(name) => rule(name),
        Atom::Apply(func, arg) => {
            let darg = arg.differentiate_with(rule);
            if darg.is_zero() {
                return Expression::zero();
            }
            let outer = match func {
                Func::Sin => Expression::cos(arg.as_ref().clone()),
                Func::Cos => -Expression::sin(arg.as_ref().clone()),
            };
            &outer * &darg
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(name: &str) -> Expression {
        Expression::symbol(name)
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let e = Expression::sin(sym("u"));
        assert_eq!(e.differentiate("u"), Expression::cos(sym("u")));
    }

    #[test]
    fn power_rule() {
        // d/ds (s^2 * t) = 2*s*t
        let e = &sym("s").pow(2) * &sym("t");
        let expected = (&sym("s") * &sym("t")).scale(&BigRational::from_integer(2.into()));
        assert_eq!(e.differentiate("s"), expected);
    }

    #[test]
    fn product_rule_with_parameters() {
        // d/du (K sin u + u cos u) = K cos u + cos u - u sin u
        let k = sym("K");
        let u = sym("u");
        let e = &(&k * &Expression::sin(u.clone())) + &(&u * &Expression::cos(u.clone()));
        let expected = &(&k * &Expression::cos(u.clone()))
            + &(&Expression::cos(u.clone()) - &(&u * &Expression::sin(u.clone())));
        assert_eq!(e.differentiate("u"), expected);
    }

    #[test]
    fn jet_symbols_differentiate_independently() {
        let e = &sym("u_s") * &sym("u_t");
        assert_eq!(e.differentiate("u_s"), sym("u_t"));
        assert!(e.differentiate("u_st").is_zero());
    }

    #[test]
    fn on_shell_substitution_kills_phi() {
        // u_st + K sin u  with  u_st := -K sin u
        let phi = &sym("u_st") + &(&sym("K") * &Expression::sin(sym("u")));
        let rhs = -(&sym("K") * &Expression::sin(sym("u")));
        assert!(phi.substitute_symbol("u_st", &rhs).is_zero());
    }

    #[test]
    fn identity_substitution() {
        let e = sym("x").pow(2);
        assert_eq!(e.substitute_symbol("x", &sym("x")), sym("x").pow(2));
    }

    #[test]
    fn annihilating_substitution_of_function_atom() {
        let sinu = Expression::sin(sym("u"));
        let cosu = Expression::cos(sym("u"));
        let e = &sinu * &cosu;
        let target = match sinu.atoms().first().cloned() {
            Some(atom) => atom,
            None => unreachable!(),
        };
        assert!(e.substitute(&target, &Expression::zero()).is_zero());
    }

    #[test]
    fn substitution_descends_into_arguments() {
        // sin(u) with u := 0 collapses to sin(0) = 0
        let e = Expression::sin(sym("u"));
        assert!(e.substitute_symbol("u", &Expression::zero()).is_zero());
        // cos(u) with u := 0 collapses to 1
        let e = Expression::cos(sym("u"));
        assert!(e.substitute_symbol("u", &Expression::zero()).is_one());
    }

    #[test]
    fn collect_quadratic() {
        // a*u_s^2 + b*u_s + c over {u_s}
        let us = Atom::symbol("u_s");
        let e = &(&sym("a") * &sym("u_s").pow(2)) + &(&(&sym("b") * &sym("u_s")) + &sym("c"));
        let basis: BTreeSet<Atom> = [us.clone()].into();
        let map = e.collect_monomials(&basis).unwrap();
        assert_eq!(map.len(), 3);
        let mut sq = Monomial::one();
        sq.insert(us.clone(), 2);
        assert_eq!(map[&sq], sym("a"));
        assert_eq!(map[&Monomial::atom(us)], sym("b"));
        assert_eq!(map[&Monomial::one()], sym("c"));
    }

    #[test]
    fn collect_zero_is_empty() {
        let basis: BTreeSet<Atom> = [Atom::symbol("u_s")].into();
        assert!(Expression::zero().collect_monomials(&basis).unwrap().is_empty());
    }

    #[test]
    fn collect_rejects_non_polynomial_dependence() {
        let e = Expression::sin(sym("u_s"));
        let basis: BTreeSet<Atom> = [Atom::symbol("u_s")].into();
        let err = e.collect_monomials(&basis).unwrap_err();
        assert!(matches!(err, CollectError::NonPolynomial { .. }));
    }

    #[test]
    fn collect_reassembles_exactly() {
        let e = &(&sym("s") * &sym("u_s").pow(2))
            + &(&(&Expression::sin(sym("u")) * &sym("u_t")) + &sym("K"));
        let basis: BTreeSet<Atom> = [Atom::symbol("u_s"), Atom::symbol("u_t")].into();
        let map = e.collect_monomials(&basis).unwrap();
        let mut back = Expression::zero();
        for (m, c) in &map {
            back = &back + &(&Expression::from_terms([(m.clone(), BigRational::one())]) * c);
        }
        assert_eq!(back, e);
    }

    #[test]
    fn numeric_evaluation() {
        let e = &sym("K") * &Expression::sin(sym("u"));
        let bindings: BTreeMap<String, f64> =
            [("K".to_string(), 1.0), ("u".to_string(), std::f64::consts::FRAC_PI_2)].into();
        assert!((e.evaluate_numeric(&bindings).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn numeric_curvature_ratio_at_flat_sample() {
        // K = -u_st / sin u, evaluated as a quotient of two expressions
        // (symbolic division is restricted to rational constants).
        let num = -sym("u_st");
        let den = Expression::sin(sym("u"));
        let bindings: BTreeMap<String, f64> =
            [("u_st".to_string(), 0.0), ("u".to_string(), std::f64::consts::FRAC_PI_2)].into();
        let k = num.evaluate_numeric(&bindings).unwrap() / den.evaluate_numeric(&bindings).unwrap();
        assert_eq!(k, 0.0);
    }

    #[test]
    fn unbound_symbol_is_an_error() {
        let e = &sym("s") + &sym("t");
        let bindings: BTreeMap<String, f64> = [("s".to_string(), 1.0)].into();
        assert_eq!(
            e.evaluate_numeric(&bindings),
            Err(EvalError::UnboundSymbol("t".to_string()))
        );
    }
}
