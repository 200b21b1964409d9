//! Canonical ASCII rendering. The printed form is deterministic, injective
//! on canonical expressions, and re-parseable by the expression grammar
//! whenever every symbol name is a plain identifier or jet symbol.

use std::fmt;

use num_traits::{One, Signed};

use super::{rational_is_negative, Atom, Expression, Monomial};

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Symbol(name) => write!(f, "{name}"),
            Atom::Apply(func, arg) => write!(f, "{}({})", func.name(), arg),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (atom, exp) in self.factors() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{atom}")?;
            if exp > 1 {
                write!(f, "^{exp}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (monomial, coeff) in self.terms() {
            let negative = rational_is_negative(coeff);
            if first {
                if negative {
                    write!(f, "-")?;
                }
                first = false;
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let magnitude = coeff.abs();
            if monomial.is_one() {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                write!(f, "{monomial}")?;
            } else {
                write!(f, "{magnitude}*{monomial}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::Expression;

    fn sym(name: &str) -> Expression {
        Expression::symbol(name)
    }

    #[test]
    fn prints_pde_in_fixed_order() {
        let phi = &sym("u_st") + &(&sym("K") * &Expression::sin(sym("u")));
        assert_eq!(phi.to_string(), "K*sin(u) + u_st");
    }

    #[test]
    fn prints_zero() {
        assert_eq!(Expression::zero().to_string(), "0");
    }

    #[test]
    fn prints_rational_coefficients_and_powers() {
        let e = &sym("s").pow(2).scale(&num_rational::BigRational::new(3.into(), 2.into()))
            - &Expression::rational(1, 3);
        assert_eq!(e.to_string(), "3/2*s^2 - 1/3");
    }

    #[test]
    fn leading_negative_term() {
        let e = -(&sym("u_s") * &sym("u_t"));
        assert_eq!(e.to_string(), "-u_s*u_t");
    }

    #[test]
    fn function_arguments_parenthesized() {
        let e = Expression::cos(&sym("s") + &sym("t"));
        assert_eq!(e.to_string(), "cos(s + t)");
    }
}
