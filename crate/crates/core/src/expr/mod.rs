//! Exact symbolic expression kernel.
//!
//! An [`Expression`] is a polynomial with arbitrary-precision rational
//! coefficients over a set of *atoms*: named symbols (`s`, `t`, `u`, `K`,
//! jet symbols such as `u_st`, opaque derivative symbols such as `eta_tu`)
//! and elementary-function applications (`sin(...)`, `cos(...)`) whose
//! arguments are themselves expressions.
//!
//! Expressions are kept in a canonical expanded normal form at all times:
//! a sum of terms, each term a rational coefficient times a monomial, with
//! monomials stored in a fixed total order and coefficients in lowest
//! terms. Two expressions are mathematically equal as polynomials over the
//! atoms iff they compare equal with `==`. Canonicalization therefore
//! happens at construction; every operation returns canonical output.
//!
//! No trigonometric identities are applied beyond `sin(0) = 0` and
//! `cos(0) = 1`: `sin u` and `cos u` are opaque atoms. Powers are
//! non-negative integers and division is restricted to rational constants,
//! which keeps the normal form a genuine polynomial ring and makes
//! coefficient extraction (`collect_monomials`) exact.

mod calculus;
mod display;

pub use calculus::{CollectError, EvalError};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Elementary functions understood by the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Func {
    Cos,
    Sin,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Cos => "cos",
            Func::Sin => "sin",
        }
    }

    pub(crate) fn eval(self, x: f64) -> f64 {
        match self {
            Func::Cos => x.cos(),
            Func::Sin => x.sin(),
        }
    }
}

/// An atomic factor: a named symbol or an elementary-function application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Symbol(String),
    Apply(Func, Arc<Expression>),
}

impl Atom {
    pub fn symbol(name: impl Into<String>) -> Self {
        Atom::Symbol(name.into())
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Atom::Symbol(name) => Some(name),
            Atom::Apply(..) => None,
        }
    }
}

/// Sort key for symbol names: `head` before the first underscore, then the
/// suffix by length, then lexicographically. This orders derivative-indexed
/// families naturally (`u < u_s < u_t < u_ss < u_st < u_tt`, and likewise
/// `xi < xi_s < ... < xi_uu`), which is what "jets sorted by order" means
/// for the canonical printer.
fn symbol_key(name: &str) -> (&str, usize, &str) {
    match name.split_once('_') {
        Some((head, suffix)) => (head, suffix.len() + 1, suffix),
        None => (name, 0, ""),
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::Symbol(a), Atom::Symbol(b)) => symbol_key(a)
                .cmp(&symbol_key(b))
                .then_with(|| a.cmp(b)),
            (Atom::Symbol(_), Atom::Apply(..)) => Ordering::Less,
            (Atom::Apply(..), Atom::Symbol(_)) => Ordering::Greater,
            (Atom::Apply(f, a), Atom::Apply(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A product of atoms with positive integer exponents. The empty monomial
/// is the constant `1`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Monomial {
    factors: BTreeMap<Atom, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(atom: Atom) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(atom, 1);
        Monomial { factors }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.values().sum()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Atom, u32)> {
        self.factors.iter().map(|(a, &k)| (a, k))
    }

    pub fn exponent(&self, atom: &Atom) -> u32 {
        self.factors.get(atom).copied().unwrap_or(0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        for (atom, &exp) in &other.factors {
            *factors.entry(atom.clone()).or_insert(0) += exp;
        }
        Monomial { factors }
    }

    pub(crate) fn insert(&mut self, atom: Atom, exp: u32) {
        if exp > 0 {
            *self.factors.entry(atom).or_insert(0) += exp;
        }
    }
}

/// Monomial order: compare sorted factor sequences lexicographically, with
/// higher powers of an equal atom first and longer products before their
/// prefixes. This yields the familiar `x^2 + x*y + x + 1` term layout and
/// puts the constant term last.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut lhs = self.factors.iter();
        let mut rhs = other.factors.iter();
        loop {
            match (lhs.next(), rhs.next()) {
                (Some((a, ka)), Some((b, kb))) => {
                    let ord = a.cmp(b).then_with(|| kb.cmp(ka));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                (Some(_), None) => return Ordering::Less,
                (None, Some(_)) => return Ordering::Greater,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A canonical symbolic expression: a rational-linear combination of
/// monomials. Immutable after construction and safe to share across
/// threads; all operations are pure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Expression {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Expression {
    pub fn zero() -> Self {
        Expression::default()
    }

    pub fn one() -> Self {
        Expression::from_rational(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Expression::from_rational(BigRational::from_integer(n.into()))
    }

    /// Exact rational constant `n/d`. Panics if `d == 0`.
    pub fn rational(n: i64, d: i64) -> Self {
        Expression::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Monomial::one(), r);
        }
        Expression { terms }
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        Expression::from_atom(Atom::symbol(name))
    }

    pub fn from_atom(atom: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::atom(atom), BigRational::one());
        Expression { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut acc = Expression::zero();
        for (m, c) in terms {
            acc.add_term(m, c);
        }
        acc
    }

    /// `sin` of an expression. `sin(0)` collapses to `0`; everything else
    /// becomes an opaque atom.
    pub fn sin(arg: Expression) -> Self {
        if arg.is_zero() {
            Expression::zero()
        } else {
            Expression::from_atom(Atom::Apply(Func::Sin, Arc::new(arg)))
        }
    }

    /// `cos` of an expression. `cos(0)` collapses to `1`.
    pub fn cos(arg: Expression) -> Self {
        if arg.is_zero() {
            Expression::one()
        } else {
            Expression::from_atom(Atom::Apply(Func::Cos, Arc::new(arg)))
        }
    }

    pub fn apply(func: Func, arg: Expression) -> Self {
        match func {
            Func::Sin => Expression::sin(arg),
            Func::Cos => Expression::cos(arg),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    /// The constant value if the expression is a rational constant.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self.terms.len() {
            0 => None, // zero handled by caller via is_zero
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then_some(c)
            }
            _ => None,
        }
    }

    /// Like [`as_rational`](Self::as_rational) but mapping zero to `0`.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_zero() {
            Some(BigRational::zero())
        } else {
            self.as_rational().cloned()
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Expression {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Division by a rational constant. Panics if `c == 0`; the parser and
    /// engine validate before calling.
    pub fn div_rational(&self, c: &BigRational) -> Expression {
        assert!(!c.is_zero(), "division by zero rational");
        self.scale(&c.recip())
    }

    /// Non-negative integer power by repeated multiplication.
    pub fn pow(&self, exp: u32) -> Expression {
        let mut result = Expression::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// All distinct atoms, including those nested inside function arguments.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        for m in self.terms.keys() {
            for (atom, _) in m.factors() {
                out.push(atom.clone());
                if let Atom::Apply(_, arg) = atom {
                    arg.collect_atoms(out);
                }
            }
        }
    }

    /// All distinct symbol names, including those inside function arguments.
    pub fn symbols(&self) -> Vec<String> {
        self.atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Symbol(name) => Some(name),
                Atom::Apply(..) => None,
            })
            .collect()
    }

    /// Whether `atom` occurs anywhere, including inside function arguments.
    pub fn contains_atom(&self, atom: &Atom) -> bool {
        self.terms.keys().any(|m| {
            m.factors().any(|(a, _)| {
                a == atom
                    || match a {
                        Atom::Apply(_, arg) => arg.contains_atom(atom),
                        Atom::Symbol(_) => false,
                    }
            })
        })
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.contains_atom(&Atom::symbol(name))
    }
}

impl Add for &Expression {
    type Output = Expression;

    fn add(self, rhs: &Expression) -> Expression {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Expression {
    type Output = Expression;

    fn sub(self, rhs: &Expression) -> Expression {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Expression {
    type Output = Expression;

    fn mul(self, rhs: &Expression) -> Expression {
        let mut out = Expression::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Expression {
    type Output = Expression;

    fn neg(self) -> Expression {
        Expression {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Expression> for Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                (&self).$method(rhs)
            }
        }
        impl $trait<Expression> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

/// Signed helper used by the printer and the reducers.
pub(crate) fn rational_is_negative(r: &BigRational) -> bool {
    r.is_negative()
}
