//! Jet-space machinery for one dependent variable over two independent
//! variables: multi-indices, jet symbols `u_J`, total derivatives, and
//! prolongation of point vector fields.
//!
//! Jet symbols are ordinary [`Expression`] symbols with a naming convention
//! owned by [`JetSpace`]: the dependent variable alone (`u`) for order zero,
//! then `u_` followed by the index letters in sorted order (`u_s`, `u_st`,
//! `u_stt`, ...). Mixed partials commute, so the sorted spelling is the
//! canonical one; `u_ts` is not recognized as a jet.
//!
//! Derivatives of unknown coefficient functions (the generic `xi`, `tau`,
//! `eta` of a symmetry ansatz) are likewise opaque symbols with sorted
//! index suffixes (`xi_s`, `eta_tu`, ...). Registering a base name with
//! [`JetSpace::with_unknowns`] makes the differential operators treat the
//! whole family as an unknown function of both base variables and the
//! dependent variable.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::{Atom, Expression};

/// Highest prolongation order the engine accepts. Second order covers the
/// point-symmetry analysis; the small cap keeps the symbol universe
/// auditable.
pub const MAX_PROLONGATION_ORDER: u32 = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JetError {
    #[error("prolongation order {0} exceeds the cap of {MAX_PROLONGATION_ORDER}")]
    OrderCap(u32),
    #[error("expression mentions jet variables of order {found}, above the prolonged order {max}")]
    OrderExceeded { found: u32, max: u32 },
    #[error("vector-field coefficient `{component}` mentions jet variable `{symbol}`")]
    JetInCoefficient { component: &'static str, symbol: String },
}

/// A sorted multi-index over the two independent variables, stored as the
/// count of each index letter. `(s,t)` and `(t,s)` are the same index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    counts: [u32; 2],
}

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex { counts: [0, 0] }
    }

    pub fn new(first: u32, second: u32) -> Self {
        MultiIndex { counts: [first, second] }
    }

    /// The order `k` of the index (number of differentiations).
    pub fn order(&self) -> u32 {
        self.counts[0] + self.counts[1]
    }

    pub fn count(&self, var: usize) -> u32 {
        self.counts[var]
    }

    /// The index extended by one differentiation in variable `var`.
    pub fn extended(&self, var: usize) -> Self {
        let mut counts = self.counts;
        counts[var] += 1;
        MultiIndex { counts }
    }

    /// Componentwise containment: `self` includes every differentiation of
    /// `other`.
    pub fn contains(&self, other: &MultiIndex) -> bool {
        self.counts[0] >= other.counts[0] && self.counts[1] >= other.counts[1]
    }

    pub fn minus(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.contains(other).then(|| MultiIndex {
            counts: [self.counts[0] - other.counts[0], self.counts[1] - other.counts[1]],
        })
    }

    /// Every index of order 1..=m, lowest order first.
    pub fn up_to_order(m: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for k in 1..=m {
            for second in 0..=k {
                out.push(MultiIndex::new(k - second, second));
            }
        }
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.counts[0].cmp(&self.counts[0]))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.counts[0], self.counts[1])
    }
}

/// Names and rules of a jet space: two single-letter independent variables,
/// one dependent variable, and optionally a set of opaque unknown
/// coefficient functions of `(x1, x2, u)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpace {
    vars: [char; 2],
    dependent: char,
    unknowns: BTreeSet<String>,
}

impl JetSpace {
    /// The standard `(s, t; u)` space of the symmetry analysis.
    pub fn st() -> Self {
        JetSpace { vars: ['s', 't'], dependent: 'u', unknowns: BTreeSet::new() }
    }

    /// The `(x, y; u)` space produced by the characteristic change of
    /// variables.
    pub fn xy() -> Self {
        JetSpace { vars: ['x', 'y'], dependent: 'u', unknowns: BTreeSet::new() }
    }

    pub fn with_unknowns<I, S>(mut self, bases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.unknowns = bases.into_iter().map(Into::into).collect();
        self
    }

    pub fn var(&self, i: usize) -> char {
        self.vars[i]
    }

    pub fn var_name(&self, i: usize) -> String {
        self.vars[i].to_string()
    }

    pub fn dependent_name(&self) -> String {
        self.dependent.to_string()
    }

    /// Canonical jet symbol name for a multi-index.
    pub fn jet_name(&self, idx: MultiIndex) -> String {
        if idx.order() == 0 {
            return self.dependent.to_string();
        }
        let mut name = String::with_capacity(2 + idx.order() as usize);
        name.push(self.dependent);
        name.push('_');
        for _ in 0..idx.count(0) {
            name.push(self.vars[0]);
        }
        for _ in 0..idx.count(1) {
            name.push(self.vars[1]);
        }
        name
    }

    pub fn jet_expr(&self, idx: MultiIndex) -> Expression {
        Expression::symbol(self.jet_name(idx))
    }

    /// Recognize a canonical jet symbol name. Unsorted spellings and
    /// foreign letters yield `None`.
    pub fn parse_jet(&self, name: &str) -> Option<MultiIndex> {
        let mut chars = name.chars();
        if chars.next()? != self.dependent {
            return None;
        }
        let rest = chars.as_str();
        if rest.is_empty() {
            return Some(MultiIndex::zero());
        }
        let suffix = rest.strip_prefix('_')?;
        if suffix.is_empty() {
            return None;
        }
        let mut counts = [0u32; 2];
        let mut seen_second = false;
        for c in suffix.chars() {
            if c == self.vars[0] {
                if seen_second {
                    return None; // unsorted spelling
                }
                counts[0] += 1;
            } else if c == self.vars[1] {
                seen_second = true;
                counts[1] += 1;
            } else {
                return None;
            }
        }
        Some(MultiIndex { counts })
    }

    /// Recognize a registered unknown-function symbol, returning the base
    /// name and its differentiation counts with respect to
    /// `(x1, x2, dependent)`.
    pub fn parse_unknown(&self, name: &str) -> Option<(String, [u32; 3])> {
        let (base, suffix) = match name.split_once('_') {
            Some((base, suffix)) => (base, suffix),
            None => (name, ""),
        };
        if !self.unknowns.contains(base) {
            return None;
        }
        let letters = [self.vars[0], self.vars[1], self.dependent];
        let mut counts = [0u32; 3];
        let mut level = 0usize;
        for c in suffix.chars() {
            let slot = letters.iter().position(|&l| l == c)?;
            if slot < level {
                return None; // unsorted spelling
            }
            level = slot;
            counts[slot] += 1;
        }
        Some((base.to_string(), counts))
    }

    pub fn unknown_name(&self, base: &str, counts: [u32; 3]) -> String {
        let letters = [self.vars[0], self.vars[1], self.dependent];
        let total: u32 = counts.iter().sum();
        if total == 0 {
            return base.to_string();
        }
        let mut name = String::from(base);
        name.push('_');
        for (slot, &letter) in letters.iter().enumerate() {
            for _ in 0..counts[slot] {
                name.push(letter);
            }
        }
        name
    }

    fn unknown_derivative(&self, base: &str, counts: [u32; 3], slot: usize) -> Expression {
        let mut next = counts;
        next[slot] += 1;
        Expression::symbol(self.unknown_name(base, next))
    }

    /// Highest jet order mentioned by an expression (0 when no jet symbol
    /// occurs).
    pub fn max_jet_order(&self, e: &Expression) -> u32 {
        e.symbols()
            .iter()
            .filter_map(|s| self.parse_jet(s))
            .map(|idx| idx.order())
            .max()
            .unwrap_or(0)
    }

    /// All jet multi-indices occurring in an expression.
    pub fn jets_in(&self, e: &Expression) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> =
            e.symbols().iter().filter_map(|s| self.parse_jet(s)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Partial derivative with respect to a coordinate name (a base
    /// variable, the dependent variable, or a jet symbol), treating jet
    /// symbols as independent coordinates. Registered unknown functions
    /// differentiate opaquely into their indexed derivative symbols.
    pub fn partial(&self, e: &Expression, coord: &str) -> Expression {
        let dep_slot = if coord.len() == 1 {
            let c = coord.chars().next().unwrap();
            [self.vars[0], self.vars[1], self.dependent]
                .iter()
                .position(|&l| l == c)
        } else {
            None
        };
        e.differentiate_with(&|sym: &str| {
            if sym == coord {
                return Expression::one();
            }
            if let Some((base, counts)) = self.parse_unknown(sym) {
                if let Some(slot) = dep_slot {
                    return self.unknown_derivative(&base, counts, slot);
                }
            }
            Expression::zero()
        })
    }

    /// The total derivative `D_i`: differentiates explicit occurrences of
    /// `x_i`, chains every jet symbol `u_J` to `u_{J,i}`, and chains
    /// unknown functions through both their explicit `x_i` slot and their
    /// dependence on `u`.
    pub fn total_derivative(&self, e: &Expression, var: usize) -> Expression {
        assert!(var < 2, "independent variable index out of range");
        let var_name = self.var_name(var);
        let first_jet = self.jet_expr(MultiIndex::zero().extended(var));
        e.differentiate_with(&|sym: &str| {
            if sym == var_name {
                return Expression::one();
            }
            if let Some(idx) = self.parse_jet(sym) {
                return self.jet_expr(idx.extended(var));
            }
            if let Some((base, counts)) = self.parse_unknown(sym) {
                let explicit = self.unknown_derivative(&base, counts, var);
                let through_u = self.unknown_derivative(&base, counts, 2);
                return &explicit + &(&through_u * &first_jet);
            }
            Expression::zero()
        })
    }

    /// `D_J`: total derivatives applied for each entry of the multi-index.
    pub fn total_derivative_multi(&self, e: &Expression, idx: MultiIndex) -> Expression {
        let mut out = e.clone();
        for var in 0..2 {
            for _ in 0..idx.count(var) {
                out = self.total_derivative(&out, var);
            }
        }
        out
    }

    /// Prolong a vector field to order `m`, producing the coefficient
    /// `phi^J` of `d/du_J` for every index of order 0..=m. The order-zero
    /// coefficient is `eta` itself.
    pub fn prolong(&self, field: &VectorField, m: u32) -> Result<ProlongedField, JetError> {
        if m == 0 || m > MAX_PROLONGATION_ORDER {
            return Err(JetError::OrderCap(m));
        }
        let u_first = self.jet_expr(MultiIndex::new(1, 0));
        let u_second = self.jet_expr(MultiIndex::new(0, 1));
        // characteristic: Q = eta - xi u_1 - tau u_2
        let q = &field.eta - &(&(&field.xi * &u_first) + &(&field.tau * &u_second));
        let mut coeffs = std::collections::BTreeMap::new();
        coeffs.insert(MultiIndex::zero(), field.eta.clone());
        for idx in MultiIndex::up_to_order(m) {
            let transported = &(&field.xi * &self.jet_expr(idx.extended(0)))
                + &(&field.tau * &self.jet_expr(idx.extended(1)));
            let phi = &self.total_derivative_multi(&q, idx) + &transported;
            coeffs.insert(idx, phi);
        }
        Ok(ProlongedField { field: field.clone(), order: m, space: self.clone(), coeffs })
    }
}

/// A point vector field `xi d/dx1 + tau d/dx2 + eta d/du` with coefficients
/// depending on the base variables only (never on jets of order >= 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub xi: Expression,
    pub tau: Expression,
    pub eta: Expression,
}

impl VectorField {
    pub fn new(
        space: &JetSpace,
        xi: Expression,
        tau: Expression,
        eta: Expression,
    ) -> Result<Self, JetError> {
        for (component, e) in [("xi", &xi), ("tau", &tau), ("eta", &eta)] {
            for sym in e.symbols() {
                if space.parse_jet(&sym).is_some_and(|idx| idx.order() >= 1) {
                    return Err(JetError::JetInCoefficient { component, symbol: sym });
                }
            }
        }
        Ok(VectorField { xi, tau, eta })
    }

    /// The fully generic field: opaque coefficient functions `xi`, `tau`,
    /// `eta` of `(x1, x2, u)`. Differential operators recognize them when
    /// the space is built with [`generic_space`](Self::generic_space).
    pub fn generic() -> Self {
        VectorField {
            xi: Expression::symbol("xi"),
            tau: Expression::symbol("tau"),
            eta: Expression::symbol("eta"),
        }
    }

    /// The jet space in which [`generic`](Self::generic) is understood.
    pub fn generic_space(space: &JetSpace) -> JetSpace {
        space.clone().with_unknowns(["xi", "tau", "eta"])
    }

    pub fn translation(var: usize) -> Self {
        let one = Expression::one();
        let zero = Expression::zero();
        match var {
            0 => VectorField { xi: one, tau: zero.clone(), eta: zero },
            _ => VectorField { xi: zero.clone(), tau: one, eta: zero },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.tau.is_zero() && self.eta.is_zero()
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        VectorField { xi: self.xi.scale(c), tau: self.tau.scale(c), eta: self.eta.scale(c) }
    }

    pub fn plus(&self, other: &Self) -> Self {
        VectorField {
            xi: &self.xi + &other.xi,
            tau: &self.tau + &other.tau,
            eta: &self.eta + &other.eta,
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi = {}; tau = {}; eta = {}", self.xi, self.tau, self.eta)
    }
}

/// A vector field together with its prolongation coefficients up to a
/// fixed order.
#[derive(Clone, Debug)]
pub struct ProlongedField {
    field: VectorField,
    order: u32,
    space: JetSpace,
    coeffs: std::collections::BTreeMap<MultiIndex, Expression>,
}

impl ProlongedField {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    /// The coefficient `phi^J`, defined for every index of order 0..=m.
    pub fn coefficient(&self, idx: MultiIndex) -> Option<&Expression> {
        self.coeffs.get(&idx)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &Expression)> {
        self.coeffs.iter()
    }

    /// Apply the prolonged field to an expression on jet space: the
    /// directional derivative summed over the base coordinates and every
    /// jet coordinate up to the prolonged order.
    pub fn apply(&self, e: &Expression) -> Result<Expression, JetError> {
        let found = self.space.max_jet_order(e);
        if found > self.order {
            return Err(JetError::OrderExceeded { found, max: self.order });
        }
        let mut out = &(&self.field.xi * &self.space.partial(e, &self.space.var_name(0)))
            + &(&self.field.tau * &self.space.partial(e, &self.space.var_name(1)));
        for (idx, phi) in &self.coeffs {
            let name = self.space.jet_name(*idx);
            let de = self.space.partial(e, &name);
            if !de.is_zero() {
                out = &out + &(phi * &de);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(name: &str) -> Expression {
        Expression::symbol(name)
    }

    #[test]
    fn multi_index_canonical_order() {
        let m = MultiIndex::up_to_order(2);
        assert_eq!(
            m,
            vec![
                MultiIndex::new(1, 0),
                MultiIndex::new(0, 1),
                MultiIndex::new(2, 0),
                MultiIndex::new(1, 1),
                MultiIndex::new(0, 2),
            ]
        );
    }

    #[test]
    fn jet_names_sorted() {
        let space = JetSpace::st();
        assert_eq!(space.jet_name(MultiIndex::zero()), "u");
        assert_eq!(space.jet_name(MultiIndex::new(1, 1)), "u_st");
        assert_eq!(space.jet_name(MultiIndex::new(2, 1)), "u_sst");
        assert_eq!(space.parse_jet("u_st"), Some(MultiIndex::new(1, 1)));
        assert_eq!(space.parse_jet("u_ts"), None); // unsorted spelling
        assert_eq!(space.parse_jet("u_x"), None);
        assert_eq!(space.parse_jet("u_"), None);
    }

    #[test]
    fn total_derivative_of_dependent() {
        let space = JetSpace::st();
        assert_eq!(space.total_derivative(&sym("u"), 0), sym("u_s"));
        assert_eq!(space.total_derivative(&sym("u_s"), 1), sym("u_st"));
    }

    #[test]
    fn total_derivative_product() {
        // D_s(s * u_t) = u_t + s * u_st
        let space = JetSpace::st();
        let e = &sym("s") * &sym("u_t");
        let expected = &sym("u_t") + &(&sym("s") * &sym("u_st"));
        assert_eq!(space.total_derivative(&e, 0), expected);
    }

    #[test]
    fn total_derivative_chains_sin() {
        let space = JetSpace::st();
        let e = Expression::sin(sym("u"));
        let expected = &Expression::cos(sym("u")) * &sym("u_s");
        assert_eq!(space.total_derivative(&e, 0), expected);
    }

    #[test]
    fn unknown_functions_chain_through_u() {
        let space = VectorField::generic_space(&JetSpace::st());
        // D_t(xi) = xi_t + xi_u * u_t
        let expected = &sym("xi_t") + &(&sym("xi_u") * &sym("u_t"));
        assert_eq!(space.total_derivative(&sym("xi"), 1), expected);
        // second derivatives keep sorted suffixes: D_s(xi_t) = xi_st + xi_tu u_s
        let expected = &sym("xi_st") + &(&sym("xi_tu") * &sym("u_s"));
        assert_eq!(space.total_derivative(&sym("xi_t"), 0), expected);
    }

    #[test]
    fn prolongation_of_translation_vanishes() {
        let space = JetSpace::st();
        let pr = space.prolong(&VectorField::translation(0), 2).unwrap();
        for idx in MultiIndex::up_to_order(2) {
            assert!(pr.coefficient(idx).unwrap().is_zero(), "phi^{idx} nonzero");
        }
    }

    #[test]
    fn prolongation_of_u_du_is_linear() {
        // v = u d/du has phi^J = u_J for every J
        let space = JetSpace::st();
        let v = VectorField::new(&space, Expression::zero(), Expression::zero(), sym("u")).unwrap();
        let pr = space.prolong(&v, 2).unwrap();
        for idx in MultiIndex::up_to_order(2) {
            assert_eq!(pr.coefficient(idx).unwrap(), &space.jet_expr(idx));
        }
    }

    #[test]
    fn source_term_prolongation() {
        // xi = tau = 0 and eta independent of u: phi^J = plain partial of eta
        let space = JetSpace::st();
        let eta = &sym("s") * &sym("t").pow(2);
        let v = VectorField::new(&space, Expression::zero(), Expression::zero(), eta.clone())
            .unwrap();
        let pr = space.prolong(&v, 2).unwrap();
        let idx = MultiIndex::new(1, 1);
        let expected = eta.differentiate("s").differentiate("t");
        assert_eq!(pr.coefficient(idx).unwrap(), &expected);
    }

    #[test]
    fn apply_translation_to_autonomous_pde() {
        let space = JetSpace::st();
        let phi = &sym("u_st") + &(&sym("K") * &Expression::sin(sym("u")));
        let pr = space.prolong(&VectorField::translation(0), 2).unwrap();
        assert!(pr.apply(&phi).unwrap().is_zero());
    }

    #[test]
    fn apply_generic_field_to_pde() {
        // pr v [u_st + K sin u] = phi^st + K eta cos u
        let space = VectorField::generic_space(&JetSpace::st());
        let phi = &sym("u_st") + &(&sym("K") * &Expression::sin(sym("u")));
        let pr = space.prolong(&VectorField::generic(), 2).unwrap();
        let expected = pr.coefficient(MultiIndex::new(1, 1)).unwrap()
            + &(&(&sym("K") * &sym("eta")) * &Expression::cos(sym("u")));
        assert_eq!(pr.apply(&phi).unwrap(), expected);
    }

    #[test]
    fn apply_scaling_of_u_to_mixed_jet() {
        let space = JetSpace::st();
        let v = VectorField::new(&space, Expression::zero(), Expression::zero(), sym("u")).unwrap();
        let pr = space.prolong(&v, 2).unwrap();
        assert_eq!(pr.apply(&sym("u_st")).unwrap(), sym("u_st"));
    }

    #[test]
    fn apply_rejects_higher_jets() {
        let space = JetSpace::st();
        let pr = space.prolong(&VectorField::translation(0), 2).unwrap();
        let err = pr.apply(&sym("u_sst")).unwrap_err();
        assert_eq!(err, JetError::OrderExceeded { found: 3, max: 2 });
    }

    #[test]
    fn order_cap_enforced() {
        let space = JetSpace::st();
        assert!(matches!(
            space.prolong(&VectorField::translation(0), 5),
            Err(JetError::OrderCap(5))
        ));
    }

    #[test]
    fn vector_field_rejects_jet_coefficients() {
        let space = JetSpace::st();
        let err =
            VectorField::new(&space, sym("u_s"), Expression::zero(), Expression::zero())
                .unwrap_err();
        assert!(matches!(err, JetError::JetInCoefficient { component: "xi", .. }));
    }
}
