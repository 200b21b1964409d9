//! Point-symmetry analysis of a scalar second-order PDE: the symmetry
//! condition with on-shell elimination of the leading derivative, the
//! determining-equation system with its reduction pass, generator
//! verification, a finite-dimensional polynomial ansatz solver, the
//! characteristic change of variables, and the maximal-rank witness.

mod ansatz;
mod determining;
mod transform;

pub use ansatz::{polynomial_coordinates, AnsatzSolution};
pub use determining::{
    systems_equivalent, DeterminingEquation, DeterminingSystem, ReducedSystem,
};
pub use transform::{kovalevskaya_inverse, kovalevskaya_transform, maximal_rank_check, RankReport};

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::expr::{Atom, CollectError, Expression, Monomial};
use crate::jet::{JetError, JetSpace, MultiIndex, VectorField};

/// Coefficient-function names reserved for the generic symmetry ansatz.
pub const RESERVED_COEFFICIENTS: [&str; 3] = ["xi", "tau", "eta"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymmetryError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Collect(#[from] CollectError),
    #[error("the PDE must depend on its leading derivative `{leading}` with a nonzero rational constant coefficient ({detail})")]
    LeadingCoefficient { leading: String, detail: String },
    #[error("symbol `{0}` is reserved for generic symmetry coefficients")]
    ReservedSymbol(String),
    #[error("determining equations require the fully generic vector field")]
    NotGeneric,
    #[error("ansatz degree {0} exceeds the cap of 4")]
    DegreeCap(u32),
    #[error("ansatz search requires concrete rational parameter values; still symbolic: {0}")]
    ParamNotConcrete(String),
    #[error("on-shell elimination did not terminate for this equation shape")]
    EliminationDiverged,
    #[error("PDE is not of the supported shape: {0}")]
    UnsupportedShape(String),
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

/// A free parameter of the PDE (such as the constant curvature), optionally
/// flagged as known-nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub nonzero: bool,
}

/// A scalar PDE `phi(x, u^(m)) = 0` with a designated leading jet variable
/// that the equation is solved for during on-shell elimination.
#[derive(Clone, Debug)]
pub struct PdeProblem {
    space: JetSpace,
    phi: Expression,
    leading: MultiIndex,
    leading_coeff: BigRational,
    order: u32,
    params: Vec<Param>,
}

impl PdeProblem {
    pub fn new(
        space: JetSpace,
        phi: Expression,
        leading: MultiIndex,
        params: Vec<Param>,
    ) -> Result<Self, SymmetryError> {
        let leading_name = space.jet_name(leading);
        let lead_atom = Atom::symbol(&leading_name);
        let by_lead = phi.collect_monomials(&[lead_atom.clone()].into())?;
        let mut leading_coeff = BigRational::zero();
        for (mono, coeff) in &by_lead {
            match mono.exponent(&lead_atom) {
                0 => {}
                1 => {
                    leading_coeff = coeff.to_rational().ok_or_else(|| {
                        SymmetryError::LeadingCoefficient {
                            leading: leading_name.clone(),
                            detail: format!("coefficient `{coeff}` is not constant"),
                        }
                    })?;
                }
                k => {
                    return Err(SymmetryError::LeadingCoefficient {
                        leading: leading_name.clone(),
                        detail: format!("appears with exponent {k}"),
                    });
                }
            }
        }
        if leading_coeff.is_zero() {
            return Err(SymmetryError::LeadingCoefficient {
                leading: leading_name,
                detail: "absent from the equation".to_string(),
            });
        }
        for sym in phi.symbols() {
            if RESERVED_COEFFICIENTS.contains(&sym.as_str()) {
                return Err(SymmetryError::ReservedSymbol(sym));
            }
        }
        let order = space.max_jet_order(&phi).max(1);
        Ok(PdeProblem { space, phi, leading, leading_coeff, order, params })
    }

    /// Build a problem from a bare expression: parameters are the non-jet,
    /// non-variable symbols, and the leading derivative defaults to the
    /// unique jet of maximal order.
    pub fn from_phi(
        space: JetSpace,
        phi: Expression,
        leading: Option<MultiIndex>,
        nonzero: &[String],
    ) -> Result<Self, SymmetryError> {
        let leading = match leading {
            Some(idx) => idx,
            None => {
                let jets = space.jets_in(&phi);
                let max_order = jets.iter().map(|j| j.order()).max().unwrap_or(0);
                let at_max: Vec<_> =
                    jets.into_iter().filter(|j| j.order() == max_order).collect();
                match at_max.as_slice() {
                    [only] => *only,
                    _ => {
                        return Err(SymmetryError::UnsupportedShape(format!(
                            "leading derivative is ambiguous among {}; designate one explicitly",
                            at_max
                                .iter()
                                .map(|j| space.jet_name(*j))
                                .collect::<Vec<_>>()
                                .join(", ")
                        )));
                    }
                }
            }
        };
        let params = phi
            .symbols()
            .into_iter()
            .filter(|s| {
                space.parse_jet(s).is_none()
                    && *s != space.var_name(0)
                    && *s != space.var_name(1)
            })
            .map(|name| Param { nonzero: nonzero.contains(&name), name })
            .collect();
        PdeProblem::new(space, phi, leading, params)
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn phi(&self) -> &Expression {
        &self.phi
    }

    pub fn leading(&self) -> MultiIndex {
        self.leading
    }

    pub fn leading_name(&self) -> String {
        self.space.jet_name(self.leading)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    /// The equation solved for its leading derivative:
    /// `u_lead = -(phi - c u_lead)/c`.
    pub fn solved_rhs(&self) -> Expression {
        let lead = self.space.jet_expr(self.leading);
        let rest = &self.phi - &lead.scale(&self.leading_coeff);
        (-rest).div_rational(&self.leading_coeff)
    }

    /// Substitute a concrete rational value for a parameter, returning the
    /// specialized problem.
    pub fn bind_param(&self, name: &str, value: &BigRational) -> Result<Self, SymmetryError> {
        let phi = self
            .phi
            .substitute_symbol(name, &Expression::from_rational(value.clone()));
        let params = self.params.iter().filter(|p| p.name != name).cloned().collect();
        PdeProblem::new(self.space.clone(), phi, self.leading, params)
    }

    /// Replace every occurrence of the leading derivative and of its total
    /// derivatives by their on-shell values, to a fixed point.
    pub fn eliminate_on_shell(&self, e: &Expression) -> Result<Expression, SymmetryError> {
        let mut eliminator = Eliminator { problem: self, cache: BTreeMap::new() };
        eliminator.eliminate(e, 0)
    }

    /// The symmetry condition `pr v [phi]` restricted to the solution set:
    /// the leading derivative (and any total derivative of it that the
    /// prolongation introduced) is eliminated via `phi = 0`.
    pub fn symmetry_condition(&self, field: &VectorField) -> Result<Expression, SymmetryError> {
        let space = VectorField::generic_space(&self.space);
        let prolonged = space.prolong(field, self.order)?;
        let applied = prolonged.apply(&self.phi)?;
        self.eliminate_on_shell(&applied)
    }

    /// Decide whether a concrete field generates a symmetry; the residual
    /// is returned for diagnostics and equals zero exactly when it does.
    pub fn verify_generator(&self, field: &VectorField) -> Result<Verification, SymmetryError> {
        let residual = self.symmetry_condition(field)?;
        Ok(Verification { is_symmetry: residual.is_zero(), residual })
    }

    /// Derive the determining equations by collecting the symmetry
    /// condition of the generic field over all jet monomials present.
    pub fn determining_system(
        &self,
        field: &VectorField,
    ) -> Result<DeterminingSystem, SymmetryError> {
        if *field != VectorField::generic() {
            return Err(SymmetryError::NotGeneric);
        }
        let condition = self.symmetry_condition(field)?;
        let basis: std::collections::BTreeSet<Atom> = self
            .space
            .jets_in(&condition)
            .into_iter()
            .filter(|idx| idx.order() >= 1)
            .map(|idx| Atom::symbol(self.space.jet_name(idx)))
            .collect();
        let collected = condition.collect_monomials(&basis)?;
        Ok(DeterminingSystem::from_collected(collected))
    }

    /// Expand `xi`, `tau`, `eta` over all monomials `x1^i x2^j u^k` with
    /// `i+j+k <= degree` and solve the determining equations as an exact
    /// homogeneous linear system for the unknown rational coefficients.
    pub fn solve_polynomial_ansatz(&self, degree: u32) -> Result<AnsatzSolution, SymmetryError> {
        ansatz::solve(self, degree)
    }
}

/// Outcome of checking one candidate generator.
#[derive(Clone, Debug)]
pub struct Verification {
    pub is_symmetry: bool,
    pub residual: Expression,
}

struct Eliminator<'a> {
    problem: &'a PdeProblem,
    cache: BTreeMap<MultiIndex, Expression>,
}

impl Eliminator<'_> {
    const MAX_DEPTH: u32 = 16;
    const MAX_PASSES: u32 = 64;

    fn eliminate(&mut self, e: &Expression, depth: u32) -> Result<Expression, SymmetryError> {
        if depth > Self::MAX_DEPTH {
            return Err(SymmetryError::EliminationDiverged);
        }
        let space = self.problem.space.clone();
        let mut current = e.clone();
        for _ in 0..Self::MAX_PASSES {
            let target = space
                .jets_in(&current)
                .into_iter()
                .filter(|idx| idx.contains(&self.problem.leading))
                .max();
            let Some(idx) = target else {
                return Ok(current);
            };
            let rhs = self.on_shell_rhs(idx, depth + 1)?;
            current = current.substitute(&Atom::symbol(space.jet_name(idx)), &rhs);
        }
        Err(SymmetryError::EliminationDiverged)
    }

    /// On-shell value of a total derivative of the leading jet, fully
    /// eliminated itself.
    fn on_shell_rhs(&mut self, idx: MultiIndex, depth: u32) -> Result<Expression, SymmetryError> {
        if let Some(cached) = self.cache.get(&idx) {
            return Ok(cached.clone());
        }
        if depth > Self::MAX_DEPTH {
            return Err(SymmetryError::EliminationDiverged);
        }
        let rhs = if idx == self.problem.leading {
            self.eliminate(&self.problem.solved_rhs(), depth)?
        } else {
            let extra = idx
                .minus(&self.problem.leading)
                .expect("rhs requested for non-consequence index");
            let var = if extra.count(0) > 0 { 0 } else { 1 };
            let lower = idx
                .minus(&MultiIndex::zero().extended(var))
                .expect("extended index has the chosen variable");
            let prev = self.on_shell_rhs(lower, depth + 1)?;
            let derived = self.problem.space.total_derivative(&prev, var);
            self.eliminate(&derived, depth)?
        };
        self.cache.insert(idx, rhs.clone());
        Ok(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;

    fn sym(name: &str) -> Expression {
        Expression::symbol(name)
    }

    pub(crate) fn sine_gordon_symbolic() -> PdeProblem {
        let phi = &sym("u_st") + &(&sym("K") * &Expression::sin(sym("u")));
        PdeProblem::from_phi(JetSpace::st(), phi, None, &["K".to_string()]).unwrap()
    }

    pub(crate) fn sine_gordon_k1() -> PdeProblem {
        let phi = &sym("u_st") + &Expression::sin(sym("u"));
        PdeProblem::from_phi(JetSpace::st(), phi, None, &[]).unwrap()
    }

    pub(crate) fn wave_equation() -> PdeProblem {
        PdeProblem::new(JetSpace::st(), sym("u_st"), MultiIndex::new(1, 1), vec![]).unwrap()
    }

    #[test]
    fn problem_detects_leading_and_params() {
        let p = sine_gordon_symbolic();
        assert_eq!(p.leading_name(), "u_st");
        assert_eq!(p.order(), 2);
        assert_eq!(p.params().len(), 1);
        assert_eq!(p.params()[0].name, "K");
        assert!(p.params()[0].nonzero);
    }

    #[test]
    fn leading_coefficient_must_be_constant() {
        let phi = &(&sym("u") * &sym("u_st")) + &sym("u_s");
        let err = PdeProblem::new(JetSpace::st(), phi, MultiIndex::new(1, 1), vec![]);
        assert!(matches!(err, Err(SymmetryError::LeadingCoefficient { .. })));
    }

    #[test]
    fn reserved_symbols_rejected() {
        let phi = &sym("u_st") + &(&sym("xi") * &sym("u"));
        let err = PdeProblem::new(JetSpace::st(), phi, MultiIndex::new(1, 1), vec![]);
        assert!(matches!(err, Err(SymmetryError::ReservedSymbol(_))));
    }

    #[test]
    fn on_shell_elimination_is_idempotent() {
        let p = sine_gordon_symbolic();
        let e = &(&sym("u_st").pow(2) * &sym("u_s")) + &(&sym("u_sst") + &sym("u_tt"));
        let once = p.eliminate_on_shell(&e).unwrap();
        let twice = p.eliminate_on_shell(&once).unwrap();
        assert_eq!(once, twice);
        assert!(!p.space().jets_in(&once).iter().any(|j| j.contains(&p.leading())));
    }

    #[test]
    fn consequences_of_the_constraint_substitute() {
        // u_sst on shell is D_s(-K sin u) = -K cos(u) u_s
        let p = sine_gordon_symbolic();
        let expected = -(&(&sym("K") * &Expression::cos(sym("u"))) * &sym("u_s"));
        assert_eq!(p.eliminate_on_shell(&sym("u_sst")).unwrap(), expected);
    }

    #[test]
    fn translation_is_a_symmetry() {
        let p = sine_gordon_symbolic();
        let v = VectorField::translation(1);
        let check = p.verify_generator(&v).unwrap();
        assert!(check.is_symmetry);
        assert!(check.residual.is_zero());
    }

    #[test]
    fn scaling_is_a_symmetry_for_symbolic_k() {
        // v = s d/ds - t d/dt
        let p = sine_gordon_symbolic();
        let v = VectorField::new(p.space(), sym("s"), -sym("t"), Expression::zero()).unwrap();
        assert!(p.verify_generator(&v).unwrap().is_symmetry);
    }

    #[test]
    fn u_scaling_fails_for_nonzero_k() {
        let p = sine_gordon_symbolic();
        let v =
            VectorField::new(p.space(), Expression::zero(), Expression::zero(), sym("u")).unwrap();
        let check = p.verify_generator(&v).unwrap();
        assert!(!check.is_symmetry);
        // residual = K (u cos u - sin u)
        let expected = &(&sym("K") * &(&sym("u") * &Expression::cos(sym("u"))))
            - &(&sym("K") * &Expression::sin(sym("u")));
        assert_eq!(check.residual, expected);
    }

    #[test]
    fn u_scaling_succeeds_for_wave_equation() {
        let p = wave_equation();
        let v =
            VectorField::new(p.space(), Expression::zero(), Expression::zero(), sym("u")).unwrap();
        assert!(p.verify_generator(&v).unwrap().is_symmetry);
    }

    #[test]
    fn u_scaling_succeeds_for_linear_klein_gordon() {
        let phi = &sym("u_st") + &sym("u");
        let p = PdeProblem::from_phi(JetSpace::st(), phi, None, &[]).unwrap();
        let v =
            VectorField::new(p.space(), Expression::zero(), Expression::zero(), sym("u")).unwrap();
        assert!(p.verify_generator(&v).unwrap().is_symmetry);
    }

    #[test]
    fn condition_constant_coefficient_for_u_scaling_k1() {
        let p = sine_gordon_k1();
        let v =
            VectorField::new(p.space(), Expression::zero(), Expression::zero(), sym("u")).unwrap();
        let cond = p.symmetry_condition(&v).unwrap();
        let expected = &(&sym("u") * &Expression::cos(sym("u"))) - &Expression::sin(sym("u"));
        assert_eq!(cond, expected);
    }

    #[test]
    fn binding_a_parameter() {
        let p = sine_gordon_symbolic();
        let bound = p.bind_param("K", &BigRational::from_integer(1.into())).unwrap();
        assert!(bound.params().is_empty());
        let expected = &sym("u_st") + &Expression::sin(sym("u"));
        assert_eq!(bound.phi(), &expected);
    }
}
