//! The characteristic change of variables `x = t + s`, `y = t - s` that
//! puts a mixed-leading second-order equation into Kovalevskaya form, its
//! inverse, and the maximal-rank witness report.

use serde::Serialize;

use crate::expr::{Expression, Monomial};
use crate::jet::{JetSpace, MultiIndex};
use crate::symmetry::{PdeProblem, SymmetryError};

/// Transform a problem over `(s, t)` with leading derivative `u_st` into
/// the equivalent problem over `(x, y) = (t + s, t - s)` with leading
/// derivative `u_xx`.
pub fn kovalevskaya_transform(problem: &PdeProblem) -> Result<PdeProblem, SymmetryError> {
    let st = JetSpace::st();
    if problem.space() != &st {
        return Err(SymmetryError::UnsupportedShape(
            "change of variables is defined on the (s, t) space".to_string(),
        ));
    }
    if problem.leading() != MultiIndex::new(1, 1) || problem.order() > 2 {
        return Err(SymmetryError::UnsupportedShape(
            "expected a second-order equation with leading mixed derivative u_st".to_string(),
        ));
    }
    let xy = JetSpace::xy();
    let jet = |a, b| xy.jet_expr(MultiIndex::new(a, b));
    let x = Expression::symbol("x");
    let y = Expression::symbol("y");
    let half = Expression::rational(1, 2);
    // chain rule: d/ds = d/dx - d/dy, d/dt = d/dx + d/dy
    let rules: Vec<(&str, Expression)> = vec![
        ("u_s", &jet(1, 0) - &jet(0, 1)),
        ("u_t", &jet(1, 0) + &jet(0, 1)),
        ("u_ss", &(&jet(2, 0) - &jet(1, 1).scale(&two())) + &jet(0, 2)),
        ("u_st", &jet(2, 0) - &jet(0, 2)),
        ("u_tt", &(&jet(2, 0) + &jet(1, 1).scale(&two())) + &jet(0, 2)),
        ("s", &(&x - &y) * &half),
        ("t", &(&x + &y) * &half),
    ];
    let mut phi = problem.phi().clone();
    for (name, replacement) in &rules {
        phi = phi.substitute_symbol(name, replacement);
    }
    PdeProblem::new(xy, phi, MultiIndex::new(2, 0), problem.params().to_vec()).map_err(|e| {
        match e {
            SymmetryError::LeadingCoefficient { .. } => SymmetryError::UnsupportedShape(
                "leading coefficient of u_xx vanishes after the change of variables".to_string(),
            ),
            other => other,
        }
    })
}

/// Inverse change of variables, mapping an `(x, y)` problem with leading
/// `u_xx` back to `(s, t)` with leading `u_st`.
pub fn kovalevskaya_inverse(problem: &PdeProblem) -> Result<PdeProblem, SymmetryError> {
    let xy = JetSpace::xy();
    if problem.space() != &xy || problem.order() > 2 {
        return Err(SymmetryError::UnsupportedShape(
            "inverse transform expects a second-order equation on the (x, y) space".to_string(),
        ));
    }
    let st = JetSpace::st();
    let jet = |a, b| st.jet_expr(MultiIndex::new(a, b));
    let s = Expression::symbol("s");
    let t = Expression::symbol("t");
    let half = Expression::rational(1, 2);
    let quarter = Expression::rational(1, 4);
    let rules: Vec<(&str, Expression)> = vec![
        ("u_x", &(&jet(1, 0) + &jet(0, 1)) * &half),
        ("u_y", &(&jet(0, 1) - &jet(1, 0)) * &half),
        (
            "u_xx",
            &(&(&jet(2, 0) + &jet(1, 1).scale(&two())) + &jet(0, 2)) * &quarter,
        ),
        ("u_xy", &(&jet(0, 2) - &jet(2, 0)) * &quarter),
        (
            "u_yy",
            &(&(&jet(2, 0) - &jet(1, 1).scale(&two())) + &jet(0, 2)) * &quarter,
        ),
        ("x", &t + &s),
        ("y", &t - &s),
    ];
    let mut phi = problem.phi().clone();
    for (name, replacement) in &rules {
        phi = phi.substitute_symbol(name, replacement);
    }
    PdeProblem::new(st, phi, MultiIndex::new(1, 1), problem.params().to_vec())
}

fn two() -> num_rational::BigRational {
    num_rational::BigRational::from_integer(2.into())
}

/// The symbolic gradient of the equation over base and jet coordinates,
/// with a witness coordinate whose partial derivative is a nonzero
/// constant when one exists. Such a witness certifies full rank of the
/// Jacobian everywhere on the solution set.
#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    /// Coordinate name and the rendered partial derivative, in gradient
    /// order: base variables first, then jets by order.
    pub partials: Vec<(String, String)>,
    /// Coordinate certifying rank one, if any partial is a nonzero constant.
    pub witness: Option<String>,
    /// False means "witness not constant": no coordinate has a constant
    /// nonzero partial, so the report alone does not decide maximal rank.
    pub constant_witness: bool,
}

/// Gradient-based maximal-rank check for a single equation.
pub fn maximal_rank_check(problem: &PdeProblem) -> RankReport {
    let space = problem.space();
    let mut coords: Vec<String> = vec![space.var_name(0), space.var_name(1)];
    for idx in space.jets_in(problem.phi()) {
        coords.push(space.jet_name(idx));
    }
    let mut partials = Vec::new();
    let mut witness = None;
    for coord in coords {
        let partial = space.partial(problem.phi(), &coord);
        if witness.is_none() && !partial.is_zero() && partial.as_rational().is_some() {
            witness = Some(coord.clone());
        }
        partials.push((coord, partial.to_string()));
    }
    RankReport { partials, constant_witness: witness.is_some(), witness }
}
