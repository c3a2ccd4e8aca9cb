//! Satisfiability of conjunctions of linear timing constraints over the
//! non-negative reals, by Fourier-Motzkin elimination with strict/non-strict
//! tracking and exact rational witnesses.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::ast::{Comparator, Rational, TimeConstraint, TimestampVar};

/// A conjunction of timing constraints; every variable additionally carries
/// the implicit bound `var >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinSystem {
    pub constraints: Vec<TimeConstraint>,
    pub vars: BTreeSet<TimestampVar>,
}

impl LinSystem {
    /// System over exactly the variables occurring in the constraints.
    pub fn new(constraints: Vec<TimeConstraint>) -> Self {
        let vars = constraints
            .iter()
            .flat_map(|c| c.vars().into_iter().cloned().collect::<Vec<_>>())
            .collect();
        LinSystem { constraints, vars }
    }

    /// System with extra free variables (they still get witness values).
    pub fn with_vars(
        constraints: Vec<TimeConstraint>,
        vars: impl IntoIterator<Item = TimestampVar>,
    ) -> Self {
        let mut sys = Self::new(constraints);
        sys.vars.extend(vars);
        sys
    }
}

/// Internal normal form: sum(coeffs * var) <= bound, or < when strict.
#[derive(Debug, Clone)]
struct Inequality {
    coeffs: BTreeMap<TimestampVar, Rational>,
    bound: Rational,
    strict: bool,
}

impl Inequality {
    fn lower_bound_zero(var: &TimestampVar) -> Self {
        // -var <= 0
        Inequality {
            coeffs: [(var.clone(), -Rational::from_integer(1.into()))]
                .into_iter()
                .collect(),
            bound: Rational::zero(),
            strict: false,
        }
    }
}

/// Splits a constraint into normalized inequalities; `=` becomes <= and >=.
fn normalize(constraint: &TimeConstraint) -> Vec<Inequality> {
    // Collect lhs - rhs as coeffs plus constant.
    let mut coeffs: BTreeMap<TimestampVar, Rational> = BTreeMap::new();
    let mut constant = Rational::zero();
    for (c, v) in constraint.lhs.terms() {
        *coeffs.entry(v.clone()).or_insert_with(Rational::zero) += c;
    }
    constant += constraint.lhs.constant_part();
    for (c, v) in constraint.rhs.terms() {
        *coeffs.entry(v.clone()).or_insert_with(Rational::zero) -= c;
    }
    constant -= constraint.rhs.constant_part();
    coeffs.retain(|_, c| !c.is_zero());

    let negated = |coeffs: &BTreeMap<TimestampVar, Rational>| {
        coeffs
            .iter()
            .map(|(v, c)| (v.clone(), -c.clone()))
            .collect::<BTreeMap<_, _>>()
    };
    // diff OP 0  with diff = coeffs + constant.
    match constraint.cmp {
        Comparator::Lt => vec![Inequality {
            coeffs,
            bound: -constant,
            strict: true,
        }],
        Comparator::Le => vec![Inequality {
            coeffs,
            bound: -constant,
            strict: false,
        }],
        Comparator::Gt => vec![Inequality {
            coeffs: negated(&coeffs),
            bound: constant,
            strict: true,
        }],
        Comparator::Ge => vec![Inequality {
            coeffs: negated(&coeffs),
            bound: constant,
            strict: false,
        }],
        Comparator::Eq => vec![
            Inequality {
                coeffs: coeffs.clone(),
                bound: -constant.clone(),
                strict: false,
            },
            Inequality {
                coeffs: negated(&coeffs),
                bound: constant,
                strict: false,
            },
        ],
    }
}

struct EliminationStep {
    var: TimestampVar,
    /// Constraints involving the variable at elimination time, over this
    /// variable and the not-yet-eliminated ones.
    bounds: Vec<Inequality>,
}

/// Decides satisfiability of the system (plus `var >= 0` for every variable)
/// over the reals. On success the witness satisfies every constraint exactly.
pub fn solve_linear(
    sys: &LinSystem,
) -> (bool, Option<BTreeMap<TimestampVar, Rational>>) {
    let mut inequalities: Vec<Inequality> =
        sys.constraints.iter().flat_map(normalize).collect();
    for var in &sys.vars {
        inequalities.push(Inequality::lower_bound_zero(var));
    }
    // Constraints may mention variables absent from sys.vars (callers usually
    // collect them, but be safe): they need elimination too, without the >= 0
    // bound only if absent. Collect the full variable set.
    let mut all_vars: BTreeSet<TimestampVar> = sys.vars.clone();
    for ineq in &inequalities {
        all_vars.extend(ineq.coeffs.keys().cloned());
    }

    let mut steps = Vec::new();
    for var in &all_vars {
        let (involving, rest): (Vec<Inequality>, Vec<Inequality>) = inequalities
            .into_iter()
            .partition(|i| i.coeffs.contains_key(var));
        inequalities = rest;
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        for ineq in &involving {
            if ineq.coeffs[var].is_negative() {
                lowers.push(ineq.clone());
            } else {
                uppers.push(ineq.clone());
            }
        }
        // Positive combination cancelling the variable: for lower L (coeff a
        // < 0) and upper U (coeff c > 0), c*L + (-a)*U drops it.
        for lower in &lowers {
            let a = lower.coeffs[var].clone();
            for upper in &uppers {
                let c = upper.coeffs[var].clone();
                let mut coeffs: BTreeMap<TimestampVar, Rational> = BTreeMap::new();
                for (v, coeff) in &lower.coeffs {
                    if v != var {
                        *coeffs.entry(v.clone()).or_insert_with(Rational::zero) +=
                            &c * coeff;
                    }
                }
                for (v, coeff) in &upper.coeffs {
                    if v != var {
                        *coeffs.entry(v.clone()).or_insert_with(Rational::zero) -=
                            &a * coeff;
                    }
                }
                coeffs.retain(|_, c| !c.is_zero());
                inequalities.push(Inequality {
                    bound: &c * &lower.bound - &a * &upper.bound,
                    coeffs,
                    strict: lower.strict || upper.strict,
                });
            }
        }
        dedup(&mut inequalities);
        steps.push(EliminationStep {
            var: var.clone(),
            bounds: involving,
        });
    }

    // Only constant rows remain: 0 <= bound (or 0 < bound).
    for ineq in &inequalities {
        debug_assert!(ineq.coeffs.is_empty());
        let ok = if ineq.strict {
            ineq.bound.is_positive()
        } else {
            !ineq.bound.is_negative()
        };
        if !ok {
            return (false, None);
        }
    }

    // Back-substitution in reverse elimination order.
    let mut witness: BTreeMap<TimestampVar, Rational> = BTreeMap::new();
    for step in steps.iter().rev() {
        let mut lower: Option<(Rational, bool)> = None;
        let mut upper: Option<(Rational, bool)> = None;
        for ineq in &step.bounds {
            let coeff = ineq.coeffs[&step.var].clone();
            let mut rest = ineq.bound.clone();
            for (v, c) in &ineq.coeffs {
                if v != &step.var {
                    rest -= c * &witness[v];
                }
            }
            let value = rest / &coeff;
            if coeff.is_negative() {
                // coeff * var <= rest with coeff < 0: var >= value.
                let tighter = match &lower {
                    None => true,
                    Some((cur, cur_strict)) => {
                        value > *cur || (value == *cur && ineq.strict && !cur_strict)
                    }
                };
                if tighter {
                    lower = Some((value, ineq.strict));
                }
            } else {
                let tighter = match &upper {
                    None => true,
                    Some((cur, cur_strict)) => {
                        value < *cur || (value == *cur && ineq.strict && !cur_strict)
                    }
                };
                if tighter {
                    upper = Some((value, ineq.strict));
                }
            }
        }
        let value = match (lower, upper) {
            (Some((lo, lo_strict)), Some((hi, hi_strict))) => {
                debug_assert!(lo < hi || (lo == hi && !lo_strict && !hi_strict));
                if lo == hi {
                    lo
                } else {
                    (lo + hi) / Rational::from_integer(2.into())
                }
            }
            (Some((lo, lo_strict)), None) => {
                if lo_strict {
                    lo + Rational::from_integer(1.into())
                } else {
                    lo
                }
            }
            (None, Some((hi, hi_strict))) => {
                if hi_strict {
                    hi - Rational::from_integer(1.into())
                } else {
                    hi
                }
            }
            (None, None) => Rational::zero(),
        };
        witness.insert(step.var.clone(), value);
    }

    debug_assert!(sys
        .constraints
        .iter()
        .all(|c| c.evaluate(&witness) == Some(true)));
    (true, Some(witness))
}

/// Drops syntactically duplicate rows (keeps the strict one when bounds tie).
fn dedup(inequalities: &mut Vec<Inequality>) {
    let mut seen: BTreeMap<(Vec<(TimestampVar, Rational)>, Rational), usize> = BTreeMap::new();
    let mut keep: Vec<Inequality> = Vec::with_capacity(inequalities.len());
    for ineq in inequalities.drain(..) {
        let key = (
            ineq.coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c.clone()))
                .collect(),
            ineq.bound.clone(),
        );
        match seen.get(&key) {
            Some(&idx) => {
                if ineq.strict {
                    keep[idx].strict = true;
                }
            }
            None => {
                seen.insert(key, keep.len());
                keep.push(ineq);
            }
        }
    }
    *inequalities = keep;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{rational_from_str, LinearExpr};

    fn var(name: &str) -> LinearExpr {
        LinearExpr::var(TimestampVar::from(name))
    }

    fn num(s: &str) -> LinearExpr {
        LinearExpr::constant(rational_from_str(s).unwrap())
    }

    fn minus(a: LinearExpr, b: &LinearExpr) -> LinearExpr {
        let mut out = a;
        for (c, v) in b.terms() {
            out.add_term(-c.clone(), v.clone());
        }
        out.add_constant(-b.constant_part().clone());
        out
    }

    fn constraint(lhs: LinearExpr, cmp: Comparator, rhs: LinearExpr) -> TimeConstraint {
        TimeConstraint::new(lhs, cmp, rhs)
    }

    #[test]
    fn antisymmetric_strict_pair_is_unsat() {
        let x = var("x");
        let y = var("y");
        let sys = LinSystem::new(vec![
            constraint(minus(x.clone(), &y), Comparator::Lt, num("0")),
            constraint(minus(y, &x), Comparator::Lt, num("0")),
        ]);
        let (sat, witness) = solve_linear(&sys);
        assert!(!sat);
        assert!(witness.is_none());
    }

    #[test]
    fn running_example_constraint_is_sat() {
        // t12 - t11 < t14 with all vars >= 0.
        let sys = LinSystem::new(vec![constraint(
            minus(var("t12"), &var("t11")),
            Comparator::Lt,
            var("t14"),
        )]);
        let (sat, witness) = solve_linear(&sys);
        assert!(sat);
        let w = witness.unwrap();
        assert_eq!(w.len(), 3);
        // A hand-picked interpretation satisfies it too.
        let paper: BTreeMap<TimestampVar, Rational> = [
            ("t11", "3.5"),
            ("t12", "6"),
            ("t14", "3"),
        ]
        .into_iter()
        .map(|(n, v)| (TimestampVar::from(n), rational_from_str(v).unwrap()))
        .collect();
        assert_eq!(sys.constraints[0].evaluate(&paper), Some(true));
    }

    #[test]
    fn forced_point_witness() {
        let x = var("x");
        let sys = LinSystem::new(vec![
            constraint(x.clone(), Comparator::Ge, num("0")),
            constraint(x.clone(), Comparator::Le, num("5")),
            constraint(x, Comparator::Eq, num("5")),
        ]);
        let (sat, witness) = solve_linear(&sys);
        assert!(sat);
        assert_eq!(
            witness.unwrap()[&TimestampVar::from("x")],
            rational_from_str("5").unwrap()
        );
    }

    #[test]
    fn implicit_nonnegativity_applies() {
        // x <= -1 contradicts x >= 0.
        let sys = LinSystem::new(vec![constraint(
            var("x"),
            Comparator::Le,
            minus(num("0"), &num("1")),
        )]);
        assert!(!solve_linear(&sys).0);
    }

    #[test]
    fn strict_zero_bound() {
        // x < 0 is unsat; x > 0 is sat with a positive witness.
        let lt = LinSystem::new(vec![constraint(var("x"), Comparator::Lt, num("0"))]);
        assert!(!solve_linear(&lt).0);
        let gt = LinSystem::new(vec![constraint(var("x"), Comparator::Gt, num("0"))]);
        let (sat, witness) = solve_linear(&gt);
        assert!(sat);
        assert!(witness.unwrap()[&TimestampVar::from("x")].is_positive());
    }

    #[test]
    fn chained_strict_inequalities() {
        // 0 < x < y < z < 1 with rational witnesses.
        let sys = LinSystem::new(vec![
            constraint(var("x"), Comparator::Gt, num("0")),
            constraint(var("x"), Comparator::Lt, var("y")),
            constraint(var("y"), Comparator::Lt, var("z")),
            constraint(var("z"), Comparator::Lt, num("1")),
        ]);
        let (sat, witness) = solve_linear(&sys);
        assert!(sat);
        let w = witness.unwrap();
        for c in &sys.constraints {
            assert_eq!(c.evaluate(&w), Some(true));
        }
    }

    #[test]
    fn equality_chain_propagates() {
        let sys = LinSystem::new(vec![
            constraint(var("a"), Comparator::Eq, var("b")),
            constraint(var("b"), Comparator::Eq, num("2.5")),
            constraint(var("a"), Comparator::Ge, num("2.5")),
        ]);
        let (sat, witness) = solve_linear(&sys);
        assert!(sat);
        let w = witness.unwrap();
        assert_eq!(w[&TimestampVar::from("a")], rational_from_str("2.5").unwrap());
        assert_eq!(w[&TimestampVar::from("b")], rational_from_str("2.5").unwrap());
    }

    #[test]
    fn free_variables_get_values() {
        let sys = LinSystem::with_vars(vec![], [TimestampVar::from("t9")]);
        let (sat, witness) = solve_linear(&sys);
        assert!(sat);
        assert_eq!(witness.unwrap()[&TimestampVar::from("t9")], Rational::zero());
    }

    #[test]
    fn rational_coefficients_stay_exact() {
        // 3*x = 1 forces x = 1/3.
        let mut lhs = LinearExpr::constant(Rational::zero());
        lhs.add_term(rational_from_str("3").unwrap(), TimestampVar::from("x"));
        let sys = LinSystem::new(vec![constraint(lhs, Comparator::Eq, num("1"))]);
        let (sat, witness) = solve_linear(&sys);
        assert!(sat);
        assert_eq!(
            witness.unwrap()[&TimestampVar::from("x")],
            rational_from_str("1/3").unwrap()
        );
    }
}
