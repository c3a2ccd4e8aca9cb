//! Plain DPLL over indexed propositions: unit propagation plus chronological
//! backtracking. Theory reasoning happens lazily through blocking clauses
//! added between restarts.

/// Literal: variable index plus phase (`true` = positive occurrence).
pub type Lit = (usize, bool);

#[derive(Debug, Clone)]
pub struct Dpll {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl Dpll {
    pub fn new(num_vars: usize) -> Self {
        Dpll {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        self.clauses.push(clause);
    }

    /// Finds a model consistent with the theory: each full propositional
    /// model is offered to `theory`, which either accepts it or returns a
    /// blocking clause; the search then restarts with the clause installed.
    /// Returns `None` when no theory-consistent model exists.
    pub fn solve_with<F>(&mut self, mut theory: F) -> Option<Vec<bool>>
    where
        F: FnMut(&[bool]) -> Result<(), Vec<Lit>>,
    {
        loop {
            let model = self.solve()?;
            match theory(&model) {
                Ok(()) => return Some(model),
                Err(blocking) => {
                    debug_assert!(
                        !blocking.is_empty(),
                        "an empty blocking clause would make the instance unsat"
                    );
                    self.clauses.push(blocking);
                }
            }
        }
    }

    /// Purely propositional search.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let mut assignment: Vec<Option<bool>> = vec![None; self.num_vars];
        if self.search(&mut assignment) {
            Some(assignment.into_iter().map(|v| v.unwrap_or(false)).collect())
        } else {
            None
        }
    }

    fn search(&self, assignment: &mut Vec<Option<bool>>) -> bool {
        let trail_mark = match self.propagate(assignment) {
            Ok(trail) => trail,
            Err(()) => return false,
        };
        let var = match assignment.iter().position(Option::is_none) {
            Some(v) => v,
            None => return true,
        };
        for phase in [true, false] {
            assignment[var] = Some(phase);
            if self.search(assignment) {
                return true;
            }
            assignment[var] = None;
        }
        for v in trail_mark {
            assignment[v] = None;
        }
        false
    }

    /// Unit propagation to fixpoint. Returns the assigned variables (for
    /// undoing on backtrack) or a conflict.
    fn propagate(&self, assignment: &mut [Option<bool>]) -> Result<Vec<usize>, ()> {
        let mut trail = Vec::new();
        loop {
            let mut changed = false;
            for clause in &self.clauses {
                let mut unassigned: Option<Lit> = None;
                let mut satisfied = false;
                let mut unassigned_count = 0;
                for &(var, phase) in clause {
                    match assignment[var] {
                        Some(v) if v == phase => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            unassigned_count += 1;
                            unassigned = Some((var, phase));
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (unassigned_count, unassigned) {
                    (0, _) => {
                        for v in trail {
                            assignment[v] = None;
                        }
                        return Err(());
                    }
                    (1, Some((var, phase))) => {
                        assignment[var] = Some(phase);
                        trail.push(var);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Ok(trail);
            }
        }
    }
}
