//! Small CNF container and an exhaustive DPLL model enumerator.
//!
//! Literals use the DIMACS convention: variable `v` (1-based) is `v`, its
//! negation `-v`. This backend exists to cross-check the exact cover solver,
//! not to compete with industrial solvers.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

pub type Lit = i32;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    seen: BTreeSet<Vec<Lit>>,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Self {
        Cnf {
            num_vars,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Add a clause; literals are sorted and duplicate clauses are skipped.
    /// Returns whether the clause was new.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) -> bool {
        let mut c: Vec<Lit> = lits.into_iter().collect();
        assert!(
            c.iter()
                .all(|l| *l != 0 && l.unsigned_abs() as usize <= self.num_vars),
            "literal out of range"
        );
        c.sort_unstable_by_key(|l| (l.unsigned_abs(), *l));
        c.dedup();
        if self.seen.contains(&c) {
            return false;
        }
        self.seen.insert(c.clone());
        self.clauses.push(c);
        true
    }

    pub fn at_least_one(&mut self, vars: &[Lit]) {
        self.add_clause(vars.iter().copied());
    }

    /// Pairwise at-most-one encoding.
    pub fn at_most_one(&mut self, vars: &[Lit]) {
        for (i, a) in vars.iter().enumerate() {
            for b in &vars[i + 1..] {
                self.add_clause([-a, -b]);
            }
        }
    }

    pub fn unit_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| c.len() == 1).count()
    }

    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| model[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }
}

struct Dpll<'a> {
    cnf: &'a Cnf,
    /// clause ids containing each literal, indexed by `lit_slot`
    occurs: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
}

fn lit_slot(l: Lit) -> usize {
    let v = l.unsigned_abs() as usize - 1;
    2 * v + usize::from(l < 0)
}

impl<'a> Dpll<'a> {
    fn new(cnf: &'a Cnf) -> Self {
        let mut occurs = vec![Vec::new(); 2 * cnf.num_vars];
        for (i, c) in cnf.clauses.iter().enumerate() {
            for &l in c {
                occurs[lit_slot(l)].push(i);
            }
        }
        Dpll {
            cnf,
            occurs,
            value: vec![None; cnf.num_vars],
            trail: Vec::new(),
        }
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[l.unsigned_abs() as usize - 1].map(|v| v == (l > 0))
    }

    fn set(&mut self, l: Lit) {
        let v = l.unsigned_abs() as usize - 1;
        self.value[v] = Some(l > 0);
        self.trail.push(v);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.value[v] = None;
        }
    }

    /// Assign `l` and run unit propagation; false on conflict.
    fn assign(&mut self, l: Lit) -> bool {
        let mut queue = vec![l];
        while let Some(l) = queue.pop() {
            match self.lit_value(l) {
                Some(true) => continue,
                Some(false) => return false,
                None => self.set(l),
            }
            for &ci in &self.occurs[lit_slot(-l)] {
                let clause = &self.cnf.clauses[ci];
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &x in clause {
                    match self.lit_value(x) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open += 1;
                            unassigned = Some(x);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match open {
                    0 => return false,
                    1 => queue.push(unassigned.unwrap()),
                    _ => {}
                }
            }
        }
        true
    }

    fn search<F>(&mut self, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[bool]) -> ControlFlow<()>,
    {
        let Some(v) = self.value.iter().position(Option::is_none) else {
            let model: Vec<bool> = self.value.iter().map(|v| v.unwrap()).collect();
            debug_assert!(self.cnf.is_satisfied_by(&model));
            return visit(&model);
        };
        let lit = (v + 1) as Lit;
        for l in [lit, -lit] {
            let mark = self.trail.len();
            if self.assign(l) {
                self.search(visit)?;
            }
            self.undo_to(mark);
        }
        ControlFlow::Continue(())
    }
}

/// Stream every total satisfying assignment to `visit`.
pub fn for_each_model<F>(cnf: &Cnf, mut visit: F)
where
    F: FnMut(&[bool]) -> ControlFlow<()>,
{
    let mut s = Dpll::new(cnf);
    if cnf.clauses.iter().any(Vec::is_empty) {
        return;
    }
    for c in &cnf.clauses {
        if c.len() == 1 && !s.assign(c[0]) {
            return;
        }
    }
    let _ = s.search(&mut visit);
}

pub fn all_models(cnf: &Cnf) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for_each_model(cnf, |m| {
        out.push(m.to_vec());
        ControlFlow::Continue(())
    });
    out
}
