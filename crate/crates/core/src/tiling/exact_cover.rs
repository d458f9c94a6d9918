//! Exact cover via Knuth's dancing links.
//!
//! The matrix is stored sparsely as sorted column lists per row; the solver
//! builds a toroidal doubly-linked node array and runs Algorithm X, always
//! branching on the column with the fewest remaining rows (ties: lowest index).

use std::ops::ControlFlow;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactCoverMatrix {
    columns: usize,
    rows: Vec<Vec<usize>>,
}

impl ExactCoverMatrix {
    pub fn new(columns: usize) -> Self {
        ExactCoverMatrix {
            columns,
            rows: Vec::new(),
        }
    }

    /// Append a row given the indices of its 1-entries; returns the row index.
    pub fn add_row(&mut self, mut cols: Vec<usize>) -> usize {
        cols.sort_unstable();
        cols.dedup();
        assert!(
            cols.last().is_none_or(|&c| c < self.columns),
            "column index out of range"
        );
        self.rows.push(cols);
        self.rows.len() - 1
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    /// Dense 0/1 view of a row.
    pub fn dense_row(&self, i: usize) -> Vec<u8> {
        let mut out = vec![0; self.columns];
        for &c in &self.rows[i] {
            out[c] = 1;
        }
        out
    }

    /// Does `rows` cover each column exactly once?
    pub fn is_exact_cover(&self, rows: &[usize]) -> bool {
        let mut hits = vec![0u32; self.columns];
        for &r in rows {
            for &c in &self.rows[r] {
                hits[c] += 1;
            }
        }
        hits.iter().all(|&h| h == 1)
    }
}

struct Links {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    /// column header of each node (headers point at themselves)
    col: Vec<usize>,
    /// matrix row of each non-header node
    row: Vec<usize>,
    size: Vec<usize>,
}

const ROOT: usize = 0;

impl Links {
    fn build(m: &ExactCoverMatrix) -> Self {
        let n_cols = m.columns;
        let n_nodes = 1 + n_cols + m.rows.iter().map(Vec::len).sum::<usize>();
        let mut l = Links {
            left: Vec::with_capacity(n_nodes),
            right: Vec::with_capacity(n_nodes),
            up: Vec::with_capacity(n_nodes),
            down: Vec::with_capacity(n_nodes),
            col: Vec::with_capacity(n_nodes),
            row: Vec::with_capacity(n_nodes),
            size: vec![0; n_cols + 1],
        };
        // root + headers 1..=n_cols in a circular list
        for i in 0..=n_cols {
            l.left.push(if i == 0 { n_cols } else { i - 1 });
            l.right.push(if i == n_cols { 0 } else { i + 1 });
            l.up.push(i);
            l.down.push(i);
            l.col.push(i);
            l.row.push(usize::MAX);
        }
        for (r, cols) in m.rows.iter().enumerate() {
            let first = l.col.len();
            for (j, &c) in cols.iter().enumerate() {
                let node = first + j;
                let header = c + 1;
                l.left.push(if j == 0 {
                    first + cols.len() - 1
                } else {
                    node - 1
                });
                l.right
                    .push(if j + 1 == cols.len() { first } else { node + 1 });
                let last = l.up[header];
                l.up.push(last);
                l.down.push(header);
                l.down[last] = node;
                l.up[header] = node;
                l.col.push(header);
                l.row.push(r);
                l.size[header] += 1;
            }
        }
        l
    }

    fn cover(&mut self, c: usize) {
        let (lc, rc) = (self.left[c], self.right[c]);
        self.right[lc] = rc;
        self.left[rc] = lc;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.size[self.col[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                self.size[self.col[j]] += 1;
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (lc, rc) = (self.left[c], self.right[c]);
        self.right[lc] = c;
        self.left[rc] = c;
    }

    fn choose_column(&self) -> usize {
        let mut best = self.right[ROOT];
        let mut c = best;
        while c != ROOT {
            if self.size[c] < self.size[best] {
                best = c;
            }
            c = self.right[c];
        }
        best
    }

    fn search<F>(&mut self, partial: &mut Vec<usize>, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if self.right[ROOT] == ROOT {
            let mut sol = partial.clone();
            sol.sort_unstable();
            return visit(&sol);
        }
        let c = self.choose_column();
        if self.size[c] == 0 {
            return ControlFlow::Continue(());
        }
        self.cover(c);
        let mut r = self.down[c];
        while r != c {
            partial.push(self.row[r]);
            let mut j = self.right[r];
            while j != r {
                self.cover(self.col[j]);
                j = self.right[j];
            }
            let flow = self.search(partial, visit);
            let mut j = self.left[r];
            while j != r {
                self.uncover(self.col[j]);
                j = self.left[j];
            }
            partial.pop();
            if flow.is_break() {
                self.uncover(c);
                return flow;
            }
            r = self.down[r];
        }
        self.uncover(c);
        ControlFlow::Continue(())
    }
}

/// Stream every exact cover (sorted row indices) to `visit`; return `Break`
/// from the visitor to stop early.
pub fn for_each_exact_cover<F>(m: &ExactCoverMatrix, mut visit: F)
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let mut links = Links::build(m);
    let mut partial = Vec::new();
    let _ = links.search(&mut partial, &mut visit);
}

/// All exact covers, in search order.
pub fn solve_exact_cover(m: &ExactCoverMatrix) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_exact_cover(m, |s| {
        out.push(s.to_vec());
        ControlFlow::Continue(())
    });
    out
}

/// Whether at least one exact cover exists.
pub fn has_exact_cover(m: &ExactCoverMatrix) -> bool {
    let mut found = false;
    for_each_exact_cover(m, |_| {
        found = true;
        ControlFlow::Break(())
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_one_solution() {
        let mut m = ExactCoverMatrix::new(3);
        for c in 0..3 {
            m.add_row(vec![c]);
        }
        assert_eq!(solve_exact_cover(&m), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn zero_column_is_unsatisfiable() {
        let mut m = ExactCoverMatrix::new(3);
        m.add_row(vec![0, 1]);
        m.add_row(vec![0]);
        m.add_row(vec![1]);
        assert!(solve_exact_cover(&m).is_empty());
        assert!(!has_exact_cover(&m));
    }

    #[test]
    fn empty_matrix_has_the_empty_cover() {
        assert_eq!(
            solve_exact_cover(&ExactCoverMatrix::new(0)),
            vec![Vec::<usize>::new()]
        );
    }

    #[test]
    fn knuth_example() {
        // Knuth's 7-column example; unique cover {0, 3, 4}
        let mut m = ExactCoverMatrix::new(7);
        m.add_row(vec![2, 4, 5]);
        m.add_row(vec![0, 3, 6]);
        m.add_row(vec![1, 2, 5]);
        m.add_row(vec![0, 3]);
        m.add_row(vec![1, 6]);
        m.add_row(vec![3, 4, 6]);
        let sols = solve_exact_cover(&m);
        assert_eq!(sols, vec![vec![0, 3, 4]]);
        assert!(m.is_exact_cover(&sols[0]));
    }

    #[test]
    fn enumerates_every_cover() {
        let mut m = ExactCoverMatrix::new(2);
        m.add_row(vec![0]);
        m.add_row(vec![1]);
        m.add_row(vec![0, 1]);
        let mut sols = solve_exact_cover(&m);
        sols.sort();
        assert_eq!(sols, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn early_stop() {
        let mut m = ExactCoverMatrix::new(1);
        m.add_row(vec![0]);
        m.add_row(vec![0]);
        let mut seen = 0;
        for_each_exact_cover(&m, |_| {
            seen += 1;
            ControlFlow::Break(())
        });
        assert_eq!(seen, 1);
    }
}
