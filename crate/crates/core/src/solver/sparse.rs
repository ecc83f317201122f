//! Sparse Cholesky factorization for the Newton systems.
//!
//! Unknowns are ordered by geometric nested dissection on their lattice
//! coordinates (a grid line separates the main-diagonal stencil). The
//! symbolic pass (elimination tree plus column counts) is done once per
//! pattern; each Newton step refactors numerically with an up-looking
//! row-by-row algorithm.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Lattice;

const NONE: usize = usize::MAX;
const LEAF: usize = 48;

/// Nested-dissection permutation: `perm[new] = old`.
pub(crate) fn nested_dissection(coords: &[Lattice]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..coords.len()).collect();
    let mut perm = Vec::with_capacity(coords.len());
    dissect(&mut ids, coords, &mut perm);
    perm
}

fn dissect(ids: &mut [usize], coords: &[Lattice], out: &mut Vec<usize>) {
    if ids.len() <= LEAF {
        out.extend_from_slice(ids);
        return;
    }
    let mut lo = [i32::MAX; 2];
    let mut hi = [i32::MIN; 2];
    for &id in ids.iter() {
        for k in 0..2 {
            lo[k] = lo[k].min(coords[id][k]);
            hi[k] = hi[k].max(coords[id][k]);
        }
    }
    let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
    if hi[axis] - lo[axis] < 2 {
        out.extend_from_slice(ids);
        return;
    }
    let cut = lo[axis] + (hi[axis] - lo[axis]) / 2;
    ids.sort_by_key(|&id| (coords[id][axis] == cut, coords[id][axis] > cut));
    // layout is now [left | right | separator]
    let n_left = ids.iter().take_while(|&&id| coords[id][axis] < cut).count();
    let n_sep = ids.iter().rev().take_while(|&&id| coords[id][axis] == cut).count();
    let n = ids.len();
    let (left, rest) = ids.split_at_mut(n_left);
    let (right, sep) = rest.split_at_mut(n - n_left - n_sep);
    dissect(left, coords, out);
    dissect(right, coords, out);
    sep.sort_unstable();
    out.extend_from_slice(sep);
}

/// Symbolic factorization of a symmetric pattern under a fixed permutation.
#[derive(Clone, Debug)]
pub(crate) struct Symbolic {
    n: usize,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    /// upper triangle of the permuted matrix, CSC, rows sorted
    cp: Vec<usize>,
    ci: Vec<usize>,
    parent: Vec<usize>,
    lp: Vec<usize>,
}

impl Symbolic {
    /// `adjacency[i]` lists the off-diagonal neighbours of unknown `i` (symmetric).
    pub(crate) fn new(adjacency: &[Vec<usize>], perm: Vec<usize>) -> Self {
        let n = adjacency.len();
        let mut pinv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        let mut cp = Vec::with_capacity(n + 1);
        let mut ci = Vec::new();
        cp.push(0);
        for k in 0..n {
            let start = ci.len();
            ci.push(k);
            for &nb in &adjacency[perm[k]] {
                let r = pinv[nb];
                if r < k {
                    ci.push(r);
                }
            }
            ci[start..].sort_unstable();
            cp.push(ci.len());
        }

        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for &row in &ci[cp[k]..cp[k + 1]] {
                let mut i = row;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        let mut counts = vec![1usize; n];
        let mut mark = vec![NONE; n];
        let mut stack = vec![0usize; n];
        for k in 0..n {
            let top = ereach(&cp, &ci, &parent, k, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut lp = Vec::with_capacity(n + 1);
        lp.push(0);
        for k in 0..n {
            lp.push(lp[k] + counts[k]);
        }
        Symbolic { n, perm, pinv, cp, ci, parent, lp }
    }

    /// Number of stored entries of the (upper) matrix.
    pub(crate) fn matrix_nnz(&self) -> usize {
        self.ci.len()
    }

    pub(crate) fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    /// Slot of entry `(a, b)` (original unknown indices) in the matrix value array.
    pub(crate) fn slot(&self, a: usize, b: usize) -> Option<usize> {
        let (r, c) = {
            let (x, y) = (self.pinv[a], self.pinv[b]);
            if x <= y { (x, y) } else { (y, x) }
        };
        let col = &self.ci[self.cp[c]..self.cp[c + 1]];
        col.binary_search(&r).ok().map(|k| self.cp[c] + k)
    }
}

/// Pattern of row `k` of L in topological order, as `stack[top..n]`.
fn ereach(cp: &[usize], ci: &[usize], parent: &[usize], k: usize, stack: &mut [usize], mark: &mut [usize]) -> usize {
    let n = stack.len();
    let mut top = n;
    mark[k] = k;
    for &row in &ci[cp[k]..cp[k + 1]] {
        let mut i = row;
        if i > k {
            continue;
        }
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

/// Numeric Cholesky factor `P A P' = L L'` sharing a [`Symbolic`] analysis.
#[derive(Clone, Debug)]
pub(crate) struct Factor {
    li: Vec<usize>,
    lx: Vec<f64>,
    work: Vec<f64>,
    next: Vec<usize>,
    stack: Vec<usize>,
    mark: Vec<usize>,
}

impl Factor {
    pub(crate) fn new(sym: &Symbolic) -> Self {
        let nnz = sym.factor_nnz();
        Factor {
            li: vec![0; nnz],
            lx: vec![0.0; nnz],
            work: vec![0.0; sym.n],
            next: vec![0; sym.n],
            stack: vec![0; sym.n],
            mark: vec![NONE; sym.n],
        }
    }

    /// Factors the matrix with upper-triangle values `cx` (aligned with the symbolic pattern).
    /// On failure returns the pivot index that was not positive.
    pub(crate) fn factor(&mut self, sym: &Symbolic, cx: &[f64]) -> Result<(), usize> {
        let n = sym.n;
        let lp = &sym.lp;
        self.next.copy_from_slice(&lp[..n]);
        self.mark.iter_mut().for_each(|m| *m = NONE);
        let x = &mut self.work;
        for k in 0..n {
            let top = ereach(&sym.cp, &sym.ci, &sym.parent, k, &mut self.stack, &mut self.mark);
            for p in sym.cp[k]..sym.cp[k + 1] {
                x[sym.ci[p]] = cx[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &self.stack[top..] {
                let lki = x[i] / self.lx[lp[i]];
                x[i] = 0.0;
                for p in lp[i] + 1..self.next[i] {
                    x[self.li[p]] -= self.lx[p] * lki;
                }
                d -= lki * lki;
                let p = self.next[i];
                self.next[i] += 1;
                self.li[p] = k;
                self.lx[p] = lki;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(k);
            }
            let p = self.next[k];
            self.next[k] += 1;
            self.li[p] = k;
            self.lx[p] = libm::sqrt(d);
        }
        Ok(())
    }

    /// Solves `A x = b` in place (original unknown order).
    pub(crate) fn solve(&mut self, sym: &Symbolic, b: &mut [f64]) {
        let n = sym.n;
        let lp = &sym.lp;
        let y = &mut self.work;
        for k in 0..n {
            y[k] = b[sym.perm[k]];
        }
        for j in 0..n {
            y[j] /= self.lx[lp[j]];
            let yj = y[j];
            for p in lp[j] + 1..lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in lp[j] + 1..lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s / self.lx[lp[j]];
        }
        for k in 0..n {
            b[sym.perm[k]] = y[k];
        }
    }
}
