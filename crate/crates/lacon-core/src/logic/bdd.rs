//! Reduced ordered binary decision diagrams over numbered levels.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

pub(crate) const ZERO: u32 = 0;
pub(crate) const ONE: u32 = 1;
const TERMINAL: u32 = u32::MAX;

pub(crate) struct Bdd {
    nodes: Vec<(u32, u32, u32)>,
    unique: HashMap<(u32, u32, u32), u32>,
    and_memo: HashMap<(u32, u32), u32>,
    not_memo: HashMap<u32, u32>,
}

impl Bdd {
    pub(crate) fn new() -> Self {
        Bdd {
            nodes: vec![(TERMINAL, 0, 0), (TERMINAL, 1, 1)],
            unique: HashMap::new(),
            and_memo: HashMap::new(),
            not_memo: HashMap::new(),
        }
    }

    /// Level of the decision at `n`; terminals sit below every level.
    pub(crate) fn level(&self, n: u32) -> u32 {
        self.nodes[n as usize].0
    }

    pub(crate) fn low(&self, n: u32) -> u32 {
        self.nodes[n as usize].1
    }

    pub(crate) fn high(&self, n: u32) -> u32 {
        self.nodes[n as usize].2
    }

    pub(crate) fn mk(&mut self, level: u32, low: u32, high: u32) -> u32 {
        if low == high {
            return low;
        }
        if let Some(&n) = self.unique.get(&(level, low, high)) {
            return n;
        }
        let n = self.nodes.len() as u32;
        self.nodes.push((level, low, high));
        self.unique.insert((level, low, high), n);
        n
    }

    pub(crate) fn var(&mut self, level: u32) -> u32 {
        self.mk(level, ZERO, ONE)
    }

    pub(crate) fn not(&mut self, n: u32) -> u32 {
        match n {
            ZERO => ONE,
            ONE => ZERO,
            _ => {
                if let Some(&m) = self.not_memo.get(&n) {
                    return m;
                }
                let (level, low, high) = self.nodes[n as usize];
                let low = self.not(low);
                let high = self.not(high);
                let m = self.mk(level, low, high);
                self.not_memo.insert(n, m);
                self.not_memo.insert(m, n);
                m
            }
        }
    }

    pub(crate) fn and(&mut self, a: u32, b: u32) -> u32 {
        if a == ZERO || b == ZERO {
            return ZERO;
        }
        if a == ONE || a == b {
            return b;
        }
        if b == ONE {
            return a;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&n) = self.and_memo.get(&key) {
            return n;
        }
        let (la, lb) = (self.level(a), self.level(b));
        let level = la.min(lb);
        let (a0, a1) = if la == level { (self.low(a), self.high(a)) } else { (a, a) };
        let (b0, b1) = if lb == level { (self.low(b), self.high(b)) } else { (b, b) };
        let low = self.and(a0, b0);
        let high = self.and(a1, b1);
        let n = self.mk(level, low, high);
        self.and_memo.insert(key, n);
        n
    }

    pub(crate) fn or(&mut self, a: u32, b: u32) -> u32 {
        let na = self.not(a);
        let nb = self.not(b);
        let n = self.and(na, nb);
        self.not(n)
    }

    /// Nodes at level `cut` or below that are reached from `root` through
    /// decisions above `cut`, in order of first visit, excluding `ZERO`.
    pub(crate) fn boundary(&self, root: u32, cut: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut seen = HashMap::new();
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            if seen.insert(n, ()).is_some() {
                continue;
            }
            if self.level(n) >= cut {
                if n != ZERO {
                    out.push(n);
                }
                continue;
            }
            stack.push(self.low(n));
            stack.push(self.high(n));
        }
        out
    }

    /// The function over levels above `cut` that holds exactly on the
    /// assignments leading from `root` to `target`.
    pub(crate) fn guard(&mut self, root: u32, cut: u32, target: u32) -> u32 {
        let mut memo = HashMap::new();
        self.guard_rec(root, cut, target, &mut memo)
    }

    fn guard_rec(&mut self, n: u32, cut: u32, target: u32, memo: &mut HashMap<u32, u32>) -> u32 {
        if self.level(n) >= cut {
            return if n == target { ONE } else { ZERO };
        }
        if let Some(&m) = memo.get(&n) {
            return m;
        }
        let (level, low, high) = self.nodes[n as usize];
        let low = self.guard_rec(low, cut, target, memo);
        let high = self.guard_rec(high, cut, target, memo);
        let m = self.mk(level, low, high);
        memo.insert(n, m);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(b: &Bdd, mut n: u32, values: &[bool]) -> bool {
        while n > ONE {
            n = if values[b.level(n) as usize] { b.high(n) } else { b.low(n) };
        }
        n == ONE
    }

    #[test]
    fn operations_match_truth_tables() {
        let mut b = Bdd::new();
        let (x, y, z) = (b.var(0), b.var(1), b.var(2));
        let xy = b.and(x, y);
        let nz = b.not(z);
        let f = b.or(xy, nz);
        for bits in 0..8u32 {
            let v = [bits & 1 == 1, bits & 2 == 2, bits & 4 == 4];
            assert_eq!(eval(&b, f, &v), (v[0] && v[1]) || !v[2]);
        }
        let nf = b.not(f);
        assert_eq!(b.and(f, nf), ZERO);
        assert_eq!(b.or(f, nf), ONE);
    }

    #[test]
    fn cut_reassembles_function() {
        let mut b = Bdd::new();
        let (x, y, z) = (b.var(0), b.var(1), b.var(2));
        let xz = b.and(x, z);
        let ny = b.not(y);
        let f = b.or(xz, ny);
        let parts = b.boundary(f, 1);
        let mut rebuilt = ZERO;
        for p in parts {
            let g = b.guard(f, 1, p);
            let term = b.and(g, p);
            rebuilt = b.or(rebuilt, term);
        }
        assert_eq!(rebuilt, f);
    }
}
