use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest jet order a [`MultiIndex`] can address.
pub const MAX_ORDER: usize = 8;

/// A sorted (non-decreasing) tuple of 1-based base indices.
///
/// Jet coordinates are symmetric in their lower indices, so one sorted
/// representative stands for every permutation.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    len: u8,
    idx: [u8; MAX_ORDER],
}

impl MultiIndex {
    pub const fn empty() -> Self {
        MultiIndex { len: 0, idx: [0; MAX_ORDER] }
    }

    /// Sorts `entries`; panics if longer than [`MAX_ORDER`] or if an entry is 0.
    pub fn new(entries: &[u8]) -> Self {
        assert!(entries.len() <= MAX_ORDER, "multi-index longer than {MAX_ORDER}");
        assert!(entries.iter().all(|&i| i >= 1), "base indices are 1-based");
        let mut idx = [0u8; MAX_ORDER];
        idx[..entries.len()].copy_from_slice(entries);
        idx[..entries.len()].sort_unstable();
        MultiIndex { len: entries.len() as u8, idx }
    }

    pub fn try_new(entries: &[u8]) -> Result<Self> {
        if entries.len() > MAX_ORDER {
            return Err(Error::OrderCapExceeded { needed: entries.len(), cap: MAX_ORDER });
        }
        if let Some(&bad) = entries.iter().find(|&&i| i == 0) {
            return Err(Error::IndexOutOfRange { what: "base index", index: bad as usize, bound: 0 });
        }
        Ok(Self::new(entries))
    }

    pub fn order(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entries(&self) -> &[u8] {
        &self.idx[..self.len as usize]
    }

    /// The multi-index with `i` merged in at its sorted position.
    pub fn with(&self, i: u8) -> Self {
        assert!((self.len as usize) < MAX_ORDER, "multi-index overflow");
        let mut out = *self;
        let mut pos = self.len as usize;
        while pos > 0 && out.idx[pos - 1] > i {
            out.idx[pos] = out.idx[pos - 1];
            pos -= 1;
        }
        out.idx[pos] = i;
        out.len += 1;
        out
    }

    pub fn try_with(&self, i: u8) -> Result<Self> {
        if self.order() >= MAX_ORDER {
            return Err(Error::OrderCapExceeded { needed: self.order() + 1, cap: MAX_ORDER });
        }
        Ok(self.with(i))
    }

    /// Concatenation of two multi-indices, re-sorted.
    pub fn union(&self, other: &MultiIndex) -> Self {
        let mut v: Vec<u8> = self.entries().to_vec();
        v.extend_from_slice(other.entries());
        Self::new(&v)
    }

    /// Removes one occurrence of `i`, if present.
    pub fn without(&self, i: u8) -> Option<Self> {
        let pos = self.entries().iter().position(|&e| e == i)?;
        let mut v = self.entries().to_vec();
        v.remove(pos);
        Some(Self::new(&v))
    }

    /// Number of distinct orderings of the underlying multiset.
    pub fn multiplicity(&self) -> u64 {
        let e = self.entries();
        let mut result = factorial(e.len() as u64);
        let mut run = 1u64;
        for w in 1..=e.len() {
            if w < e.len() && e[w] == e[w - 1] {
                run += 1;
            } else {
                result /= factorial(run);
                run = 1;
            }
        }
        result
    }

    /// All sorted multi-indices of length `k` over `1..=n`.
    pub fn all_of_order(n: u8, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(n: u8, k: usize, start: u8, cur: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if cur.len() == k {
                out.push(MultiIndex::new(cur));
                return;
            }
            for i in start..=n {
                cur.push(i);
                rec(n, k, i, cur, out);
                cur.pop();
            }
        }
        rec(n, k, 1, &mut cur, &mut out);
        out
    }

    /// All ordered tuples of length `k` over `1..=n`.
    pub fn all_tuples(n: u8, k: usize) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (1..=n).map(move |i| {
                        let mut t = t.clone();
                        t.push(i);
                        t
                    })
                })
                .collect();
        }
        out
    }
}

fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

impl Ord for MultiIndex {
    /// Graded: lower order first, then lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| self.entries().cmp(other.entries()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.entries())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in self.entries() {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// A coordinate-like symbol appearing in scalar expressions.
///
/// `Inv` and `Sqrt` refer to polynomials interned in the registry and carry
/// the defining relations `P * inv(P) = 1` and `s^2 = P`. `Opaque` symbols
/// have no relation and no formal derivative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    X(u8),
    Y(u16, MultiIndex),
    Inv(u32),
    Sqrt(u32),
    Opaque(u32),
}

impl Atom {
    pub fn x(i: u8) -> Atom {
        Atom::X(i)
    }

    /// `y^σ_J` with `J` given in any order.
    pub fn y(sigma: u16, j: &[u8]) -> Atom {
        Atom::Y(sigma, MultiIndex::new(j))
    }

    /// Coordinate atoms (`X`, `Y`) and opaque symbols.
    pub fn is_plain(&self) -> bool {
        matches!(self, Atom::X(_) | Atom::Y(..) | Atom::Opaque(_))
    }

    pub fn jet_order(&self) -> usize {
        match self {
            Atom::Y(_, j) => j.order(),
            _ => 0,
        }
    }
}

/// Dimensions of a jet space `J^r Y` over a fibered manifold `Y -> X`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct JetSpace {
    /// Base dimension.
    pub n: u8,
    /// Fiber dimension.
    pub m: u16,
    /// Largest jet order any expression over this space may reach.
    pub order_cap: u8,
}

impl JetSpace {
    pub fn new(n: usize, m: usize, order_cap: usize) -> Result<Self> {
        if n == 0 || n > 9 {
            return Err(Error::InvalidSpace(format!("base dimension {n} not in 1..=9")));
        }
        if m == 0 || m > u16::MAX as usize {
            return Err(Error::InvalidSpace(format!("fiber dimension {m} must be positive")));
        }
        if order_cap >= MAX_ORDER {
            return Err(Error::InvalidSpace(format!("order cap {order_cap} must be below {MAX_ORDER}")));
        }
        Ok(JetSpace { n: n as u8, m: m as u16, order_cap: order_cap as u8 })
    }

    pub fn with_order_cap(&self, cap: usize) -> Result<Self> {
        JetSpace::new(self.n as usize, self.m as usize, cap)
    }

    pub fn require_order(&self, needed: usize) -> Result<()> {
        if needed > self.order_cap as usize {
            Err(Error::OrderCapExceeded { needed, cap: self.order_cap as usize })
        } else {
            Ok(())
        }
    }

    pub fn check_atom(&self, a: &Atom) -> Result<()> {
        match *a {
            Atom::X(i) => {
                if i == 0 || i > self.n {
                    return Err(Error::IndexOutOfRange { what: "base index", index: i as usize, bound: self.n as usize });
                }
            }
            Atom::Y(s, j) => {
                if s == 0 || s > self.m {
                    return Err(Error::IndexOutOfRange { what: "field label", index: s as usize, bound: self.m as usize });
                }
                if let Some(&bad) = j.entries().iter().find(|&&i| i == 0 || i > self.n) {
                    return Err(Error::IndexOutOfRange { what: "jet index", index: bad as usize, bound: self.n as usize });
                }
                self.require_order(j.order())?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Every field atom `y^σ_J` with `|J| <= order`.
    pub fn field_atoms(&self, order: usize) -> Vec<Atom> {
        let mut out = Vec::new();
        for sigma in 1..=self.m {
            for k in 0..=order {
                for j in MultiIndex::all_of_order(self.n, k) {
                    out.push(Atom::Y(sigma, j));
                }
            }
        }
        out
    }
}
