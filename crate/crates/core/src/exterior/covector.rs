use std::fmt;

use smallvec::SmallVec;

use crate::kernel::MultiIndex;

/// A basis 1-form on a jet space.
///
/// `Dy` and `Dx` make up the coordinate basis; `W` is the contact form
/// `dy^σ_J - y^σ_{Js} dx^s` used by the contact view. Field covectors sort
/// before base covectors, so wedge monomials read `dy1^dx2`, `w1^dx2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Covector {
    Dy(u16, MultiIndex),
    W(u16, MultiIndex),
    Dx(u8),
}

impl Covector {
    pub fn dy(sigma: u16, j: &[u8]) -> Covector {
        Covector::Dy(sigma, MultiIndex::new(j))
    }

    pub fn w(sigma: u16, j: &[u8]) -> Covector {
        Covector::W(sigma, MultiIndex::new(j))
    }

    pub fn is_contact(&self) -> bool {
        matches!(self, Covector::W(..))
    }
}

impl fmt::Display for Covector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Covector::Dx(i) => write!(f, "dx{i}"),
            Covector::Dy(s, j) if j.is_empty() => write!(f, "dy{s}"),
            Covector::Dy(s, j) => write!(f, "dy{s}_{j}"),
            Covector::W(s, j) if j.is_empty() => write!(f, "w{s}"),
            Covector::W(s, j) => write!(f, "w{s}_{j}"),
        }
    }
}

/// A wedge product of distinct basis covectors in increasing order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct Wedge(SmallVec<[Covector; 4]>);

impl Wedge {
    /// The empty product (degree zero).
    pub fn one() -> Wedge {
        Wedge(SmallVec::new())
    }

    pub fn single(c: Covector) -> Wedge {
        Wedge(smallvec::smallvec![c])
    }

    /// Sorts `factors`, returning the permutation sign, or `None` if a
    /// covector repeats.
    pub fn from_factors(factors: &[Covector]) -> Option<(Wedge, i8)> {
        let mut v: SmallVec<[Covector; 4]> = SmallVec::from_slice(factors);
        let mut sign = 1i8;
        // insertion sort, counting transpositions
        for i in 1..v.len() {
            let mut k = i;
            while k > 0 && v[k - 1] > v[k] {
                v.swap(k - 1, k);
                sign = -sign;
                k -= 1;
            }
            if k > 0 && v[k - 1] == v[k] {
                return None;
            }
        }
        if v.windows(2).any(|p| p[0] == p[1]) {
            return None;
        }
        Some((Wedge(v), sign))
    }

    pub fn factors(&self) -> &[Covector] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Wedge) -> Option<(Wedge, i8)> {
        let mut all: SmallVec<[Covector; 8]> = SmallVec::new();
        all.extend_from_slice(&self.0);
        all.extend_from_slice(&other.0);
        Wedge::from_factors(&all)
    }

    /// The monomial with the factor at `pos` removed.
    pub fn without(&self, pos: usize) -> Wedge {
        let mut v = self.0.clone();
        v.remove(pos);
        Wedge(v)
    }

    pub fn contact_count(&self) -> usize {
        self.0.iter().filter(|c| c.is_contact()).count()
    }
}

impl fmt::Display for Wedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("^")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorting_sign() {
        let (w, s) = Wedge::from_factors(&[Covector::Dx(2), Covector::Dx(1)]).unwrap();
        assert_eq!(w.factors(), &[Covector::Dx(1), Covector::Dx(2)]);
        assert_eq!(s, -1);
        let (_, s) = Wedge::from_factors(&[Covector::Dx(3), Covector::Dx(1), Covector::Dx(2)]).unwrap();
        assert_eq!(s, 1);
        assert!(Wedge::from_factors(&[Covector::Dx(1), Covector::Dx(1)]).is_none());
        assert!(Wedge::from_factors(&[Covector::Dx(1), Covector::Dx(2), Covector::Dx(1)]).is_none());
    }

    #[test]
    fn field_covectors_lead() {
        let (w, s) = Wedge::from_factors(&[Covector::Dx(2), Covector::dy(1, &[])]).unwrap();
        assert_eq!(w.to_string(), "dy1^dx2");
        assert_eq!(s, -1);
    }
}
