use std::collections::BTreeMap;

use crate::error::Result;
use crate::kernel::{registry, Expr, JetSpace, MultiIndex};

/// Coordinate direction `∂/∂x^i` or `∂/∂y^σ_J`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Direction {
    X(u8),
    Y(u16, MultiIndex),
}

/// A vector field on a jet space, by coordinate components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    space: JetSpace,
    order: usize,
    comps: BTreeMap<Direction, Expr>,
}

impl VectorField {
    pub fn new(space: JetSpace, order: usize, comps: impl IntoIterator<Item = (Direction, Expr)>) -> Result<Self> {
        space.require_order(order)?;
        let comps = comps.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        Ok(VectorField { space, order, comps })
    }

    /// `∂/∂x^i`.
    pub fn partial_x(space: JetSpace, i: u8) -> Self {
        VectorField { space, order: 0, comps: BTreeMap::from([(Direction::X(i), Expr::one())]) }
    }

    /// `∂/∂y^σ_J`.
    pub fn partial_y(space: JetSpace, sigma: u16, j: &[u8]) -> Self {
        let j = MultiIndex::new(j);
        VectorField { space, order: j.order(), comps: BTreeMap::from([(Direction::Y(sigma, j), Expr::one())]) }
    }

    /// The formal derivative field `d_i = ∂/∂x^i + y^σ_{Ji} ∂/∂y^σ_J`,
    /// truncated to `|J| <= s`; its components live on order `s + 1`.
    pub fn formal(space: JetSpace, i: u8, s: usize) -> Result<Self> {
        space.require_order(s + 1)?;
        let mut comps = BTreeMap::new();
        comps.insert(Direction::X(i), Expr::one());
        for sigma in 1..=space.m {
            for k in 0..=s {
                for j in MultiIndex::all_of_order(space.n, k) {
                    comps.insert(Direction::Y(sigma, j), Expr::y(sigma, j.with(i).entries()));
                }
            }
        }
        Ok(VectorField { space, order: s + 1, comps })
    }

    /// A field on order `s`, vertical over the fibered manifold itself, whose
    /// components along `∂/∂y^σ_J` (`1 <= |J| <= s`) are the opaque symbols
    /// `<prefix>σ_J`; it stands for an arbitrary such field.
    pub fn vertical_opaque(space: JetSpace, s: usize, prefix: &str) -> Result<Self> {
        space.require_order(s)?;
        let mut comps = BTreeMap::new();
        for sigma in 1..=space.m {
            for k in 1..=s {
                for j in MultiIndex::all_of_order(space.n, k) {
                    let name = format!("{prefix}{sigma}_{j}");
                    comps.insert(Direction::Y(sigma, j), Expr::atom(registry::opaque(&name)));
                }
            }
        }
        Ok(VectorField { space, order: s, comps })
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn component(&self, d: &Direction) -> Option<&Expr> {
        self.comps.get(d)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Direction, &Expr)> {
        self.comps.iter()
    }
}
