//! The symmetric-product suspension `SF_n(X) = F_n(X)/F_1(X)`.
//!
//! Index 0 is the collapsed basepoint; index `i ≥ 1` is the class of product
//! element `singleton_count + i - 1`, so classes follow the product's order of
//! multi-point subsets.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::DynSystem;
use crate::hyperspace::{for_each_combination, NSubset, SymmetricProduct, VietorisBasisElement};
use crate::metric::{chebyshev_rank, hausdorff, hausdorff_rank, Dist, FiniteMetric, PointSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuspensionError {
    #[error("the suspension needs n >= 2, got {0}")]
    ArityTooSmall(usize),
    #[error("the basepoint has no single preimage class")]
    BasepointPreimage,
    #[error("subset {0} is not an element of the product")]
    NotAnElement(PointSet),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SuspensionPoint {
    Collapsed,
    Class(PointSet),
}

impl fmt::Display for SuspensionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuspensionPoint::Collapsed => f.write_str("F_X"),
            SuspensionPoint::Class(a) => write!(f, "q{a}"),
        }
    }
}

/// `q`: singletons collapse, multi-point subsets keep their identity.
pub fn q(a: &NSubset) -> SuspensionPoint {
    if a.is_singleton() {
        SuspensionPoint::Collapsed
    } else {
        SuspensionPoint::Class(a.members().clone())
    }
}

pub fn q_inv(chi: &SuspensionPoint) -> Result<PointSet, SuspensionError> {
    match chi {
        SuspensionPoint::Collapsed => Err(SuspensionError::BasepointPreimage),
        SuspensionPoint::Class(a) => Ok(a.clone()),
    }
}

/// `SF_n(f)(χ)` computed from the base map alone, without enumerating `SF_n(X)`.
pub fn sfn_apply(base: &DynSystem, chi: &SuspensionPoint) -> SuspensionPoint {
    match chi {
        SuspensionPoint::Collapsed => SuspensionPoint::Collapsed,
        SuspensionPoint::Class(a) => {
            let img = base.image(a);
            if img.len() >= 2 {
                SuspensionPoint::Class(img)
            } else {
                SuspensionPoint::Collapsed
            }
        }
    }
}

/// `G_n(χ) = F_1(X) ∪ q^{-1}(χ)` as an explicit family of subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnImage(pub Vec<PointSet>);

#[derive(Clone, Debug)]
pub struct SuspensionSpace {
    product: Arc<SymmetricProduct>,
    /// Chebyshev radius rank of each point; 0 for the basepoint.
    radius: Vec<u32>,
    induced: Vec<usize>,
}

impl SuspensionSpace {
    pub fn build(product: &Arc<SymmetricProduct>) -> Result<Self, SuspensionError> {
        if product.n() < 2 {
            return Err(SuspensionError::ArityTooSmall(product.n()));
        }
        let singles = product.singleton_count();
        let classes = product.len() - singles;
        let space = product.base().space.as_ref();
        let mut radius = Vec::with_capacity(classes + 1);
        radius.push(0);
        radius.extend((singles..product.len()).map(|e| chebyshev_rank(space, product.element(e).as_slice())));
        let mut induced = Vec::with_capacity(classes + 1);
        induced.push(0);
        induced.extend((singles..product.len()).map(|e| {
            let img = product.induced_index(e);
            if img < singles {
                0
            } else {
                img - singles + 1
            }
        }));
        Ok(SuspensionSpace { product: product.clone(), radius, induced })
    }

    pub fn product(&self) -> &Arc<SymmetricProduct> {
        &self.product
    }

    pub fn len(&self) -> usize {
        self.radius.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Product index of a class, `None` for the basepoint.
    pub fn product_index(&self, i: usize) -> Option<usize> {
        (i > 0).then(|| self.product.singleton_count() + i - 1)
    }

    /// Suspension index of `q(A)` for a product index.
    pub fn quotient_index(&self, product_index: usize) -> usize {
        let singles = self.product.singleton_count();
        if product_index < singles {
            0
        } else {
            product_index - singles + 1
        }
    }

    pub fn point(&self, i: usize) -> SuspensionPoint {
        match self.product_index(i) {
            None => SuspensionPoint::Collapsed,
            Some(e) => SuspensionPoint::Class(self.product.element(e).clone()),
        }
    }

    pub fn index_of(&self, chi: &SuspensionPoint) -> Result<usize, SuspensionError> {
        match chi {
            SuspensionPoint::Collapsed => Ok(0),
            SuspensionPoint::Class(a) => match self.product.index_of(a) {
                Some(e) if a.len() >= 2 => Ok(self.quotient_index(e)),
                _ => Err(SuspensionError::NotAnElement(a.clone())),
            },
        }
    }

    pub fn induced_table(&self) -> &[usize] {
        &self.induced
    }

    pub fn induced_apply_sfn(&self, chi: &SuspensionPoint) -> SuspensionPoint {
        sfn_apply(self.product.base(), chi)
    }

    /// `ρ` via its closed form; see [`SuspensionSpace::rho_direct_oracle`] for the definition.
    pub fn rho(&self, a: &SuspensionPoint, b: &SuspensionPoint) -> Result<Dist, SuspensionError> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        Ok(self.dist(i, j))
    }

    /// Second-level Hausdorff distance between `G_n(χ1)` and `G_n(χ2)`, by full enumeration.
    pub fn rho_direct_oracle(&self, a: &SuspensionPoint, b: &SuspensionPoint) -> Result<Dist, SuspensionError> {
        let (ga, gb) = (self.gn_image(a)?, self.gn_image(b)?);
        let space = self.product.base().space.as_ref();
        let h = |x: &PointSet, y: &PointSet| hausdorff(space, x, y).expect("nonempty members");
        let directed = |from: &GnImage, to: &GnImage| {
            from.0
                .iter()
                .map(|x| to.0.iter().map(|y| h(x, y)).min().expect("G_n contains F_1"))
                .max()
                .expect("G_n contains F_1")
        };
        Ok(directed(&ga, &gb).max(directed(&gb, &ga)))
    }

    pub fn gn_image(&self, chi: &SuspensionPoint) -> Result<GnImage, SuspensionError> {
        let mut family: Vec<PointSet> = self.product.base().space.points().iter().map(PointSet::singleton).collect();
        if let SuspensionPoint::Class(a) = chi {
            self.index_of(chi)?;
            family.push(a.clone());
        }
        Ok(GnImage(family))
    }

    /// Checks `F_n(f)(q^{-1}(Γ)) ⊆ q^{-1}(SF_n(f)(Γ))`.
    pub fn check_preimage_image_inclusion(&self, gamma: &[SuspensionPoint]) -> Result<bool, SuspensionError> {
        if gamma.contains(&SuspensionPoint::Collapsed) {
            return Err(SuspensionError::BasepointPreimage);
        }
        let images: Vec<SuspensionPoint> = gamma.iter().map(|c| self.induced_apply_sfn(c)).collect();
        let in_target = |b: &PointSet| {
            if b.len() == 1 {
                images.contains(&SuspensionPoint::Collapsed)
            } else {
                images.iter().any(|c| matches!(c, SuspensionPoint::Class(x) if x == b))
            }
        };
        for chi in gamma {
            let a = q_inv(chi)?;
            self.index_of(chi)?;
            if !in_target(&self.product.base().image(&a)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Open basis: `q(⟨W_1,…,W_k⟩)` for pairwise disjoint base basis sets with `k ≥ 2`,
    /// the `ρ`-ball of radius `resolution` around the basepoint, and balls of the
    /// same radius around any point those miss.
    pub fn basis(&self) -> Vec<PointSet> {
        let base = self.product.base();
        let parts = &base.basis;
        let mut out: Vec<PointSet> = Vec::new();
        for k in 2..=self.product.n().min(parts.len()) {
            for_each_combination(parts.len(), k, |combo| {
                let v = VietorisBasisElement::new(combo.iter().map(|&i| parts[i].clone()).collect());
                if !v.has_disjoint_parts() {
                    return;
                }
                let members: PointSet =
                    self.product.vietoris_members(&v).iter().map(|e| self.quotient_index(e)).collect();
                if !members.is_empty() {
                    out.push(members);
                }
            });
        }
        let radius = base.resolution;
        out.push(self.ball_rank(0, radius));
        let mut covered = vec![false; self.len()];
        for b in &out {
            for i in b.iter() {
                covered[i] = true;
            }
        }
        for i in 0..self.len() {
            if !covered[i] {
                let b = self.ball_rank(i, radius);
                for j in b.iter() {
                    covered[j] = true;
                }
                out.push(b);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn ball_rank(&self, center: usize, radius: Dist) -> PointSet {
        let scale = self.scale();
        (0..self.len()).filter(|&j| scale[self.rank(center, j) as usize] < radius).collect()
    }
}

impl FiniteMetric for SuspensionSpace {
    fn len(&self) -> usize {
        self.radius.len()
    }

    fn rank(&self, i: usize, j: usize) -> u32 {
        match (i, j) {
            (0, 0) => 0,
            (0, k) | (k, 0) => self.radius[k],
            _ if i == j => 0,
            _ => {
                let (a, b) = (self.product_index(i).unwrap(), self.product_index(j).unwrap());
                let space = self.product.base().space.as_ref();
                let h = hausdorff_rank(space, self.product.element(a).as_slice(), self.product.element(b).as_slice());
                self.radius[i].min(h).max(self.radius[j].min(h))
            }
        }
    }

    fn scale(&self) -> &Arc<[Dist]> {
        self.product.base().space.scale()
    }
}
