//! The n-fold symmetric product `F_n(X)`, its induced map and Vietoris basis.
//!
//! Elements are indexed with the singleton stratum first: index `x` is `{x}`
//! for every base point `x`, followed by 2-subsets, 3-subsets, … each in
//! lexicographic order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::{DynSystem, ShiftPoint};
use crate::metric::{hausdorff_rank, Dist, FiniteMetric, PointSet};

pub const DEFAULT_ENUMERATION_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperError {
    #[error("symmetric product needs n >= 1")]
    ZeroArity,
    #[error("F_{n} of a {points}-point space has {size} elements, above the cap {cap}")]
    CapExceeded { points: usize, n: usize, size: u128, cap: usize },
    #[error("subset {0} is empty or larger than n")]
    InvalidSubset(PointSet),
    #[error("parts cannot be refined into pairwise disjoint basis sets")]
    NoDisjointRefinement,
}

/// A nonempty subset with at most `n` points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NSubset(PointSet);

impl NSubset {
    pub fn new(members: PointSet, n: usize) -> Result<Self, HyperError> {
        if members.is_empty() || members.len() > n {
            return Err(HyperError::InvalidSubset(members));
        }
        Ok(NSubset(members))
    }

    pub fn members(&self) -> &PointSet {
        &self.0
    }

    pub fn into_members(self) -> PointSet {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }
}

impl fmt::Display for NSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `Σ_{k=1..n} C(m, k)`, saturating.
pub fn product_size(m: usize, n: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 1..=n.min(m) {
        binom = binom.saturating_mul((m - k + 1) as u128) / k as u128;
        total = total.saturating_add(binom);
    }
    total
}

/// Enumerated `(F_n(X), F_n(f))` with the Hausdorff metric.
#[derive(Clone)]
pub struct SymmetricProduct {
    base: Arc<DynSystem>,
    n: usize,
    elements: Vec<PointSet>,
    index: HashMap<PointSet, usize>,
    induced: Vec<usize>,
}

impl fmt::Debug for SymmetricProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricProduct")
            .field("base", &self.base.name)
            .field("n", &self.n)
            .field("elements", &self.elements.len())
            .finish()
    }
}

impl SymmetricProduct {
    pub fn build(base: &Arc<DynSystem>, n: usize) -> Result<Self, HyperError> {
        Self::build_capped(base, n, DEFAULT_ENUMERATION_CAP)
    }

    pub fn build_capped(base: &Arc<DynSystem>, n: usize, cap: usize) -> Result<Self, HyperError> {
        if n == 0 {
            return Err(HyperError::ZeroArity);
        }
        let m = base.len();
        let size = product_size(m, n);
        if size > cap as u128 {
            return Err(HyperError::CapExceeded { points: m, n, size, cap });
        }
        let mut elements: Vec<PointSet> = Vec::with_capacity(size as usize);
        for k in 1..=n.min(m) {
            let mut combo: Vec<usize> = (0..k).collect();
            loop {
                elements.push(PointSet::from(combo.clone()));
                // next k-combination of 0..m in lexicographic order
                let Some(i) = (0..k).rev().find(|&i| combo[i] < m - k + i) else {
                    break;
                };
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
            }
        }
        let index: HashMap<PointSet, usize> = elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let induced = elements.iter().map(|e| index[&base.image(e)]).collect();
        Ok(SymmetricProduct { base: base.clone(), n, elements, index, induced })
    }

    pub fn base(&self) -> &Arc<DynSystem> {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[PointSet] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &PointSet {
        &self.elements[i]
    }

    pub fn index_of(&self, a: &PointSet) -> Option<usize> {
        self.index.get(a).copied()
    }

    /// Elements `0..singleton_count()` are exactly the singletons.
    pub fn singleton_count(&self) -> usize {
        self.base.len()
    }

    pub fn induced_table(&self) -> &[usize] {
        &self.induced
    }

    pub fn induced_index(&self, i: usize) -> usize {
        self.induced[i]
    }

    pub fn induced_apply(&self, a: &NSubset) -> NSubset {
        NSubset(self.base.image(a.members()))
    }

    /// Product elements lying in `V`.
    pub fn vietoris_members(&self, v: &VietorisBasisElement) -> PointSet {
        (0..self.elements.len()).filter(|&i| v.contains_set(&self.elements[i])).collect()
    }

    /// `⟨U_1,…,U_k⟩` for every set of `k` distinct base basis sets, `k = 1..n`, deduplicated by content.
    pub fn vietoris_basis(&self) -> Vec<PointSet> {
        let parts = &self.base.basis;
        let mut out: Vec<PointSet> = Vec::new();
        for k in 1..=self.n.min(parts.len()) {
            for_each_combination(parts.len(), k, |combo| {
                let v = VietorisBasisElement::new(combo.iter().map(|&i| parts[i].clone()).collect());
                let members = self.vietoris_members(&v);
                if !members.is_empty() {
                    out.push(members);
                }
            });
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl FiniteMetric for SymmetricProduct {
    fn len(&self) -> usize {
        self.elements.len()
    }

    fn rank(&self, i: usize, j: usize) -> u32 {
        hausdorff_rank(self.base.space.as_ref(), self.elements[i].as_slice(), self.elements[j].as_slice())
    }

    fn scale(&self) -> &Arc<[Dist]> {
        self.base.space.scale()
    }
}

/// Calls `visit` with every increasing `k`-tuple of `0..m`.
pub(crate) fn for_each_combination(m: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 || k > m {
        return;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        visit(&combo);
        let Some(i) = (0..k).rev().find(|&i| combo[i] < m - k + i) else {
            return;
        };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// `⟨U_1,…,U_k⟩`: subsets covered by the parts and meeting each of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VietorisBasisElement {
    pub parts: Vec<PointSet>,
}

impl VietorisBasisElement {
    pub fn new(parts: Vec<PointSet>) -> Self {
        assert!(parts.iter().all(|p| !p.is_empty()), "Vietoris parts must be nonempty");
        VietorisBasisElement { parts }
    }

    pub fn contains_set(&self, a: &PointSet) -> bool {
        a.iter().all(|x| self.parts.iter().any(|u| u.contains(x))) && self.parts.iter().all(|u| !u.is_disjoint(a))
    }

    pub fn has_disjoint_parts(&self) -> bool {
        self.parts.iter().enumerate().all(|(i, u)| self.parts[i + 1..].iter().all(|v| u.is_disjoint(v)))
    }
}

pub fn vietoris_contains(v: &VietorisBasisElement, a: &NSubset) -> bool {
    v.contains_set(a.members())
}

/// Pairwise disjoint basis sets `W_i ⊆ U_i`, found by backtracking over the basis
/// (smaller candidates first). Parts that are already disjoint come back unchanged.
pub fn disjoint_refinement(parts: &[PointSet], basis: &[PointSet]) -> Result<Vec<PointSet>, HyperError> {
    let disjoint = parts.iter().enumerate().all(|(i, u)| parts[i + 1..].iter().all(|v| u.is_disjoint(v)));
    if disjoint && parts.iter().all(|p| !p.is_empty()) {
        return Ok(parts.to_vec());
    }
    let mut candidates: Vec<Vec<&PointSet>> =
        parts.iter().map(|u| basis.iter().filter(|w| !w.is_empty() && w.is_subset(u)).collect()).collect();
    for c in &mut candidates {
        c.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    }
    fn search<'a>(candidates: &[Vec<&'a PointSet>], chosen: &mut Vec<&'a PointSet>) -> bool {
        let i = chosen.len();
        if i == candidates.len() {
            return true;
        }
        for &w in &candidates[i] {
            if chosen.iter().all(|c| c.is_disjoint(w)) {
                chosen.push(w);
                if search(candidates, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if search(&candidates, &mut chosen) {
        Ok(chosen.into_iter().cloned().collect())
    } else {
        Err(HyperError::NoDisjointRefinement)
    }
}

/// Element of `F_n` over the shift: a canonical set of finitely described sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftNSubset(Vec<ShiftPoint>);

impl ShiftNSubset {
    pub fn new(points: impl IntoIterator<Item = ShiftPoint>) -> Self {
        let mut v: Vec<ShiftPoint> = points.into_iter().collect();
        assert!(!v.is_empty(), "element of F_n must be nonempty");
        v.sort();
        v.dedup();
        ShiftNSubset(v)
    }

    pub fn points(&self) -> &[ShiftPoint] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn shift_by(&self, k: usize) -> Self {
        Self::new(self.0.iter().map(|x| x.shift_by(k)))
    }

    pub fn hausdorff(&self, other: &ShiftNSubset) -> Dist {
        let directed = |a: &[ShiftPoint], b: &[ShiftPoint]| {
            a.iter().map(|x| b.iter().map(|y| x.dist(y)).min().expect("nonempty")).max().expect("nonempty")
        };
        directed(&self.0, &other.0).max(directed(&other.0, &self.0))
    }

    /// `min_x max_{a∈A} d(a, x)`: on an ultrametric the center can be taken in `A`.
    pub fn chebyshev_radius(&self) -> Dist {
        self.0.iter().map(|c| self.0.iter().map(|a| a.dist(c)).max().expect("nonempty")).min().expect("nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{build_system, SystemSpec};
    use crate::metric::{check_metric_axioms, MetricSpace};
    use crate::Backend;

    fn sys(spec: SystemSpec) -> Arc<DynSystem> {
        build_system(&spec).unwrap().as_finite().unwrap().clone()
    }

    fn table(t: Vec<usize>) -> Arc<DynSystem> {
        let n = t.len();
        sys(SystemSpec::Custom {
            name: "t".into(),
            backend: Backend::Finite,
            space: MetricSpace::cycle(n),
            table: t,
            resolution: None,
        })
    }

    #[test]
    fn sizes_and_singleton_stratum() {
        let rot = sys(SystemSpec::FiniteRotation { m: 5, k: 1 });
        let p = SymmetricProduct::build(&rot, 2).unwrap();
        assert_eq!(p.len(), 15);
        for x in 0..5 {
            assert_eq!(p.element(x), &PointSet::singleton(x));
            assert!(p.induced_index(x) < p.singleton_count());
        }
        assert_eq!(product_size(5, 3), 25);
        assert_eq!(product_size(3, 7), 7);
        assert!(matches!(SymmetricProduct::build(&rot, 0), Err(HyperError::ZeroArity)));
        let tent = sys(SystemSpec::GridTent { m: 1024 });
        assert!(matches!(SymmetricProduct::build(&tent, 2), Err(HyperError::CapExceeded { .. })));
    }

    #[test]
    fn rotation_product_splits_into_three_cycles() {
        let rot = sys(SystemSpec::FiniteRotation { m: 5, k: 1 });
        let p = SymmetricProduct::build(&rot, 2).unwrap();
        let analysis = crate::dynsys::MapAnalysis::new(p.induced_table());
        let mut lens: Vec<usize> = analysis.cycles.iter().map(Vec::len).collect();
        lens.sort();
        assert_eq!(lens, vec![5, 5, 5]);
    }

    #[test]
    fn induced_examples() {
        let rot = sys(SystemSpec::FiniteRotation { m: 4, k: 1 });
        let p = SymmetricProduct::build(&rot, 2).unwrap();
        let a = NSubset::new(PointSet::from(vec![0, 2]), 2).unwrap();
        assert_eq!(p.induced_apply(&a).members(), &PointSet::from(vec![1, 3]));
        let collapse = table(vec![1, 1]);
        let p = SymmetricProduct::build(&collapse, 2).unwrap();
        let a = NSubset::new(PointSet::from(vec![0, 1]), 2).unwrap();
        assert_eq!(p.induced_apply(&a).members(), &PointSet::singleton(1));
        assert!(NSubset::new(PointSet::from(vec![0, 1, 2]), 2).is_err());
    }

    #[test]
    fn vietoris_membership() {
        let v = VietorisBasisElement::new(vec![PointSet::singleton(0), PointSet::singleton(2)]);
        assert!(vietoris_contains(&v, &NSubset::new(PointSet::from(vec![0, 2]), 2).unwrap()));
        assert!(!vietoris_contains(&v, &NSubset::new(PointSet::singleton(0), 2).unwrap()));
        let whole = VietorisBasisElement::new(vec![PointSet::from(vec![0, 1, 2, 3])]);
        assert!(vietoris_contains(&whole, &NSubset::new(PointSet::from(vec![1, 3]), 2).unwrap()));
    }

    #[test]
    fn refinement_examples() {
        let singletons: Vec<PointSet> = (0..4).map(PointSet::singleton).collect();
        let u = PointSet::from(vec![0, 1]);
        assert_eq!(
            disjoint_refinement(&[u.clone(), u], &singletons).unwrap(),
            vec![PointSet::singleton(0), PointSet::singleton(1)]
        );
        let parts = vec![PointSet::from(vec![0, 1]), PointSet::singleton(3)];
        assert_eq!(disjoint_refinement(&parts, &singletons).unwrap(), parts);
        let zero = PointSet::singleton(0);
        assert_eq!(disjoint_refinement(&[zero.clone(), zero], &singletons), Err(HyperError::NoDisjointRefinement));
    }

    #[test]
    fn product_metric_is_hausdorff_and_a_metric() {
        let rot = sys(SystemSpec::FiniteRotation { m: 5, k: 2 });
        let p = SymmetricProduct::build(&rot, 3).unwrap();
        assert!(check_metric_axioms(&p).pass());
        let a = p.index_of(&PointSet::from(vec![0, 2])).unwrap();
        let b = p.index_of(&PointSet::singleton(1)).unwrap();
        assert_eq!(p.dist(a, b), Dist::new(1, 2));
    }

    #[test]
    fn product_basis_is_discrete_on_finite_spaces() {
        let rot = sys(SystemSpec::FiniteRotation { m: 4, k: 1 });
        let p = SymmetricProduct::build(&rot, 2).unwrap();
        let basis = p.vietoris_basis();
        assert_eq!(basis.len(), p.len());
        assert!(basis.iter().all(|b| b.len() == 1));
    }

    #[test]
    fn shift_subsets() {
        let a = ShiftNSubset::new([ShiftPoint::constant(0), ShiftPoint::constant(1)]);
        let b = ShiftNSubset::new([ShiftPoint::constant(0)]);
        assert_eq!(a.hausdorff(&b), Dist::ONE);
        assert_eq!(a.chebyshev_radius(), Dist::ONE);
        let c = ShiftNSubset::new([ShiftPoint::eventual(&[0, 1], &[0]), ShiftPoint::constant(1).prepend(&[0])]);
        assert_eq!(c.chebyshev_radius(), Dist::new(1, 4));
        assert_eq!(c.shift_by(1).len(), 2);
        assert_eq!(c.shift_by(2), ShiftNSubset::new([ShiftPoint::constant(0), ShiftPoint::constant(1)]));
    }
}
