//! Decision procedures for dynamical properties, run uniformly at the base,
//! product and suspension levels.
//!
//! Finite and shift backends give definitive verdicts where the quantifiers
//! can be discharged exactly; grid backends give horizon-bounded evidence.

mod finite;
mod shift;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::System;
use crate::hyperspace::{HyperError, ShiftNSubset, SymmetricProduct, DEFAULT_ENUMERATION_CAP};
use crate::metric::Dist;
use crate::suspension::{SuspensionError, SuspensionSpace};

pub use finite::{FiniteLevel, Window};
pub use shift::{ShiftBasisSet, ShiftLevel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Base,
    Product,
    Suspension,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Base, Level::Product, Level::Suspension];

    pub fn name(self) -> &'static str {
        match self {
            Level::Base => "base",
            Level::Product => "product",
            Level::Suspension => "suspension",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown level `{s}` (expected base, product or suspension)"))
    }
}

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let key = s.replace('-', "_");
                $name::ALL
                    .iter()
                    .copied()
                    .find(|p| p.name() == key)
                    .ok_or_else(|| format!("unknown {} `{s}`", stringify!($name).to_lowercase()))
            }
        }
    };
}

named_enum!(
    /// Global properties of a system.
    Property {
        Sensitive => "sensitive",
        CofinitelySensitive => "cofinitely_sensitive",
        MultiSensitive => "multi_sensitive",
        Transitive => "transitive",
        ZTransitive => "z_transitive",
        WeaklyMixing => "weakly_mixing",
        Mixing => "mixing",
        TotallyTransitive => "totally_transitive",
        StronglyTransitive => "strongly_transitive",
        MultiTransitive => "multi_transitive",
        TtPlusPlus => "tt_plus_plus",
        TwoSided => "two_sided",
        FullyExact => "fully_exact",
        DeltaTransitive => "delta_transitive",
        DeltaMixing => "delta_mixing",
        Accessible => "accessible",
        Indecomposable => "indecomposable",
        Minimal => "minimal",
        FSystem => "f_system",
        Touhey => "touhey",
        Martelli => "martelli",
        DenseOmega => "dense_omega",
        DenseTransitivePoints => "dense_transitive_points",
        TransitiveTimesPoint => "transitive_times_point",
        TransitiveTimesRot2 => "transitive_times_rot2",
    }
);

named_enum!(
    /// Properties of a single point.
    PointKind {
        Periodic => "periodic",
        QuasiPeriodic => "quasi_periodic",
        Recurrent => "recurrent",
        Nonwandering => "nonwandering",
        TransitivePoint => "transitive_point",
    }
);

/// Concrete evidence attached to a verdict.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Dist>,
    /// The `N`, `M`, `k` or `n` the definition asks for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub separations: Vec<Separation>,
    /// Cycle lengths of the map's orbit decomposition.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cycles: Vec<usize>,
}

impl Witness {
    pub fn text(summary: impl Into<String>) -> Self {
        Witness { summary: summary.into(), ..Default::default() }
    }

    pub fn with_step(mut self, step: usize) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_delta(mut self, delta: Dist) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_cycles(mut self, cycles: Vec<usize>) -> Self {
        self.cycles = cycles;
        self
    }
}

/// `d(f^n(x), f^n(y)) = distance` for two points of a basis set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub basis_set: String,
    pub x: String,
    pub y: String,
    pub n: usize,
    pub distance: Dist,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict {
    Holds { definitive: bool, witness: Witness },
    Fails { definitive: bool, witness: Witness },
    Unknown { budget: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

impl Verdict {
    pub fn holds(definitive: bool, witness: Witness) -> Self {
        Verdict::Holds { definitive, witness }
    }

    pub fn fails(definitive: bool, witness: Witness) -> Self {
        Verdict::Fails { definitive, witness }
    }

    pub fn unknown(budget: impl Into<String>) -> Self {
        Verdict::Unknown { budget: budget.into() }
    }

    pub fn outcome(&self) -> Outcome {
        match self {
            Verdict::Holds { .. } => Outcome::Holds,
            Verdict::Fails { .. } => Outcome::Fails,
            Verdict::Unknown { .. } => Outcome::Unknown,
        }
    }

    pub fn definitive(&self) -> bool {
        matches!(self, Verdict::Holds { definitive: true, .. } | Verdict::Fails { definitive: true, .. })
    }

    pub fn holds_definitively(&self) -> bool {
        matches!(self, Verdict::Holds { definitive: true, .. })
    }

    pub fn fails_definitively(&self) -> bool {
        matches!(self, Verdict::Fails { definitive: true, .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds { witness, .. } | Verdict::Fails { witness, .. } => Some(witness),
            Verdict::Unknown { .. } => None,
        }
    }

    /// Same outcome with the definitive flag cleared.
    pub fn weakened(self) -> Self {
        match self {
            Verdict::Holds { witness, .. } => Verdict::Holds { definitive: false, witness },
            Verdict::Fails { witness, .. } => Verdict::Fails { definitive: false, witness },
            u => u,
        }
    }

    /// Conjunction: a definitive failure wins, then any failure, then unknowns.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (a @ Verdict::Fails { definitive: true, .. }, _) => a,
            (_, b @ Verdict::Fails { definitive: true, .. }) => b,
            (a @ Verdict::Fails { .. }, _) => a,
            (_, b @ Verdict::Fails { .. }) => b,
            (a @ Verdict::Unknown { .. }, _) => a,
            (_, b @ Verdict::Unknown { .. }) => b,
            (Verdict::Holds { definitive: d1, witness: w1 }, Verdict::Holds { definitive: d2, witness: w2 }) => {
                Verdict::Holds {
                    definitive: d1 && d2,
                    witness: Witness::text(format!("{}; {}", w1.summary, w2.summary)),
                }
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { definitive, witness } => {
                write!(f, "Holds ({}): {}", if *definitive { "definitive" } else { "bounded" }, witness.summary)
            }
            Verdict::Fails { definitive, witness } => {
                write!(f, "Fails ({}): {}", if *definitive { "definitive" } else { "bounded" }, witness.summary)
            }
            Verdict::Unknown { budget } => write!(f, "Unknown: {budget}"),
        }
    }
}

/// Search limits for quantifiers that cannot be discharged exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest iterate examined on truncated backends.
    pub horizon: usize,
    /// Candidate sensitivity constants; empty means `diameter × {1/2, 1/4, 1/8, 1/16}`.
    pub delta_grid: Vec<Dist>,
    /// Largest arity for multi-quantified properties.
    pub m_max: usize,
    /// Candidate accessibility tolerances; empty means the same default grid.
    pub eps_grid: Vec<Dist>,
    /// Elementary-step ceiling per detector call; larger searches report Unknown.
    pub work_cap: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { horizon: 64, delta_grid: Vec::new(), m_max: 3, eps_grid: Vec::new(), work_cap: 400_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BudgetError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

impl Budget {
    pub fn validate(&self) -> Result<(), BudgetError> {
        if self.horizon == 0 {
            return Err(BudgetError::NonPositive("horizon"));
        }
        if self.m_max == 0 {
            return Err(BudgetError::NonPositive("m-max"));
        }
        if self.delta_grid.iter().any(Dist::is_zero) {
            return Err(BudgetError::NonPositive("delta-grid"));
        }
        if self.eps_grid.iter().any(Dist::is_zero) {
            return Err(BudgetError::NonPositive("eps-grid"));
        }
        Ok(())
    }

    /// Delta grid for a space of the given diameter, sorted descending and clipped to `(0, diameter]`.
    pub fn deltas(&self, diameter: Dist) -> Vec<Dist> {
        grid_or_default(&self.delta_grid, diameter)
    }

    pub fn epsilons(&self, diameter: Dist) -> Vec<Dist> {
        grid_or_default(&self.eps_grid, diameter)
    }
}

fn grid_or_default(grid: &[Dist], diameter: Dist) -> Vec<Dist> {
    let mut out: Vec<Dist> = if grid.is_empty() {
        [2, 4, 8, 16].iter().map(|&d| diameter.scale(1, d)).collect()
    } else {
        grid.iter().copied().filter(|d| *d <= diameter || diameter.is_zero()).collect()
    };
    out.retain(|d| !d.is_zero());
    out.sort_by(|a, b| b.cmp(a));
    out.dedup();
    out
}

/// Hitting times `{n ≥ 1 : f^n(U) ∩ V ≠ ∅}` (or the preimage form `U ∩ f^{-n}(V) ≠ ∅`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HittingTimeSet {
    /// Exact: `transient` lists hits below `offset`; from `offset` on, `n` hits iff
    /// `offset + (n - offset) mod period` is in `residues`.
    Eventual { transient: Vec<usize>, offset: usize, period: usize, residues: Vec<usize> },
    /// Hits found up to `horizon`; nothing is known beyond it.
    Truncated { hits: Vec<usize>, horizon: usize },
}

impl HittingTimeSet {
    /// Membership, `None` when `n` lies past a truncation horizon.
    pub fn contains(&self, n: usize) -> Option<bool> {
        match self {
            _ if n == 0 => Some(false),
            HittingTimeSet::Eventual { transient, offset, period, residues } => {
                if n < *offset {
                    Some(transient.contains(&n))
                } else {
                    Some(residues.contains(&(offset + (n - offset) % period)))
                }
            }
            HittingTimeSet::Truncated { hits, horizon } => (n <= *horizon).then(|| hits.contains(&n)),
        }
    }

    pub fn is_infinite(&self) -> Option<bool> {
        match self {
            HittingTimeSet::Eventual { residues, .. } => Some(!residues.is_empty()),
            HittingTimeSet::Truncated { .. } => None,
        }
    }

    pub fn is_empty(&self) -> Option<bool> {
        match self {
            HittingTimeSet::Eventual { transient, residues, .. } => Some(transient.is_empty() && residues.is_empty()),
            HittingTimeSet::Truncated { hits, .. } if !hits.is_empty() => Some(false),
            HittingTimeSet::Truncated { .. } => None,
        }
    }

    /// First `count` members in increasing order (fewer if truncated).
    pub fn first(&self, count: usize) -> Vec<usize> {
        let limit = match self {
            HittingTimeSet::Eventual { offset, period, .. } => offset + period * (count + 1),
            HittingTimeSet::Truncated { horizon, .. } => *horizon,
        };
        (1..=limit).filter(|&n| self.contains(n) == Some(true)).take(count).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitVariant {
    Forward,
    Preimage,
}

/// One level of a system, ready for detection.
#[derive(Clone)]
pub enum LevelEngine {
    Finite(Arc<FiniteLevel>),
    Shift(ShiftLevel),
}

impl LevelEngine {
    pub fn level(&self) -> Level {
        match self {
            LevelEngine::Finite(l) => l.level(),
            LevelEngine::Shift(l) => l.level(),
        }
    }

    pub fn detect(&self, property: Property, budget: &Budget) -> Verdict {
        match self {
            LevelEngine::Finite(l) => l.detect(property, budget),
            LevelEngine::Shift(l) => l.detect(property, budget),
        }
    }

    pub fn as_finite(&self) -> Option<&Arc<FiniteLevel>> {
        match self {
            LevelEngine::Finite(l) => Some(l),
            LevelEngine::Shift(_) => None,
        }
    }

    pub fn as_shift(&self) -> Option<&ShiftLevel> {
        match self {
            LevelEngine::Shift(l) => Some(l),
            LevelEngine::Finite(_) => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LevelError {
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Suspension(#[from] SuspensionError),
}

/// Base, product and suspension levels of a system for a fixed `n`.
#[derive(Clone)]
pub struct SystemLevels {
    pub system: System,
    pub n: usize,
    pub base: LevelEngine,
    pub product: Result<LevelEngine, LevelError>,
    pub suspension: Result<LevelEngine, LevelError>,
    product_space: Option<Arc<SymmetricProduct>>,
    suspension_space: Option<Arc<SuspensionSpace>>,
}

impl SystemLevels {
    pub fn build(system: &System, n: usize) -> Self {
        Self::build_capped(system, n, DEFAULT_ENUMERATION_CAP)
    }

    pub fn build_capped(system: &System, n: usize, cap: usize) -> Self {
        match system {
            System::Shift(s) => SystemLevels {
                system: system.clone(),
                n,
                base: LevelEngine::Shift(ShiftLevel::new(s.clone(), Level::Base, n)),
                product: Ok(LevelEngine::Shift(ShiftLevel::new(s.clone(), Level::Product, n))),
                suspension: if n >= 2 {
                    Ok(LevelEngine::Shift(ShiftLevel::new(s.clone(), Level::Suspension, n)))
                } else {
                    Err(SuspensionError::ArityTooSmall(n).into())
                },
                product_space: None,
                suspension_space: None,
            },
            System::Finite(sys) => {
                let base = LevelEngine::Finite(Arc::new(FiniteLevel::base(sys)));
                let product = SymmetricProduct::build_capped(sys, n, cap).map(Arc::new);
                let (product_level, product_space) = match product {
                    Ok(p) => (Ok(LevelEngine::Finite(Arc::new(FiniteLevel::product(&p)))), Some(p)),
                    Err(e) => (Err(LevelError::from(e)), None),
                };
                let (suspension_level, suspension_space) = match &product_space {
                    Some(p) => match SuspensionSpace::build(p) {
                        Ok(s) => {
                            let s = Arc::new(s);
                            (Ok(LevelEngine::Finite(Arc::new(FiniteLevel::suspension(&s)))), Some(s))
                        }
                        Err(e) => (Err(e.into()), None),
                    },
                    None => (Err(product_level.as_ref().err().cloned().expect("product failed")), None),
                };
                SystemLevels {
                    system: system.clone(),
                    n,
                    base,
                    product: product_level,
                    suspension: suspension_level,
                    product_space,
                    suspension_space,
                }
            }
        }
    }

    pub fn level(&self, level: Level) -> Result<&LevelEngine, &LevelError> {
        match level {
            Level::Base => Ok(&self.base),
            Level::Product => self.product.as_ref(),
            Level::Suspension => self.suspension.as_ref(),
        }
    }

    pub fn detect(&self, level: Level, property: Property, budget: &Budget) -> Verdict {
        match self.level(level) {
            Ok(engine) => engine.detect(property, budget),
            Err(e) => Verdict::unknown(format!("level unavailable: {e}")),
        }
    }

    pub fn product_space(&self) -> Option<&Arc<SymmetricProduct>> {
        self.product_space.as_ref()
    }

    pub fn suspension_space(&self) -> Option<&Arc<SuspensionSpace>> {
        self.suspension_space.as_ref()
    }

    /// Classifies `A ∈ F_n(X)` at each level: every member at the base (conjunction),
    /// `A` itself at the product, `q(A)` at the suspension.
    pub fn classify_subset(&self, subset: &SubsetRef, kind: PointKind, budget: &Budget) -> [Verdict; 3] {
        match (subset, &self.base) {
            (SubsetRef::Finite(product_index), LevelEngine::Finite(base)) => {
                let Some(p) = &self.product_space else {
                    let u = Verdict::unknown("product unavailable");
                    return [u.clone(), u.clone(), u];
                };
                let members = p.element(*product_index).clone();
                let base_v = members
                    .iter()
                    .map(|x| base.classify_point(x, kind, budget))
                    .reduce(Verdict::and)
                    .expect("nonempty subset");
                let prod_v = match &self.product {
                    Ok(LevelEngine::Finite(l)) => l.classify_point(*product_index, kind, budget),
                    _ => Verdict::unknown("product unavailable"),
                };
                let susp_v = match (&self.suspension, &self.suspension_space) {
                    (Ok(LevelEngine::Finite(l)), Some(s)) => {
                        l.classify_point(s.quotient_index(*product_index), kind, budget)
                    }
                    _ => Verdict::unknown("suspension unavailable"),
                };
                [base_v, prod_v, susp_v]
            }
            (SubsetRef::Shift(a), LevelEngine::Shift(base)) => {
                let base_v = a
                    .points()
                    .iter()
                    .map(|x| base.classify(&ShiftNSubset::new([x.clone()]), kind))
                    .reduce(Verdict::and)
                    .expect("nonempty subset");
                let at = |lvl: &Result<LevelEngine, LevelError>| match lvl {
                    Ok(LevelEngine::Shift(l)) => l.classify(a, kind),
                    _ => Verdict::unknown("level unavailable"),
                };
                [base_v, at(&self.product), at(&self.suspension)]
            }
            _ => {
                let u = Verdict::unknown("subset does not belong to this backend");
                [u.clone(), u.clone(), u]
            }
        }
    }

    /// Subsets used for pointwise statements: all of `F_n(X)` on small finite
    /// backends, an even sample of at most `limit` on large ones, and a fixed
    /// family of finitely described sets on the shift.
    pub fn subset_instances(&self, limit: usize) -> (Vec<SubsetRef>, usize) {
        match (&self.base, &self.product_space) {
            (LevelEngine::Shift(s), _) => {
                let v: Vec<SubsetRef> = s.sample_subsets().into_iter().map(SubsetRef::Shift).collect();
                let total = v.len();
                (v, total)
            }
            (_, Some(p)) => {
                let total = p.len();
                let stride = total.div_ceil(limit.max(1)).max(1);
                ((0..total).step_by(stride).map(SubsetRef::Finite).collect(), total)
            }
            _ => (Vec::new(), 0),
        }
    }

    pub fn describe_subset(&self, subset: &SubsetRef) -> String {
        match subset {
            SubsetRef::Finite(i) => self
                .product_space
                .as_ref()
                .map(|p| finite::label_set(&p.base().space, p.element(*i)))
                .unwrap_or_else(|| format!("#{i}")),
            SubsetRef::Shift(a) => {
                let parts: Vec<String> = a.points().iter().map(|x| x.to_string()).collect();
                format!("{{{}}}", parts.join(","))
            }
        }
    }
}

/// An element of `F_n(X)` on either backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetRef {
    /// Index into the enumerated symmetric product.
    Finite(usize),
    Shift(ShiftNSubset),
}

/// Verdict for one property at one level of a system.
pub fn detect(system: &System, level: Level, property: Property, n: usize, budget: &Budget) -> Verdict {
    SystemLevels::build(system, n).detect(level, property, budget)
}
