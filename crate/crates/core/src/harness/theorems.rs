use std::fmt;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::detectors::{Level, PointKind, Property};

/// What a statement asserts at its level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "name")]
pub enum Claim {
    /// A property of the whole system.
    Global(Property),
    /// A property of a fixed `A ∈ F_n(X)`: every member at the base, `A` at the
    /// product, `q(A)` at the suspension.
    Pointwise(PointKind),
}

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::Global(p) => p.name(),
            Claim::Pointwise(k) => k.name(),
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Statement {
    pub level: Level,
    pub claim: Claim,
}

impl Statement {
    /// Verdict-map key: the bare level name when every statement of the theorem
    /// shares one claim, `level:claim` otherwise.
    pub fn key(&self, qualified: bool) -> String {
        if qualified {
            format!("{}:{}", self.level, self.claim)
        } else {
            self.level.to_string()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowKind {
    Implies,
    NotImplies,
}

/// One directed claim between two numbered statements (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub premise: usize,
    pub conclusion: usize,
    pub kind: ArrowKind,
}

/// Standing hypotheses under which a theorem's arrows are claimed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// Every arrow needs a perfect compact phase space.
    pub faithful_compactum: bool,
    pub no_isolated_points: bool,
    pub bijection: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremSpec {
    pub id: &'static str,
    pub topic: &'static str,
    pub statements: Vec<Statement>,
    /// Arrow table in the form `3=>2, 2=>1, 1!=>2`; `a<=>b<=>c` makes every
    /// listed statement equivalent to every other.
    pub anchor: &'static str,
    pub hypotheses: Hypotheses,
    /// Implications whose proof uses perfectness of the phase space; finite
    /// backends only probe these.
    pub perfect_only: &'static [(usize, usize)],
}

impl TheoremSpec {
    pub fn number(&self) -> usize {
        self.id[1..].parse().expect("theorem ids are T<number>")
    }

    /// Arrows in anchor order, equivalence chains expanded to all ordered pairs.
    pub fn arrows(&self) -> Vec<Arrow> {
        parse_anchor(self.anchor, self.statements.len()).expect("theorem table anchors are well formed")
    }

    pub fn statement(&self, number: usize) -> &Statement {
        &self.statements[number - 1]
    }

    /// Whether the statements assert more than one claim.
    pub fn mixed_claims(&self) -> bool {
        self.statements.iter().any(|s| s.claim != self.statements[0].claim)
    }

    pub fn is_pointwise(&self) -> bool {
        self.statements.iter().any(|s| matches!(s.claim, Claim::Pointwise(_)))
    }

    pub fn perfect_only(&self, arrow: &Arrow) -> bool {
        self.perfect_only.contains(&(arrow.premise, arrow.conclusion))
    }
}

/// Parses an arrow table; statement numbers must lie in `1..=statements`.
pub fn parse_anchor(anchor: &str, statements: usize) -> Result<Vec<Arrow>, HarnessError> {
    let bad = |why: &str| HarnessError::Anchor(format!("`{anchor}`: {why}"));
    let number = |s: &str| -> Result<usize, HarnessError> {
        let k: usize = s.trim().parse().map_err(|_| bad(&format!("`{}` is not a statement number", s.trim())))?;
        if k == 0 || k > statements {
            return Err(bad(&format!("statement {k} out of range")));
        }
        Ok(k)
    };
    let mut arrows = Vec::new();
    for item in anchor.split(',') {
        let item = item.trim();
        if item.contains("<=>") {
            let chain: Vec<usize> = item.split("<=>").map(number).collect::<Result<_, _>>()?;
            for &a in &chain {
                for &b in &chain {
                    if a != b {
                        arrows.push(Arrow { premise: a, conclusion: b, kind: ArrowKind::Implies });
                    }
                }
            }
        } else if let Some((a, b)) = item.split_once("!=>") {
            arrows.push(Arrow { premise: number(a)?, conclusion: number(b)?, kind: ArrowKind::NotImplies });
        } else if let Some((a, b)) = item.split_once("=>") {
            arrows.push(Arrow { premise: number(a)?, conclusion: number(b)?, kind: ArrowKind::Implies });
        } else {
            return Err(bad(&format!("`{item}` has no arrow")));
        }
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = arrows.iter().find(|a| !seen.insert((a.premise, a.conclusion))) {
        return Err(bad(&format!("arrow {}->{} listed twice", dup.premise, dup.conclusion)));
    }
    Ok(arrows)
}

fn tower(claim: Claim) -> Vec<Statement> {
    Level::ALL.iter().map(|&level| Statement { level, claim }).collect()
}

fn global(p: Property) -> Vec<Statement> {
    tower(Claim::Global(p))
}

fn at(level: Level, p: Property) -> Statement {
    Statement { level, claim: Claim::Global(p) }
}

const COMPACTUM: Hypotheses = Hypotheses { faithful_compactum: false, no_isolated_points: false, bijection: false };

fn spec(id: &'static str, topic: &'static str, statements: Vec<Statement>, anchor: &'static str) -> TheoremSpec {
    TheoremSpec { id, topic, statements, anchor, hypotheses: COMPACTUM, perfect_only: &[] }
}

/// The 24 level-transfer theorems.
pub fn theorem_table() -> Vec<TheoremSpec> {
    use Level::{Base, Product, Suspension};
    use Property as P;
    let chain = |last: Statement| {
        vec![
            at(Base, P::WeaklyMixing),
            at(Product, P::WeaklyMixing),
            at(Suspension, P::WeaklyMixing),
            at(Product, P::TotallyTransitive),
            at(Suspension, P::TotallyTransitive),
            at(Product, P::Transitive),
            last,
        ]
    };
    let mut martelli_chain = chain(at(Suspension, P::Transitive));
    martelli_chain.push(at(Product, P::Martelli));
    let mut times = global(P::TransitiveTimesPoint);
    times.extend(global(P::TransitiveTimesRot2));
    vec![
        spec("T1", "sensitivity", global(P::Sensitive), "3=>2, 2=>1"),
        spec("T2", "cofinite sensitivity", global(P::CofinitelySensitive), "1<=>2, 3=>2"),
        spec("T3", "multi-sensitivity", global(P::MultiSensitive), "1<=>2, 3=>2"),
        TheoremSpec {
            perfect_only: &[(3, 2)],
            ..spec("T4", "Z-transitivity", global(P::ZTransitive), "2<=>3, 2=>1, 1!=>2")
        },
        spec(
            "T5",
            "Z-transitivity of the product versus weak mixing",
            vec![at(Product, P::ZTransitive), at(Base, P::WeaklyMixing)],
            "1<=>2",
        ),
        spec("T6", "quasi-periodic points", tower(Claim::Pointwise(PointKind::QuasiPeriodic)), "1=>2, 2=>3"),
        spec("T7", "accessibility", global(P::Accessible), "2=>1, 2=>3"),
        spec("T8", "indecomposability", global(P::Indecomposable), "2<=>3, 2=>1"),
        spec("T9", "multi-transitivity", global(P::MultiTransitive), "2<=>3, 2=>1"),
        spec("T10", "delta-transitivity", global(P::DeltaTransitive), "2=>1, 2=>3"),
        spec("T11", "delta-mixing", global(P::DeltaMixing), "2=>1, 2=>3"),
        spec(
            "T12",
            "weak mixing, total transitivity and transitivity",
            chain(at(Suspension, P::Transitive)),
            "1<=>2<=>3<=>4<=>5<=>6<=>7",
        ),
        spec("T13", "Martelli chaos", vec![at(Product, P::Martelli), at(Base, P::Martelli)], "1=>2"),
        TheoremSpec {
            hypotheses: Hypotheses { no_isolated_points: true, ..COMPACTUM },
            ..spec(
                "T14",
                "weak mixing and Martelli chaos without isolated points",
                martelli_chain,
                "1<=>2<=>3<=>4<=>5<=>6<=>7<=>8",
            )
        },
        TheoremSpec {
            perfect_only: &[(3, 2)],
            ..spec(
                "T15",
                "transitive points",
                tower(Claim::Pointwise(PointKind::TransitivePoint)),
                "2<=>3, 2=>1, 1!=>2",
            )
        },
        spec("T16", "full omega-limit sets", global(P::DenseOmega), "2<=>3, 2=>1"),
        spec("T17", "dense transitive points", global(P::DenseTransitivePoints), "2<=>3, 2=>1, 1!=>2"),
        spec("T18", "transitivity of products with a second map", times, "2<=>3, 2=>1, 1!=>2, 5<=>6, 5=>4, 4!=>5"),
        spec("T19", "F-systems", global(P::FSystem), "2<=>3, 2=>1"),
        spec("T20", "TT++", global(P::TtPlusPlus), "2<=>3, 2=>1, 1!=>2"),
        spec("T21", "Touhey systems", global(P::Touhey), "2<=>3, 2=>1, 1!=>2"),
        spec("T22", "two-sided transitivity", global(P::TwoSided), "2<=>3, 2=>1"),
        spec("T23", "full exactness", global(P::FullyExact), "2<=>3, 2=>1"),
        spec("T24", "strong transitivity", global(P::StronglyTransitive), "2=>3, 3=>1, 1!=>2, 1!=>3"),
    ]
}

/// Parses `all`, or a comma list of `T<k>` / `<k>` / `a-b` ranges.
pub fn select_theorems(selector: &str) -> Result<Vec<TheoremSpec>, HarnessError> {
    let table = theorem_table();
    let selector = selector.trim();
    if selector.is_empty() || selector.eq_ignore_ascii_case("all") {
        return Ok(table);
    }
    let number = |s: &str| -> Result<usize, HarnessError> {
        let s = s.trim();
        let digits = s.strip_prefix(['T', 't']).unwrap_or(s);
        match digits.parse::<usize>() {
            Ok(k) if (1..=table.len()).contains(&k) => Ok(k),
            _ => Err(HarnessError::UnknownTheorem(s.to_string())),
        }
    };
    let mut wanted = Vec::new();
    for item in selector.split(',') {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (number(a)?, number(b)?);
                wanted.extend(a.min(b)..=a.max(b));
            }
            None => wanted.push(number(item)?),
        }
    }
    wanted.sort_unstable();
    wanted.dedup();
    Ok(wanted.into_iter().map(|k| table[k - 1].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_expand() {
        let arrows = parse_anchor("1<=>2<=>3, 3!=>1", 3).unwrap_err();
        assert!(matches!(arrows, HarnessError::Anchor(_)));
        let arrows = parse_anchor("2<=>3, 2=>1, 1!=>2", 3).unwrap();
        assert_eq!(arrows.len(), 4);
        assert_eq!(arrows[3], Arrow { premise: 1, conclusion: 2, kind: ArrowKind::NotImplies });
        assert!(parse_anchor("1=>4", 3).is_err());
        assert!(parse_anchor("1 2", 3).is_err());
    }

    #[test]
    fn selection() {
        assert_eq!(select_theorems("all").unwrap().len(), 24);
        let ids: Vec<_> = select_theorems("T5, 1-3,3").unwrap().iter().map(|t| t.id).collect();
        assert_eq!(ids, ["T1", "T2", "T3", "T5"]);
        assert!(select_theorems("T25").is_err());
    }
}
