use serde::Serialize;

use crate::dynsys::System;
use crate::hyperspace::{NSubset, SymmetricProduct};
use crate::metric::{check_metric_axioms, hausdorff, FiniteMetric};
use crate::suspension::{q, SuspensionSpace};

/// Largest suspension on which the quadratic and cubic checks run.
pub const SELFTEST_POINT_LIMIT: usize = 200;

/// Number of iterates compared by the semiconjugacy check.
pub const SEMICONJUGACY_STEPS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestCheck {
    pub check: &'static str,
    pub system: String,
    pub n: usize,
    pub passed: bool,
    pub detail: String,
}

/// Metric axioms on every level, `ρ` against its definition, `ρ ≤ H` and the
/// semiconjugacy `q ∘ F_n(f)^k = SF_n(f)^k ∘ q`, on each finite system whose
/// suspension has at most [`SELFTEST_POINT_LIMIT`] points.
pub fn metric_selftest(systems: &[System], ns: &[usize]) -> Vec<SelftestCheck> {
    let mut out = Vec::new();
    for system in systems {
        let Some(sys) = system.as_finite() else {
            continue;
        };
        for &n in ns {
            let mut push = |check, passed, detail: String| {
                out.push(SelftestCheck { check, system: system.name().to_string(), n, passed, detail })
            };
            let Ok(product) = SymmetricProduct::build_capped(sys, n, SELFTEST_POINT_LIMIT) else {
                push("size", true, format!("skipped: F_{n} exceeds {SELFTEST_POINT_LIMIT} points"));
                continue;
            };
            let product = std::sync::Arc::new(product);
            let susp = match SuspensionSpace::build(&product) {
                Ok(s) => s,
                Err(e) => {
                    push("suspension", false, e.to_string());
                    continue;
                }
            };
            for (name, report) in [
                ("axioms:base", check_metric_axioms(sys.space.as_ref())),
                ("axioms:product", check_metric_axioms(product.as_ref())),
                ("axioms:suspension", check_metric_axioms(&susp)),
            ] {
                push(name, report.pass(), format!("{} points, violation {:?}", report.points, report.violation));
            }

            let mut mismatch = None;
            'pairs: for i in 0..susp.len() {
                for j in 0..susp.len() {
                    let (a, b) = (susp.point(i), susp.point(j));
                    let (closed, direct) = (susp.rho(&a, &b), susp.rho_direct_oracle(&a, &b));
                    if closed != direct {
                        mismatch = Some(format!("{a} {b}: {closed:?} vs {direct:?}"));
                        break 'pairs;
                    }
                }
            }
            push("rho=oracle", mismatch.is_none(), mismatch.unwrap_or_else(|| format!("{} pairs", susp.len().pow(2))));

            let multi: Vec<usize> = (0..product.len()).filter(|&i| product.element(i).len() >= 2).collect();
            let space = sys.space.as_ref();
            let mut above = None;
            'dominated: for &i in &multi {
                for &j in &multi {
                    let (a, b) = (product.element(i), product.element(j));
                    let h = hausdorff(space, a, b).expect("nonempty");
                    let r = susp.dist(susp.quotient_index(i), susp.quotient_index(j));
                    if r > h {
                        above = Some(format!("{a:?} {b:?}: rho {r} > H {h}"));
                        break 'dominated;
                    }
                }
            }
            push("rho<=H", above.is_none(), above.unwrap_or_else(|| format!("{} pairs", multi.len().pow(2))));

            let mut broken = None;
            'elements: for i in 0..product.len() {
                let mut a = NSubset::new(product.element(i).clone(), n).expect("enumerated element");
                let mut chi = q(&a);
                for k in 1..=SEMICONJUGACY_STEPS {
                    a = product.induced_apply(&a);
                    chi = susp.induced_apply_sfn(&chi);
                    if q(&a) != chi {
                        broken = Some(format!("{:?} at k={k}", product.element(i)));
                        break 'elements;
                    }
                }
            }
            push(
                "semiconjugacy",
                broken.is_none(),
                broken.unwrap_or_else(|| format!("{} elements, k <= {SEMICONJUGACY_STEPS}", product.len())),
            );
        }
    }
    out
}
