use std::sync::Arc;

use proptest::prelude::*;

use hyperdyn::hyperspace::NSubset;
use hyperdyn::metric::{check_metric_axioms, hausdorff};
use hyperdyn::suspension::{q, sfn_apply};
use hyperdyn::{
    build_system, Backend, Dist, DynSystem, FiniteMetric, MetricSpace, PointSet, SuspensionSpace, SymmetricProduct,
    SystemSpec,
};

/// Shortest-path metric from positive edge weights, so every draw is a metric.
#[allow(clippy::needless_range_loop)]
fn path_metric(m: usize, weights: &[i64]) -> MetricSpace {
    let mut d = vec![vec![0i64; m]; m];
    let mut w = weights.iter().cycle();
    for i in 0..m {
        for j in i + 1..m {
            let v = *w.next().unwrap();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    MetricSpace::from_fn(m, |i, j| Dist::new(d[i][j], 2))
}

fn system() -> impl Strategy<Value = Arc<DynSystem>> {
    (1usize..=5).prop_flat_map(|m| {
        (prop::collection::vec(1i64..=6, 10), prop::collection::vec(0..m, m)).prop_map(move |(weights, table)| {
            let spec = SystemSpec::Custom {
                name: "random".into(),
                backend: Backend::Finite,
                space: path_metric(m, &weights),
                table,
                resolution: None,
            };
            build_system(&spec).unwrap().as_finite().unwrap().clone()
        })
    })
}

fn levels(sys: &Arc<DynSystem>, n: usize) -> (Arc<SymmetricProduct>, SuspensionSpace) {
    let product = Arc::new(SymmetricProduct::build(sys, n).unwrap());
    let susp = SuspensionSpace::build(&product).unwrap();
    (product, susp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_and_suspension_are_metrics(sys in system(), n in 2usize..=3) {
        let (product, susp) = levels(&sys, n);
        prop_assert!(check_metric_axioms(product.as_ref()).pass());
        prop_assert!(check_metric_axioms(&susp).pass());
    }

    #[test]
    fn singletons_embed_isometrically(sys in system()) {
        let (product, _) = levels(&sys, 2);
        for x in 0..sys.len() {
            for y in 0..sys.len() {
                let (a, b) = (product.index_of(&PointSet::singleton(x)).unwrap(), product.index_of(&PointSet::singleton(y)).unwrap());
                prop_assert_eq!(product.dist(a, b), sys.space.dist(x, y));
            }
        }
    }

    #[test]
    fn rho_matches_definition_and_is_dominated(sys in system(), n in 2usize..=3) {
        let (product, susp) = levels(&sys, n);
        for i in 0..susp.len() {
            for j in 0..susp.len() {
                let (a, b) = (susp.point(i), susp.point(j));
                prop_assert_eq!(susp.rho(&a, &b).unwrap(), susp.rho_direct_oracle(&a, &b).unwrap());
            }
        }
        for i in 0..product.len() {
            for j in 0..product.len() {
                let (a, b) = (product.element(i), product.element(j));
                if a.len() < 2 || b.len() < 2 {
                    continue;
                }
                let r = susp.dist(susp.quotient_index(i), susp.quotient_index(j));
                prop_assert!(r <= hausdorff(sys.space.as_ref(), a, b).unwrap());
            }
        }
    }

    #[test]
    fn induced_maps_commute_with_quotient(sys in system(), n in 2usize..=3) {
        let (product, susp) = levels(&sys, n);
        for i in 0..product.len() {
            let a = NSubset::new(product.element(i).clone(), n).unwrap();
            let image: PointSet = a.members().iter().map(|x| sys.map.apply(x)).collect();
            let fa = product.induced_apply(&a);
            prop_assert_eq!(fa.members(), &image);
            prop_assert_eq!(q(&fa), sfn_apply(&sys, &q(&a)));
            prop_assert_eq!(q(&fa), susp.induced_apply_sfn(&q(&a)));
        }
    }

    #[test]
    fn hausdorff_is_a_metric_on_subsets(
        sys in system(),
        masks in prop::collection::vec(1u8..32, 3),
    ) {
        let m = sys.len();
        let sets: Vec<PointSet> = masks
            .iter()
            .map(|&mask| {
                let s: PointSet = (0..m).filter(|x| mask >> x & 1 == 1).collect();
                if s.is_empty() { PointSet::singleton(0) } else { s }
            })
            .collect();
        let h = |a: &PointSet, b: &PointSet| hausdorff(sys.space.as_ref(), a, b).unwrap();
        prop_assert!(h(&sets[0], &sets[0]).is_zero());
        prop_assert_eq!(h(&sets[0], &sets[1]), h(&sets[1], &sets[0]));
        prop_assert!(h(&sets[0], &sets[2]).ratio() <= h(&sets[0], &sets[1]).ratio() + h(&sets[1], &sets[2]).ratio());
    }

    #[test]
    fn dist_text_round_trips(num in 0i64..10_000, den in 1i64..10_000) {
        let d = Dist::new(num, den);
        prop_assert_eq!(d.to_string().parse::<Dist>().unwrap(), d);
        let json = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(serde_json::from_str::<Dist>(&json).unwrap(), d);
    }
}
