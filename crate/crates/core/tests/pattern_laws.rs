use std::collections::BTreeSet;

use attentopo::pattern::{graph_distance, pattern_edges, weighted_distance, PatternKind};
use attentopo::{SampleMeta, SquareMatrix};
use proptest::prelude::*;

fn cells(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    proptest::collection::btree_set((0..n, 0..n), 0..=n * n).prop_map(|s| s.into_iter().collect())
}

/// Symmetric-difference distance straight from set operations.
fn set_distance(a: &[(usize, usize)], b: &[(usize, usize)]) -> f64 {
    let a: BTreeSet<_> = a.iter().collect();
    let b: BTreeSet<_> = b.iter().collect();
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let diff = a.symmetric_difference(&b).count() as f64;
    (diff / (a.len() + b.len()) as f64).sqrt()
}

type Cells = Vec<(usize, usize)>;

fn pair() -> impl Strategy<Value = (usize, Cells, Cells)> {
    (1usize..8).prop_flat_map(|n| (Just(n), cells(n), cells(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn graph_distance_laws((n, a, b) in pair()) {
        let _ = n;
        prop_assert_eq!(graph_distance(&a, &a), 0.0);
        prop_assert_eq!(graph_distance(&a, &b), graph_distance(&b, &a));
        prop_assert!((graph_distance(&a, &b) - set_distance(&a, &b)).abs() <= 1e-15);
        let d = graph_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn disjoint_supports_are_at_distance_one((n, a, b) in pair()) {
        let only_b: Vec<_> = b.iter().copied().filter(|c| !a.contains(c)).collect();
        prop_assume!(!a.is_empty() || !only_b.is_empty());
        prop_assert_eq!(graph_distance(&a, &only_b), 1.0);

        let ma = SquareMatrix::incidence(n, &a);
        let mb = SquareMatrix::incidence(n, &only_b);
        prop_assert!((weighted_distance(ma.view(), mb.view()).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn weighted_distance_reduces_to_graph_distance_on_incidence_matrices((n, a, b) in pair()) {
        prop_assume!(!a.is_empty() || !b.is_empty());
        let ma = SquareMatrix::incidence(n, &a);
        let mb = SquareMatrix::incidence(n, &b);
        let w = weighted_distance(ma.view(), mb.view()).unwrap();
        prop_assert!((w - graph_distance(&a, &b)).abs() <= 1e-12);
        prop_assert_eq!(w, weighted_distance(mb.view(), ma.view()).unwrap());
    }

    #[test]
    fn weighted_distance_laws(
        n in 1usize..8,
        values in proptest::collection::vec(0.0f64..1.0, 128),
    ) {
        let a = SquareMatrix::from_vec(n, values[..n * n].to_vec());
        let b = SquareMatrix::from_vec(n, values[64..64 + n * n].to_vec());
        prop_assume!(a.view().as_slice().iter().any(|&x| x > 0.0));
        prop_assert_eq!(weighted_distance(a.view(), a.view()).unwrap(), 0.0);
        let d = weighted_distance(a.view(), b.view()).unwrap();
        prop_assert_eq!(d, weighted_distance(b.view(), a.view()).unwrap());
        prop_assert!((0.0..=1.0 + 1e-15).contains(&d));
    }

    #[test]
    fn pattern_edge_counts(n in 2usize..40, cls in 0usize..40, k in 1usize..4) {
        let cls = cls % n;
        let mut meta = SampleMeta::plain("s", n);
        meta.cls_index = cls;
        meta.sep_indices = (0..k).map(|i| (cls + 1 + i) % n).collect::<BTreeSet<_>>().into_iter().collect();
        let count = |kind| pattern_edges(kind, &meta).unwrap().cells.len();
        prop_assert_eq!(count(PatternKind::PrevToken), n - 1);
        prop_assert_eq!(count(PatternKind::NextToken), n - 1);
        prop_assert_eq!(count(PatternKind::ToCls), n - 1);
        let seps = meta.sep_indices.len();
        prop_assert_eq!(count(PatternKind::ToSep), seps * (n - 1));
        prop_assert!(pattern_edges(PatternKind::ToPunct, &meta).is_err());
    }
}

#[test]
fn both_zero_matrices_are_degenerate() {
    let z = SquareMatrix::zeros(3);
    assert!(weighted_distance(z.view(), z.view()).is_err());
}
