use fracdiff::domain::SamplingGrid;
use fracdiff::signature::{
    p_variation_norm, pwl_signature_nodes, shuffle_residual, shuffles, tensor_multiply, PiecewiseLinearPath,
};
use proptest::prelude::*;

fn path_strategy() -> impl Strategy<Value = PiecewiseLinearPath> {
    (1usize..4, 2usize..7).prop_flat_map(|(dim, cells)| {
        prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), cells).prop_map(move |g| {
            let grid = SamplingGrid::with_count(0.25, g.len()).unwrap();
            PiecewiseLinearPath::new(grid, vec![0.0; dim], g).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn chen_at_every_interior_node(path in path_strategy()) {
        let n = path.grid().count();
        let whole = pwl_signature_nodes(&path, 3, 0, n).unwrap();
        for cut in 1..n {
            let left = pwl_signature_nodes(&path, 3, 0, cut).unwrap();
            let right = pwl_signature_nodes(&path, 3, cut, n).unwrap();
            let joined = tensor_multiply(&left, &right).unwrap();
            prop_assert!(joined.sub(&whole).unwrap().norm() <= 1e-12 * (1.0 + whole.norm()));
        }
    }

    #[test]
    fn level_one_is_the_increment(path in path_strategy()) {
        let n = path.grid().count();
        let sig = pwl_signature_nodes(&path, 2, 0, n).unwrap();
        let (a, b) = (path.node(0), path.node(n));
        for i in 0..path.dim() {
            prop_assert!((sig.get(&[i]).unwrap() - (b[i] - a[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn shuffle_identity(path in path_strategy(), u in 0usize..3, v in 0usize..3, w in 0usize..3) {
        let d = path.dim();
        let sig = pwl_signature_nodes(&path, 3, 0, path.grid().count()).unwrap();
        let (u, v, w) = (u % d, v % d, w % d);
        prop_assert!(shuffle_residual(&sig, &[u], &[v]).unwrap() < 1e-11);
        prop_assert!(shuffle_residual(&sig, &[u], &[v, w]).unwrap() < 1e-11);
    }

    #[test]
    fn p_variation_dominates_every_partition(x in prop::collection::vec(-5.0f64..5.0, 2..12), p in 1.0f64..4.0) {
        let v = p_variation_norm(&x, p).unwrap();
        let endpoints = (x[x.len() - 1] - x[0]).abs();
        let every_step: f64 = x.windows(2).map(|w| (w[1] - w[0]).abs().powf(p)).sum::<f64>().powf(1.0 / p);
        prop_assert!(v + 1e-12 >= endpoints);
        prop_assert!(v + 1e-12 >= every_step);
    }
}

#[test]
fn shuffle_counts_are_binomial() {
    assert_eq!(shuffles(&[0], &[1]).len(), 2);
    assert_eq!(shuffles(&[0, 1], &[2]).len(), 3);
    assert_eq!(shuffles(&[0, 1], &[2, 0]).len(), 6);
}
