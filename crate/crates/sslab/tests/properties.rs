use proptest::prelude::*;
use sslab::config::suggest;
use sslab::output::{csv, Series};
use sslab_core::dressing_solver::EvaluationGrid;
use sslab_core::numerics::C64;

const KEYS: &[&str] = &[
    "experiment",
    "domain",
    "density",
    "sample",
    "solitons",
    "breathers",
    "grid",
    "output",
    "tolerances",
    "pde",
    "model",
    "gfun",
    "left_tail",
];

proptest! {
    #[test]
    fn csv_values_round_trip(
        xs in prop::collection::vec(-1e6f64..1e6, 1..6),
        ts in prop::collection::vec(-10f64..10.0, 1..4),
        seed in any::<u64>(),
    ) {
        let grid = EvaluationGrid::new(xs.clone(), ts.clone());
        let values: Vec<C64> = (0..grid.len())
            .map(|k| {
                let a = (seed.wrapping_mul(k as u64 + 1) % 1_000_003) as f64;
                C64::new(a.sqrt() * 1e-7, -a / 3.0)
            })
            .collect();
        let text = csv(&Series { grid, values: values.clone() });
        let rows: Vec<&str> = text.lines().skip(1).collect();
        prop_assert_eq!(rows.len(), xs.len() * ts.len());
        for (k, row) in rows.iter().enumerate() {
            let f: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
            prop_assert_eq!(f[0], xs[k % xs.len()]);
            prop_assert_eq!(f[1], ts[k / xs.len()]);
            prop_assert_eq!(f[2], values[k].re);
            prop_assert_eq!(f[3], values[k].im);
        }
    }

    #[test]
    fn adjacent_swap_suggests_original(idx in 0..KEYS.len(), pos in 0usize..16) {
        let key = KEYS[idx];
        let mut chars: Vec<char> = key.chars().collect();
        let i = pos % (chars.len() - 1);
        prop_assume!(chars[i] != chars[i + 1]);
        chars.swap(i, i + 1);
        let typo: String = chars.into_iter().collect();
        prop_assert_eq!(suggest(&typo, KEYS), Some(key));
    }
}
