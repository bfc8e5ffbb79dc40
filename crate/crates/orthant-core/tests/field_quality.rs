//! Statistical quality of the counter-based field and window realization.

use orthant_core::stats::ks_statistic_uniform;
use orthant_core::{realize_two_valued, Region, TwoValuedModel, UniformField};

#[test]
fn ks_statistic_below_one_percent_critical_value() {
    // 10^6 field values over a 1000 x 1000 region vs U[0,1).
    let field = UniformField::new(20_240_817);
    let mut values = Vec::with_capacity(1_000_000);
    for y in 0..1000 {
        for x in 0..1000 {
            values.push(field.value_at(x, y));
        }
    }
    let d = ks_statistic_uniform(&mut values);
    let critical = 1.63 / (values.len() as f64).sqrt(); // alpha = 0.01
    assert!(d < critical, "KS = {d:.6}, critical = {critical:.6}");
}

#[test]
fn ks_statistic_other_seeds() {
    for seed in [1u64, 2, 3] {
        let field = UniformField::new(seed);
        let mut values = Vec::with_capacity(250_000);
        for y in 0..500 {
            for x in 0..500 {
                values.push(field.value_at(x, y));
            }
        }
        let d = ks_statistic_uniform(&mut values);
        let critical = 1.63 / (values.len() as f64).sqrt();
        assert!(d < critical, "seed {seed}: KS = {d:.6}");
    }
}

#[test]
fn windows_are_bit_identical_across_realizations() {
    let region = Region::new(-50, 50, -50, 50);
    let model = TwoValuedModel::orthant(0.55).unwrap();
    let a = realize_two_valued(&UniformField::new(8), &model, region);
    let b = realize_two_valued(&UniformField::new(8), &model, region);
    assert_eq!(a.packed_cells(), b.packed_cells());
}

#[test]
fn empirical_mean_near_half() {
    let field = UniformField::new(5);
    let mut sum = 0.0;
    let n = 200_000;
    for i in 0..n {
        sum += field.value_at(i as i64 % 773, i as i64 / 773);
    }
    let mean = sum / n as f64;
    // SE of the mean of U[0,1) over n samples is (1/sqrt(12 n)).
    let se = (1.0 / 12.0 / n as f64).sqrt();
    assert!((mean - 0.5).abs() < 4.0 * se, "mean = {mean}");
}
