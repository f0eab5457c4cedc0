mod common;

use std::time::Instant;

use common::*;
use proptest::prelude::*;

use femcert::forcing::{Forcing, NormMode};
use femcert::grid::ParamGrid;
use femcert::radii::{self, ForcingNorms};

#[test]
fn two_mode_radii_report() {
    let t = Instant::now();
    let r = radii::trapping_radii(&two_mode_forcing(), NormMode::Triangle, &ParamGrid::default()).unwrap();
    println!("elapsed {:?}", t.elapsed());
    for (j, d) in r.details.iter().enumerate() {
        println!("R{} = {} via {} (ratio {:.4})", j + 1, d.radius, d.method, d.radius.hi() / TARGET_RADII[j]);
        for m in &d.methods {
            println!("   {:16} {:?} params {:?}", m.label, m.radius.map(|x| x.hi()), m.params);
        }
    }
    let _ = ForcingNorms::of(&two_mode_forcing(), NormMode::Triangle);
}

#[test]
fn two_mode_radii_pass_their_certificates() {
    check_certificates(&radii::trapping_radii(&two_mode_forcing(), NormMode::Triangle, &ParamGrid::default()).unwrap());
}

#[test]
fn single_mode_radii_pass_their_certificates() {
    check_certificates(&radii::trapping_radii(&single_mode_forcing(12.0), NormMode::Triangle, &ParamGrid::default()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn radii_grow_with_the_forcing(a in 1.0..20.0f64, scale in 1.05..3.0f64) {
        let grid = ParamGrid::coarse(16);
        let small = radii::trapping_radii(&single_mode_forcing(a), NormMode::Triangle, &grid).unwrap();
        let large = radii::trapping_radii(&single_mode_forcing(a * scale), NormMode::Triangle, &grid).unwrap();
        check_certificates(&large);
        for j in 0..5 {
            prop_assert!(large.r[j].hi() >= small.r[j].hi(), "R{}: {} < {}", j + 1, large.r[j], small.r[j]);
        }
    }
}

#[test]
fn zero_forcing_has_zero_radii() {
    let r = radii::trapping_radii(&Forcing::zero(), NormMode::Triangle, &ParamGrid::default()).unwrap();
    assert!(r.r.iter().all(|x| x.hi() == 0.0), "{:?}", r.r);
}
