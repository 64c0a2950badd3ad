//! The acceptance checks at reduced sizes.

mod common;

use common::Scale;

fn assert_pass(out: common::Outcome) {
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn completeness_small() {
    assert_pass(common::completeness(Scale::Quick));
}

#[test]
fn classical_ghz_value() {
    assert_pass(common::classical_ghz_value());
}

#[test]
fn min_tradeoff_anchors() {
    assert_pass(common::min_tradeoff_anchors());
}

#[test]
fn teleportation_algebra_small() {
    assert_pass(common::teleportation_algebra(Scale::Quick));
}

#[test]
fn reduction_exactness_small() {
    assert_pass(common::reduction_exactness(Scale::Quick));
}

#[test]
fn lightcone_bounds_small() {
    assert_pass(common::lightcone_bounds(Scale::Quick));
}

#[test]
fn cor_algebra_small() {
    assert_pass(common::cor_algebra(Scale::Quick));
}

#[test]
fn repeated_soundness_small() {
    assert_pass(common::repeated_soundness(Scale::Quick));
}

#[test]
fn extractor_universality_small() {
    assert_pass(common::extractor_universality(Scale::Quick));
}
