mod common;

use common::*;

#[test]
fn reduction_is_idempotent() {
    reduction_idempotent().unwrap();
}

#[test]
fn symmetrized_sets_are_closed() {
    symmetrization_closed().unwrap();
}

#[test]
fn class2_coords_are_a_homomorphism() {
    class2_homomorphism().unwrap();
}

#[test]
fn lattice_membership_agrees_with_bounded_search() {
    lattice_matches_brute_force().unwrap();
}

#[test]
fn tietze_moves_keep_relators_trivial() {
    tietze_keystone().unwrap();
}

#[test]
fn dehn_accepts_products_of_conjugated_relators() {
    dehn_accepts_consequences().unwrap();
}
