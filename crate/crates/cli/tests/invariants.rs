//! One test per module invariant; the same properties back acceptance
//! criterion 9.

mod support;

#[test]
fn autodiff_determinism() {
    support::properties::autodiff_determinism().unwrap();
}

#[test]
fn jet_value_matches_forward() {
    support::properties::jet_value_matches_forward().unwrap();
}

#[test]
fn gradient_matches_fd() {
    support::properties::gradient_matches_fd().unwrap();
}

#[test]
fn output_layer_linearity() {
    support::properties::output_layer_linearity().unwrap();
}

#[test]
fn flatten_round_trip() {
    support::properties::flatten_round_trip().unwrap();
}

#[test]
fn objectives_non_negative() {
    support::properties::objectives_non_negative().unwrap();
}

#[test]
fn loss_oracle_equivalence() {
    support::properties::loss_oracle_equivalence().unwrap();
}

#[test]
fn sampling_determinism() {
    support::properties::sampling_determinism().unwrap();
}

#[test]
fn zero_network_closed_form() {
    support::properties::zero_network_closed_form().unwrap();
}

#[test]
fn adam_step_bound() {
    support::properties::adam_step_bound().unwrap();
}

#[test]
fn adam_determinism() {
    support::properties::adam_determinism().unwrap();
}

#[test]
fn adam_state_round_trip() {
    support::properties::adam_state_round_trip().unwrap();
}

#[test]
fn dominance_strict_partial_order() {
    support::properties::dominance_strict_partial_order().unwrap();
}

#[test]
fn rank_one_undominated() {
    support::properties::rank_one_undominated().unwrap();
}

#[test]
fn fronts_partition() {
    support::properties::fronts_partition().unwrap();
}

#[test]
fn tournament_respects_dominance() {
    support::properties::tournament_respects_dominance().unwrap();
}

#[test]
fn environmental_elitism() {
    support::properties::environmental_elitism().unwrap();
}

#[test]
fn scaling_invariance() {
    support::properties::scaling_invariance().unwrap();
}

#[test]
fn nsga_oracle_equivalence() {
    support::properties::nsga_oracle_equivalence().unwrap();
}

#[test]
fn trainer_elitism() {
    support::properties::trainer_elitism().unwrap();
}

#[test]
fn trainer_budget() {
    support::properties::trainer_budget().unwrap();
}

#[test]
fn trainer_population_size() {
    support::properties::trainer_population_size().unwrap();
}

#[test]
fn trainer_label_lineage() {
    support::properties::trainer_label_lineage().unwrap();
}

#[test]
fn trainer_parallel_determinism() {
    support::properties::trainer_parallel_determinism().unwrap();
}

#[test]
fn cli_output_determinism() {
    support::properties::cli_output_determinism().unwrap();
}

#[test]
fn cli_manifest_closure() {
    support::properties::cli_manifest_closure().unwrap();
}

#[test]
fn cli_generations_round_trip() {
    support::properties::cli_generations_round_trip().unwrap();
}
