//! The two worked example games on the 15-agent network, plus a control game.

use std::sync::Arc;

use super::{Game, Objective, QuadraticObjective};
use crate::topology::example_topology;

/// Initial holdings shared by the example games: 25 × 4, 30 × 5, 20 × 6.
pub const CASE_HOLDINGS: [f64; 15] = [
    25.0, 25.0, 25.0, 25.0, 30.0, 30.0, 30.0, 30.0, 30.0, 20.0, 20.0, 20.0, 20.0, 20.0, 20.0,
];

pub const CASE_RESOURCES: [f64; 3] = [100.0, 150.0, 120.0];

const CASE1_TARGETS: [f64; 15] = [
    20.0, 30.0, 40.0, 50.0, 50.0, 40.0, 30.0, 20.0, 30.0, 20.0, 20.0, 20.0, 20.0, 20.0, 20.0,
];

/// Coupled partners of each agent, as one-based "ij" labels.
const CASE1_PARTNERS: [&[u8]; 15] = [
    &[31],
    &[21, 32],
    &[22, 33],
    &[23, 34],
    &[12, 32],
    &[13, 33],
    &[14, 34],
    &[35],
    &[36],
    &[11],
    &[12, 21],
    &[13, 22],
    &[14, 23],
    &[24],
    &[25],
];

const CASE2_TARGETS: [f64; 15] = [
    20.0, 30.0, 40.0, 50.0, 50.0, 40.0, 30.0, 20.0, 30.0, 20.0, 30.0, 40.0, 40.0, 30.0, 20.0,
];

const CASE2_PARTNERS: [&[u8]; 15] = [
    &[12, 21, 31, 32],
    &[11, 21, 31, 32],
    &[22, 23, 33, 34],
    &[24, 25, 35, 36],
    &[11, 12, 31, 32],
    &[13, 23, 33, 34],
    &[13, 22, 33, 34],
    &[14, 25, 35, 36],
    &[14, 24, 35, 36],
    &[11, 12, 21, 32],
    &[11, 12, 21, 31],
    &[13, 22, 23, 34],
    &[13, 22, 23, 33],
    &[14, 24, 25, 36],
    &[14, 24, 25, 35],
];

fn flat(label: u8) -> usize {
    const OFFSETS: [usize; 3] = [0, 4, 9];
    OFFSETS[usize::from(label / 10) - 1] + usize::from(label % 10) - 1
}

fn build(q: f64, targets: &[f64; 15], partners: &[&[u8]; 15], extra: &[(usize, usize, f64)]) -> Game {
    let objectives: Vec<Objective> = (0..15)
        .map(|a| {
            let mut coupling = vec![0.0; 15];
            for &p in partners[a] {
                coupling[flat(p)] = 1.0;
            }
            for &(owner, target, c) in extra {
                if owner == a {
                    coupling[target] += c;
                }
            }
            QuadraticObjective::new(a, q, targets[a], coupling).into()
        })
        .collect();
    Game::new(
        Arc::new(example_topology()),
        objectives,
        CASE_HOLDINGS.to_vec(),
        CASE_RESOURCES.to_vec(),
    )
    .expect("example game is valid")
}

/// First example: unit weights, partners only outside the own coalition.
pub fn case1() -> Game {
    build(1.0, &CASE1_TARGETS, &CASE1_PARTNERS, &[])
}

/// Second example: weight 5, partners inside and outside the own coalition.
pub fn case2() -> Game {
    build(5.0, &CASE2_TARGETS, &CASE2_PARTNERS, &[])
}

/// The first example with each member additionally coupled to the next teammate.
///
/// The own-partial fixed point of the estimation-free scheme differs from the
/// equilibrium here, which the coalition-gradient tracking scheme corrects.
pub fn intra_coupled_control() -> Game {
    let mut extra = Vec::new();
    for (lo, size) in [(0usize, 4usize), (4, 5), (9, 6)] {
        for j in 0..size {
            extra.push((lo + j, lo + (j + 1) % size, INTRA_COUPLING));
        }
    }
    build(1.0, &CASE1_TARGETS, &CASE1_PARTNERS, &extra)
}

const INTRA_COUPLING: f64 = 1.0;
