#![allow(dead_code)]

use euler_semiflow::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random trajectory on dyadic node times `k / 2^p` with occasional entropy
/// and defect jumps; density and momentum are continuous across nodes.
pub fn random_trajectory(seed: u64) -> Trajectory<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gas = GasConstants::diatomic().with_entropy_floor(-10.0);
    let cells = rng.gen_range(4..=8);
    let grid = Grid::new(cells, 1.0).unwrap();
    let dt = 0.5f64.powi(rng.gen_range(1..=4));
    let steps = rng.gen_range(4..=16);
    let state = |rng: &mut ChaCha8Rng| {
        let rho: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.5..2.0)).collect();
        let momentum = (0..cells).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let entropy = rho.iter().map(|r| r * rng.gen_range(-0.5..0.5)).collect();
        FluidState { rho, momentum, entropy }
    };
    let snapshot = |t: f64, state: FluidState<f64>, budget: f64, rng: &mut ChaCha8Rng| {
        let e = state.total_energy(&grid, &gas).unwrap();
        let kin: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.0..0.1)).collect();
        let used = grid.integrate(&kin);
        let internal = vec![(budget - e - used) / grid.length; cells];
        Snapshot { t, state, defects: DefectState::from_kinetic_internal(kin, internal) }
    };
    // Budget large enough for any state drawn above plus the kinetic defect.
    let budget = 40.0;
    let s0 = state(&mut rng);
    let datum = InitialDatum::new(s0.clone(), budget, &grid, &gas).unwrap();
    let mut nodes = vec![Node::continuous(snapshot(0.0, s0, budget, &mut rng))];
    for k in 1..=steps {
        let t = k as f64 * dt;
        let right = snapshot(t, state(&mut rng), budget, &mut rng);
        let node = if rng.gen_bool(0.3) {
            let mut left_state = right.state.clone();
            for s in left_state.entropy.iter_mut() {
                *s -= rng.gen_range(0.0..0.2);
            }
            Node::jump(snapshot(t, left_state, budget, &mut rng), right)
        } else {
            Node::continuous(right)
        };
        nodes.push(node);
    }
    Trajectory::new(format!("random-{seed}"), grid, gas, dt, datum, nodes).unwrap()
}
