use rodlab::equilibria::{soliton_state, SolitonSpec};
use rodlab::flow::{constrained_step, FlowState};
use rodlab::{run_flow, FlowConfig, Grid, IsoConstraint, RodParams};

#[test]
fn probe() {
    let spec = SolitonSpec::new(1.0, 10.0, 1.5).unwrap();
    let grid = Grid::symmetric(10.0, 100).unwrap();
    let (start, bcs, force) = soliton_state(&grid, &spec).unwrap();
    let params = RodParams::new(1.0, 0.75, 10.0, force, 0.0).unwrap();
    let constraints: Vec<IsoConstraint> = bcs
        .iso_constraints
        .iter()
        .map(|axis| IsoConstraint::fixing(*axis, &start))
        .collect();
    let config = FlowConfig { dt: 2e-4, tol: 1e-14, max_steps: 7, ..FlowConfig::default() };
    let outcome = run_flow(start, &params, &bcs, &config, &constraints, None).unwrap();
    println!("reached step {} E {:.10}", outcome.state.step_index, outcome.state.energy());
    println!("multipliers {:?}", outcome.state.multipliers);

    let stuck: FlowState = outcome.state;
    for dt in [2e-4, 1e-4, 2e-5, 2e-6, 2e-7, 2e-8, 2e-9, 2e-10] {
        let cfg = FlowConfig { dt, tol: 1e-14, max_steps: 1, ..FlowConfig::default() };
        match constrained_step(&stuck, &params, &bcs, &cfg, &constraints) {
            Ok(next) => {
                let de = next.energy() - stuck.energy();
                println!("dt={dt:.1e}  dE={de:+.6e}  lambda={:?}  rho={:?}", next.multipliers, next.constraint_residuals);
            }
            Err(e) => println!("dt={dt:.1e}  ERR {e}"),
        }
    }
}
