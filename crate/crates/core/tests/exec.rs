//! Sequential and parallel execution must agree bit for bit. Kept in its own
//! test binary because the execution mode is process-wide.

use std::sync::Arc;

use dlab_core::diagnostics::{energy, variance};
use dlab_core::exec::{execution, set_execution, Execution};
use dlab_core::integrator::{evolve, EvolutionSpec};
use dlab_core::lattice::{make_lattice, Field};
use dlab_core::operators::{riesz_convolve_oracle, NonlinearContext};
use dlab_core::regime::{int, ratio, ModelParams};

fn run_once(ctx: &Arc<NonlinearContext>) -> (Vec<u64>, Vec<u64>) {
    let lat = ctx.lattice();
    let u0 = Field::gaussian(lat, 1.0, 1.5, 0.1);
    let spec = EvolutionSpec::new(ctx.clone(), 0.0, 0.05, 5e-3).with_snapshot_interval(0.025);
    let tr = evolve(&spec, &u0).unwrap();
    let fin = tr.final_state();
    let bits = fin
        .values()
        .iter()
        .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
        .collect();
    let e = energy(fin, ctx).unwrap();
    let scalars = [e.kinetic, e.potential, variance(fin), tr.mass_drift()]
        .iter()
        .map(|x| x.to_bits())
        .collect();
    (bits, scalars)
}

#[test]
fn parallel_and_sequential_paths_are_bitwise_identical() {
    let lat = make_lattice(2, 16.0, 128, true).unwrap();
    let inlh = Arc::new(
        NonlinearContext::new(&ModelParams::inlh(2, int(1), ratio(1, 4), int(2)), &lat).unwrap(),
    );
    let inls =
        Arc::new(NonlinearContext::new(&ModelParams::inls(2, ratio(1, 4), int(2)), &lat).unwrap());
    let small = make_lattice(2, 8.0, 16, true).unwrap();
    let g = Field::gaussian(&small, 1.0, 1.0, 0.0);

    let mut results = Vec::new();
    for mode in [Execution::Sequential, Execution::Parallel] {
        set_execution(mode);
        let oracle = riesz_convolve_oracle(&g, 1.0).unwrap();
        let oracle_bits: Vec<u64> = oracle.values().iter().map(|z| z.re.to_bits()).collect();
        results.push((run_once(&inlh), run_once(&inls), oracle_bits, execution()));
    }
    set_execution(Execution::Parallel);
    let (seq, par) = (&results[0], &results[1]);
    assert_eq!(seq.3, Execution::Sequential);
    assert_eq!(seq.0, par.0);
    assert_eq!(seq.1, par.1);
    assert_eq!(seq.2, par.2);
}
