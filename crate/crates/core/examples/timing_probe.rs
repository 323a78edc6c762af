// scratch probe used during development; not part of the library surface
use nlslab::fermi::{resonance_probe, window_scan, ProbeConfig};
use nlslab::{Hamiltonian, Potential, RadialGrid};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let grid = RadialGrid::new(800.0, 15999).unwrap();
    let ham = Hamiltonian::new(
        grid,
        &Potential::GaussianWell {
            depth: 41.0,
            width: 1.0,
        },
    )
    .unwrap();
    let probe = resonance_probe(&ham, &ProbeConfig::default()).unwrap();
    println!(
        "gamma={:.6e} resolvent={:.6e} density={:.6e} disagree={:.3e} beat={:.6} [{:.1}s]",
        probe.gamma,
        probe.resolvent_estimate,
        probe.density_estimate,
        probe.disagreement,
        probe.beat_energy,
        t0.elapsed().as_secs_f64()
    );
    let t1 = Instant::now();
    let scan = window_scan(&ham, &ProbeConfig::default()).unwrap();
    println!(
        "window min_ratio={:.4} ok={} [{:.1}s]",
        scan.min_ratio,
        scan.ok,
        t1.elapsed().as_secs_f64()
    );
}
