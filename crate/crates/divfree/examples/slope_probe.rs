// Temporary probe: frame-49 slope at dt = 1e-4 across (amp, ΔT, seed).

use divfree::diagnostics::{enstrophy_spectrum, spectral_slope};
use divfree::grid::Grid;
use divfree::noise::sample_grf_scalar;
use divfree::solver::{velocity_from_vorticity, SolverConfig, VorticityStepper};
use divfree::spectral::{dealias_two_thirds, forward_fft2, inverse_fft2};

fn main() {
    let grid = Grid::new(64).unwrap();
    let dt = 1e-4;
    for (amp, record_every) in [(20.0, 2000), (20.0, 2500), (14.0, 2000)] {
        for seed in [3u64, 7, 42] {
            let mut config = SolverConfig::new(grid);
            config.dt = dt;
            config.record_every = record_every;
            config.init.seed = seed;
            let omega0 = sample_grf_scalar(&config.init, grid).scaled(amp);
            let mut omega_hat = dealias_two_thirds(&forward_fft2(&omega0));
            let stepper = VorticityStepper::new(&config).unwrap();
            let mut failed = false;
            for _ in 0..49 * record_every {
                match stepper.step(&omega_hat) {
                    Ok(next) => omega_hat = next,
                    Err(_) => {
                        failed = true;
                        break;
                    }
                }
            }
            if failed {
                println!("amp {amp} re {record_every} seed {seed}: UNSTABLE");
                continue;
            }
            let u = velocity_from_vorticity(&inverse_fft2(&omega_hat));
            let slope = spectral_slope(&enstrophy_spectrum(&u), 4, 16).unwrap();
            println!(
                "amp {amp} re {record_every} seed {seed}: max|u| = {:.3}, slope = {:.3}",
                u.max_abs(),
                slope
            );
        }
    }
}
