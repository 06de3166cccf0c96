//! Prints the default linear schedule and the signal-to-noise ratio at the
//! points where generation and refinement start denoising.

use meshpaint::diffusion::{start_step, NoiseSchedule};

fn main() {
    let s = NoiseSchedule::default();
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "beta", "alphabar", "snr");
    for t in [1, 10, 100, 250, 500, 750, 1000] {
        let ab = s.alphabar(t);
        println!("{t:>6} {:>12.6} {:>12.6e} {:>12.4e}", s.beta(t), ab, ab / (1.0 - ab));
    }
    for (name, gamma) in [("generation", 0.5), ("refinement", 0.3)] {
        let t = start_step(gamma, s.steps());
        println!("{name}: strength {gamma} starts Update pixels at t = {t}, alphabar {:.4}", s.alphabar(t));
    }
}
