use std::time::Instant;

use g2kit_core::regress::{backward_with_loss, forward, PccnnModel};
use g2kit_core::homodyne::accumulate_moments;
use g2kit_core::sim::{simulate_field, field_to_current, AqnModel};

fn main() {
    let mut model = PccnnModel::with_default_architecture(5000).unwrap();
    model.init_parameters(1);
    let window: Vec<f64> = (0..5000).map(|i| ((i as f64) * 0.1).sin()).collect();

    let t = Instant::now();
    let mut acc = 0.0;
    for _ in 0..200 {
        acc += forward(&model, &window).unwrap();
    }
    println!("forward: {:.3} ms/window (acc {acc})", t.elapsed().as_secs_f64() * 1000.0 / 200.0);

    let t = Instant::now();
    let mut acc = 0.0;
    for _ in 0..200 {
        let (l, g) = backward_with_loss(&model, &window, 1.5).unwrap();
        acc += l + g[0];
    }
    println!("fwd+bwd: {:.3} ms/window (acc {acc})", t.elapsed().as_secs_f64() * 1000.0 / 200.0);

    let m = AqnModel { coherent_photon: 1.0, thermal_photon: 1.0, bandwidth_frac: 0.4, superbunch_k: None, n_lo: 1.0, seed: 3 };
    let t = Instant::now();
    let field = simulate_field(&m, 1_000_000).unwrap();
    println!("field 1e6: {:.1} ms", t.elapsed().as_secs_f64() * 1000.0);
    let t = Instant::now();
    let rec = field_to_current(&field, 1.0, 4);
    println!("current 1e6: {:.1} ms", t.elapsed().as_secs_f64() * 1000.0);
    let t = Instant::now();
    let mom = accumulate_moments(&rec).unwrap();
    println!("accumulate 1e6: {:.1} ms (m2 {:.3})", t.elapsed().as_secs_f64() * 1000.0, mom.m2());
}
