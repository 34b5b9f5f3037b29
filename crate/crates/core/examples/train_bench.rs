use bsmobo::surrogate::{train_scaled, TrainingConfig};
use bsmobo::RngStream;
use ndarray::{Array1, Array2};
use std::time::Instant;

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let (rows, n, epochs) = (args[0], args[1], args[2]);
    let mut rng = RngStream::new(1);
    let x = Array2::from_shape_fn((rows, n), |_| rng.uniform());
    let y = Array1::from_shape_fn(rows, |i| x[[i, 0]].sin());
    let cfg = TrainingConfig {
        epochs,
        ..TrainingConfig::default()
    };
    let t = Instant::now();
    train_scaled::<f32>(&x, &y, None, &cfg, None, &mut RngStream::new(2)).unwrap();
    let el = t.elapsed().as_secs_f64();
    println!("rows {rows} n {n}: {:.3} ms/epoch", 1e3 * el / epochs as f64);
}
