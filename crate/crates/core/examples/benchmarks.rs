//! Runs the eight built-in problems and prints a summary table.

use arcsearch::{default_start, solve, Config, BENCHMARKS};

fn main() {
    println!("{:<5} {:>10} {:>12} {:>6} {:>6} {:>10}  x", "name", "status", "obj", "iters", "ref", "kkt");
    for b in &BENCHMARKS {
        let program = b.program::<f64>();
        let start = default_start(&program, Some(&b.start::<f64>()));
        match solve(&program, &Config::default(), start) {
            Ok(r) => println!(
                "{:<5} {:>10} {:>12.6} {:>6} {:>6} {:>10.2e}  {:?}",
                b.name,
                r.status.to_string(),
                r.objective,
                r.iterations,
                b.reported_iterations,
                r.kkt_norm,
                r.x
            ),
            Err(e) => println!("{:<5} error: {e}", b.name),
        }
    }
}
