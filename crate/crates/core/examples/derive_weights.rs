//! Re-derive the order-`n` weight table from associativity and Monte-Carlo.
//!
//! `cargo run --release --example derive_weights -- [order] [samples] [seed]`

use deformq_core::weights::{default_test_structures, solve_weights_by_associativity, SolveOptions};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let order = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let samples = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4_000_000);
    let seed = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    let opts = SolveOptions { samples, seed, sigmas: 3.0, check_all: true };
    let solved = match solve_weights_by_associativity(order, &default_test_structures(), opts) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!(
        "# rank {} of {} unknowns, {} equations",
        solved.rank, solved.unknowns, solved.equations
    );
    for (g, e, r) in &solved.pinned {
        println!("# pinned {g} = {r} (mc {:.6} ± {:.6})", e.mean, e.standard_error);
    }
    for (g, w) in &solved.weights {
        let e = &solved.estimates[g];
        println!("{g} | {w}    # mc {:.6} ± {:.6}", e.mean, e.standard_error);
    }
    for g in &solved.outliers {
        println!("# outlier: {g}");
    }
}
