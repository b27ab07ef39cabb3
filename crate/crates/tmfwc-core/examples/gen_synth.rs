//! Generate the deterministic synthetic spoken-digit corpus.
//!
//! Usage: cargo run -p tmfwc-core --example gen_synth -- <out_dir> [speakers digits takes]

use tmfwc_core::eval::synthetic::{generate_synthetic_dataset, SyntheticSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let out = args.get(1).map(String::as_str).unwrap_or("synth-dataset");
    let parse = |i: usize, default: usize| -> usize {
        args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default)
    };
    let spec = SyntheticSpec {
        speakers: parse(2, 10),
        digits: parse(3, 10),
        takes: parse(4, 10),
        ..SyntheticSpec::default()
    };
    match generate_synthetic_dataset(std::path::Path::new(out), &spec) {
        Ok(utterances) => println!(
            "wrote {} utterances ({} speakers x {} digits x {} takes) to {out}",
            utterances.len(),
            spec.speakers,
            spec.digits,
            spec.takes
        ),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
