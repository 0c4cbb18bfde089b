//! Fuzz the translator and print the outcome histogram.
//!
//! Usage: `cargo run --example fuzz_histogram -- [seed] [count]`

fn main() -> xview::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let count = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);
    print!("{}", xview::gen::fuzz(seed, count)?);
    Ok(())
}
