//! Run a named preset (or a TOML file) through the experiment runner and
//! print its table.
//!
//! Usage: `cargo run --release --example run_preset -- [name | path.toml]`

use ife::experiment::{load_config, preset, preset_names, run};

fn main() -> ife::Result<()> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "example3".into());
    let config = if arg.ends_with(".toml") {
        load_config(arg.as_ref())?
    } else {
        preset(&arg)?
    };
    eprintln!("presets: {}", preset_names().join(", "));
    let report = run(&config)?;
    print!("{}", report.table.to_csv());
    for (k, v) in &report.summary {
        println!("# {k} = {v:.4}");
    }
    Ok(())
}
