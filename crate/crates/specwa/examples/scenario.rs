//! Run a builtin scenario in memory and render every plot it supports.
//!
//! cargo run --release --example scenario -- [builtin-name] [out-dir]

use std::path::PathBuf;

use specwa::scenario::{builtin, emit_plot, run_config, write_atomic, PlotKind, RunOptions};

fn main() -> specwa::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "ex2-clopen-union".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "specwa-out".into()));
    let cfg = builtin(&name).ok_or_else(|| specwa::Error::ConfigInvalid(format!("no builtin named {name}")))?;

    let file = run_config(cfg, &RunOptions::default())?;
    println!("config sha256 {}", file.provenance.config_sha256);
    write_atomic(&out.join(format!("{name}.report.json")), &file.to_json())?;
    for kind in PlotKind::ALL {
        match emit_plot(&file, kind) {
            Ok(p) => {
                write_atomic(&out.join(format!("{name}.{kind}.svg")), &p.svg)?;
                write_atomic(&out.join(format!("{name}.{kind}.csv")), &p.csv)?;
                println!("{kind}: {} data rows", p.csv.lines().count() - 1);
            }
            Err(e) => println!("{kind}: {e}"),
        }
    }
    Ok(())
}
