//! Writing a history set to JSON and analysing it back from disk.

use consistent_histories::io::{read_history_set, write_history_set};
use consistent_histories::prelude::*;

fn main() -> Result<()> {
    let set = zeno_set(&ZenoParams::new(4, 0.2)?)?;
    let dir = std::env::temp_dir().join("chist-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("zeno4.json");
    write_history_set(&path, &set)?;
    let back = read_history_set(&path)?;
    let (a, b) = (decoherence_matrix(&set), decoherence_matrix(&back));
    let diff = (a.entries() - b.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("{} histories written to {}; round-trip difference {diff:.1e}", back.len(), path.display());
    Ok(())
}
