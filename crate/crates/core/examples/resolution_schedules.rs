//! Levels chosen by the CRS and ER schedules, with the realized n h / ln n.
//!
//! ```bash
//! cargo run --example resolution_schedules
//! ```

use wavedens::experiments::{realized_ratio, schedule_level, ResolutionSchedule};

pub fn run() -> wavedens::Result<()> {
    let schedules = [
        ResolutionSchedule::Crs { gamma: 0.6 },
        ResolutionSchedule::Er { c: 0.5 },
        ResolutionSchedule::Er { c: 2.0 },
    ];
    for s in schedules {
        println!("{s:?}");
        for k in (10..=20).step_by(2) {
            let n = 1usize << k;
            let j = schedule_level(&s, n, 1);
            let (h, ratio) = realized_ratio(n, 1, j);
            println!("  n = 2^{k}: j = {j:>2}, h = {h:.3e}, n h / ln n = {ratio:.3}");
        }
    }
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run()
}
