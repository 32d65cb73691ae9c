//! Haar and Daubechies scaling functions: integer values, moments and the
//! partition of unity.
//!
//! ```bash
//! cargo run --example basis_tables
//! ```

use wavedens::basis::Family;

pub fn run() -> wavedens::Result<()> {
    for family in [Family::Haar, Family::Db4, Family::Db6] {
        let phi = family.build(12)?;
        let (a, b) = phi.support();
        println!("{family}: support [{a}, {b}], filter {:?}", phi.filter());
        let ints: Vec<String> = (a..=b)
            .map(|k| format!("phi({k}) = {:.12}", phi.eval(k as f64)))
            .collect();
        println!("  {}", ints.join(", "));
        println!(
            "  integral {:.12}, <phi, phi> {:.8}, <phi, phi(. - 1)> {:.2e}",
            phi.integral(),
            phi.gram_entry(0),
            phi.gram_entry(1)
        );
        let x = 0.3;
        let pou: f64 = phi.shifts_covering(x).map(|k| phi.eval(x - k as f64)).sum();
        println!("  sum_k phi({x} - k) = {pou:.12}");
    }
    Ok(())
}

fn main() -> wavedens::Result<()> {
    run()
}
