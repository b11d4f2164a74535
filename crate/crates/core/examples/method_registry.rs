//! Registry census and exact order checks: `cargo run --example method_registry -- [method]`.

use mri_gark::order_conditions::{check_all, Arithmetic};
use mri_gark::tableaux::{builtin, builtin_names, to_json};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let only = std::env::args().nth(1);
    for name in builtin_names() {
        if only.as_deref().is_some_and(|o| o != *name) {
            continue;
        }
        let m = builtin(name)?;
        let reports = check_all(&m, m.order, 0.0, Arithmetic::Exact)?;
        let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
        println!(
            "{name:<16} {:<18} order {} (embedded {}), {} stages, {} coupling matrices: {} checks, failing {:?}",
            m.kind.as_str(),
            m.order,
            m.embedded_order,
            m.stages(),
            m.gammas.gamma.len(),
            reports.len(),
            failed
        );
    }
    if let Some(name) = only {
        println!("{}", to_json(&builtin(&name)?)?);
    }
    Ok(())
}
