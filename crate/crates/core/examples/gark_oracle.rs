//! Expand an MRI-GARK method with a fast RK method and check the bi-colored tree conditions.
//! `cargo run --example gark_oracle -- [method] [euler|midpoint|kutta3|rk4|rule38] [order]`

use std::collections::BTreeMap;

use mri_gark::gark_expansion::{check_gark_order, colored_trees, expand, FastRK};
use mri_gark::tableaux::builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m = builtin(args.first().map_or("mri-erk33a", String::as_str))?;
    let fast = match args.get(1).map_or("rk4", String::as_str) {
        "euler" => FastRK::euler(),
        "midpoint" => FastRK::midpoint(),
        "kutta3" => FastRK::kutta3(),
        "rule38" => FastRK::rule38(),
        _ => FastRK::rk4(),
    };
    let p = args.get(2).map_or(Ok(m.order + 1), |v| v.parse())?;

    let tab = expand(&m, &fast)?;
    let reports = check_gark_order(&tab, p, 1e-12)?;
    let mut by_order: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (tree, r) in colored_trees(p)?.iter().zip(&reports) {
        let e = by_order.entry(tree.order()).or_default();
        e.0 += 1;
        e.1 += r.pass as usize;
    }
    println!("{} with {} fast stages ({}), trees through order {p}:", m.name, fast.stages(), fast.name);
    for (order, (n, ok)) in by_order {
        println!("  order {order}: {ok}/{n} pass");
    }
    for r in reports.iter().filter(|r| !r.pass).take(5) {
        println!("  fails {}: {:.6} vs {:.6}", r.id, r.lhs, r.rhs);
    }
    Ok(())
}
