use std::fs;
use std::io;
use std::path::Path;

use cohlab::experiment::{ExperimentOutput, Table};

const MAX_PRINTED: usize = 12;

pub fn write_all(dir: &Path, out: &ExperimentOutput) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("result.json"), out.result.to_json() + "\n")?;
    if let Some(table) = &out.sweep {
        write_table(&dir.join("sweep.csv"), table)?;
    }
    let mut w = csv::Writer::from_path(dir.join("plotdata.csv"))?;
    w.write_record(["x", "y", "err"])?;
    for p in &out.plot {
        w.write_record([p.x.to_string(), p.y.to_string(), p.err.to_string()])?;
    }
    w.flush()
}

fn write_table(path: &Path, table: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}

pub fn print_summary(out: &ExperimentOutput, dir: &Path) {
    let r = &out.result;
    println!("{} (seed {})", r.experiment, r.seed);
    println!("  claim: {}", r.claim);
    for e in r.estimates.iter().take(MAX_PRINTED) {
        match (&e.exact, e.ci_lo, e.ci_hi) {
            (Some(x), _, _) if x.pi_power == 0 => println!("  {} = {}", e.name, x.rational),
            (_, Some(lo), Some(hi)) => println!("  {} = {:.6} [{:.6}, {:.6}]", e.name, e.value, lo, hi),
            _ => println!("  {} = {:.6e}", e.name, e.value),
        }
    }
    if r.estimates.len() > MAX_PRINTED {
        println!(
            "  ... {} more estimates in result.json",
            r.estimates.len() - MAX_PRINTED
        );
    }
    for b in r.bounds.iter().take(MAX_PRINTED) {
        match &b.exact {
            Some(x) if x.pi_power == 0 => println!("  bound {} = {} = {:.6}", b.name, x.rational, b.value),
            Some(x) => println!("  bound {} = {}·π^{} = {:.6}", b.name, x.rational, x.pi_power, b.value),
            None => println!("  bound {} = {:.6}", b.name, b.value),
        }
    }
    for c in &r.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        match (c.residual, c.tolerance) {
            (Some(res), Some(tol)) => println!("  [{mark}] {} (residual {res:.3e}, tol {tol:.1e})", c.name),
            _ => println!("  [{mark}] {} ({})", c.name, c.detail),
        }
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
    println!("  verdict: {:?}", r.verdict);
    println!("  wrote {}", dir.display());
}
