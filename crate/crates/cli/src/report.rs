use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

fn collect(dir: &Path, found: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            collect(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == "result.json") {
            found.push(path);
        }
    }
    Ok(())
}

/// Prints one line per result file and writes `summary.csv`. The exit code
/// is the worst verdict found.
pub fn run(dirs: &[PathBuf], out: &Path) -> Result<i32, String> {
    let mut files = Vec::new();
    for d in dirs {
        collect(d, &mut files).map_err(|e| format!("reading {}: {e}", d.display()))?;
    }
    if files.is_empty() {
        return Err("no result.json found".into());
    }
    fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let mut w = csv::Writer::from_path(out.join("summary.csv")).map_err(|e| e.to_string())?;
    w.write_record([
        "path",
        "experiment",
        "seed",
        "verdict",
        "checks",
        "failed",
        "elapsed_ms",
    ])
    .map_err(|e| e.to_string())?;
    let mut worst = 0;
    for f in &files {
        let text = fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        let verdict = v["verdict"].as_str().unwrap_or("unknown").to_string();
        let checks = v["checks"].as_array().cloned().unwrap_or_default();
        let failed: Vec<&str> = checks
            .iter()
            .filter(|c| c["passed"] == Value::Bool(false))
            .filter_map(|c| c["name"].as_str())
            .collect();
        // severity order: pass, finding, then fail or unreadable
        worst = worst.max(match verdict.as_str() {
            "pass" => 0,
            "finding" => 1,
            _ => 2,
        });
        let experiment = v["experiment"].as_str().unwrap_or("?");
        let seed = v["seed"].to_string();
        let elapsed = v["timing"]["elapsed_ms"].to_string();
        println!("{verdict:<8} {experiment:<17} seed {seed:<6} {}", f.display());
        for name in &failed {
            println!("         failed: {name}");
        }
        w.write_record([
            f.display().to_string(),
            experiment.to_string(),
            seed,
            verdict,
            checks.len().to_string(),
            failed.len().to_string(),
            elapsed,
        ])
        .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())?;
    Ok([0, 2, 1][worst])
}
