use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Distribution, DistributionKind, FullReport};
use crate::error::Result;

/// Two columns `x,count`; heights also get a `fraction` column.
pub fn write_csv<W: Write>(dist: &Distribution, mut out: W) -> Result<()> {
    let (x, with_fraction) = match dist.kind {
        DistributionKind::Height => ("height", true),
        DistributionKind::WccSize => ("wcc_size", false),
        DistributionKind::Ies => ("ies", false),
    };
    if with_fraction {
        writeln!(out, "{x},count,fraction")?;
    } else {
        writeln!(out, "{x},count")?;
    }
    for p in &dist.points {
        if with_fraction {
            writeln!(out, "{},{},{}", p.x, p.count, p.fraction)?;
        } else {
            writeln!(out, "{},{}", p.x, p.count)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes `report.json`, `height.csv`, `wcc.csv` and `ies.csv`.
pub fn write_report_dir(full: &FullReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut json = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut json, &full.report)?;
    writeln!(json)?;
    json.flush()?;
    for (name, dist) in [
        ("height.csv", &full.height),
        ("wcc.csv", &full.wcc),
        ("ies.csv", &full.ies),
    ] {
        write_csv(dist, BufWriter::new(File::create(dir.join(name))?))?;
    }
    Ok(())
}
