//! Polygon annotation CSV: `instance_id, cx, cy, angle_0, r_0, ..., angle_{N-1}, r_{N-1}`.

use std::path::Path;

use omnigeom_core::polygon_repr::{Point, PolarPolygon};

use crate::error::{CliError, Result};
use crate::table::{fmt_num, Table};

pub fn annotation_table(polygons: &[(String, PolarPolygon)], vertices: usize) -> Result<Table> {
    let mut header = vec!["instance_id".to_string(), "cx".into(), "cy".into()];
    for i in 0..vertices {
        header.push(format!("angle_{i}"));
        header.push(format!("r_{i}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for (id, p) in polygons {
        if p.len() != vertices {
            return Err(CliError::input(format!(
                "instance {id} has {} vertices, expected {vertices}",
                p.len()
            )));
        }
        let mut row = vec![id.clone(), fmt_num(p.centroid().x), fmt_num(p.centroid().y)];
        for &(a, r) in p.vertices() {
            row.push(fmt_num(a));
            row.push(fmt_num(r));
        }
        t.push(row);
    }
    Ok(t)
}

pub fn read_annotations(path: &Path) -> Result<Vec<(String, PolarPolygon)>> {
    let bad = |msg: String| CliError::input(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        if rec.len() < 9 || (rec.len() - 3) % 2 != 0 {
            return Err(bad(format!(
                "line {line}: expected id, cx, cy and angle/radius pairs"
            )));
        }
        let nums: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("line {line}: {e}")))?;
        let vertices = nums[2..].chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let poly = PolarPolygon::new(Point::new(nums[0], nums[1]), vertices)
            .map_err(|e| bad(format!("line {line}: {e}")))?;
        out.push((rec[0].trim().to_string(), poly));
    }
    Ok(out)
}
