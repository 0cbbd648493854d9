//! Text exporters: CSV rows at 17 significant digits, OBJ meshes at 9.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::frame::Point;

/// `{:.16e}` round-trips every finite `f64`.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_obj(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_csv<W: Write, const K: usize>(mut w: W, header: [&str; K], rows: &[[f64; K]]) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt_full(*v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Parse a CSV written by [`write_csv`] back into rows.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().ok_or("empty CSV")?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (n, l) in lines.enumerate() {
        let row = l
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("line {}: {e}", n + 2)))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != header.len() {
            return Err(format!("line {}: expected {} fields", n + 2, header.len()));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Grid mesh with `rows × cols` vertices in row-major order and quad faces.
pub fn write_obj<W: Write>(mut w: W, points: &[Point], rows: usize, cols: usize, comment: &str) -> io::Result<()> {
    assert_eq!(points.len(), rows * cols, "vertex count must match the grid");
    let mut out = String::new();
    for l in comment.lines() {
        let _ = writeln!(out, "# {l}");
    }
    for p in points {
        let _ = writeln!(out, "v {} {} {}", fmt_obj(p.x), fmt_obj(p.y), fmt_obj(p.z));
    }
    for i in 0..rows.saturating_sub(1) {
        for j in 0..cols.saturating_sub(1) {
            let a = i * cols + j + 1;
            let _ = writeln!(out, "f {} {} {} {}", a, a + 1, a + cols + 1, a + cols);
        }
    }
    w.write_all(out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_exactly() {
        let rows = [[0.1, -1e-300, std::f64::consts::PI], [f64::MAX, f64::MIN_POSITIVE, -0.0]];
        let mut buf = Vec::new();
        write_csv(&mut buf, ["a", "b", "c"], &rows).unwrap();
        let (h, back) = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(h, ["a", "b", "c"]);
        for (r, b) in rows.iter().zip(&back) {
            for (x, y) in r.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn obj_faces() {
        let pts: Vec<Point> = (0..6).map(|k| Point::new(k as f64, 0.0, 0.0)).collect();
        let mut buf = Vec::new();
        write_obj(&mut buf, &pts, 2, 3, "grid").unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 6);
        assert!(s.contains("f 1 2 5 4") && s.contains("f 2 3 6 5"));
        assert!(s.contains("v 1.00000000e0 "));
    }
}
