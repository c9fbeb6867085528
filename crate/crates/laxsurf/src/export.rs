//! OBJ, CSV and JSON writers. Every float is printed as `{:.16e}`, so output
//! bytes depend only on the values and parse back to the same bits.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use laxsurf_core::grid::{Mask, SurfaceGrid};
use serde::ser::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

/// Seventeen significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Wavefront OBJ: one vertex `(F¹, F², F³)` per OK point, two triangles per
/// lattice cell, and only triangles whose three corners are OK.
pub fn to_obj(grid: &SurfaceGrid, header: &str) -> String {
    let (nx, ny) = (grid.config.nx, grid.config.ny);
    let mut out = String::new();
    for line in header.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let mut index = vec![0usize; grid.points.len()];
    let mut next = 1;
    for (slot, p) in index.iter_mut().zip(&grid.points) {
        if let (Mask::Ok, Some(v)) = (p.mask, p.value) {
            let _ = writeln!(out, "v {} {} {}", fmt17(v[0]), fmt17(v[1]), fmt17(v[2]));
            *slot = next;
            next += 1;
        }
    }
    let at = |i: usize, j: usize| index[i * ny + j];
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                if tri.iter().all(|v| *v != 0) {
                    let _ = writeln!(out, "f {} {} {}", tri[0], tri[1], tri[2]);
                }
            }
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map(fmt17).unwrap_or_default()
}

/// One row per lattice point, column-major; absent values are empty fields.
pub fn to_csv(grid: &SurfaceGrid) -> String {
    let mut out = String::from("x,y,F1,F2,F3,K,H,mask\n");
    for p in &grid.points {
        let v = p.value;
        let c = p.curvature;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt17(p.x),
            fmt17(p.y),
            opt(v.map(|v| v[0])),
            opt(v.map(|v| v[1])),
            opt(v.map(|v| v[2])),
            opt(c.map(|c| c.k)),
            opt(c.map(|c| c.h)),
            p.mask.name()
        );
    }
    out
}

/// Per-point fundamental forms and curvatures.
pub fn curvature_csv(grid: &SurfaceGrid) -> String {
    let mut out = String::from("x,y,E,F,G,e,f,g,normal_sign,K,H,mask\n");
    for p in &grid.points {
        let f = p.forms;
        let c = p.curvature;
        let fields = [
            f.map(|f| f.big_e),
            f.map(|f| f.big_f),
            f.map(|f| f.big_g),
            f.map(|f| f.e),
            f.map(|f| f.f),
            f.map(|f| f.g2),
            f.map(|f| f.normal_sign),
            c.map(|c| c.k),
            c.map(|c| c.h),
        ];
        let _ = write!(out, "{},{}", fmt17(p.x), fmt17(p.y));
        for v in fields {
            let _ = write!(out, ",{}", opt(v));
        }
        let _ = writeln!(out, ",{}", p.mask.name());
    }
    out
}

/// Pretty JSON layout with the fixed float format.
struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt17(v).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Indented JSON; non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes to `path`, or to standard output when it is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.to_owned(), source }),
        None => {
            use std::io::Write;
            io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use laxsurf_core::grid::{GridConfig, SurfacePoint};

    fn grid(nx: usize, ny: usize, masked: &[usize]) -> SurfaceGrid {
        let config = GridConfig { nx, ny, ..GridConfig::default() };
        let points = (0..nx * ny)
            .map(|n| SurfacePoint {
                x: (n / ny) as f64,
                y: (n % ny) as f64,
                value: Some([n as f64, 0.5, -1.0 / 3.0]),
                max_imag: 0.0,
                tangents: None,
                lin_indep_measure: 1.0,
                forms: None,
                curvature: None,
                mask: if masked.contains(&n) { Mask::Degenerate } else { Mask::Ok },
            })
            .collect();
        SurfaceGrid { config, offset: [0.0; 3], points }
    }

    fn count(s: &str, prefix: &str) -> usize {
        s.lines().filter(|l| l.starts_with(prefix)).count()
    }

    #[test]
    fn obj_of_a_single_cell() {
        let s = to_obj(&grid(2, 2, &[]), "test");
        assert_eq!(count(&s, "v "), 4);
        assert_eq!(count(&s, "f "), 2);
        assert!(s.starts_with("# test\n"));
    }

    #[test]
    fn obj_drops_faces_touching_masked_points() {
        // The centre of a 3×3 grid touches six of the eight triangles.
        let s = to_obj(&grid(3, 3, &[4]), "");
        assert_eq!(count(&s, "v "), 8);
        assert_eq!(count(&s, "f "), 2);
        // The split diagonal runs through (0, 0), so that corner touches two triangles.
        let s = to_obj(&grid(3, 3, &[0]), "");
        assert_eq!(count(&s, "f "), 6);
        for l in s.lines().filter(|l| l.starts_with("f ")) {
            assert!(l[2..].split(' ').all(|i| (1..=8).contains(&i.parse::<usize>().unwrap())));
        }
    }

    #[test]
    fn csv_layout() {
        let s = to_csv(&grid(2, 2, &[3]));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "x,y,F1,F2,F3,K,H,mask");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].ends_with(",degenerate"));
        assert_eq!(lines[1].split(',').count(), 8);
        assert_eq!(lines[1].split(',').nth(3).unwrap(), "5.0000000000000000e-1");
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let g = grid(3, 2, &[1]);
        let text = to_json(&g).unwrap();
        let back: SurfaceGrid = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        for (a, b) in g.points.iter().zip(&back.points) {
            assert_eq!(a.value.unwrap()[2].to_bits(), b.value.unwrap()[2].to_bits());
        }
        assert!(text.contains("-3.3333333333333331e-1"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let e = write_output(Some(Path::new("/nonexistent-dir/x.obj")), "").unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/x.obj"));
    }
}
