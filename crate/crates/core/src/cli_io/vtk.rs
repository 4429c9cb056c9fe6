//! Legacy VTK structured-points output for visualisation tools.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::snapshot::FieldData;
use crate::tensor_field::GridShape;

/// ASCII legacy VTK; every tensor component becomes its own `SCALARS` array
/// named `<field>_<ij>`. Grid axis 0 maps to VTK x.
pub fn write_vtk(path: &Path, title: &str, shape: &GridShape, fields: &[(&str, FieldData<'_>)]) -> io::Result<()> {
    let d = shape.dim();
    let mut dims = [1usize; 3];
    let mut spacing = [1.0f64; 3];
    for a in 0..d {
        dims[a] = shape.points()[a];
        spacing[a] = shape.lengths()[a] / shape.points()[a] as f64;
    }
    // VTK wants x fastest; the grid stores its last axis fastest
    let order: Vec<usize> = (0..dims[2])
        .flat_map(|z| (0..dims[1]).flat_map(move |y| (0..dims[0]).map(move |x| [x, y, z])))
        .map(|idx| shape.node_index(&idx[..d]))
        .collect();

    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
    let _ = writeln!(s, "ORIGIN 0 0 0\nSPACING {} {} {}", spacing[0], spacing[1], spacing[2]);
    let _ = writeln!(s, "POINT_DATA {}", shape.nodes());
    let mut scalars = |name: String, values: &[f64]| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for &n in &order {
            let _ = writeln!(s, "{:e}", values[n]);
        }
    };
    for (name, data) in fields {
        match data {
            FieldData::Scalar(v) => scalars(name.to_string(), v),
            FieldData::Tensor(t) => {
                for i in 0..d {
                    for j in 0..d {
                        scalars(format!("{name}_{i}{j}"), t.component(i, j));
                    }
                }
            }
        }
    }
    std::fs::write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_field::{Tensor2, Tensor2Field};

    #[test]
    fn layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.vtk");
        let shape = GridShape::new(&[3, 2], &[3.0, 1.0]).unwrap();
        let eq: Vec<f64> = (0..6).map(|n| n as f64).collect();
        let f = Tensor2Field::broadcast(&shape, &Tensor2::identity(2));
        write_vtk(&path, "t", &shape, &[("eq", FieldData::Scalar(&eq)), ("F", FieldData::Tensor(&f))]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("DIMENSIONS 3 2 1"));
        assert!(text.contains("SPACING 1 0.5 1"));
        assert!(text.contains("SCALARS F_01 double 1"));
        let body: Vec<f64> = text
            .split("SCALARS eq double 1\nLOOKUP_TABLE default\n")
            .nth(1)
            .unwrap()
            .lines()
            .take(6)
            .map(|l| l.parse().unwrap())
            .collect();
        // x fastest: (0,0),(1,0),(2,0),(0,1),… → nodes 0,2,4,1,3,5
        assert_eq!(body, vec![0.0, 2.0, 4.0, 1.0, 3.0, 5.0]);
    }
}
