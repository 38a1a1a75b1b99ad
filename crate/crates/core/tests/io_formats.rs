use std::f64::consts::PI;

use domeheat::mesh::{export_triangle_mesh, generate_half_disc, import_triangle_mesh};
use domeheat::vtk::{parse_unstructured_grid, write_unstructured_grid};
use vtkio::model::{Attribute, CellType, DataSet, Piece, VertexNumbers};

#[test]
fn vtk_output_parses_with_vtkio() {
    let mesh = generate_half_disc(1.0, PI / 12.0, 1).unwrap();
    let temperature: Vec<f64> = mesh.vertices().iter().map(|p| 20.0 + 10.0 * p.y).collect();
    let text = write_unstructured_grid(&mesh, "dome state", &[("temperature", &temperature)]).unwrap();

    let vtk = vtkio::Vtk::parse_legacy_be(text.as_bytes()).expect("vtkio accepts the file");
    assert_eq!(vtk.title, "dome state");
    let DataSet::UnstructuredGrid { pieces, .. } = vtk.data else {
        panic!("expected an unstructured grid");
    };
    let Piece::Inline(piece) = &pieces[0] else {
        panic!("expected inline piece");
    };
    assert_eq!(piece.num_points(), mesh.n_vertices());
    let points: Vec<f64> = piece.points.clone().cast_into().unwrap();
    for (chunk, p) in points.chunks(3).zip(mesh.vertices()) {
        assert_eq!(chunk, &[p.x, p.y, 0.0]);
    }
    assert!(piece.cells.types.iter().all(|t| *t == CellType::Triangle));
    let VertexNumbers::Legacy { num_cells, vertices } = &piece.cells.cell_verts else {
        panic!("legacy cells expected");
    };
    assert_eq!(*num_cells as usize, mesh.n_triangles());
    for (cell, tri) in vertices.chunks(4).zip(mesh.triangles()) {
        assert_eq!(cell[0], 3);
        assert_eq!([cell[1] as usize, cell[2] as usize, cell[3] as usize], *tri);
    }
    let Attribute::DataArray(array) = &piece.data.point[0] else {
        panic!("scalar data array expected");
    };
    assert_eq!(array.name, "temperature");
    let values: Vec<f64> = array.data.clone().cast_into().unwrap();
    for (a, b) in values.iter().zip(&temperature) {
        // stored as `float`; the text itself carries full precision
        assert!((a - b).abs() <= 1e-5 * b.abs());
    }
}

#[test]
fn own_reader_agrees_with_vtkio() {
    let mesh = generate_half_disc(2.0, 0.4, 2).unwrap();
    let a: Vec<f64> = (0..mesh.n_vertices()).map(|i| (i as f64).sqrt()).collect();
    let b: Vec<f64> = (0..mesh.n_vertices()).map(|i| -(i as f64)).collect();
    let text = write_unstructured_grid(&mesh, "two fields", &[("a", &a), ("b", &b)]).unwrap();
    let ours = parse_unstructured_grid(&text).unwrap();
    assert_eq!(ours.point_scalars.len(), 2);
    assert_eq!(ours.point_scalars[0].1, a);
    assert_eq!(ours.point_scalars[1].1, b);
    let theirs = vtkio::Vtk::parse_legacy_be(text.as_bytes()).unwrap();
    let DataSet::UnstructuredGrid { pieces, .. } = theirs.data else { panic!() };
    let Piece::Inline(piece) = &pieces[0] else { panic!() };
    assert_eq!(piece.data.point.len(), 2);
    assert_eq!(piece.cells.num_cells(), ours.cells.len());
}

#[test]
fn triangle_files_round_trip_every_level() {
    for level in 0..3 {
        let mesh = generate_half_disc(1.0, PI / 12.0, level).unwrap();
        let files = export_triangle_mesh(&mesh);
        let back = import_triangle_mesh(&files.node, &files.ele, &files.boundary).unwrap();
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.boundary_edges(), mesh.boundary_edges());
        for (p, q) in back.vertices().iter().zip(mesh.vertices()) {
            assert!((p.x - q.x).abs() <= 1e-15 && (p.y - q.y).abs() <= 1e-15);
        }
    }
}
