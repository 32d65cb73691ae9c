use wavedens::grid::*;

#[test]
fn orthant_sums_invert_differences_2d() {
    let grid = BoxGrid::new(vec![0.0, -1.0], 0.5, vec![3, 2]).unwrap();
    let cells: Vec<f64> = (0..6).map(|i| i as f64 + 1.0).collect();
    let nodes = grid.upper_orthant_sums(&cells);
    // node (0,0) sees every cell
    assert_eq!(nodes[0], 21.0);
    // top face vanishes
    assert_eq!(nodes[grid.n_nodes() - 1], 0.0);
    assert_eq!(grid.cell_differences(&nodes), cells);
}

#[test]
fn cell_lookup_is_half_open() {
    let grid = BoxGrid::new(vec![0.0], 0.25, vec![4]).unwrap();
    assert_eq!(grid.cell_of(&[0.25]), Some(1));
    assert_eq!(grid.cell_of(&[0.9999]), Some(3));
    assert_eq!(grid.cell_of(&[1.0]), None);
    assert_eq!(grid.cell_of(&[-1e-12]), None);
}

#[test]
fn box_validation() {
    assert!(BoxRegion::new(vec![0.5], vec![0.25]).is_err());
    assert!(BoxRegion::new(vec![], vec![]).is_err());
    let outer = BoxRegion::cube(0.0, 1.0, 2).unwrap();
    let inner = BoxRegion::cube(0.25, 0.75, 2).unwrap();
    assert!(outer.strictly_contains(&inner));
    assert!(!inner.strictly_contains(&outer));
}
